import os
from pathlib import Path

from .scenario import Scenario

# region fs

project_root = Path(os.path.abspath(__file__)).parent.parent.parent

configs_dir = project_root / "configs"
results_dir = project_root / "results"

dataset_file_name = "dataset.gwds"
checkpoint_file_name = "model.gwae"
manifest_file_name = "manifest.json"
log_file_name = "log.jsonl"

# endregion

# region scenarios

# (low, high) per channel parameter, sampled uniformly
channel_ranges = {
    Scenario.SINGLE: {
        "width": (300.0, 500.0),
        "thickness": (10.0, 20.0),
        "wavelength": (1000.0, 2000.0),
        "amplitude": (0.0, 300.0),
    },
    Scenario.DOUBLE: {
        "width": (300.0, 500.0),
        "thickness": (10.0, 20.0),
        "wavelength": (500.0, 1000.0),
        "amplitude": (500.0, 900.0),
    },
}

channel_counts = {Scenario.SINGLE: 1, Scenario.DOUBLE: 2}

# degrees clockwise from +y
channel_orientation = {Scenario.SINGLE: 90.0, Scenario.DOUBLE: 120.0}

# endregion

# region petrophysics

channel_porosity = (0.18, 0.30)
background_porosity = (0.02, 0.08)

# log10(k[mD]) = a + b * porosity + N(0, s^2)
channel_poro_perm = (1.0, 10.0, 0.15)
background_poro_perm = (-1.5, 8.0, 0.25)

porosity_bounds = (background_porosity[0], channel_porosity[1])
permeability_bounds = (0.01, 10_000.0)

# separates the two facies ranges when no facies labels are stored
facies_porosity_cut = 0.5 * (background_porosity[1] + channel_porosity[0])

generator_retries = 20

# endregion

# region flow

owc_depth = 2460.0

report_steps = 60
horizon_days = 3000.0

# Leverett J scale, Pa * sqrt(mD)
pc_ref = 1e5

well_radius = 0.1

# transport sub-steps allowed per report step
max_substeps = 20_000

# endregion

# region history matching

failure_penalty = 1e6
realism_percentile = 90.0

observed_wells = ("P2", "I2", "I5")

# endregion
