from .analyze import run_analyze
from .gen_dataset import run_gen_dataset
from .history_match import run_ablation, run_history_match
from .interpolate import run_interpolate
from .metric import run_metric
from .reconstruct import reconstruction_report, run_reconstruct
from .simulate import run_simulate
from .train import run_train
