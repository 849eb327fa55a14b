from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from errors import ValidationError

from .wells import WellKind

columns = ["step", "day", "well", "oil_rate", "water_rate", "bhp"]


@dataclass(frozen=True, eq=False)
class RateSeries:
    """
    Per-well oil and water rates (m^3/day, positive for both production
    and injection) and bottom-hole pressure (bar) per report step

    Rate arrays are shaped (wells, steps).
    """

    wells: Tuple[str, ...]
    kinds: Tuple[WellKind, ...]
    days: np.ndarray
    oil_rate: np.ndarray
    water_rate: np.ndarray
    bhp: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.days.size

    def well(self, name: str) -> Dict[str, np.ndarray]:
        index = self.wells.index(name)

        return {
            "oil_rate": self.oil_rate[index],
            "water_rate": self.water_rate[index],
            "bhp": self.bhp[index],
        }

    def water_cut(self, name: str) -> np.ndarray:
        rates = self.well(name)
        liquid = rates["oil_rate"] + rates["water_rate"]

        return np.divide(
            rates["water_rate"], liquid, out=np.zeros_like(liquid), where=liquid > 0
        )

    def to_frame(self) -> pd.DataFrame:
        """
        Long table, wells alphabetical, steps ascending
        """
        rows = []
        for w in sorted(range(len(self.wells)), key=lambda n: self.wells[n]):
            for s in range(self.n_steps):
                rows.append(
                    (
                        s + 1,
                        float(self.days[s]),
                        self.wells[w],
                        float(self.oil_rate[w, s]),
                        float(self.water_rate[w, s]),
                        float(self.bhp[w, s]),
                    )
                )

        return pd.DataFrame(rows, columns=columns)

    @staticmethod
    def from_frame(df: pd.DataFrame, kinds: Dict[str, WellKind]) -> "RateSeries":
        missing = set(columns) - set(df.columns)
        if missing:
            raise ValidationError(f"rate table is missing columns {sorted(missing)}")

        wells = tuple(sorted(df["well"].unique()))
        pivot = {
            column: df.pivot(index="well", columns="step", values=column)
            .loc[list(wells)]
            .to_numpy(dtype=np.float64)
            for column in ("oil_rate", "water_rate", "bhp")
        }
        days = df.drop_duplicates("step").sort_values("step")["day"].to_numpy()

        return RateSeries(
            wells=wells,
            kinds=tuple(kinds[w] for w in wells),
            days=days,
            **pivot,
        )
