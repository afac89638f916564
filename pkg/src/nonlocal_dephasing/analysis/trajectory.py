import dataclasses
import logging
import os
import typing

import numpy as np
import pandas as pd

from .. import validators as v
from ..spectra import frozen_array
from ..utils.tables import read_numeric_table
from ..validators import ValidatorMixin

logger = logging.getLogger(__name__)

X_COLUMN = "x_lambda0"
D_COLUMN = "D"
SIGMA_COLUMN = "d_err"
# round-off allowed around the [0, 1] range of a noiseless trace distance
DISTANCE_SLACK = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class TraceDistanceTrajectory(ValidatorMixin):
    """
    Trace distance D sampled along the total effective path difference x (in units of lambda0),
    with optional standard errors.
    """
    x: np.ndarray = v.shape(None) >> v.min_length(1) >> v.finite() >> v.strictly_increasing()
    d: np.ndarray = v.shape(None) >> v.finite()
    sigma: typing.Optional[np.ndarray] = dataclasses.field(default=None) >> v.shape(None) >> v.all_min(0.0)

    def __post_init__(self):
        object.__setattr__(self, "x", frozen_array(self.x, float))
        object.__setattr__(self, "d", frozen_array(self.d, float))
        if self.sigma is not None:
            object.__setattr__(self, "sigma", frozen_array(self.sigma, float))
        super().__post_init__()

    def validate(self):
        for name in ("d", "sigma"):
            value = getattr(self, name)
            if value is not None and value.shape != self.x.shape:
                raise ValueError(f"Expect {len(self.x)} values of {name}, got {len(value)}")
        upper = 1.0 + DISTANCE_SLACK + (3.0 * self.sigma if self.sigma is not None else 0.0)
        outside = (self.d < -DISTANCE_SLACK) | (self.d > upper)
        if np.any(outside):
            index = int(np.argmax(outside))
            d, x = float(self.d[index]), float(self.x[index])
            raise ValueError(f"Expect trace distance in [0, 1], got {d!r} at x={x!r}")

    def __len__(self) -> int:
        return len(self.x)

    def select(self, mask: np.ndarray) -> "TraceDistanceTrajectory":
        return TraceDistanceTrajectory(
            self.x[mask], self.d[mask], self.sigma[mask] if self.sigma is not None else None
        )

    def scaled(self, amplitude: float) -> "TraceDistanceTrajectory":
        """Multiply D by the visibility `amplitude`, e.g. to mimic an imperfect initial state"""
        if not 0.0 < amplitude <= 1.0:
            raise ValueError(f"Expect amplitude in (0, 1], got {amplitude!r}")
        sigma = amplitude * self.sigma if self.sigma is not None else None
        return TraceDistanceTrajectory(self.x, amplitude * self.d, sigma)

    def to_frame(self) -> pd.DataFrame:
        columns = {X_COLUMN: self.x, D_COLUMN: self.d}
        if self.sigma is not None:
            columns[SIGMA_COLUMN] = self.sigma
        return pd.DataFrame(columns)

    def to_csv(self, path: str | os.PathLike):
        logger.info("Write trajectory with %s points to %s", len(self), path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", encoding="utf-8")

    @classmethod
    def from_csv(cls, path: str | os.PathLike) -> "TraceDistanceTrajectory":
        frame = read_numeric_table(path, (X_COLUMN, D_COLUMN), optional=(SIGMA_COLUMN, ))
        frame = frame.sort_values(X_COLUMN, kind="stable")
        sigma = frame[SIGMA_COLUMN].to_numpy() if SIGMA_COLUMN in frame.columns else None
        return cls(frame[X_COLUMN].to_numpy(), frame[D_COLUMN].to_numpy(), sigma)
