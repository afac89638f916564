"""
Plate schedules: how the total effective path difference x is distributed between the two arms.

Plates are first added to arm 1 only. Once arm 1 reaches the offset both arms grow at the same rate,
and when arm 1 is full (199 lambda0) only arm 2 grows until both arms hold 199 lambda0.
"""
import dataclasses
import logging
import math
import typing

import numpy as np

from . import validators as v
from .analysis.distance import concurrences, trace_distances
from .analysis.trajectory import TraceDistanceTrajectory
from .channel import PureTwoQubitState, dephase_many, partial_trace
from .spectra import Characteristic, GaussianJointSpectrum, decoherence_arrays
from .validators import ValidatorMixin

logger = logging.getLogger(__name__)

ARM_MAX = 199.0
TOTAL_MAX = 2 * ARM_MAX
STANDARD_OFFSETS = (0.0, 75.0, 100.0, 150.0, 199.0)
DEFAULT_STEP = 1.0


@dataclasses.dataclass(frozen=True)
class PlateSchedule(ValidatorMixin):
    """
    `offset` is the arm-1 path difference (in lambda0) at which plates start to go into arm 2.
    Offset 199 is the consecutive layout, offset 0 grows both arms together.
    """
    offset: float = ARM_MAX >> v.range(0.0, ARM_MAX)

    arm_max: typing.ClassVar[float] = ARM_MAX
    total_max: typing.ClassVar[float] = TOTAL_MAX

    def times_at(self, x: float) -> tuple[float, float]:
        """
        Per-arm path differences (x1, x2) with x1 + x2 = x.
        """
        if not 0.0 <= x <= TOTAL_MAX:
            raise ValueError(f"Expect x in [0, {TOTAL_MAX}], got {x!r}")
        o = self.offset
        if x <= o:
            return float(x), 0.0
        if x <= TOTAL_MAX - o:
            return o + (x - o) / 2, (x - o) / 2
        return ARM_MAX, x - ARM_MAX

    def times_many(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized `times_at`"""
        x = np.asarray(x, dtype=float)
        if np.any((x < 0.0) | (x > TOTAL_MAX)):
            raise ValueError(f"Expect x in [0, {TOTAL_MAX}]")
        o = self.offset
        half = (x - o) / 2
        x1 = np.where(x <= o, x, np.where(x <= TOTAL_MAX - o, o + half, ARM_MAX))
        x2 = np.where(x <= o, 0.0, np.where(x <= TOTAL_MAX - o, half, x - ARM_MAX))
        return x1, x2


def sample_points(step: float = DEFAULT_STEP) -> np.ndarray:
    """
    x = 0, step, 2 step, ... up to the full plate stack; 398 is always the last point.
    """
    if not step > 0.0:
        raise ValueError(f"Expect positive step, got {step!r}")
    count = math.floor(TOTAL_MAX / step + 1e-9)
    points = step * np.arange(count + 1, dtype=float)
    if TOTAL_MAX - points[-1] > 1e-9 * step:
        points = np.append(points, TOTAL_MAX)
    else:
        points[-1] = TOTAL_MAX
    return points


def spectrum_from_u(u: float, k: float, m1: float = 0.0, m2: float = 0.0) -> GaussianJointSpectrum:
    """Gaussian spectrum with the decay given in units of one full arm, u = B * 199^2"""
    if u < 0.0:
        raise ValueError(f"Expect u >= 0, got {u!r}")
    return GaussianJointSpectrum(b=u / ARM_MAX ** 2, k=k, m1=m1, m2=m2)


def _evolve_along(model: Characteristic, schedule: PlateSchedule, step: float,
                  states: typing.Sequence[PureTwoQubitState]) -> tuple[np.ndarray, list[np.ndarray]]:
    x = sample_points(step)
    x1, x2 = schedule.times_many(x)
    values = decoherence_arrays(model, x1, x2)
    return x, [dephase_many(psi, **values) for psi in states]


def trajectory(
        model: Characteristic,
        schedule: PlateSchedule,
        step: float = DEFAULT_STEP,
        pair: tuple[PureTwoQubitState, PureTwoQubitState] | None = None,
        arm: int | None = None,
) -> TraceDistanceTrajectory:
    """
    Trace distance between two evolved initial states along a plate schedule.

    :param model: characteristic function, a `GaussianJointSpectrum` or an `AmplitudeGrid`
    :param schedule: plate schedule
    :param step: sampling step in lambda0
    :param pair: initial states, default is the Bell pair psi+, psi-
    :param arm: compare the reduced states of photon 1 or 2 instead of the two-photon states
    """
    pair = pair if pair is not None else (PureTwoQubitState.psi_plus(), PureTwoQubitState.psi_minus())
    logger.info("Trajectory with offset %s and step %s", schedule.offset, step)
    x, (rho_a, rho_b) = _evolve_along(model, schedule, step, pair)
    if arm is not None:
        rho_a = partial_trace(rho_a, arm)
        rho_b = partial_trace(rho_b, arm)
    return TraceDistanceTrajectory(x, trace_distances(rho_a, rho_b))


def entanglement_trajectory(
        model: Characteristic,
        schedule: PlateSchedule,
        step: float = DEFAULT_STEP,
        psi: PureTwoQubitState | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Concurrence of an evolved initial state (default psi+) along a plate schedule.

    :return: sample points and concurrences
    """
    psi = psi if psi is not None else PureTwoQubitState.psi_plus()
    x, (rho, ) = _evolve_along(model, schedule, step, (psi, ))
    return x, concurrences(rho)
