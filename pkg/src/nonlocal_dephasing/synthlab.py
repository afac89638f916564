"""
Synthetic coincidence counting: Poisson counts in product measurement bases and the
trace distance estimator with its counting error.

Outcomes of a basis are ordered ++, +-, -+, -- (photon 1 first), where + is H, +45 or R and - is V, -45 or L.
"""
import dataclasses
import logging
import math
import typing

import numpy as np

from . import validators as v
from .analysis.nonmarkovianity import calibrate_decay, peak_decay, predict_n_consecutive
from .analysis.trajectory import TraceDistanceTrajectory
from .channel import DensityMatrix4, PureTwoQubitState, dephase_many
from .schedule import PlateSchedule, spectrum_from_u
from .spectra import (
    AmplitudeGrid, Characteristic, GaussianJointSpectrum, UnitConversion, apply_pump_dispersion, decoherence_arrays,
    gaussian_grid,
)
from .validators import ValidatorMixin

logger = logging.getLogger(__name__)

_SQRT_HALF = 1 / math.sqrt(2)

# columns are the + and - states of one photon
BASES: dict[str, np.ndarray] = {
    "HV": np.eye(2, dtype=complex),
    "DD": _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex),
    "RL": _SQRT_HALF * np.array([[1, 1], [1j, -1j]], dtype=complex),
}
OUTCOMES = ("++", "+-", "-+", "--")
DEFAULT_DURATION = 10.0


@dataclasses.dataclass(frozen=True)
class CountRecord(ValidatorMixin):
    """
    Coincidence counts of one measurement setting.

    `rate` is the expected total number of coincidences within `duration` seconds.
    """
    basis: str = v.values(*BASES)
    counts: tuple[int, int, int, int] = v.all_min(0)
    rate: float = v.gt(0.0)
    duration: float = DEFAULT_DURATION >> v.gt(0.0)

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclasses.dataclass(frozen=True)
class PanelSettings:
    """One consecutive-curve panel of the source experiment"""
    name: str
    pump_fwhm: float
    k: float
    n: float
    total_expected: float
    duration: float

    def spectrum(self) -> GaussianJointSpectrum:
        """
        Gaussian spectrum with the panel's K and the decay reproducing its non-Markovianity.

        If no decay reaches the reported value, the decay with the largest non-Markovianity is used.
        """
        try:
            u = calibrate_decay(self.n, self.k)
        except ValueError:
            u = peak_decay(self.k)
            logger.warning("Panel %s: N=%s is out of reach for K=%s, use the maximum %.4f",
                           self.name, self.n, self.k, predict_n_consecutive(u, self.k))
        return spectrum_from_u(u, self.k)


REFERENCE_PANELS = (
    PanelSettings("a", pump_fwhm=0.18, k=-0.92, n=0.48, total_expected=18000.0, duration=10.0),
    PanelSettings("b", pump_fwhm=0.52, k=-0.66, n=0.23, total_expected=35000.0, duration=4.0),
    PanelSettings("c", pump_fwhm=0.73, k=-0.55, n=0.14, total_expected=35000.0, duration=2.0),
    PanelSettings("d", pump_fwhm=1.89, k=-0.17, n=0.02, total_expected=36000.0, duration=4.0),
)
COUNT_PLANS: dict[str, tuple[float, float]] = {i.name: (i.total_expected, i.duration) for i in REFERENCE_PANELS}


@dataclasses.dataclass(frozen=True)
class DispersionSettings:
    """
    Quartz plates in the pump beam of one panel; the photon pairs keep the panel's K.

    `plate_thickness` is in mm, `n` the reported non-Markovianity per plate.
    """
    panel: PanelSettings
    plate_thickness: tuple[float, ...]
    n: tuple[float, ...]

    def betas(self, units: UnitConversion = UnitConversion()) -> tuple[float, ...]:
        return tuple(float(units.pump_dispersion_beta(i * 1e-3)) for i in self.plate_thickness)

    def grids(self, points: int = 128, units: UnitConversion = UnitConversion()) -> list[AmplitudeGrid]:
        """Amplitude grid of the panel spectrum with the pump phase of every plate"""
        base = gaussian_grid(self.panel.spectrum(), points=points)
        return [apply_pump_dispersion(base, i) for i in self.betas(units)]


PUMP_DISPERSION = DispersionSettings(REFERENCE_PANELS[2], plate_thickness=(0.0, 13.19, 39.57), n=(0.14, 0.13, 0.13))


def _basis_vectors(basis: str) -> np.ndarray:
    if basis not in BASES:
        raise ValueError(f"Expect basis {', '.join(BASES)}, got {basis!r}")
    single = BASES[basis]
    # rows are the product states in outcome order
    return np.stack([np.kron(single[:, i], single[:, j]) for i in (0, 1) for j in (0, 1)])


def outcome_probabilities(matrix: np.ndarray, basis: str) -> np.ndarray:
    """
    Probabilities of the four outcomes for density matrices of shape `(..., 4, 4)`.
    """
    vectors = _basis_vectors(basis)
    return np.einsum("oi,...ij,oj->...o", vectors.conj(), np.asarray(matrix), vectors).real


def _generator(seed: int | np.random.Generator | None) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_counts(
        rho: DensityMatrix4,
        basis: str,
        total_expected: float,
        seed: int | np.random.Generator | None,
        duration: float = DEFAULT_DURATION,
) -> CountRecord:
    """
    Independent Poisson counts for the four outcomes with means total_expected * p.
    """
    if not total_expected > 0.0:
        raise ValueError(f"Expect positive expected counts, got {total_expected!r}")
    probabilities = np.clip(outcome_probabilities(rho.matrix, basis), 0.0, None)
    counts = _generator(seed).poisson(total_expected * probabilities)
    logger.debug("Counts %s in basis %s", counts.tolist(), basis)
    return CountRecord(basis, tuple(int(i) for i in counts), float(total_expected), duration)


def estimate_distance(record: CountRecord) -> tuple[float, float]:
    """
    Trace distance of the evolved psi+/psi- pair from diagonal-basis counts of evolved psi+.

    (n++ + n-- - n+- - n-+) / n estimates Re k12, which is the distance when both mean detunings vanish.

    :return: estimate clamped to [0, 1] and its counting error sqrt((1 - D^2) / n)
    """
    if record.basis != "DD":
        raise ValueError(f"Expect counts in the DD basis, got {record.basis}")
    total = record.total
    if total == 0:
        raise ValueError("Can't estimate a trace distance from zero counts")
    pp, pm, mp, mm = record.counts
    estimate = min(max((pp + mm - pm - mp) / total, 0.0), 1.0)
    return estimate, math.sqrt((1.0 - estimate ** 2) / total)


def synth_experiment(
        model: Characteristic,
        schedule: PlateSchedule,
        points: typing.Sequence[float],
        total_expected: float,
        seed: int | np.random.Generator | None,
        duration: float = DEFAULT_DURATION,
) -> TraceDistanceTrajectory:
    """
    Noisy trajectory: evolve psi+ at every point, count in the diagonal basis and estimate D.
    """
    points = np.sort(np.asarray(points, dtype=float))
    if points.size == 0:
        raise ValueError("Expect at least one point")
    logger.info("Synthetic experiment with %s points, %s counts per point", points.size, total_expected)
    rng = _generator(seed)
    values = decoherence_arrays(model, *schedule.times_many(points))
    matrices = dephase_many(PureTwoQubitState.psi_plus(), **values)
    estimates = [
        estimate_distance(sample_counts(DensityMatrix4(i), "DD", total_expected, rng, duration))
        for i in matrices
    ]
    d, sigma = (np.array(i) for i in zip(*estimates))
    return TraceDistanceTrajectory(points, d, sigma)
