"""
Environment side of the model: the joint frequency distribution of the photon pair,
its characteristic function and the decoherence functions derived from it.

Distances are effective path differences in units of the reference wavelength (x-units),
frequencies are scaled so that the phase of a V photon relative to an H photon is `omega * x`.
"""
import dataclasses
import logging
import math
import os
import typing
import warnings

import numpy as np
import pandas as pd

from . import validators as v
from .utils.exceptions import AliasingWarning, CsvFormatError
from .utils.repr import log_value_repr
from .utils.tables import read_numeric_table
from .validators import ValidatorMixin

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

MIN_GRID_POINTS = 16
NORMALIZATION_TOL = 1e-10
# quadrature round-off allowed above |G| = 1
MODULUS_SLACK = 1e-9
# group velocity dispersion of crystalline quartz for the UV pump, about 100 fs^2/mm, in s^2/m
QUARTZ_PUMP_GVD = 1.0e-25

GRID_COLUMNS = ("omega1", "omega2", "re_g", "im_g")

Characteristic = typing.Callable[[float, float], complex]


def frozen_array(value, dtype) -> np.ndarray:
    result = np.array(value, dtype=dtype)
    result.setflags(write=False)
    return result


@dataclasses.dataclass(frozen=True)
class UnitConversion(ValidatorMixin):
    """
    Laboratory units to x-units.

    A plate of thickness L delays a V photon relative to an H photon by the phase
    delta_n * omega * L / c, i.e. omega * lambda0 / c per x-unit with x = delta_n * L / lambda0.
    The birefringence therefore only enters the conversions of thickness and passage time.
    """
    lambda0: float = 780.0 >> v.gt(0.0)
    delta_n: float = 0.0092 >> v.gt(0.0)

    @property
    def lambda0_m(self) -> float:
        return self.lambda0 * 1e-9

    def thickness_to_x(self, thickness):
        """Plate thickness in meters to x-units"""
        return self.delta_n * thickness / self.lambda0_m

    def x_to_thickness(self, x):
        return x * self.lambda0_m / self.delta_n

    def time_to_x(self, t):
        """Passage time in seconds to x-units"""
        return self.delta_n * SPEED_OF_LIGHT * t / self.lambda0_m

    def x_to_time(self, x):
        return x * self.lambda0_m / (self.delta_n * SPEED_OF_LIGHT)

    def omega_to_grid(self, omega):
        """Angular frequency in rad/s to grid frequency in rad per x-unit"""
        return omega * self.lambda0_m / SPEED_OF_LIGHT

    def grid_to_omega(self, grid_omega):
        return grid_omega * SPEED_OF_LIGHT / self.lambda0_m

    def decay_from_variance(self, variance):
        """
        Decay coefficient B per x-unit squared for a single frequency variance C in rad^2/s^2,
        B = delta_n^2 * C * t^2 / 2 with t the passage time of one x-unit.
        """
        return 0.5 * variance * (self.lambda0_m / SPEED_OF_LIGHT) ** 2

    def variance_from_decay(self, b):
        return 2.0 * b * (SPEED_OF_LIGHT / self.lambda0_m) ** 2

    def width_to_omega(self, width, center):
        """Wavelength width in nm around the center wavelength in nm to an angular frequency width"""
        return 2.0 * math.pi * SPEED_OF_LIGHT * width / (center ** 2 * 1e-9)

    def omega_to_width(self, omega_width, center):
        return omega_width * center ** 2 * 1e-9 / (2.0 * math.pi * SPEED_OF_LIGHT)

    def pump_dispersion_beta(self, thickness, gvd: float = QUARTZ_PUMP_GVD):
        """
        Quadratic phase coefficient of `apply_pump_dispersion` for a pump plate of thickness in meters.

        The pump detuning is omega1 + omega2, the plate adds the phase gvd * thickness * detuning^2 / 2.
        """
        return 0.5 * gvd * thickness * (SPEED_OF_LIGHT / self.lambda0_m) ** 2


@dataclasses.dataclass(frozen=True)
class GaussianJointSpectrum(ValidatorMixin):
    """
    Bivariate Gaussian frequency distribution with identical single frequency variances.

    `b` is the decay coefficient per x-unit squared (half the variance in grid frequency units),
    `k` the correlation coefficient and `m1`, `m2` the mean grid frequencies.
    """
    b: float = v.min(0.0)
    k: float = 0.0 >> v.range(-1.0, 1.0)
    m1: float = 0.0
    m2: float = 0.0

    def __call__(self, x1, x2):
        return gaussian_characteristic(self, x1, x2)


@dataclasses.dataclass(frozen=True, eq=False)
class AmplitudeGrid(ValidatorMixin):
    """
    Two-photon amplitude g(omega1, omega2) sampled on a uniform grid of cell centers.

    Use `from_amplitude` to build a grid from unnormalized samples.
    """
    axis1: np.ndarray = v.shape(None) >> v.min_length(MIN_GRID_POINTS) >> v.strictly_increasing()
    axis2: np.ndarray = v.shape(None) >> v.min_length(MIN_GRID_POINTS) >> v.strictly_increasing()
    g: np.ndarray = v.shape(None, None) >> v.finite()
    probability: np.ndarray = dataclasses.field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "axis1", frozen_array(self.axis1, float))
        object.__setattr__(self, "axis2", frozen_array(self.axis2, float))
        object.__setattr__(self, "g", frozen_array(self.g, complex))
        object.__setattr__(self, "probability", frozen_array(np.abs(self.g) ** 2, float))
        super().__post_init__()

    def validate(self):
        expected = (len(self.axis1), len(self.axis2))
        if self.g.shape != expected:
            raise ValueError(f"Expect amplitude shape {expected}, got {self.g.shape}")
        for name, axis in (("axis1", self.axis1), ("axis2", self.axis2)):
            steps = np.diff(axis)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ValueError(f"Expect uniformly spaced {name}")
        total = self.total_probability()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"Expect normalized amplitude, total probability {total!r}")

    @classmethod
    def from_amplitude(cls, axis1, axis2, g, normalize: bool = True) -> "AmplitudeGrid":
        axis1 = np.asarray(axis1, dtype=float)
        axis2 = np.asarray(axis2, dtype=float)
        g = np.asarray(g, dtype=complex)
        if normalize:
            area = (axis1[1] - axis1[0]) * (axis2[1] - axis2[0])
            total = float(np.sum(np.abs(g) ** 2) * area)
            if not total > 0.0:
                raise ValueError("Can't normalize a vanishing amplitude")
            logger.debug("Normalize amplitude with total probability %s", total)
            g = g / math.sqrt(total)
        return cls(axis1, axis2, g)

    @property
    def step1(self) -> float:
        return float(self.axis1[1] - self.axis1[0])

    @property
    def step2(self) -> float:
        return float(self.axis2[1] - self.axis2[0])

    @property
    def cell_area(self) -> float:
        return self.step1 * self.step2

    def total_probability(self) -> float:
        return float(np.sum(self.probability) * self.cell_area)

    def __call__(self, x1, x2):
        return numeric_characteristic(self, x1, x2)

    def to_csv(self, path: str | os.PathLike):
        """Write the grid as long-format CSV with columns omega1, omega2, re_g, im_g"""
        w1, w2 = np.meshgrid(self.axis1, self.axis2, indexing="ij")
        frame = pd.DataFrame({
            "omega1": w1.ravel(), "omega2": w2.ravel(),
            "re_g": self.g.real.ravel(), "im_g": self.g.imag.ravel(),
        })
        logger.info("Write amplitude grid %sx%s to %s", len(self.axis1), len(self.axis2), path)
        frame.to_csv(path, index=False, float_format="%.17g", encoding="utf-8")

    @classmethod
    def from_csv(cls, path: str | os.PathLike) -> "AmplitudeGrid":
        frame = read_numeric_table(path, GRID_COLUMNS)
        frame = frame.sort_values(["omega1", "omega2"], kind="stable")
        axis1 = np.unique(frame["omega1"].to_numpy())
        axis2 = np.unique(frame["omega2"].to_numpy())
        if len(frame) != len(axis1) * len(axis2):
            raise CsvFormatError(
                f"expect {len(axis1) * len(axis2)} rows for a {len(axis1)}x{len(axis2)} grid, got {len(frame)}"
            )
        w1, w2 = np.meshgrid(axis1, axis2, indexing="ij")
        if not (np.array_equal(frame["omega1"].to_numpy(), w1.ravel())
                and np.array_equal(frame["omega2"].to_numpy(), w2.ravel())):
            raise CsvFormatError("grid points are duplicated or missing")
        g = (frame["re_g"].to_numpy() + 1j * frame["im_g"].to_numpy()).reshape(len(axis1), len(axis2))
        return cls.from_amplitude(axis1, axis2, g)


def _check_moduli(values: dict[str, complex], bound: float) -> Exception | None:
    for name, value in values.items():
        if abs(value) > bound:
            return ValueError(f"Expect |{name}| <= 1, got {abs(value)!r}")
    return None


@dataclasses.dataclass(frozen=True)
class DecoherenceSet(ValidatorMixin):
    """
    Decoherence functions at one point (x1, x2):
    k1 = G(x1, 0), k2 = G(0, x2), k12 = G(x1, x2) and l12 = G(x1, -x2)
    """
    k1: complex = v.max_modulus(1.0 + MODULUS_SLACK)
    k2: complex = v.max_modulus(1.0 + MODULUS_SLACK)
    k12: complex = v.max_modulus(1.0 + MODULUS_SLACK)
    l12: complex = v.max_modulus(1.0 + MODULUS_SLACK)

    @classmethod
    def identity(cls) -> "DecoherenceSet":
        return cls(1 + 0j, 1 + 0j, 1 + 0j, 1 + 0j)


def gaussian_characteristic(spec: GaussianJointSpectrum, x1, x2):
    """
    Closed-form characteristic function of a Gaussian joint spectrum,
    exp(-i (m1 x1 + m2 x2)) * exp(-B (x1^2 + x2^2 + 2 K x1 x2)).

    Accepts scalars or broadcastable arrays.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    phase = np.exp(-1j * (spec.m1 * x1 + spec.m2 * x2))
    decay = np.exp(-spec.b * (x1 * x1 + x2 * x2 + 2 * spec.k * x1 * x2))
    result = phase * decay
    return complex(result) if result.ndim == 0 else result


def check_aliasing(grid: AmplitudeGrid, x1: np.ndarray, x2: np.ndarray):
    advance = max(grid.step1 * float(np.max(np.abs(x1), initial=0.0)),
                  grid.step2 * float(np.max(np.abs(x2), initial=0.0)))
    if advance > math.pi:
        logger.warning("Grid too coarse: phase advances %.3f rad per step", advance)
        warnings.warn(
            f"grid too coarse, phase advances {advance:.3f} rad per grid step (more than pi)",
            AliasingWarning, stacklevel=3,
        )


def numeric_characteristic(grid: AmplitudeGrid, x1, x2):
    """
    Characteristic function of the sampled joint distribution by midpoint quadrature,
    sum P(w1, w2) exp(-i (w1 x1 + w2 x2)) dw1 dw2.

    Only |g|^2 enters. Accepts scalars or broadcastable arrays.
    """
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    check_aliasing(grid, x1, x2)
    e1 = np.exp(-1j * np.multiply.outer(x1, grid.axis1))
    e2 = np.exp(-1j * np.multiply.outer(x2, grid.axis2))
    result = np.sum((e1 @ grid.probability) * e2, axis=-1) * grid.cell_area
    return complex(result) if result.ndim == 0 else result


def decoherence_set(provider: Characteristic, x1: float, x2: float) -> DecoherenceSet:
    """
    Evaluate the four decoherence functions of a characteristic function at (x1, x2).

    :param provider: characteristic function G, e.g. a `GaussianJointSpectrum` or an `AmplitudeGrid`
    """
    logger.debug("Decoherence set at (%s, %s) of %s", x1, x2, log_value_repr(provider, logging.DEBUG, logger))
    return DecoherenceSet(
        k1=complex(provider(x1, 0.0)),
        k2=complex(provider(0.0, x2)),
        k12=complex(provider(x1, x2)),
        l12=complex(provider(x1, -x2)),
    )


def decoherence_arrays(provider: Characteristic, x1: np.ndarray, x2: np.ndarray) -> dict[str, np.ndarray]:
    """
    Vectorized `decoherence_set` for providers that accept arrays.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    zeros = np.zeros_like(x1)
    result = {
        "k1": np.asarray(provider(x1, zeros), dtype=complex),
        "k2": np.asarray(provider(zeros, x2), dtype=complex),
        "k12": np.asarray(provider(x1, x2), dtype=complex),
        "l12": np.asarray(provider(x1, -x2), dtype=complex),
    }
    exc = _check_moduli({k: complex(np.max(np.abs(i), initial=0.0)) for k, i in result.items()},
                        1.0 + MODULUS_SLACK)
    if exc is not None:
        raise exc
    return result


def gaussian_grid(spec: GaussianJointSpectrum, points: int = 512, span: float = 6.0) -> AmplitudeGrid:
    """
    Sample the amplitude sqrt(P) of a Gaussian joint spectrum at the cell centers of a square grid
    covering `span` standard deviations around the means.
    """
    if spec.b <= 0.0:
        raise ValueError("Expect a positive decay coefficient to sample a Gaussian grid")
    if abs(spec.k) >= 1.0:
        raise ValueError("Expect |K| < 1 to sample a Gaussian grid")
    if points < MIN_GRID_POINTS:
        raise ValueError(f"Expect at least {MIN_GRID_POINTS} points per axis")
    logger.info("Sample Gaussian grid %sx%s over +-%s sigma", points, points, span)
    sigma = math.sqrt(2.0 * spec.b)
    step = 2.0 * span / points
    centers = -span + step * (np.arange(points) + 0.5)
    z1, z2 = np.meshgrid(centers, centers, indexing="ij")
    exponent = -(z1 * z1 - 2.0 * spec.k * z1 * z2 + z2 * z2) / (2.0 * (1.0 - spec.k ** 2))
    return AmplitudeGrid.from_amplitude(spec.m1 + sigma * centers, spec.m2 + sigma * centers, np.exp(exponent / 2))


def apply_pump_dispersion(grid: AmplitudeGrid, beta: float) -> AmplitudeGrid:
    """
    Multiply the amplitude by the pump phase exp(i beta (w1 + w2)^2); the probabilities do not change.
    """
    logger.debug("Apply pump dispersion beta=%s", beta)
    total = np.add.outer(grid.axis1, grid.axis2)
    return AmplitudeGrid(grid.axis1, grid.axis2, grid.g * np.exp(1j * beta * total * total))


def pump_to_spectrum(
        pump_fwhm: float,
        phasematch_width: float,
        units: UnitConversion = UnitConversion(),
) -> GaussianJointSpectrum:
    """
    Energy-conservation toy model of down-conversion.

    The sum frequency inherits the pump width (FWHM in nm at lambda0 / 2), the difference frequency
    is limited by phase matching (standard deviation in nm at lambda0). With sigma_plus and sigma_minus the
    angular frequency widths, C = (sigma_plus^2 + sigma_minus^2) / 4 and
    K = -(sigma_minus^2 - sigma_plus^2) / (sigma_minus^2 + sigma_plus^2).
    A pump wider than the phase-matching width saturates at K = 0.
    """
    if not pump_fwhm > 0.0 or not phasematch_width > 0.0:
        raise ValueError(f"Expect positive widths, got pump {pump_fwhm!r} and phase matching {phasematch_width!r}")
    sigma_plus = units.width_to_omega(pump_fwhm * FWHM_TO_SIGMA, units.lambda0 / 2.0)
    sigma_minus = units.width_to_omega(phasematch_width, units.lambda0)
    k = -(sigma_minus ** 2 - sigma_plus ** 2) / (sigma_minus ** 2 + sigma_plus ** 2)
    if k > 0.0:
        logger.warning("Pump width %s nm exceeds the phase-matching width, use K = 0", pump_fwhm)
        k = 0.0
    variance = (sigma_plus ** 2 + sigma_minus ** 2) / 4.0
    logger.info("Pump %s nm gives K=%.4f and C=%.4g rad^2/s^2", pump_fwhm, k, variance)
    return GaussianJointSpectrum(b=units.decay_from_variance(variance), k=max(k, -1.0))


def calibrate_phasematch_width(pump_fwhm: float, target_k: float, units: UnitConversion = UnitConversion()) -> float:
    """
    Phase-matching width in nm for which `pump_to_spectrum(pump_fwhm, width)` has correlation `target_k`.
    """
    if not pump_fwhm > 0.0:
        raise ValueError(f"Expect positive pump width, got {pump_fwhm!r}")
    if not -1.0 < target_k <= 0.0:
        raise ValueError(f"Expect target K in (-1, 0], got {target_k!r}")
    sigma_plus = units.width_to_omega(pump_fwhm * FWHM_TO_SIGMA, units.lambda0 / 2.0)
    sigma_minus = sigma_plus * math.sqrt((1.0 - target_k) / (1.0 + target_k))
    return units.omega_to_width(sigma_minus, units.lambda0)
