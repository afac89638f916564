"""
Least-squares fits of measured trace distance curves.

The consecutive curve (plates in arm 1 up to the split, then in arm 2) is fitted in two stages:

    x <= split:  f(x) = A exp(-B x^2)
    x >  split:  g(x) = A exp(-B (split^2 + (x - split)^2 - 2 |K| split (x - split)))

with A and B fixed in the second stage. Internally the decay is scaled to one full arm,
b = B * split^2, so that every parameter is of order one.
"""
import dataclasses
import logging
import math
import typing

import numpy as np
from dataclasses_json import config, dataclass_json
from scipy import optimize

from .. import validators as v
from ..schedule import ARM_MAX, PlateSchedule
from ..utils.exceptions import DegenerateFitError, FitError, add_exception_notes
from ..validators import ValidatorMixin
from .trajectory import TraceDistanceTrajectory

logger = logging.getLogger(__name__)

A_MAX = 1.5
A_SUSPICIOUS = 1.1
MIN_POINTS = 4
MAX_EVALUATIONS = 200
# scaled decay below this is treated as no decay at all
DEGENERATE_DECAY = 1e-8
FROZEN_TOL = 1e-9

_SOLVER_OPTIONS = dict(method="trf", max_nfev=MAX_EVALUATIONS, xtol=1e-10, ftol=1e-14, gtol=1e-14)


@dataclass_json
@dataclasses.dataclass(frozen=True)
class FitResult(ValidatorMixin):
    """
    Parameters of a fitted curve. `b` is the decay per lambda0^2, `k` is `None` for a degenerate fit.
    """
    a: float = v.gt(0.0) >> v.max(A_MAX)
    b: float = dataclasses.field(metadata=config(field_name="b_per_lambda0_sq")) >> v.min(0.0)
    rss: float = v.min(0.0)
    n_points: int = v.min(1)
    k: typing.Optional[float] = None >> v.range(-1.0, 0.0)
    degenerate: bool = dataclasses.field(default=False, metadata=config(field_name="degenerate_flag"))
    a_stderr: typing.Optional[float] = None
    b_stderr: typing.Optional[float] = None
    k_stderr: typing.Optional[float] = None

    def validate(self):
        if self.k is None and not self.degenerate:
            raise ValueError("Expect correlation coefficient of a non-degenerate fit")

    @property
    def u(self) -> float:
        """Decay over one full arm, B * 199^2"""
        return self.b * ARM_MAX ** 2


def consecutive_curve(x, a: float, b: float, k: float, split: float = ARM_MAX):
    """
    Model of the consecutive curve; `b` per lambda0^2.
    """
    x = np.asarray(x, dtype=float)
    after = np.clip(x - split, 0.0, None)
    before = np.minimum(x, split)
    return a * np.exp(-b * (before ** 2 + after ** 2 - 2.0 * abs(k) * before * after))


def _weights(trajectory: TraceDistanceTrajectory) -> np.ndarray:
    """1/sigma; a zero error (D estimated as exactly 0 or 1) gets the smallest positive error"""
    if trajectory.sigma is None:
        return np.ones_like(trajectory.d)
    positive = trajectory.sigma > 0.0
    if not np.any(positive):
        logger.warning("Every standard error is zero, fit without weights")
        return np.ones_like(trajectory.d)
    if not np.all(positive):
        logger.debug("Replace %s zero standard errors", np.count_nonzero(~positive))
    return 1.0 / np.where(positive, trajectory.sigma, np.min(trajectory.sigma[positive]))


def _solve(residuals, jacobian, x0, bounds, stage: str) -> optimize.OptimizeResult:
    logger.debug("Fit %s from %s", stage, x0)
    result = optimize.least_squares(residuals, x0, jac=jacobian, bounds=bounds, **_SOLVER_OPTIONS)
    logger.debug("Fit %s finished: status %s, %s evaluations, cost %s", stage, result.status, result.nfev, result.cost)
    if result.status <= 0:
        raise add_exception_notes(
            FitError(f"{stage} fit did not converge"),
            f"status {result.status}: {result.message}",
            f"evaluations {result.nfev}",
            f"parameters {result.x.tolist()}",
        )
    return result


def _stderr(result: optimize.OptimizeResult, n_points: int) -> np.ndarray | None:
    """Standard errors from the residual variance and the Jacobian at the solution"""
    dof = n_points - len(result.x)
    if dof <= 0:
        return None
    variance = float(np.sum(result.fun ** 2)) / dof
    try:
        covariance = np.linalg.inv(result.jac.T @ result.jac) * variance
    except np.linalg.LinAlgError:
        logger.debug("Singular normal matrix, no standard errors")
        return None
    return np.sqrt(np.clip(np.diag(covariance), 0.0, None))


def _initial_decay(t2: np.ndarray, d: np.ndarray) -> tuple[float, float]:
    """Log-linear guess of (A, slope) from log D = log A - slope t^2"""
    positive = d > 0.0
    if np.count_nonzero(positive) < 2 or np.ptp(t2[positive]) == 0.0:
        return float(np.clip(np.max(d), 1e-6, A_MAX)), 1.0
    slope, intercept = np.polyfit(t2[positive], np.log(d[positive]), 1)
    return float(np.clip(math.exp(intercept), 1e-6, A_MAX)), float(max(-slope, 0.0))


def _check_points(mask: np.ndarray, side: str):
    count = int(np.count_nonzero(mask))
    if count < MIN_POINTS:
        raise ValueError(f"Expect at least {MIN_POINTS} points {side} the split, got {count}")


def fit_consecutive(
        trajectory: TraceDistanceTrajectory,
        split: float = ARM_MAX,
        allow_degenerate: bool = False,
) -> FitResult:
    """
    Two-stage fit of a consecutive curve.

    :param trajectory: measured or simulated trajectory, weighted with 1/sigma when every sigma is positive
    :param split: path difference at which the plates start to go into arm 2
    :param allow_degenerate: return the flagged result instead of raising `DegenerateFitError`
    :raise ValueError: less than 4 points on either side of the split
    :raise FitError: the optimizer did not converge
    :raise DegenerateFitError: the decay is pinned at zero and K is undefined
    """
    logger.info("Fit consecutive curve with %s points split at %s", len(trajectory), split)
    first = trajectory.x <= split
    _check_points(first, "up to")
    _check_points(~first, "after")

    weights = _weights(trajectory)
    t = trajectory.x / split
    d = trajectory.d

    t1, d1, w1 = t[first], d[first], weights[first]
    t1_sq = t1 * t1

    def decay_residuals(p):
        return (p[0] * np.exp(-p[1] * t1_sq) - d1) * w1

    def decay_jacobian(p):
        e = np.exp(-p[1] * t1_sq)
        return np.column_stack([e * w1, -p[0] * t1_sq * e * w1])

    a0, b0 = _initial_decay(t1_sq, d1)
    first_fit = _solve(decay_residuals, decay_jacobian, [a0, b0], ([0.0, 0.0], [A_MAX, np.inf]), "decay")
    a, b_scaled = (float(i) for i in first_fit.x)
    if a > A_SUSPICIOUS:
        logger.warning("Fitted amplitude %s exceeds %s", a, A_SUSPICIOUS)
    if not a > 0.0:
        raise add_exception_notes(FitError("fitted amplitude vanishes"), f"parameters {first_fit.x.tolist()}")
    first_errors = _stderr(first_fit, len(t1))

    s, d2, w2 = t[~first] - 1.0, d[~first], weights[~first]
    b = b_scaled / split ** 2
    b_stderr = float(first_errors[1]) / split ** 2 if first_errors is not None else None
    a_stderr = float(first_errors[0]) if first_errors is not None else None

    if b_scaled <= DEGENERATE_DECAY:
        rss = float(np.sum((a - d) ** 2))
        result = FitResult(a=a, b=0.0, rss=rss, n_points=len(t), k=None, degenerate=True,
                           a_stderr=a_stderr, b_stderr=b_stderr)
        logger.warning("Decay pinned at zero, correlation coefficient is undefined")
        if allow_degenerate:
            return result
        raise DegenerateFitError("decay pinned at zero, correlation coefficient is undefined", result=result)

    def revival_model(kappa):
        return a * np.exp(-b_scaled * (1.0 + s * s - 2.0 * kappa * s))

    def revival_residuals(p):
        return (revival_model(p[0]) - d2) * w2

    def revival_jacobian(p):
        return (revival_model(p[0]) * 2.0 * b_scaled * s * w2)[:, None]

    # coarse scan keeps the local solver away from the wrong side of a shallow minimum
    candidates = np.linspace(0.0, 1.0, 101)
    kappa0 = candidates[np.argmin([np.sum(revival_residuals([i]) ** 2) for i in candidates])]
    second_fit = _solve(revival_residuals, revival_jacobian, [kappa0], ([0.0], [1.0]), "revival")
    kappa = float(second_fit.x[0])
    second_errors = _stderr(second_fit, len(s))

    rss = float(np.sum((consecutive_curve(trajectory.x, a, b, kappa, split) - d) ** 2))
    result = FitResult(
        a=a, b=b, rss=rss, n_points=len(t), k=-kappa, degenerate=False,
        a_stderr=a_stderr, b_stderr=b_stderr,
        k_stderr=float(second_errors[0]) if second_errors is not None else None,
    )
    logger.info("Fitted A=%.6g B=%.6g K=%.6g", result.a, result.b, result.k)
    return result


def _fit_simultaneous(trajectory: TraceDistanceTrajectory, b: float, split: float) -> FitResult:
    """
    Fit G(x) = A exp(-B (1 - |K|) x^2 / 2) with B fixed, both arms growing together.
    """
    if len(trajectory) < MIN_POINTS:
        raise ValueError(f"Expect at least {MIN_POINTS} points on the simultaneous curve, got {len(trajectory)}")
    weights = _weights(trajectory)
    t = trajectory.x / split
    half_t2 = 0.5 * t * t
    b_scaled = b * split ** 2
    d = trajectory.d

    def decay(p):
        return np.exp(-b_scaled * (1.0 - p[1]) * half_t2)

    def model(p):
        return p[0] * decay(p)

    def residuals(p):
        return (model(p) - d) * weights

    def jacobian(p):
        e = decay(p)
        return np.column_stack([e * weights, p[0] * e * b_scaled * half_t2 * weights])

    a0, slope = _initial_decay(half_t2, d)
    kappa0 = float(np.clip(1.0 - slope / b_scaled, 0.0, 1.0)) if b_scaled > 0.0 else 0.0
    fit = _solve(residuals, jacobian, [max(a0, 1e-6), kappa0], ([1e-12, 0.0], [A_MAX, 1.0]), "simultaneous")
    a, kappa = (float(i) for i in fit.x)
    errors = _stderr(fit, len(t))
    return FitResult(
        a=a, b=b, rss=float(np.sum((model(fit.x) - d) ** 2)), n_points=len(t), k=-kappa,
        a_stderr=float(errors[0]) if errors is not None else None,
        k_stderr=float(errors[1]) if errors is not None else None,
    )


@dataclasses.dataclass(frozen=True)
class FamilyFit:
    """
    Averaged parameters of the consecutive (bottom) and simultaneous (top) curves.
    """
    a0: float
    b0: float
    k0: float
    bottom: FitResult
    top: FitResult
    frozen: bool
    residuals: dict[float, float] = dataclasses.field(default_factory=dict)

    def predict(self, x1, x2):
        """F(x1, x2) = A0 exp(-B0 (x1^2 + x2^2 - 2 |K0| x1 x2))"""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        return self.a0 * np.exp(-self.b0 * (x1 * x1 + x2 * x2 - 2.0 * abs(self.k0) * x1 * x2))

    def predicted_curve(self, offset: float, x) -> np.ndarray:
        return self.predict(*PlateSchedule(offset).times_many(x))


def fit_family(
        bottom: TraceDistanceTrajectory,
        top: TraceDistanceTrajectory,
        intermediates: typing.Mapping[float, TraceDistanceTrajectory] | None = None,
        split: float = ARM_MAX,
) -> FamilyFit:
    """
    Fit the consecutive curve (offset 199) and the simultaneous curve (offset 0) and average the parameters.

    B and |K| can't be separated on the simultaneous curve alone, its decay is fixed to the consecutive one.

    :param intermediates: trajectories of other offsets, compared to the averaged prediction
    """
    logger.info("Fit plate family")
    first = fit_consecutive(bottom, split)
    second = _fit_simultaneous(top, first.b, split)
    frozen = abs(second.k) >= 1.0 - FROZEN_TOL
    if frozen:
        logger.warning("Simultaneous curve does not decay, |K| = 1")
    family = FamilyFit(
        a0=(first.a + second.a) / 2, b0=(first.b + second.b) / 2, k0=(first.k + second.k) / 2,
        bottom=first, top=second, frozen=frozen,
    )
    for offset, item in (intermediates or {}).items():
        family.residuals[offset] = float(np.sum((family.predicted_curve(offset, item.x) - item.d) ** 2))
        logger.debug("Offset %s: residual sum of squares %s", offset, family.residuals[offset])
    return family
