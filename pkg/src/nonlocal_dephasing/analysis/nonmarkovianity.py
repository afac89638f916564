"""
Non-Markovianity: the total increase of the trace distance along a trajectory and its
closed form for the Bell pair.
"""
import logging
import math
import typing

import numpy as np
from scipy import optimize

from ..channel import PureTwoQubitState, dephase_many
from ..schedule import DEFAULT_STEP, PlateSchedule, sample_points
from ..spectra import Characteristic, GaussianJointSpectrum, decoherence_arrays
from .distance import trace_distances
from .trajectory import TraceDistanceTrajectory

logger = logging.getLogger(__name__)

StatePair = tuple[PureTwoQubitState, PureTwoQubitState]


def bell_pair_distance(spec: GaussianJointSpectrum, schedule: PlateSchedule, x):
    """
    Closed-form trace distance of the evolved psi+/psi- pair, |G(x1, x2)|.

    For K <= 0 this is exp(-B (x1^2 + x2^2 - 2 |K| x1 x2)). Accepts a scalar or an array of x.
    """
    x1, x2 = schedule.times_many(x)
    result = np.exp(-spec.b * (x1 * x1 + x2 * x2 + 2.0 * spec.k * x1 * x2))
    return float(result) if result.ndim == 0 else result


def blp_measure(trajectory: TraceDistanceTrajectory | typing.Sequence[float]) -> float:
    """
    Sum of all increases of D between consecutive samples.
    """
    d = trajectory.d if isinstance(trajectory, TraceDistanceTrajectory) else np.asarray(trajectory, dtype=float)
    if d.ndim != 1 or len(d) < 2:
        raise ValueError(f"Expect at least 2 trace distance values, got {np.size(d)}")
    return float(np.sum(np.clip(np.diff(d), 0.0, None)))


def _check_correlation(k: float):
    if not -1.0 <= k <= 0.0:
        raise ValueError(f"Expect K in [-1, 0], got {k!r}")


def predict_n_consecutive(u: float, k: float) -> float:
    """
    Non-Markovianity of the Bell pair on the consecutive schedule (offset 199), u = B * 199^2.

    D falls to exp(-u) at x = 199 and rises to exp(-u (1 - K^2)) at x2 = |K| * 199.
    """
    if u < 0.0:
        raise ValueError(f"Expect u >= 0, got {u!r}")
    _check_correlation(k)
    return math.exp(-u * (1.0 - k * k)) - math.exp(-u)


def peak_decay(k: float) -> float:
    """u maximizing `predict_n_consecutive` at fixed K, -1 < K < 0"""
    if not -1.0 < k < 0.0:
        raise ValueError(f"Expect K in (-1, 0), got {k!r}")
    remaining = 1.0 - k * k
    return math.log(1.0 / remaining) / (1.0 - remaining)


def calibrate_decay(target_n: float, k: float) -> float:
    """
    Decay u giving non-Markovianity `target_n` on the consecutive schedule.

    The strong-decay solution (u above the maximum) is returned.
    """
    u_peak = peak_decay(k)
    n_peak = predict_n_consecutive(u_peak, k)
    if not 0.0 < target_n <= n_peak:
        raise ValueError(f"Expect target in (0, {n_peak:.4f}] for K={k}, got {target_n!r}")
    if target_n == n_peak:
        return u_peak
    upper = 2.0 * u_peak
    while predict_n_consecutive(upper, k) > target_n:
        upper *= 2.0
    u = optimize.brentq(lambda i: predict_n_consecutive(i, k) - target_n, u_peak, upper, xtol=1e-14)
    logger.debug("Calibrated u=%s for N=%s at K=%s", u, target_n, k)
    return float(u)


def blp_optimize(
        model: Characteristic,
        schedule: PlateSchedule,
        n_pairs: int,
        seed: int | np.random.Generator | None = None,
        step: float = DEFAULT_STEP,
) -> tuple[float, StatePair]:
    """
    Search the initial pair with the largest non-Markovianity among Haar-random pure pairs and the Bell pair.

    :return: best non-Markovianity and its initial pair
    """
    if n_pairs < 1:
        raise ValueError(f"Expect at least one pair, got {n_pairs!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = sample_points(step)
    values = decoherence_arrays(model, *schedule.times_many(x))

    def measure(pair: StatePair) -> float:
        return blp_measure(trace_distances(dephase_many(pair[0], **values), dephase_many(pair[1], **values)))

    logger.info("Search %s random pairs for offset %s", n_pairs, schedule.offset)
    best_pair = (PureTwoQubitState.haar_random(rng), PureTwoQubitState.haar_random(rng))
    best = measure(best_pair)
    for _ in range(n_pairs - 1):
        pair = (PureTwoQubitState.haar_random(rng), PureTwoQubitState.haar_random(rng))
        value = measure(pair)
        if value > best:
            best, best_pair = value, pair

    bell_pair = (PureTwoQubitState.psi_plus(), PureTwoQubitState.psi_minus())
    bell = measure(bell_pair)
    logger.debug("Best random pair N=%s, Bell pair N=%s", best, bell)
    if bell >= best:
        return bell, bell_pair
    return best, best_pair
