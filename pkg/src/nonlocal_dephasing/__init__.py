from .utils.repr import set_value_repr
from .utils.exceptions import (
    AliasingWarning, ConfigError, CsvFormatError, DegenerateFitError, FitError, set_deep_exception_traceback,
)
from .validators import ValidatorMixin
from .spectra import (
    AmplitudeGrid, DecoherenceSet, GaussianJointSpectrum, UnitConversion,
    decoherence_set, gaussian_characteristic, gaussian_grid, numeric_characteristic, pump_to_spectrum,
)
from .channel import (
    DensityMatrix2, DensityMatrix4, PureTwoQubitState, apply_dephasing, is_factorized, reduce_to_arm,
    unitary_grid_evolution,
)
from .analysis.distance import concurrence, trace_distance
from .analysis.trajectory import TraceDistanceTrajectory
from .schedule import STANDARD_OFFSETS, PlateSchedule, entanglement_trajectory, spectrum_from_u, trajectory
from .analysis.nonmarkovianity import (
    bell_pair_distance, blp_measure, blp_optimize, calibrate_decay, predict_n_consecutive,
)
from .analysis.fitting import FamilyFit, FitResult, fit_consecutive, fit_family
from .synthlab import PUMP_DISPERSION, REFERENCE_PANELS, CountRecord, estimate_distance, sample_counts, synth_experiment

__all__ = [
    "set_value_repr",
    "set_deep_exception_traceback",
    "ValidatorMixin",
    "AliasingWarning",
    "ConfigError",
    "CsvFormatError",
    "DegenerateFitError",
    "FitError",
    "AmplitudeGrid",
    "DecoherenceSet",
    "GaussianJointSpectrum",
    "UnitConversion",
    "decoherence_set",
    "gaussian_characteristic",
    "gaussian_grid",
    "numeric_characteristic",
    "pump_to_spectrum",
    "DensityMatrix2",
    "DensityMatrix4",
    "PureTwoQubitState",
    "apply_dephasing",
    "is_factorized",
    "reduce_to_arm",
    "unitary_grid_evolution",
    "concurrence",
    "trace_distance",
    "TraceDistanceTrajectory",
    "STANDARD_OFFSETS",
    "PlateSchedule",
    "entanglement_trajectory",
    "spectrum_from_u",
    "trajectory",
    "bell_pair_distance",
    "blp_measure",
    "blp_optimize",
    "calibrate_decay",
    "predict_n_consecutive",
    "FamilyFit",
    "FitResult",
    "fit_consecutive",
    "fit_family",
    "PUMP_DISPERSION",
    "REFERENCE_PANELS",
    "CountRecord",
    "estimate_distance",
    "sample_counts",
    "synth_experiment",
]
