"""
Open-system side: polarization states of the photon pair and the nonlocal dephasing map.

Basis order is HH, HV, VH, VV (photon 1 first).
"""
import dataclasses
import itertools
import logging
import math
import typing

import numpy as np
from dataclasses_json import dataclass_json
from scipy.stats import unitary_group

from . import validators as v
from .spectra import AmplitudeGrid, DecoherenceSet, check_aliasing, frozen_array
from .utils.repr import log_value_repr
from .validators import ValidatorMixin

logger = logging.getLogger(__name__)

BASIS = ("HH", "HV", "VH", "VV")
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_FLOOR = -1e-9


@dataclasses.dataclass(frozen=True)
class PureTwoQubitState(ValidatorMixin):
    """Pure polarization state a|HH> + b|HV> + c|VH> + d|VV>"""
    a: complex
    b: complex
    c: complex
    d: complex

    def validate(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2 + abs(self.d) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"Expect normalized amplitudes, got squared norm {norm!r}")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=complex)

    @classmethod
    def from_vector(cls, vector: typing.Sequence[complex], normalize: bool = False) -> "PureTwoQubitState":
        vector = np.asarray(vector, dtype=complex)
        if vector.shape != (4, ):
            raise ValueError(f"Expect 4 amplitudes, got shape {vector.shape}")
        if normalize:
            vector = vector / np.linalg.norm(vector)
        return cls(*(complex(i) for i in vector))

    @classmethod
    def basis_state(cls, label: str) -> "PureTwoQubitState":
        """Product state of the rectilinear basis, e.g. `basis_state("HV")`"""
        if label not in BASIS:
            raise ValueError(f"Expect one of {', '.join(BASIS)}, got {label!r}")
        vector = np.zeros(4, dtype=complex)
        vector[BASIS.index(label)] = 1.0
        return cls.from_vector(vector)

    @classmethod
    def bell(cls, sign: typing.Literal[1, -1] = 1) -> "PureTwoQubitState":
        """(|HH> + sign |VV>) / sqrt(2)"""
        if sign not in (1, -1):
            raise ValueError(f"Expect sign 1 or -1, got {sign!r}")
        amplitude = 1 / math.sqrt(2)
        return cls(complex(amplitude), 0j, 0j, complex(sign * amplitude))

    @classmethod
    def psi_plus(cls) -> "PureTwoQubitState":
        return cls.bell(1)

    @classmethod
    def psi_minus(cls) -> "PureTwoQubitState":
        return cls.bell(-1)

    @classmethod
    def haar_random(cls, random_state: np.random.Generator) -> "PureTwoQubitState":
        """First column of a Haar-random unitary"""
        return cls.from_vector(unitary_group.rvs(4, random_state=random_state)[:, 0], normalize=True)


@dataclass_json
@dataclasses.dataclass
class _MatrixRecord:
    basis: list[str]
    entries: list[list[float]]


class _DensityMatrixBase(ValidatorMixin):
    matrix: np.ndarray
    basis: typing.ClassVar[tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(self, "matrix", frozen_array(self.matrix, complex))
        super().__post_init__()

    def to_json(self) -> str:
        """Row-major [re, im] pairs"""
        entries = [[float(i.real), float(i.imag)] for i in self.matrix.ravel()]
        return _MatrixRecord(basis=list(self.basis), entries=entries).to_json()

    @classmethod
    def from_json(cls, text: str) -> typing.Self:
        record = _MatrixRecord.from_json(text)
        if tuple(record.basis) != cls.basis:
            raise ValueError(f"Expect basis {', '.join(cls.basis)}, got {', '.join(record.basis)}")
        size = len(cls.basis)
        if len(record.entries) != size * size or any(len(i) != 2 for i in record.entries):
            raise ValueError(f"Expect {size * size} [re, im] pairs")
        values = np.array([complex(re, im) for re, im in record.entries]).reshape(size, size)
        return cls(values)


@dataclasses.dataclass(frozen=True, eq=False)
class DensityMatrix4(_DensityMatrixBase):
    """Two-photon polarization state"""
    matrix: np.ndarray = (
        v.shape(4, 4) >> v.finite() >> v.hermitian(HERMITIAN_TOL) >> v.unit_trace(TRACE_TOL) >> v.psd(PSD_FLOOR)
    )
    basis: typing.ClassVar[tuple[str, ...]] = BASIS

    @classmethod
    def from_pure(cls, psi: PureTwoQubitState) -> "DensityMatrix4":
        return cls(np.outer(psi.vector, psi.vector.conj()))

    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()


@dataclasses.dataclass(frozen=True, eq=False)
class DensityMatrix2(_DensityMatrixBase):
    """Single-photon polarization state"""
    matrix: np.ndarray = (
        v.shape(2, 2) >> v.finite() >> v.hermitian(HERMITIAN_TOL) >> v.unit_trace(TRACE_TOL) >> v.psd(PSD_FLOOR)
    )
    basis: typing.ClassVar[tuple[str, ...]] = ("H", "V")


def coherence_mask(k1, k2, k12, l12) -> np.ndarray:
    """
    Factors multiplying the entries of the initial density matrix, shape `(..., 4, 4)`.
    """
    k1, k2, k12, l12 = np.broadcast_arrays(*(np.asarray(i, dtype=complex) for i in (k1, k2, k12, l12)))
    one = np.ones_like(k1)
    rows = (
        (one, k2, k1, k12),
        (k2.conj(), one, l12, k1),
        (k1.conj(), l12.conj(), one, k2),
        (k12.conj(), k1.conj(), k2.conj(), one),
    )
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


def dephase_many(psi: PureTwoQubitState, k1, k2, k12, l12) -> np.ndarray:
    """
    Evolved density matrices for arrays of decoherence values, shape `(..., 4, 4)`; no validation.
    """
    vector = psi.vector
    return np.outer(vector, vector.conj()) * coherence_mask(k1, k2, k12, l12)


def apply_dephasing(psi: PureTwoQubitState, dec: DecoherenceSet) -> DensityMatrix4:
    """
    Polarization state after the pure dephasing process: populations are kept,
    every coherence is multiplied by the decoherence function of the arms it spans.
    """
    logger.debug("Dephase %s with %s", log_value_repr(psi, logging.DEBUG, logger),
                 log_value_repr(dec, logging.DEBUG, logger))
    return DensityMatrix4(dephase_many(psi, dec.k1, dec.k2, dec.k12, dec.l12))


def partial_trace(matrix: np.ndarray, arm: int) -> np.ndarray:
    """
    Reduced state of photon `arm` from two-photon matrices of shape `(..., 4, 4)`.
    """
    tensor = np.asarray(matrix).reshape(np.shape(matrix)[:-2] + (2, 2, 2, 2))
    if arm == 1:
        return np.einsum("...ijkj->...ik", tensor)
    if arm == 2:
        return np.einsum("...ijil->...jl", tensor)
    raise ValueError(f"Expect arm 1 or 2, got {arm!r}")


def reduce_to_arm(rho: DensityMatrix4, arm: int) -> DensityMatrix2:
    """Trace out the polarization of the other photon"""
    return DensityMatrix2(partial_trace(rho.matrix, arm))


def is_factorized(dec: DecoherenceSet, tol: float) -> bool:
    """
    The map is a product of local maps iff k12 = k1 k2 and l12 = k1 conj(k2).
    """
    if not tol > 0.0:
        raise ValueError(f"Expect positive tolerance, got {tol!r}")
    return (abs(dec.k12 - dec.k1 * dec.k2) <= tol
            and abs(dec.l12 - dec.k1 * dec.k2.conjugate()) <= tol)


def unitary_grid_evolution(psi: PureTwoQubitState, grid: AmplitudeGrid, x1: float, x2: float) -> DensityMatrix4:
    """
    Evolve the joint polarization and frequency amplitude with the local plate unitaries and trace
    out the frequencies.

    A V photon in arm i picks up the phase omega_i * x_i relative to an H photon, the common phase is dropped.
    """
    logger.debug("Unitary evolution on %sx%s grid at (%s, %s)", len(grid.axis1), len(grid.axis2), x1, x2)
    check_aliasing(grid, np.asarray(x1), np.asarray(x2))
    arm1 = (np.ones_like(grid.axis1, dtype=complex), np.exp(1j * grid.axis1 * x1))
    arm2 = (np.ones_like(grid.axis2, dtype=complex), np.exp(1j * grid.axis2 * x2))
    components = np.stack([
        amplitude * grid.g * np.multiply.outer(arm1[p1], arm2[p2])
        for amplitude, (p1, p2) in zip(psi.vector, itertools.product((0, 1), (0, 1)))
    ]).reshape(4, -1)
    return DensityMatrix4(components @ components.conj().T * grid.cell_area)
