import numpy as np
import pytest
from scipy.stats import unitary_group

from nonlocal_dephasing.analysis.distance import concurrence, concurrences, trace_distance, trace_distances
from nonlocal_dephasing.channel import DensityMatrix2, DensityMatrix4, PureTwoQubitState, apply_dephasing, dephase_many
from nonlocal_dephasing.spectra import DecoherenceSet
from ..common import bell_pair, random_decoherence_set, random_mixed_state


def _pure(label: str) -> DensityMatrix4:
    return DensityMatrix4.from_pure(PureTwoQubitState.basis_state(label))


class TestTraceDistance:

    def test_identity(self):
        rho = DensityMatrix4(random_mixed_state(np.random.default_rng(0)))
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal(self):
        assert trace_distance(_pure("HH"), _pure("VV")) == pytest.approx(1.0, abs=1e-12)

    def test_single_photon(self):
        h = DensityMatrix2(np.diag([1.0, 0.0]))
        diagonal = DensityMatrix2(np.full((2, 2), 0.5))
        assert trace_distance(h, diagonal) == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_metric(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            a, b, c = (random_mixed_state(rng) for _ in range(3))
            assert trace_distances(a, b) == pytest.approx(trace_distances(b, a), abs=1e-15)
            assert trace_distances(a, c) <= trace_distances(a, b) + trace_distances(b, c) + 1e-10
            assert 0.0 <= trace_distances(a, b) <= 1.0 + 1e-12

    def test_unitary_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a, b = random_mixed_state(rng), random_mixed_state(rng)
            u = unitary_group.rvs(4, random_state=rng)
            rotated = trace_distances(u @ a @ u.conj().T, u @ b @ u.conj().T)
            assert rotated == pytest.approx(trace_distances(a, b), abs=1e-10)

    def test_bell_pair_is_coherence(self):
        rng = np.random.default_rng(3)
        sets = [random_decoherence_set(rng) for _ in range(1000)]
        values = {name: np.array([getattr(i, name) for i in sets]) for name in ("k1", "k2", "k12", "l12")}
        plus, minus = bell_pair()
        distances = trace_distances(dephase_many(plus, **values), dephase_many(minus, **values))
        np.testing.assert_allclose(distances, np.abs(values["k12"]), rtol=0.0, atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="Expect states of the same dimension"):
            trace_distance(_pure("HH"), DensityMatrix2(np.eye(2) / 2))
        with pytest.raises(ValueError, match="Expect matrices of the same shape"):
            trace_distances(np.eye(4) / 4, np.eye(2) / 2)


class TestConcurrence:

    @pytest.mark.parametrize("psi", (PureTwoQubitState.psi_plus(), PureTwoQubitState.psi_minus()))
    def test_bell(self, psi):
        assert concurrence(DensityMatrix4.from_pure(psi)) == pytest.approx(1.0, abs=1e-10)

    def test_product(self):
        assert concurrence(_pure("HV")) == pytest.approx(0.0, abs=1e-10)

    def test_evolved_bell(self):
        dec = DecoherenceSet(0.9 + 0j, 0.8 + 0j, 0.5 + 0j, 0.3 + 0j)
        assert concurrence(apply_dephasing(PureTwoQubitState.psi_plus(), dec)) == pytest.approx(0.5, abs=1e-10)

    def test_locked_to_coherence(self):
        rng = np.random.default_rng(4)
        sets = [random_decoherence_set(rng) for _ in range(200)]
        values = {name: np.array([getattr(i, name) for i in sets]) for name in ("k1", "k2", "k12", "l12")}
        result = concurrences(dephase_many(PureTwoQubitState.psi_plus(), **values))
        np.testing.assert_allclose(result, np.abs(values["k12"]), rtol=0.0, atol=1e-10)

    @pytest.mark.parametrize("p", (0.0, 0.2, 1 / 3, 0.6, 1.0))
    def test_werner(self, p):
        singlet = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2)
        rho = p * np.outer(singlet, singlet) + (1 - p) * np.eye(4) / 4
        assert concurrence(DensityMatrix4(rho)) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-10)

    def test_pure_states(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a, b, c, d = PureTwoQubitState.haar_random(rng).vector
            rho = DensityMatrix4.from_pure(PureTwoQubitState(a, b, c, d))
            assert concurrence(rho) == pytest.approx(2 * abs(a * d - b * c), abs=1e-9)

    def test_single_photon_rejected(self):
        with pytest.raises(TypeError, match="expect DensityMatrix4"):
            concurrence(DensityMatrix2(np.eye(2) / 2))
