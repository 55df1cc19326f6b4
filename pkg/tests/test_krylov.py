import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from ritzforge import linalg
from ritzforge.exceptions import ArgumentError, StructureError
from ritzforge.krylov import analyze, arnoldi, gmres_history, harmonic_ritz, pair_values, verify
from ritzforge.prescription import INF, random_prescription
from ritzforge.qbuilder import complete_q
from ritzforge.rbuilder import forge

from conftest import WORKED_H, make, random_hessenberg


def e1(n):
    v = np.zeros(n, dtype=complex)
    v[0] = 1
    return v


def tail_formula(h):
    q, _ = linalg.qr_hessenberg(h)
    a = np.abs(q[0]) ** 2
    return [float(np.sqrt(a[k:].sum())) for k in range(h.shape[0])] + [0.0]


def finite(t):
    return [v for v in t if v is not INF]


def max_pair_err(want, got):
    return max((e for _, _, e in pair_values(want, got)), default=0.0)


class TestArnoldi:
    def test_hessenberg_is_fixed_point(self, rng):
        h = random_hessenberg(rng, 7)
        h[np.arange(1, 7), np.arange(6)] = rng.uniform(0.5, 2, 6)
        arn = arnoldi(h, e1(7))
        np.testing.assert_allclose(arn.v, np.eye(7), atol=1e-12)
        np.testing.assert_allclose(arn.h, h, atol=1e-12)
        assert arn.breakdown_step is None

    def test_identity_breaks_down(self):
        arn = arnoldi(np.eye(4), e1(4))
        assert arn.breakdown_step == 1
        assert arn.h.shape == (1, 1)

    @pytest.mark.parametrize("seed", range(10))
    def test_invariants(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b /= np.linalg.norm(b)
        arn = arnoldi(a, b)
        v, h = arn.v, arn.h
        assert np.linalg.norm(a @ v - v @ h) <= 1e-11 * n * np.linalg.norm(a)
        assert np.linalg.norm(v.conj().T @ v - np.eye(n)) <= 1e-12 * n
        np.testing.assert_allclose(v[:, 0], b)
        assert np.all(np.tril(h, -2) == 0)

    def test_requires_unit_rhs(self):
        with pytest.raises(ArgumentError):
            arnoldi(np.eye(2), [1.0, 1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(StructureError):
            arnoldi(np.eye(3), [1.0, 0.0])


class TestGmresHistory:
    def test_identity(self):
        assert gmres_history(np.eye(3), e1(3)) == pytest.approx([1, 0])

    def test_worked(self, worked):
        assert gmres_history(forge(worked).h, e1(2)) == pytest.approx([1, 0.6, 0], abs=1e-12)

    def test_plateau(self, plateau3):
        assert gmres_history(forge(plateau3).h, e1(3)) == pytest.approx([1, 0.6, 0.6, 0], abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_least_squares_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = 7
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b /= np.linalg.norm(b)
        hist = gmres_history(a, b)
        krylov = np.column_stack([np.linalg.matrix_power(a, j) @ b for j in range(n)])
        for k in range(1, n + 1):
            basis = a @ krylov[:, :k]
            y = np.linalg.lstsq(basis, b, rcond=None)[0]
            assert abs(hist[k] - np.linalg.norm(b - basis @ y)) <= 1e-9

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_tail_formula(self, n, seed):
        h = random_hessenberg(np.random.default_rng(seed), n)
        hist = gmres_history(h, e1(n))
        assert np.max(np.abs(np.subtract(hist, tail_formula(h)))) <= 1e-10
        assert all(hist[k + 1] <= hist[k] + 1e-12 for k in range(n))


class TestHarmonicRitz:
    def test_worked_step_one(self):
        assert harmonic_ritz(WORKED_H, 1)[0] == pytest.approx(2)

    def test_plateau_step_two(self, plateau3):
        t = harmonic_ritz(forge(plateau3).h, 2)
        assert t[1] is INF and t[0] == pytest.approx(2, rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_last_step_is_spectrum(self, seed):
        h = random_hessenberg(np.random.default_rng(seed), 8)
        assert max_pair_err(np.linalg.eigvals(h), harmonic_ritz(h, 8)) <= 1e-8

    @pytest.mark.parametrize("seed", range(10))
    def test_generalized_eigenproblem_oracle(self, seed):
        # theta solves (H~_k^* H~_k) z = theta H_k^* z with H~_k the (k+1) x k block
        rng = np.random.default_rng(seed)
        n = 7
        h = random_hessenberg(rng, n)
        for k in range(1, n + 1):
            ht = h[: min(k + 1, n), :k]
            want = scipy.linalg.eig(ht.conj().T @ ht, h[:k, :k].conj().T, right=False)
            got = harmonic_ritz(h, k)
            assert INF not in got
            assert max_pair_err(want, got) <= 1e-8

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
    def test_scale_covariance(self, n, seed, c):
        h = random_hessenberg(np.random.default_rng(seed), n)
        k = n // 2 + 1
        base = harmonic_ritz(h, k)
        scaled = harmonic_ritz(c * h, k)
        assert scaled.count(INF) == base.count(INF)
        want = [c * v for v in finite(base)]
        assert max_pair_err(want, finite(scaled)) <= 1e-9

    @pytest.mark.parametrize("seed", range(12))
    def test_stagnation_pattern_emerges(self, seed):
        # no prescription involved: Q with zeros in its first row, R random
        rng = np.random.default_rng(seed)
        n = 9
        start = int(rng.integers(1, 5))
        length = int(rng.integers(1, 4))
        w = rng.uniform(0.2, 1.0, n) * np.exp(2j * np.pi * rng.random(n))
        w[start : start + length] = 0.0
        q = complete_q(w / np.linalg.norm(w))
        r = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        r[np.diag_indices(n)] = rng.uniform(1, 2, n) * np.exp(2j * np.pi * rng.random(n))
        h = q @ r
        h[np.tril_indices(n, -2)] = 0
        before = harmonic_ritz(h, start)
        assert INF not in before
        for i in range(1, length + 1):
            t = harmonic_ritz(h, start + i)
            assert t.count(INF) == i
            assert max_pair_err(before, finite(t)) <= 1e-8
        assert harmonic_ritz(h, start + length + 1).count(INF) == 0

    def test_rejects_non_hessenberg(self):
        with pytest.raises(StructureError):
            harmonic_ritz(np.ones((3, 3)), 1)

    def test_rejects_bad_step(self):
        with pytest.raises(ArgumentError):
            harmonic_ritz(WORKED_H, 3)


class TestAnalyze:
    def test_worked(self, worked):
        rep = analyze(forge(worked).h, e1(2))
        assert rep.residual_history == pytest.approx([1, 0.6, 0], abs=1e-12)
        assert rep.harmonic_ritz_per_step[0] == pytest.approx((2,))
        assert rep.harmonic_ritz_per_step[1] == pytest.approx((3, 5))
        assert rep.stagnation_steps == frozenset()

    def test_scalar(self):
        rep = analyze([[2.0]], [1.0])
        assert rep.residual_history == pytest.approx([1, 0])
        assert rep.harmonic_ritz_per_step[0] == pytest.approx((2,))

    def test_plateau(self, plateau3):
        rep = analyze(forge(plateau3).h, e1(3))
        assert rep.stagnation_steps == {2}
        t = rep.harmonic_ritz_per_step[1]
        assert t[1] is INF and t[0] == pytest.approx(2)

    def test_breakdown(self):
        rep = analyze(np.diag([1.0, 2.0, 3.0]), [1.0, 0, 0])
        assert rep.breakdown_step == 1
        assert rep.residual_history == pytest.approx([1, 0])


class TestVerify:
    def test_pass(self, worked):
        rep = verify(worked, forge(worked).h)
        assert rep.passed and rep.first_failing_step is None
        assert rep.residual_max_abs_err <= 1e-12
        assert rep.ritz_max_rel_err <= 1e-12
        assert len(rep.per_step_detail) == 3

    def test_perturbed_fails(self, worked):
        h = forge(worked).h.astype(complex)
        h[0, 0] += 0.1
        rep = verify(worked, h)
        assert not rep.passed and rep.first_failing_step == 1

    def test_wrong_spectrum_fails_at_last_step(self, worked):
        other = make([1.0, 0.6], [(2,), (3, 6)])
        rep = verify(worked, forge(other).h)
        assert rep.verdict == "fail" and rep.first_failing_step == 2

    def test_infinite_count_mismatch(self, plateau3):
        wrong = make([1.0, 0.6, 0.6], [(2,), (2, INF), (1, 4, 7)])
        h = forge(make([1.0, 0.6, 0.3], [(2,), (2, 3), (1, 4, 7)])).h
        rep = verify(wrong, h)
        assert rep.ritz_max_rel_err == np.inf and not rep.passed

    def test_dimension_mismatch(self, worked):
        with pytest.raises(StructureError):
            verify(worked, np.eye(3))

    @pytest.mark.parametrize("seed", range(20))
    def test_forged_prescriptions_pass(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(1, 13))
        plateaus = {k for k in range(1, n) if rng.random() < 0.3}
        p = random_prescription(n, plateaus, seed=seed)
        h = forge(p).h
        assert verify(p, h).passed
        arn = arnoldi(h, e1(n))
        np.testing.assert_allclose(arn.v, np.eye(n), atol=1e-11)
        np.testing.assert_allclose(arn.h, h, atol=1e-11 * max(1.0, np.abs(h).max()))

    @pytest.mark.parametrize("seed", range(10))
    def test_independent_draws_small_n(self, seed):
        rng = np.random.default_rng(2000 + seed)
        n = int(rng.integers(1, 8))
        plateaus = {k for k in range(1, n) if rng.random() < 0.3}
        p = random_prescription(n, plateaus, seed=seed, jitter=None)
        assert verify(p, forge(p).h).passed


def test_pair_values_prefers_global_nearest():
    pairs = pair_values([1.0, 1.1], [1.12, 0.99])
    assert [(e, m) for e, m, _ in pairs] == [(1.0, 0.99), (1.1, 1.12)]
