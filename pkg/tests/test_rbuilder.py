import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ritzforge import linalg
from ritzforge.exceptions import AdmissibilityError, DegeneratePrescription, SingularRError
from ritzforge.prescription import INF, random_prescription
from ritzforge.qbuilder import complete_q, first_row_from_residuals
from ritzforge.rbuilder import det_affine_coeffs, forge, prescribe_column

from conftest import WORKED_H, make

Q2 = np.array([[0.8, 0.6], [0.6, -0.8]])


def pair_err(got, want):
    got = list(got)
    worst = 0.0
    for w in want:
        j = int(np.argmin([abs(g - w) for g in got]))
        worst = max(worst, abs(got[j] - w) / abs(w))
        got.pop(j)
    return worst


class TestDetAffineCoeffs:
    def test_one_by_one(self):
        co = det_affine_coeffs([[0.8]], np.zeros((1, 0)), 2)
        np.testing.assert_allclose(co.c, [1])
        assert co.d == pytest.approx(-1.6)

    @pytest.mark.parametrize("theta, c, d", [(3, [1.8, -0.8], -5.16), (5, [3, -2.4], -18.6)])
    def test_worked(self, theta, c, d):
        co = det_affine_coeffs(Q2.T, [[1.6], [0]], theta)
        np.testing.assert_allclose(co.c, c, rtol=1e-13)
        assert co.d == pytest.approx(d, rel=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_affine_identity(self, k, seed):
        rng = np.random.default_rng(seed)
        qs = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        fixed = np.triu(rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k)))[:, : k - 1]
        theta = complex(*rng.uniform(-3, 3, 2))
        co = det_affine_coeffs(qs, fixed, theta)
        for _ in range(3):
            v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            rk = np.column_stack([fixed, v])
            want = np.linalg.det(rk - theta * qs)
            scale = max(1.0, np.linalg.norm(rk - theta * qs)) ** k
            assert abs(co(v) - want) <= 1e-10 * scale


class TestPrescribeColumn:
    def test_first_step(self):
        np.testing.assert_allclose(prescribe_column(1, Q2, np.zeros((1, 0)), (2,), False), [1.6])

    def test_worked_second_step(self):
        col = prescribe_column(2, Q2, [[1.6], [0]], (3, 5), False)
        np.testing.assert_allclose(col, [-1.3, -9.375], rtol=1e-13)
        r2 = np.array([[1.6, col[0]], [0, col[1]]])
        mu = np.linalg.eigvals(Q2.T @ np.linalg.inv(r2))
        assert pair_err(mu, [1 / 3, 1 / 5]) < 1e-13

    def test_plateau_column(self):
        q = complete_q([0.8, 0, 0.6])
        col = prescribe_column(2, q, [[1.6], [0]], (2, INF), True)
        np.testing.assert_array_equal(col, [0, 1])

    def test_degenerate(self):
        with pytest.raises(DegeneratePrescription) as exc:
            prescribe_column(2, Q2, [[1.6], [0]], (3, 3), False)
        assert exc.value.step == 2

    def test_negligible_diagonal(self):
        with pytest.raises(SingularRError) as exc:
            prescribe_column(1, Q2, np.zeros((1, 0)), (2,), False, scale=1e12)
        assert exc.value.step == 1

    def test_infinite_value_outside_plateau(self):
        with pytest.raises(AdmissibilityError):
            prescribe_column(2, Q2, [[1.6], [0]], (3, INF), False)


class TestForge:
    def test_one_by_one(self):
        res = forge(make([1.0], [(2,)]))
        np.testing.assert_allclose(res.h, [[2]])

    def test_worked(self, worked):
        res = forge(worked)
        np.testing.assert_allclose(res.h, WORKED_H, atol=1e-12)
        assert abs(np.trace(res.h) - 8) <= 1e-10
        assert abs(linalg.determinant(res.h) - 15) <= 1e-10
        np.testing.assert_allclose(res.r, [[1.6, -1.3], [0, -9.375]], atol=1e-12)
        assert res.conditions[0] == 1.0 and res.conditions[1] > 1

    def test_plateau(self, plateau3):
        res = forge(plateau3)
        np.testing.assert_array_equal(res.r[:, 1], [0, 1, 0])
        np.testing.assert_array_equal(linalg.upper_tri_inverse(res.r)[:, 1], [0, 1, 0])
        assert res.conditions[1] is None
        assert pair_err(np.linalg.eigvals(res.h), [1, 4, 7]) < 1e-12

    def test_inadmissible(self):
        with pytest.raises(AdmissibilityError):
            forge(make([1, 0.6, 0.6], [(2,), (7, INF), (1, 4, 7)]))

    @pytest.mark.parametrize("seed", range(25))
    def test_structure_and_spectrum(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 13))
        plateaus = {k for k in range(1, n) if rng.random() < 0.3}
        p = random_prescription(n, plateaus, seed=seed)
        res = forge(p)
        h, q, r = res.h, res.q, res.r
        assert np.linalg.norm(q @ r - h) <= 1e-12 * n * np.linalg.norm(h)
        assert np.linalg.norm(q.conj().T @ q - np.eye(n)) <= 1e-12 * n
        assert np.all(np.tril(h, -2) == 0) and np.all(np.tril(r, -1) == 0)
        sub = np.diag(h, -1)
        assert np.all(sub.real > 0) and np.all(sub.imag == 0)
        d = np.abs(np.diag(r))
        assert d.min() > 1e-10 * d.max()
        for k in plateaus:
            expect = np.zeros(n)
            expect[k - 1] = 1
            np.testing.assert_array_equal(r[:, k - 1], expect)
            np.testing.assert_array_equal(linalg.upper_tri_inverse(r)[:, k - 1], expect)
        # the last step is the ordinary eigenproblem of H
        assert pair_err(linalg.eigenvalues(h), p.ritz[n]) <= 1e-8

    @pytest.mark.parametrize("seed", range(15))
    def test_roots_of_step_determinants(self, seed):
        # holds for any admissible data, including unrelated values per step
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 13))
        plateaus = {k for k in range(1, n) if rng.random() < 0.3}
        p = random_prescription(n, plateaus, seed=seed, jitter=None)
        res = forge(p)
        q, r = res.q, res.r
        for k in range(1, n + 1):
            if k in plateaus:
                continue
            rk = r[:k, :k]
            for th in p.ritz[k]:
                val = abs(linalg.determinant(rk - th * q[:k, :k].conj().T))
                assert val <= 1e-9 * np.linalg.norm(rk) ** k

    def test_sign_overrides_give_equivalent_matrix(self):
        p = random_prescription(6, {2}, seed=4)
        rng = np.random.default_rng(0)
        signed = make(
            p.schedule.norms, p.ritz.steps,
            first_row_signs=np.exp(2j * np.pi * rng.random(6)),
            rho_signs=np.exp(2j * np.pi * rng.random(5)),
        )
        h0, h1 = forge(p).h, forge(signed).h
        assert np.linalg.norm(h1 - h0) <= 1e-12 * np.linalg.norm(h0)


def _mp_forge(p):
    # 50-digit solve of the same determinant conditions, plain cofactor expansion
    mpmath.mp.dps = 50
    q = complete_q(first_row_from_residuals(p.schedule))
    n = p.n
    qm = mpmath.matrix(q.tolist())
    r = mpmath.zeros(n, n)
    stagnant = p.schedule.plateau_steps
    for k in range(1, n + 1):
        if k in stagnant:
            r[k - 1, k - 1] = 1
            continue
        a = mpmath.matrix(k, k)
        b = mpmath.matrix(k, 1)
        for i, th in enumerate(p.ritz[k]):
            th = mpmath.mpc(th)
            m = mpmath.matrix(k, k)
            for x in range(k):
                for y in range(k - 1):
                    m[x, y] = r[x, y] - th * mpmath.conj(qm[y, x])
            for j in range(k):
                for x in range(k):
                    m[x, k - 1] = 1 if x == j else 0
                a[i, j] = mpmath.det(m)
            for x in range(k):
                m[x, k - 1] = -th * mpmath.conj(qm[k - 1, x])
            b[i] = -mpmath.det(m)
        col = mpmath.lu_solve(a, b)
        for x in range(k):
            r[x, k - 1] = col[x]
    return np.array((qm * r).tolist(), dtype=complex)


@pytest.mark.parametrize("n, plateaus, seed", [(4, set(), 1), (6, {2}, 2), (7, {3, 4}, 3)])
def test_forge_matches_high_precision(n, plateaus, seed):
    p = random_prescription(n, plateaus, seed=seed)
    h = forge(p).h
    want = _mp_forge(p)
    # forge applies an e_1-fixing diagonal similarity; compare moduli
    assert np.max(np.abs(np.abs(h) - np.abs(want))) <= 1e-9 * np.linalg.norm(want)
