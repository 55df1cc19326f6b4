"""Column-by-column construction of R so that ``H = QR`` has prescribed
harmonic Ritz values.

At step ``k`` the harmonic Ritz values of ``{H, e_1}`` are the roots of
``det(R_k - theta Q_k^*)``. Only the last column of ``R_k`` is still free,
and the determinant is affine in that column, so requiring it to vanish at
the ``k`` prescribed values is a ``k x k`` linear system. At a stagnant step
Q_k is singular, the new harmonic Ritz value is infinite whatever R does,
and the column is simply ``e_k``.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import AdmissibilityError, DegeneratePrescription, SingularRError, SingularSystemError
from .prescription import INF, validate
from .qbuilder import complete_q, first_row_from_residuals, stagnation_steps

__all__ = [
    "AffineDetCoeffs",
    "ForgeResult",
    "det_affine_coeffs",
    "forge",
    "prescribe_column",
]

DIAG_RTOL = 1e-10


@dataclass(frozen=True)
class AffineDetCoeffs:
    """``det(R_k - theta Q_k^*) = c @ v + d`` for the unknown last column ``v``."""

    c: np.ndarray
    d: complex

    def __call__(self, v):
        return complex(self.c @ np.asarray(v, dtype=np.complex128) + self.d)


@dataclass(frozen=True)
class ForgeResult:
    """Output of :func:`forge`.

    ``h = q @ r`` is irreducible upper Hessenberg with a real positive
    subdiagonal. ``conditions[k-1]`` is the infinity-norm condition number of
    the system solved at step ``k`` (``None`` at stagnant steps).
    """

    h: np.ndarray
    q: np.ndarray
    r: np.ndarray
    prescription: object
    conditions: tuple


def det_affine_coeffs(qk_star, r_partial, theta):
    """Affine coefficients of ``det(R_k - theta Q_k^*)`` in the last column of R_k.

    Parameters
    ----------
    qk_star : (k, k) array_like
        Conjugate transpose of the leading ``k x k`` block of Q.
    r_partial : (k, k-1) array_like
        The already fixed first ``k - 1`` columns of R_k.
    theta : complex
        Finite nonzero harmonic Ritz value.
    """
    qk_star = np.asarray(qk_star, dtype=np.complex128)
    k = qk_star.shape[0]
    m = np.empty((k, k), dtype=np.complex128)
    m[:, : k - 1] = np.asarray(r_partial, dtype=np.complex128).reshape(k, k - 1)
    m[:, : k - 1] -= theta * qk_star[:, : k - 1]
    c = np.empty(k, dtype=np.complex128)
    for j in range(k):
        m[:, k - 1] = 0.0
        m[j, k - 1] = 1.0
        c[j] = linalg.determinant(m)
    m[:, k - 1] = -theta * qk_star[:, k - 1]
    return AffineDetCoeffs(c, linalg.determinant(m))


def _solve_column(k, q, r_partial, thetas):
    qk_star = q[:k, :k].conj().T
    rows = [det_affine_coeffs(qk_star, r_partial, th) for th in thetas]
    a = np.array([row.c for row in rows])
    b = -np.array([row.d for row in rows])
    try:
        col = linalg.solve_linear(a, b)
    except SingularSystemError as exc:
        raise DegeneratePrescription(
            f"step {k}: the determinant conditions are linearly dependent ({exc})", step=k
        ) from exc
    return col, linalg.cond_inf(a)


def prescribe_column(k, q, r_partial, thetas, plateau, scale=0.0):
    """New (k-th) column of R.

    Parameters
    ----------
    k : int
        1-based step.
    q : (n, n) ndarray
        The unitary Hessenberg factor.
    r_partial : (k, k-1) array_like
        Leading part of the first ``k - 1`` columns of R.
    thetas : sequence
        The ``k`` prescribed harmonic Ritz values at step ``k``.
    plateau : bool
        Whether ``k`` is a stagnant step.
    scale : float
        Largest ``|r_jj|`` among earlier columns.

    Returns
    -------
    numpy.ndarray
        Column of length ``k``.
    """
    col, _ = _prescribe(k, q, r_partial, thetas, plateau, scale)
    return col


def _prescribe(k, q, r_partial, thetas, plateau, scale):
    if plateau:
        col = np.zeros(k, dtype=np.complex128)
        col[k - 1] = 1.0
        return col, None
    finite = [th for th in thetas if th is not INF]
    if len(finite) != k:
        raise AdmissibilityError(f"step {k} is not stagnant but has infinite harmonic Ritz values")
    col, cond = _solve_column(k, q, r_partial, finite)
    diag = abs(col[k - 1])
    if diag <= DIAG_RTOL * max(scale, diag):
        raise SingularRError(f"step {k}: r_kk = {col[k - 1]!r} is negligible", step=k)
    return col, cond


def _positive_subdiagonal(h, q, r):
    # Diagonal unitary similarity D^* (.) D with D e_1 = e_1: keeps the pair
    # {H, e_1} equivalent for GMRES and makes the subdiagonal of H real positive.
    n = h.shape[0]
    d = np.ones(n, dtype=np.complex128)
    for i in range(1, n):
        z = h[i, i - 1] * d[i - 1]
        d[i] = z / abs(z)
    scale = np.outer(d.conj(), d)
    out = []
    for m in (h, q, r):
        diag = np.diag(m).copy()
        m = m * scale
        np.fill_diagonal(m, diag)
        out.append(m)
    h2, q2, r2 = out
    idx = np.arange(1, n)
    h2[idx, idx - 1] = np.abs(h[idx, idx - 1])
    return h2, q2, r2


def forge(p):
    """Build ``{H, e_1}`` realizing a prescription.

    Q comes from the residual schedule, R column by column from the harmonic
    Ritz values, and ``H = QR`` is finally scaled by a diagonal unitary
    similarity fixing ``e_1`` so that its subdiagonal is real positive, i.e.
    ``H`` is exactly the Hessenberg matrix Arnoldi would produce for it.

    Raises
    ------
    AdmissibilityError
        If ``validate(p)`` fails.
    DegeneratePrescription, SingularRError
        If some step's linear system is singular or yields ``r_kk ~ 0``;
        re-forging with perturbed values or other sign overrides may help.
    """
    report = validate(p)
    if not report.ok:
        v = report.violations[0]
        raise AdmissibilityError(f"prescription is not admissible: {v.message}", report.violations)
    n = p.n
    q = complete_q(first_row_from_residuals(p.schedule, p.first_row_signs), p.rho_signs)
    stagnant = stagnation_steps(q)
    r = np.zeros((n, n), dtype=np.complex128)
    conditions = []
    scale = 0.0
    for k in range(1, n + 1):
        col, cond = _prescribe(k, q, r[:k, : k - 1], p.ritz[k], k in stagnant, scale)
        r[:k, k - 1] = col
        scale = max(scale, abs(col[k - 1]))
        conditions.append(cond)
    h = q @ r
    h[np.tril_indices(n, -2)] = 0.0
    h, q, r = _positive_subdiagonal(h, q, r)
    return ForgeResult(h=h, q=q, r=r, prescription=p, conditions=tuple(conditions))
