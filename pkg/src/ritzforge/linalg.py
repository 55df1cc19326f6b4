"""Small dense complex linear algebra.

Everything here operates on ``numpy.complex128`` arrays and is written for
matrices of a few dozen rows at most: Givens QR of Hessenberg matrices,
eigenvalues by Householder reduction plus shifted complex QR iteration,
LU with partial pivoting, triangular inversion and determinants.
"""

import numpy as np

from ._validation import (
    as_complex_vector,
    check_square,
    is_upper_hessenberg,
    is_upper_triangular,
)
from .exceptions import (
    ConvergenceError,
    SingularMatrixError,
    SingularSystemError,
    StructureError,
)

__all__ = [
    "cond_inf",
    "determinant",
    "eigenvalues",
    "givens",
    "hessenberg_reduce",
    "lu_factor",
    "qr_hessenberg",
    "solve_linear",
    "upper_tri_inverse",
]

DEFLATION_TOL = 1e-14
SINGULAR_PIVOT_TOL = 1e-14
MAX_SWEEPS_PER_DIM = 100


def givens(a, b):
    """Complex rotation ``(c, s, r)`` with ``[[c̄, s̄], [-s, c]] @ [a, b] = [r, 0]``.

    ``r`` is real and nonnegative. For ``a = b = 0`` the identity is returned.
    """
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        return 1.0 + 0j, 0j, 0.0
    return a / r, b / r, r


def qr_hessenberg(h):
    """QR factorization of an upper Hessenberg matrix by Givens rotations.

    Parameters
    ----------
    h : (n, n) array_like
        Square upper Hessenberg matrix (entries below the subdiagonal must be
        exactly zero).

    Returns
    -------
    q : (n, n) ndarray
        Unitary upper Hessenberg factor.
    r : (n, n) ndarray
        Upper triangular factor whose diagonal is real and nonnegative,
        except where a diagonal entry is exactly zero.
    """
    r = check_square(h, "H")
    if not is_upper_hessenberg(r):
        raise StructureError("H must be upper Hessenberg")
    n = r.shape[0]
    q = np.eye(n, dtype=np.complex128)
    for j in range(n - 1):
        c, s, rho = givens(r[j, j], r[j + 1, j])
        top = r[j, j:].copy()
        bot = r[j + 1, j:].copy()
        r[j, j:] = np.conj(c) * top + np.conj(s) * bot
        r[j + 1, j:] = -s * top + c * bot
        r[j, j] = rho
        r[j + 1, j] = 0.0
        left = q[:, j].copy()
        right = q[:, j + 1].copy()
        q[:, j] = c * left + s * right
        q[:, j + 1] = -np.conj(s) * left + np.conj(c) * right
    last = r[n - 1, n - 1]
    if last != 0:
        phase = last / abs(last)
        q[:, n - 1] *= phase
        r[n - 1, :] *= np.conj(phase)
        r[n - 1, n - 1] = abs(last)
    return q, r


def hessenberg_reduce(a):
    """Unitary similarity to upper Hessenberg form via Householder reflectors."""
    h = check_square(a, "A")
    n = h.shape[0]
    for j in range(n - 2):
        x = h[j + 1:, j]
        if not np.any(x[1:]):
            continue
        xnorm = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * xnorm
        v /= np.linalg.norm(v)
        h[j + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[j + 1:, :])
        h[:, j + 1:] -= 2.0 * np.outer(h[:, j + 1:] @ v, v.conj())
        h[j + 2:, j] = 0.0
    return h


def _eig2(a, b, c, d):
    # Eigenvalues of [[a, b], [c, d]], avoiding cancellation in the small root.
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    if (np.conj(mean) * disc).real < 0:
        disc = -disc
    big = mean + disc
    if big == 0:
        return 0j, 0j
    return big, (a * d - b * c) / big


def _wilkinson_shift(blk):
    a, b, c, d = blk[-2, -2], blk[-2, -1], blk[-1, -2], blk[-1, -1]
    l1, l2 = _eig2(a, b, c, d)
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


def _qr_sweep(blk, shift):
    """One explicitly shifted QR step ``B - σI = QR, B <- RQ + σI`` in place."""
    m = blk.shape[0]
    idx = np.arange(m)
    blk[idx, idx] -= shift
    rots = []
    for j in range(m - 1):
        c, s, rho = givens(blk[j, j], blk[j + 1, j])
        top = blk[j, j:].copy()
        bot = blk[j + 1, j:].copy()
        blk[j, j:] = np.conj(c) * top + np.conj(s) * bot
        blk[j + 1, j:] = -s * top + c * bot
        blk[j, j] = rho
        blk[j + 1, j] = 0.0
        rots.append((c, s))
    for j, (c, s) in enumerate(rots):
        left = blk[: j + 2, j].copy()
        right = blk[: j + 2, j + 1].copy()
        blk[: j + 2, j] = c * left + s * right
        blk[: j + 2, j + 1] = -np.conj(s) * left + np.conj(c) * right
    blk[idx, idx] += shift


def eigenvalues(a):
    """All eigenvalues of a square complex matrix, with multiplicity.

    Householder reduction to Hessenberg form followed by single-shift complex
    QR iteration with Wilkinson shifts. A subdiagonal entry is set to zero
    once ``|h[i+1, i]| < 1e-14 * (|h[i, i]| + |h[i+1, i+1]|)``; when both
    diagonal neighbours vanish the Frobenius norm of the matrix is used as
    the scale instead. 2x2 blocks are finished in closed form.

    The order of the returned values is unspecified.

    Raises
    ------
    ConvergenceError
        If more than ``100 * n`` sweeps are needed.
    """
    h = hessenberg_reduce(a)
    n = h.shape[0]
    fro = np.linalg.norm(h)
    out = np.empty(n, dtype=np.complex128)
    hi = n - 1
    sweeps = 0
    since_deflation = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            scale = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if scale == 0.0:
                scale = fro
            if sub == 0.0 or sub < DEFLATION_TOL * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            out[hi] = h[hi, hi]
            hi -= 1
            since_deflation = 0
            continue
        if lo == hi - 1:
            out[hi - 1], out[hi] = _eig2(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi])
            hi -= 2
            since_deflation = 0
            continue
        sweeps += 1
        since_deflation += 1
        if sweeps > MAX_SWEEPS_PER_DIM * n:
            raise ConvergenceError(
                f"shifted QR failed to deflate within {MAX_SWEEPS_PER_DIM * n} sweeps"
            )
        blk = h[lo:hi + 1, lo:hi + 1]
        if since_deflation % 11 == 10:
            # exceptional shift to break cycles
            shift = blk[-1, -1] + 0.75 * abs(blk[-1, -2]) * np.exp(0.5j * sweeps)
        else:
            shift = _wilkinson_shift(blk)
        _qr_sweep(blk, shift)
    return out


def lu_factor(a, singular_tol=None):
    """LU factorization with partial pivoting, ``a[perm] = L @ U``.

    Returns ``(lu, perm, sign)`` with unit-lower ``L`` and ``U`` packed in
    ``lu`` and ``sign`` the parity of the permutation. When ``singular_tol``
    is given, a pivot of magnitude below it raises
    :class:`SingularSystemError` carrying the 1-based pivot index. Without
    it, elimination stops early at an exactly zero pivot column and the
    returned ``U`` has a zero on its diagonal.
    """
    lu = check_square(a, "A")
    n = lu.shape[0]
    perm = np.arange(n)
    sign = 1
    for j in range(n):
        p = j + int(np.argmax(np.abs(lu[j:, j])))
        if p != j:
            lu[[j, p]] = lu[[p, j]]
            perm[[j, p]] = perm[[p, j]]
            sign = -sign
        pivot = lu[j, j]
        if singular_tol is not None and abs(pivot) < singular_tol:
            raise SingularSystemError(
                f"pivot {j + 1} has magnitude {abs(pivot):.3e} below {singular_tol:.3e}",
                index=j + 1,
            )
        if pivot == 0:
            break
        lu[j + 1:, j] /= pivot
        lu[j + 1:, j + 1:] -= np.outer(lu[j + 1:, j], lu[j, j + 1:])
    return lu, perm, sign


def _lu_solve(lu, perm, b):
    n = lu.shape[0]
    y = b[perm].astype(np.complex128)
    for i in range(1, n):
        y[i] -= lu[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - lu[i, i + 1:] @ y[i + 1:]) / lu[i, i]
    return y


def solve_linear(a, b):
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularSystemError
        If a pivot falls below ``1e-14 * ||a||_F``.
    """
    a = check_square(a, "A")
    b = as_complex_vector(b, "b")
    if b.size != a.shape[0]:
        raise StructureError(f"dimension mismatch: A is {a.shape}, b has {b.size}")
    lu, perm, _ = lu_factor(a, singular_tol=SINGULAR_PIVOT_TOL * np.linalg.norm(a))
    return _lu_solve(lu, perm, b)


def cond_inf(a):
    """Infinity-norm condition number ``||A||_inf ||A^-1||_inf`` (exact, via LU)."""
    a = check_square(a, "A")
    n = a.shape[0]
    lu, perm, _ = lu_factor(a, singular_tol=SINGULAR_PIVOT_TOL * np.linalg.norm(a))
    inv = np.column_stack([_lu_solve(lu, perm, e) for e in np.eye(n)])
    return float(np.abs(a).sum(axis=1).max() * np.abs(inv).sum(axis=1).max())


def upper_tri_inverse(r):
    """Inverse of an upper triangular matrix by back substitution.

    Raises
    ------
    SingularMatrixError
        If some ``|r_ii| <= 1e-14 * max_i |r_ii|``; ``index`` is 1-based.
    """
    r = check_square(r, "R")
    if not is_upper_triangular(r):
        raise StructureError("R must be upper triangular")
    n = r.shape[0]
    diag = np.abs(np.diag(r))
    cutoff = SINGULAR_PIVOT_TOL * diag.max()
    bad = np.flatnonzero(diag <= cutoff)
    if bad.size:
        raise SingularMatrixError(
            f"diagonal entry {bad[0] + 1} of R is numerically zero", index=int(bad[0]) + 1
        )
    x = np.zeros_like(r)
    for j in range(n):
        x[j, j] = 1.0 / r[j, j]
        for i in range(j - 1, -1, -1):
            x[i, j] = -(r[i, i + 1:j + 1] @ x[i + 1:j + 1, j]) / r[i, i]
    return x


def determinant(a):
    """Determinant via LU with partial pivoting; singular input gives 0."""
    lu, _, sign = lu_factor(a)
    return complex(sign * np.prod(np.diag(lu)))
