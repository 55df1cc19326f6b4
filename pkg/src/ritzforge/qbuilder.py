"""Unitary Hessenberg factor Q from a GMRES residual schedule.

The GMRES residual norms of ``{H, e_1}`` are the tail norms of the first row
of the unitary factor Q in ``H = QR``, and a unitary irreducible upper
Hessenberg matrix is fixed, up to unimodular scalings, by its first row.
Stagnation at step ``k`` means column ``k`` of Q is a multiple of
``e_{k+1}``.
"""

import numpy as np

from ._validation import as_complex_matrix, as_complex_vector, check_unimodular
from .exceptions import AdmissibilityError, ArgumentError, ConsistencyError, PrematureTerminationError
from .prescription import PLATEAU_TOL, ResidualSchedule

__all__ = [
    "STAGNATION_TOL",
    "complete_q",
    "deflate_stagnant_columns",
    "first_row_from_residuals",
    "residuals_from_q",
    "stagnation_steps",
]

STAGNATION_TOL = 1e-13


def first_row_from_residuals(schedule, signs=None):
    """First row of Q with ``|q_1l|^2 = ||r_{l-1}||^2 - ||r_l||^2``.

    Plateau steps get an exact zero. ``signs`` (length n, unimodular)
    multiplies the nonnegative magnitudes entrywise.
    """
    if not isinstance(schedule, ResidualSchedule):
        schedule = ResidualSchedule(schedule)
    bad = schedule.violations()
    if bad:
        raise AdmissibilityError(f"invalid residual schedule: {bad[0].message}", bad)
    sq = np.array(schedule.norms) ** 2
    sq = np.append(sq, 0.0)
    row = np.sqrt(np.maximum(sq[:-1] - sq[1:], 0.0)).astype(np.complex128)
    row[np.abs(sq[:-1] - sq[1:]) <= PLATEAU_TOL] = 0.0
    if signs is not None:
        row *= check_unimodular(signs, schedule.n, "first_row_signs")
    return row


def _tail_norms(row):
    # t[i] = sqrt(sum_{l > i} |q_1l|^2), i = 0..n; t[0] is the full norm.
    sq = np.abs(row) ** 2
    tails = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    return np.sqrt(tails)


def complete_q(first_row, rhos=None):
    """Unitary irreducible upper Hessenberg Q with the given first row.

    Row ``i + 1`` (1-based) is ``q_{i+1,i} = rho_i t_i / t_{i-1}`` on the
    subdiagonal and ``q_{i+1,j} = -rho_i conj(q_1i) q_1j / (t_{i-1} t_i)``
    for ``j > i``, where ``t_i`` is the norm of the first-row tail after
    column ``i`` (the GMRES residual norm at step ``i``).

    Parameters
    ----------
    first_row : (n,) array_like
        Unit-norm first row.
    rhos : (n-1,) array_like, optional
        Unimodular subdiagonal phases, default all ones.
    """
    row = as_complex_vector(first_row, "first_row")
    n = row.size
    total = np.sum(np.abs(row) ** 2)
    if abs(total - 1.0) > 1e-12:
        raise ArgumentError(f"first row must have unit norm, got squared norm {total!r}")
    rho = np.ones(n - 1, dtype=np.complex128)
    if rhos is not None and n > 1:
        rho = check_unimodular(rhos, n - 1, "rho_signs")
    t = _tail_norms(row)
    for i in range(1, n):
        if t[i] ** 2 < PLATEAU_TOL:
            raise PrematureTerminationError(
                f"first row is exhausted after column {i}; the Krylov process would end early",
                step=i,
            )
    q = np.zeros((n, n), dtype=np.complex128)
    q[0] = row
    for i in range(1, n):
        q[i, i - 1] = rho[i - 1] * t[i] / t[i - 1]
        q[i, i:] = -rho[i - 1] * np.conj(row[i - 1]) * row[i:] / (t[i - 1] * t[i])
    return q


def residuals_from_q(q):
    """Residual schedule read off the first row of Q."""
    q = as_complex_matrix(q, "Q")
    t = _tail_norms(q[0])
    return ResidualSchedule(tuple(float(x) for x in t[:-1]))


def _column_stagnant(q, k, tol):
    col = np.abs(q[:, k - 1]).copy()
    col[k] = 0.0
    return bool(np.all(col <= tol))


def stagnation_steps(q, tol=STAGNATION_TOL):
    """Steps ``k`` at which GMRES on ``{QR, e_1}`` stagnates.

    Computed twice: from ``|q_1k| <= tol`` and from column ``k`` being
    supported on row ``k + 1`` only. The two must agree.

    Raises
    ------
    ConsistencyError
        If the characterizations disagree at some step.
    """
    q = as_complex_matrix(q, "Q")
    n = q.shape[0]
    by_row = {k for k in range(1, n + 1) if abs(q[0, k - 1]) <= tol}
    by_col = {k for k in range(1, n) if _column_stagnant(q, k, tol)}
    if by_row != by_col:
        k = min(by_row ^ by_col)
        raise ConsistencyError(
            f"row-one and column characterizations of stagnation disagree at step {k}", step=k
        )
    return frozenset(by_row)


def deflate_stagnant_columns(q, tol=STAGNATION_TOL):
    """Copy of Q with every stagnant column reduced exactly to its row-(k+1) entry.

    Only columns that pass both stagnation tests are touched, so the change
    is a perturbation of size at most ``tol`` per entry.
    """
    q = as_complex_matrix(q, "Q")
    n = q.shape[0]
    for k in range(1, n):
        if abs(q[0, k - 1]) <= tol and _column_stagnant(q, k, tol):
            keep = q[k, k - 1]
            q[:, k - 1] = 0.0
            q[k, k - 1] = keep
    return q
