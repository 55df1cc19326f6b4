"""Arnoldi, GMRES residual histories and harmonic Ritz values, measured.

This module knows nothing about how a matrix was built; it runs the Krylov
machinery on an arbitrary pair ``{A, b}`` and compares what it sees with a
:class:`~ritzforge.prescription.Prescription`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from ._validation import as_complex_vector, check_square, is_upper_hessenberg
from .exceptions import ArgumentError, ConsistencyError, SingularMatrixError, StructureError
from .prescription import INF, canonical_order
from .qbuilder import deflate_stagnant_columns, residuals_from_q, stagnation_steps

__all__ = [
    "AnalysisReport",
    "ArnoldiDecomposition",
    "VerifyReport",
    "analyze",
    "arnoldi",
    "gmres_history",
    "harmonic_ritz",
    "pair_values",
    "verify",
]

BREAKDOWN_RTOL = 1e-12
INFINITE_MU_RTOL = 1e-8
HISTORY_CHECK_TOL = 1e-10


@dataclass(frozen=True)
class ArnoldiDecomposition:
    """``A V = V H`` with orthonormal ``V`` (``n x m``) and Hessenberg ``H`` (``m x m``).

    ``m < n`` only when the process broke down at step ``breakdown_step = m``.
    """

    v: np.ndarray
    h: np.ndarray
    breakdown_step: int = None


@dataclass(frozen=True)
class AnalysisReport:
    residual_history: tuple
    harmonic_ritz_per_step: tuple
    stagnation_steps: frozenset
    breakdown_step: int = None


@dataclass(frozen=True)
class VerifyReport:
    residual_max_abs_err: float
    ritz_max_rel_err: float
    per_step_detail: tuple
    verdict: str
    first_failing_step: int = None
    tol_res: float = field(default=None, compare=False)
    tol_ritz: float = field(default=None, compare=False)

    @property
    def passed(self):
        return self.verdict == "pass"


def _check_rhs(a, b):
    a = check_square(a, "A")
    b = as_complex_vector(b, "b")
    if b.size != a.shape[0]:
        raise StructureError(f"dimension mismatch: A is {a.shape}, b has {b.size}")
    if abs(np.linalg.norm(b) - 1.0) > 1e-12:
        raise ArgumentError(f"b must have unit norm, got {np.linalg.norm(b)!r}")
    return a, b


def arnoldi(a, b):
    """Arnoldi process by modified Gram-Schmidt with one reorthogonalization pass.

    Stops with ``breakdown_step = j`` when the candidate vector at step
    ``j < n`` has norm below ``1e-12 ||A||_F``.
    """
    a, b = _check_rhs(a, b)
    n = a.shape[0]
    anorm = np.linalg.norm(a)
    v = np.zeros((n, n), dtype=np.complex128)
    h = np.zeros((n, n), dtype=np.complex128)
    v[:, 0] = b
    for j in range(n):
        w = a @ v[:, j]
        for _ in range(2):
            for i in range(j + 1):
                coef = np.vdot(v[:, i], w)
                h[i, j] += coef
                w -= coef * v[:, i]
        if j == n - 1:
            break
        beta = np.linalg.norm(w)
        if beta < BREAKDOWN_RTOL * anorm:
            m = j + 1
            return ArnoldiDecomposition(v[:, :m].copy(), h[:m, :m].copy(), breakdown_step=m)
        h[j + 1, j] = beta
        v[:, j + 1] = w / beta
    return ArnoldiDecomposition(v, h)


def _history_from_hessenberg(h):
    # Progressive Givens QR of the extended Hessenberg matrices; the entry
    # below the last column is zero (breakdown or step n).
    m = h.shape[0]
    rots = []
    g = np.zeros(m + 1, dtype=np.complex128)
    g[0] = 1.0
    hist = [1.0]
    for j in range(m):
        col = h[: j + 1, j].copy()
        for i, (c, s) in enumerate(rots):
            top, bot = col[i], col[i + 1]
            col[i] = np.conj(c) * top + np.conj(s) * bot
            col[i + 1] = -s * top + c * bot
        below = h[j + 1, j] if j + 1 < m else 0.0
        c, s, _ = linalg.givens(col[j], below)
        rots.append((c, s))
        g[j + 1] = -s * g[j]
        g[j] = np.conj(c) * g[j]
        hist.append(float(abs(g[j + 1])))
    return hist


def gmres_history(a, b):
    """Residual norms ``||r_0||, ..., ||r_n||`` of full GMRES with ``x_0 = 0``.

    Truncated after ``breakdown_step + 1`` entries if Arnoldi breaks down
    (the last entry is then zero: the exact solution has been reached).
    """
    return _history_from_hessenberg(arnoldi(a, b).h)


def _harmonic_ritz_from_qr(q, r, k):
    rk = r[:k, :k]
    try:
        rinv = linalg.upper_tri_inverse(rk)
    except SingularMatrixError as exc:
        raise ConsistencyError(f"R_{k} is singular ({exc})", step=k) from exc
    m = q[:k, :k].conj().T @ rinv
    cutoff = INFINITE_MU_RTOL * np.linalg.norm(m)
    values = [INF if abs(mu) <= cutoff else complex(1.0 / mu) for mu in linalg.eigenvalues(m)]
    return canonical_order(values)


def harmonic_ritz(h, k):
    """Harmonic Ritz values at step ``k`` of Arnoldi/GMRES on ``{H, e_1}``.

    With ``H = QR``, these are ``theta = 1 / mu`` for the eigenvalues ``mu``
    of ``Q_k^* R_k^{-1}``; ``|mu| <= 1e-8 ||Q_k^* R_k^{-1}||_F`` gives
    :data:`~ritzforge.prescription.INF`. Columns of Q certified stagnant by
    both tests of :func:`~ritzforge.qbuilder.stagnation_steps` are first
    cleaned to exact multiples of ``e_{k+1}``, which keeps the infinite
    values of a long stagnation phase exactly at zero ``mu``.

    Returns
    -------
    tuple
        ``k`` values in canonical order.
    """
    h = check_square(h, "H")
    if not is_upper_hessenberg(h):
        raise StructureError("H must be upper Hessenberg")
    n = h.shape[0]
    if not 1 <= k <= n:
        raise ArgumentError(f"step must lie in 1..{n}, got {k}")
    q, r = linalg.qr_hessenberg(h)
    return _harmonic_ritz_from_qr(deflate_stagnant_columns(q), r, k)


def analyze(a, b):
    """Run Arnoldi, GMRES and harmonic Ritz extraction on ``{A, b}``.

    The GMRES history is cross-checked against the tail norms of the first
    row of Q from the QR factorization of the Arnoldi Hessenberg matrix.
    """
    arn = arnoldi(a, b)
    hist = _history_from_hessenberg(arn.h)
    q, r = linalg.qr_hessenberg(arn.h)
    tails = list(residuals_from_q(q).norms) + [0.0]
    worst = max(range(len(hist)), key=lambda i: abs(hist[i] - tails[i]))
    if abs(hist[worst] - tails[worst]) > HISTORY_CHECK_TOL:
        raise ConsistencyError(
            f"GMRES residual at step {worst} disagrees with the QR first row "
            f"({hist[worst]!r} vs {tails[worst]!r})",
            step=worst,
        )
    qd = deflate_stagnant_columns(q)
    m = arn.h.shape[0]
    ritz = tuple(_harmonic_ritz_from_qr(qd, r, k) for k in range(1, m + 1))
    return AnalysisReport(
        residual_history=tuple(hist),
        harmonic_ritz_per_step=ritz,
        stagnation_steps=stagnation_steps(q),
        breakdown_step=arn.breakdown_step,
    )


def pair_values(expected, measured):
    """Greedy nearest pairing of finite values by relative error.

    Repeatedly takes the closest remaining (expected, measured) pair.
    Returns a list of ``(expected, measured, rel_err)`` in the order of
    ``expected``.
    """
    expected = list(expected)
    left = set(range(len(expected)))
    right = set(range(len(measured)))
    cands = sorted(
        (abs(measured[j] - e) / abs(e), i, j)
        for i, e in enumerate(expected)
        for j in range(len(measured))
    )
    chosen = {}
    for err, i, j in cands:
        if i in left and j in right:
            chosen[i] = (expected[i], measured[j], err)
            left.discard(i)
            right.discard(j)
    return [chosen[i] for i in sorted(chosen)]


def _compare_step(want, got):
    want_f = [v for v in want if v is not INF]
    got_f = [v for v in got if v is not INF]
    if len(want) != len(got) or len(want_f) != len(got_f):
        return math.inf
    pairs = pair_values(want_f, got_f)
    return max((err for _, _, err in pairs), default=0.0)


def verify(p, h, tol_res=1e-8, tol_ritz=1e-6):
    """Compare GMRES on ``{H, e_1}`` with a prescription.

    Residual norms are compared entrywise in absolute terms (including the
    final ``||r_n|| = 0``); harmonic Ritz tuples by exact count of infinite
    values and relative error of greedily paired finite values.
    """
    h = check_square(h, "H")
    n = p.n
    if h.shape[0] != n:
        raise StructureError(f"H is {h.shape[0]}x{h.shape[0]} but the prescription has n = {n}")
    e1 = np.zeros(n, dtype=np.complex128)
    e1[0] = 1.0
    report = analyze(h, e1)
    want_res = list(p.schedule.norms) + [0.0]
    got_res = list(report.residual_history)
    detail = []
    fail_steps = []
    res_max = 0.0
    ritz_max = 0.0
    for k in range(n + 1):
        res_err = abs(want_res[k] - got_res[k]) if k < len(got_res) else math.inf
        entry = {
            "step": k,
            "residual_expected": want_res[k],
            "residual_measured": got_res[k] if k < len(got_res) else None,
            "residual_abs_err": res_err,
        }
        ritz_err = 0.0
        if k >= 1:
            got = report.harmonic_ritz_per_step[k - 1] if k <= len(report.harmonic_ritz_per_step) else ()
            ritz_err = _compare_step(p.ritz[k], got)
            entry["ritz_expected"] = p.ritz[k]
            entry["ritz_measured"] = got
            entry["ritz_rel_err"] = ritz_err
        res_max = max(res_max, res_err)
        ritz_max = max(ritz_max, ritz_err)
        if res_err > tol_res or ritz_err > tol_ritz:
            fail_steps.append(k)
        detail.append(entry)
    return VerifyReport(
        residual_max_abs_err=res_max,
        ritz_max_rel_err=ritz_max,
        per_step_detail=tuple(detail),
        verdict="fail" if fail_steps else "pass",
        first_failing_step=fail_steps[0] if fail_steps else None,
        tol_res=tol_res,
        tol_ritz=tol_ritz,
    )
