"""Prescribed GMRES behaviour: residual schedule and harmonic Ritz values.

A :class:`Prescription` pairs a residual-norm schedule
``||r_0|| = 1 >= ||r_1|| >= ... >= ||r_{n-1}|| > 0`` (``||r_n|| = 0`` is
implicit) with one tuple of harmonic Ritz values per GMRES step. Harmonic
Ritz values are Python ``complex`` numbers or the :data:`INF` marker.

A step ``k`` is a *plateau* step when ``||r_k|| = ||r_{k-1}||``. While GMRES
stagnates the finite harmonic Ritz values of the last productive step persist
and every stagnant step contributes one more infinite value;
:func:`validate` enforces exactly that pattern and nothing else.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_unimodular
from .exceptions import ArgumentError

__all__ = [
    "INF",
    "AdmissibilityReport",
    "Prescription",
    "ResidualSchedule",
    "RitzPrescription",
    "Violation",
    "canonical_order",
    "is_infinite",
    "random_prescription",
    "validate",
]

PLATEAU_TOL = 1e-14  # on squared norms
STRICT_GAP = 1e-12  # on squared norms
UNIT_TOL = 1e-12
MATCH_TOL = 1e-12
DISTINCT_RTOL = 1e-10


class _Infinite:
    """The harmonic Ritz value at infinity (a singleton)."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinite, ())

    def __mul__(self, other):
        return self

    __rmul__ = __mul__


INF = _Infinite()


def is_infinite(value):
    return value is INF


def _key(value):
    if value is INF:
        return (1, 0.0, 0.0)
    return (0, abs(value), cmath.phase(value))


def canonical_order(values):
    """Sort by nondecreasing magnitude, then principal argument; INF last."""
    return tuple(sorted(values, key=_key))


def _as_ritz_value(value):
    if value is INF:
        return INF
    return complex(value)


@dataclass(frozen=True)
class ResidualSchedule:
    """Prescribed norms ``||r_0||, ..., ||r_{n-1}||``."""

    norms: tuple

    def __post_init__(self):
        norms = tuple(float(x) for x in self.norms)
        if not norms:
            raise ArgumentError("residual schedule must be nonempty")
        object.__setattr__(self, "norms", norms)

    @property
    def n(self):
        return len(self.norms)

    @property
    def plateau_steps(self):
        """Steps ``k`` (1-based) whose squared norm equals that of step ``k-1``."""
        sq = [x * x for x in self.norms]
        return frozenset(
            k for k in range(1, self.n) if abs(sq[k - 1] - sq[k]) <= PLATEAU_TOL
        )

    def violations(self):
        out = []
        norms = self.norms
        if not all(math.isfinite(x) for x in norms):
            return [Violation(0, "a", "residual norms must be finite")]
        if abs(norms[0] - 1.0) > 1e-12:
            out.append(Violation(0, "a", f"||r_0|| must be 1, got {norms[0]!r}"))
        for k in range(1, self.n):
            gap = norms[k - 1] ** 2 - norms[k] ** 2
            if abs(gap) <= PLATEAU_TOL or gap >= STRICT_GAP:
                continue
            if gap < 0:
                msg = f"residual norm increases at step {k}"
            else:
                msg = f"near-plateau at step {k}: squared gap {gap:.3e} is ambiguous"
            out.append(Violation(k, "a", msg))
        if norms[-1] <= 0:
            out.append(Violation(self.n - 1, "a", "||r_{n-1}|| must be positive"))
        return out


@dataclass(frozen=True)
class RitzPrescription:
    """One tuple of harmonic Ritz values per step, stored in canonical order."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(
            canonical_order(_as_ritz_value(v) for v in step) for step in self.steps
        )
        for k, step in enumerate(steps, start=1):
            if len(step) != k:
                raise ArgumentError(f"step {k} must hold {k} harmonic Ritz values, got {len(step)}")
        object.__setattr__(self, "steps", steps)

    @property
    def n(self):
        return len(self.steps)

    def __getitem__(self, k):
        """Tuple at 1-based step ``k``."""
        return self.steps[k - 1]


@dataclass(frozen=True)
class Prescription:
    """Residual schedule, harmonic Ritz values and optional sign choices.

    ``first_row_signs`` fixes the phases of the first row of Q (length n),
    ``rho_signs`` the phases of its subdiagonal (length n - 1). Both default
    to all ones.
    """

    schedule: ResidualSchedule
    ritz: RitzPrescription
    first_row_signs: tuple = None
    rho_signs: tuple = None

    def __post_init__(self):
        if not isinstance(self.schedule, ResidualSchedule):
            object.__setattr__(self, "schedule", ResidualSchedule(self.schedule))
        if not isinstance(self.ritz, RitzPrescription):
            object.__setattr__(self, "ritz", RitzPrescription(self.ritz))
        n = self.schedule.n
        if self.ritz.n != n:
            raise ArgumentError(
                f"schedule has {n} steps but harmonic Ritz set has {self.ritz.n}"
            )
        for name, length in (("first_row_signs", n), ("rho_signs", n - 1)):
            value = getattr(self, name)
            if value is not None:
                arr = check_unimodular(value, length, name, UNIT_TOL) if length else []
                object.__setattr__(self, name, tuple(complex(x) for x in arr))

    @property
    def n(self):
        return self.schedule.n


@dataclass(frozen=True)
class Violation:
    step: int
    clause: str
    message: str


@dataclass(frozen=True)
class AdmissibilityReport:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def _close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def _multiset_match(got, want, tol):
    """Greedy nearest matching of two equal-length lists of complex numbers."""
    if len(got) != len(want):
        return False
    pool = list(got)
    for w in want:
        j = min(range(len(pool)), key=lambda i: abs(pool[i] - w))
        if not _close(pool[j], w, tol):
            return False
        pool.pop(j)
    return True


def validate(p):
    """Check admissibility of a prescription.

    Returns an :class:`AdmissibilityReport`; violations are data, never
    raised. Clauses: ``a`` schedule shape, ``b`` finite values nonzero (and
    pairwise distinct within a step), ``c`` plateau pattern, ``d`` no
    infinite value outside a plateau.
    """
    out = list(p.schedule.violations())
    plateaus = p.schedule.plateau_steps
    last_productive = 0
    for k in range(1, p.n + 1):
        step = p.ritz[k]
        finite = [v for v in step if v is not INF]
        n_inf = len(step) - len(finite)
        for v in finite:
            if not cmath.isfinite(v):
                out.append(Violation(k, "b", f"value {v!r} is not finite"))
            elif v == 0:
                out.append(Violation(k, "b", "harmonic Ritz values must be nonzero"))
        for i in range(len(finite)):
            for j in range(i + 1, len(finite)):
                a, b = finite[i], finite[j]
                if abs(a - b) < DISTINCT_RTOL * max(abs(a), abs(b)):
                    out.append(Violation(k, "b", f"repeated value {a!r} is not supported"))
        if k in plateaus:
            i = k - last_productive
            before = [v for v in p.ritz[last_productive] if v is not INF] if last_productive else []
            if n_inf != i:
                out.append(
                    Violation(k, "c", f"plateau step {k} needs {i} infinite values, got {n_inf}")
                )
            elif not _multiset_match(finite, before, MATCH_TOL):
                out.append(
                    Violation(
                        k, "c",
                        f"finite values at plateau step {k} must repeat step {last_productive}",
                    )
                )
        else:
            last_productive = k
            if n_inf:
                out.append(Violation(k, "d", f"infinite value at non-plateau step {k}"))
    return AdmissibilityReport(tuple(out))


def _draw(rng, center=None, jitter=0.0):
    # One value with magnitude in [0.5, 5]: uniform if no center, else a
    # complex relative perturbation of the center.
    while True:
        if center is None:
            z = cmath.rect(rng.uniform(0.5, 5.0), rng.uniform(-math.pi, math.pi))
        else:
            z = center * (1.0 + jitter * complex(*rng.standard_normal(2)) / math.sqrt(2.0))
        if 0.5 <= abs(z) <= 5.0:
            return z


def _separated(rng, centers, jitter, min_sep=1e-3):
    vals = []
    for c in centers:
        z = _draw(rng, c, jitter)
        while any(abs(z - v) < min_sep for v in vals):
            z = _draw(rng, c, jitter)
        vals.append(z)
    return vals


def random_prescription(n, plateau_steps=(), seed=0, jitter=0.1):
    """Draw a random admissible prescription.

    Squared residual norms shrink by a factor in ``[0.4, 0.99]`` at every
    non-plateau step and are copied exactly at plateau steps. Harmonic Ritz
    values have magnitude in ``[0.5, 5]`` and are pairwise at least ``1e-3``
    apart within a step; plateau tuples are filled in from the last
    productive step.

    By default a base set of ``n`` values is drawn once and step ``k`` uses
    its first ``k`` members, each perturbed by a complex relative jitter of
    standard deviation ``jitter``. Unrelated values at consecutive steps
    force a very non-normal ``H`` whose spectrum is not measurable in double
    precision beyond ``n ~ 8``. ``jitter=None`` draws every step
    independently anyway.
    """
    n = int(n)
    plateaus = {int(s) for s in plateau_steps}
    if n < 1:
        raise ArgumentError("n must be at least 1")
    bad = sorted(s for s in plateaus if not 1 <= s <= n - 1)
    if bad:
        raise ArgumentError(f"plateau steps must lie in 1..{n - 1}, got {bad}")
    rng = np.random.default_rng(seed)
    norms = [1.0]
    for k in range(1, n):
        if k in plateaus:
            norms.append(norms[-1])
        else:
            norms.append(norms[-1] * math.sqrt(1.0 - rng.uniform(0.01, 0.6)))
    base = None if jitter is None else _separated(rng, [None] * n, 0.0)
    steps = []
    last = ()
    for k in range(1, n + 1):
        if k in plateaus:
            steps.append(last + (INF,) * (k - len(last)))
            continue
        if base is None:
            last = tuple(_separated(rng, [None] * k, 0.0))
        else:
            last = tuple(_separated(rng, base[:k], jitter))
        steps.append(last)
    return Prescription(ResidualSchedule(norms), RitzPrescription(steps))
