"""Matrices with prescribed GMRES residual norms and harmonic Ritz values.

Given a residual-norm schedule and an admissible set of harmonic Ritz
values, :func:`forge` builds an upper Hessenberg ``H`` such that GMRES on
``{H, e_1}`` reproduces both at every step; :func:`verify` checks this by
actually running Arnoldi/GMRES.
"""

from .exceptions import (
    AdmissibilityError,
    DegeneratePrescription,
    RitzForgeError,
    SingularRError,
)
from .krylov import analyze, arnoldi, gmres_history, harmonic_ritz, verify
from .prescription import (
    INF,
    Prescription,
    ResidualSchedule,
    RitzPrescription,
    random_prescription,
    validate,
)
from .rbuilder import forge

__version__ = "0.1.0"

__all__ = [
    "INF",
    "AdmissibilityError",
    "DegeneratePrescription",
    "Prescription",
    "ResidualSchedule",
    "RitzForgeError",
    "RitzPrescription",
    "SingularRError",
    "analyze",
    "arnoldi",
    "forge",
    "gmres_history",
    "harmonic_ritz",
    "random_prescription",
    "validate",
    "verify",
]
