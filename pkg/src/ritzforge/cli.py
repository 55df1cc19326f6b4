"""Command-line interface.

Exit codes: 0 success (or verification pass), 1 error, 2 verification
failure. Errors are reported as one JSON line on stderr.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .exceptions import AdmissibilityError, ArgumentError, RitzForgeError
from .krylov import analyze, verify
from .prescription import random_prescription, validate
from .rbuilder import forge
from .serialize import (
    atomic_write,
    dumps,
    emit_prescription,
    format_float,
    parse_prescription,
    prescription_to_dict,
    read_matrix_market,
    ritz_to_json,
    write_matrix_market,
)

__all__ = ["CommandConfig", "main", "run"]

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


@dataclass
class CommandConfig:
    command: str
    prescription: str = None
    matrix: str = None
    rhs: str = None
    out: str = None
    report: str = None
    csv: str = None
    tol_res: float = 1e-8
    tol_ritz: float = 1e-6
    n: int = None
    plateaus: list = field(default_factory=list)
    seed: int = 0
    jitter: float = 0.1

    def check(self):
        required = {
            "forge": ("prescription", "out"),
            "analyze": ("matrix", "out"),
            "verify": ("prescription", "out"),
            "random": ("n", "out"),
        }
        if self.command not in required:
            raise ArgumentError(f"unknown command {self.command!r}")
        for name in required[self.command]:
            if getattr(self, name) in (None, ""):
                raise ArgumentError(f"{self.command} needs --{name.replace('_', '-')}")
        if not (self.tol_res > 0 and self.tol_ritz > 0):
            raise ArgumentError("tolerances must be positive")


def _load_prescription(path):
    with open(path, "rb") as fh:
        p = parse_prescription(fh.read())
    report = validate(p)
    if not report.ok:
        v = report.violations[0]
        raise AdmissibilityError(f"step {v.step} (clause {v.clause}): {v.message}", report.violations)
    return p


def _forge(cfg):
    p = _load_prescription(cfg.prescription)
    res = forge(p)
    write_matrix_market(res.h, cfg.out)
    if cfg.report:
        atomic_write(
            cfg.report,
            dumps({"n": p.n, "prescription": prescription_to_dict(p), "conditions": list(res.conditions)}),
        )
    return EXIT_OK


def _analyze(cfg):
    a = read_matrix_market(cfg.matrix)
    if cfg.rhs:
        b = read_matrix_market(cfg.rhs).reshape(-1)
    else:
        b = np.zeros(a.shape[0], dtype=np.complex128)
        b[0] = 1.0
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        raise ArgumentError("right-hand side is zero")
    rep = analyze(a, b / bnorm)
    atomic_write(
        cfg.out,
        dumps({
            "rhs_norm": bnorm,
            "residual_history": list(rep.residual_history),
            "harmonic_ritz": [ritz_to_json(step) for step in rep.harmonic_ritz_per_step],
            "stagnation_steps": sorted(rep.stagnation_steps),
            "breakdown_step": rep.breakdown_step,
        }),
    )
    if cfg.csv:
        rows = ["step,residual_norm"]
        rows += [f"{k},{format_float(r)}" for k, r in enumerate(rep.residual_history)]
        atomic_write(cfg.csv, "\n".join(rows) + "\n")
    return EXIT_OK


def _detail(entry):
    out = dict(entry)
    for key in ("ritz_expected", "ritz_measured"):
        if key in out:
            out[key] = ritz_to_json(out[key])
    return out


def _verify(cfg):
    p = _load_prescription(cfg.prescription)
    h = read_matrix_market(cfg.matrix) if cfg.matrix else forge(p).h
    rep = verify(p, h, cfg.tol_res, cfg.tol_ritz)
    atomic_write(
        cfg.out,
        dumps({
            "verdict": rep.verdict,
            "first_failing_step": rep.first_failing_step,
            "residual_max_abs_err": rep.residual_max_abs_err,
            "ritz_max_rel_err": rep.ritz_max_rel_err,
            "tol_res": cfg.tol_res,
            "tol_ritz": cfg.tol_ritz,
            "steps": [_detail(e) for e in rep.per_step_detail],
        }),
    )
    return EXIT_OK if rep.passed else EXIT_FAIL


def _random(cfg):
    p = random_prescription(cfg.n, cfg.plateaus, seed=cfg.seed, jitter=cfg.jitter)
    atomic_write(cfg.out, emit_prescription(p))
    return EXIT_OK


_COMMANDS = {"forge": _forge, "analyze": _analyze, "verify": _verify, "random": _random}


def _report_error(kind, message, extra=None):
    rec = {"error": kind, "message": message}
    rec.update(extra or {})
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)


def run(cfg):
    """Execute a command; returns the process exit status."""
    try:
        cfg.check()
        return _COMMANDS[cfg.command](cfg)
    except RitzForgeError as exc:
        print(json.dumps(exc.record(), sort_keys=True), file=sys.stderr)
    except OSError as exc:
        _report_error("io", str(exc), {"path": exc.filename} if exc.filename else None)
    return EXIT_ERROR


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse would exit with 2, which is reserved for verification failure
        _report_error("usage", message)
        raise SystemExit(EXIT_ERROR)


def _plateau_list(text):
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="ritzforge", description="Forge matrices with prescribed GMRES residual norms and harmonic Ritz values.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("forge", help="build H from a prescription")
    p.add_argument("--prescription", required=True)
    p.add_argument("--out", required=True, help="Matrix Market output for H")
    p.add_argument("--report")

    p = sub.add_parser("analyze", help="measure GMRES behaviour of {A, b}")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rhs", help="Matrix Market n x 1 vector (default e_1); normalized before use")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")

    p = sub.add_parser("verify", help="forge (or load) H and check it against the prescription")
    p.add_argument("--prescription", required=True)
    p.add_argument("--matrix")
    p.add_argument("--tol-res", type=float, default=1e-8)
    p.add_argument("--tol-ritz", type=float, default=1e-6)
    p.add_argument("--out", required=True)

    p = sub.add_parser("random", help="write a random admissible prescription")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--plateaus", type=_plateau_list, default=[])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jitter", type=float, default=0.1, help="step-to-step relative spread of the values")
    p.add_argument("--independent", action="store_true", help="draw every step independently")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    opts = vars(args)
    if opts.pop("independent", False):
        opts["jitter"] = None
    return run(CommandConfig(**opts))


if __name__ == "__main__":
    sys.exit(main())
