"""``fracdirac`` command-line interface.

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, atomic_write, parse_config
from .dynamics import Trajectory, pi_asymptotic, solve, x_asymptotic
from .errors import FracDiracError, InvalidOrder, ParseError, ValidationError
from .field import charpoly_residual, invariants, modal_decomposition
from .matrix_mlf import semigroup_defect, semigroup_scale
from .mlf import MlOrder, ml_eval
from .numerics import caputo_pc_solve

CSV_HEADER = (
    "tau,x0_re,x0_im,x1_re,x1_im,x2_re,x2_im,x3_re,x3_im,"
    "pi0_re,pi0_im,pi1_re,pi1_im,pi2_re,pi2_im,pi3_re,pi3_im,method"
)
SEMIGROUP_RTOL = 1e-11

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class _ConfigError(Exception):
    pass


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for i, t in enumerate(traj.taus):
        cells = [repr(float(t))]
        for vec in (traj.x[i], traj.pi[i]):
            for c in vec:
                cells.append(repr(float(c.real)))
                cells.append(repr(float(c.imag)))
        cells.append(traj.method)
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _num(v):
    v = float(v)
    return None if not math.isfinite(v) else v


def _pairs(vals):
    return [[_num(complex(v).real), _num(complex(v).imag)] for v in vals]


def _is_nilpotent(lam) -> bool:
    cube = lam @ lam @ lam
    return bool(np.linalg.norm(cube) <= 1e-12 * (1.0 + np.linalg.norm(lam)) ** 3)


def eigen_report(cfg: ScenarioConfig) -> dict:
    lam = cfg.lam
    eig = modal_decomposition(lam)
    if cfg.lam_override is None:
        s, p = invariants(cfg.field)
    else:
        s, p = eig.s_invariant, eig.p_invariant
    if math.isfinite(s):
        resid = max(charpoly_residual(complex(v), s, p) for v in eig.eigenvalues)
    else:
        resid = math.nan
    return {
        "S": _num(s),
        "P": _num(p),
        "a": _num(eig.a),
        "b": _num(eig.b),
        "eigenvalues": _pairs(eig.eigenvalues),
        "diagonalizable": eig.diagonalizable,
        "charpoly_residual": _num(resid),
        "nilpotent": _is_nilpotent(lam),
    }


def semigroup_rows(cfg: ScenarioConfig, pairs) -> list[dict]:
    lam = cfg.lam
    eig = modal_decomposition(lam)
    rows = []
    for tau, s in pairs:
        defect = semigroup_defect(cfg.alpha, lam, tau, s, eig)
        scale = semigroup_scale(cfg.alpha, lam, tau, s, eig)
        rows.append({"tau": tau, "s": s, "defect": defect, "scale": scale,
                     "satisfied": defect <= SEMIGROUP_RTOL * scale})
    return rows


def _asymptotic_rows(cfg: ScenarioConfig, eig) -> list[dict]:
    rows = []
    o = cfg.outputs
    modes = [s for s in range(4) if eig.eigenvalues[s] != 0]
    for tau in o.asymptotic_taus:
        row = {"tau": tau, "m": o.asymptotic_m}
        try:
            row["pi_modal"] = _pairs(pi_asymptotic(cfg.order, eig, cfg.initial, tau, o.asymptotic_m, modes))
            row["x_modal"] = _pairs(x_asymptotic(cfg.order, eig, cfg.initial, tau, o.asymptotic_m, modes))
        except FracDiracError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def _oracle_summary(cfg: ScenarioConfig, out_dir: Path) -> dict:
    h = cfg.outputs.oracle_h
    pc = caputo_pc_solve(cfg.order, cfg.lam, cfg.initial, h, cfg.tau_max)
    ex = solve(cfg.order, cfg.lam, cfg.initial, pc.taus)
    dev = {}
    for name, a, b in (("pi", pc.pi, ex.pi), ("x", pc.x, ex.x)):
        ref = float(np.max(np.abs(b)))
        dev[name] = _num(np.max(np.abs(a - b)) / ref) if ref > 0 else _num(np.max(np.abs(a)))
    atomic_write(out_dir / "oracle.csv", trajectory_csv(pc))
    return {"h": h, "max_rel_deviation": dev}


def run_simulate(cfg: ScenarioConfig, out_dir) -> int:
    out_dir = Path(out_dir)
    eig = modal_decomposition(cfg.lam)
    traj = solve(cfg.order, cfg.lam, cfg.initial, cfg.taus, eig)
    if not (np.all(np.isfinite(traj.x)) and np.all(np.isfinite(traj.pi))):
        raise FracDiracError("trajectory overflowed double precision")
    summary = {"alpha": cfg.alpha, "n": cfg.order.n, "samples": cfg.samples, "tau_max": cfg.tau_max,
               "path": "eigen" if eig.diagonalizable else "series"}
    summary.update(eigen_report(cfg))
    if cfg.outputs.semigroup:
        summary["semigroup"] = semigroup_rows(cfg, cfg.outputs.semigroup)
    if cfg.outputs.asymptotic_m is not None and eig.diagonalizable:
        summary["asymptotic"] = _asymptotic_rows(cfg, eig)
    if cfg.outputs.oracle_h is not None:
        summary["oracle"] = _oracle_summary(cfg, out_dir)
    if cfg.outputs.trajectory:
        atomic_write(out_dir / "trajectory.csv", trajectory_csv(traj))
    atomic_write(out_dir / "summary.json", json.dumps(summary, indent=2) + "\n")
    print(f"wrote {out_dir / 'summary.json'}")
    if cfg.outputs.trajectory:
        print(f"wrote {out_dir / 'trajectory.csv'} ({len(traj.taus)} rows)")
    return EXIT_OK


def _fmt(v) -> str:
    return "nan" if v is None else repr(v)


def run_eigen(cfg: ScenarioConfig) -> int:
    rep = eigen_report(cfg)
    print(f"S = {_fmt(rep['S'])}")
    print(f"P = {_fmt(rep['P'])}")
    print(f"a = {_fmt(rep['a'])}")
    print(f"b = {_fmt(rep['b'])}")
    labels = ("+b", "-b", "+ia", "-ia") if rep["S"] is not None else ("l0", "l1", "l2", "l3")
    print("eigenvalues:")
    for lab, (re, im) in zip(labels, rep["eigenvalues"]):
        print(f"  {lab:>4}  {re!r} {im:+}j")
    print(f"diagonalizable: {'yes' if rep['diagonalizable'] else 'no'}")
    print(f"charpoly residual: {_fmt(rep['charpoly_residual'])}")
    if rep["nilpotent"]:
        print("nilpotent: Λ³ = 0")
    return EXIT_OK


def _parse_pairs(text: str):
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            tau, s = (float(v) for v in chunk.split(","))
        except ValueError:
            raise _ConfigError(f"--pairs: cannot read {chunk!r} as 'tau,s'") from None
        if tau < 0 or s < 0:
            raise _ConfigError("--pairs: times must be non-negative")
        pairs.append((tau, s))
    if not pairs:
        raise _ConfigError("--pairs: no pairs given")
    return pairs


def run_semigroup(cfg: ScenarioConfig, pairs) -> int:
    rows = semigroup_rows(cfg, pairs)
    print(f"{'tau':>10} {'s':>10} {'defect':>24} {'scale':>24}")
    for r in rows:
        print(f"{r['tau']:>10g} {r['s']:>10g} {r['defect']:>24.16e} {r['scale']:>24.16e}")
    ok = all(r["satisfied"] for r in rows)
    print("semigroup satisfied" if ok else "semigroup violated")
    return EXIT_OK


def run_mlf(alpha: float, beta: float, z: complex) -> int:
    res = ml_eval(MlOrder(alpha, beta), z, full_output=True)
    print(f"value = {res.value.real!r} {res.value.imag:+}j")
    print(f"method = {res.method}")
    print(f"error = {res.error:.3e}")
    print(f"terms = {res.terms}")
    return EXIT_OK


def run_verify() -> int:
    from .verify import run_checks

    def show(c):
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.name:<48} {c.value:.3e}  (tol {c.tolerance:.0e})", flush=True)

    checks = run_checks(show)
    ok = all(c.passed for c in checks)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return EXIT_OK if ok else EXIT_NUMERIC


def _parse_z(text: str) -> complex:
    parts = text.split(",")
    if len(parts) not in (1, 2):
        raise _ConfigError(f"--z: expected RE or RE,IM, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise _ConfigError(f"--z: expected RE or RE,IM, got {text!r}") from None
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracdirac", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write trajectory CSV and summary JSON")
    s.add_argument("config")
    s.add_argument("--out", default=".", help="output directory (default: current)")

    e = sub.add_parser("eigen", help="print invariants and the spectrum of Λ")
    e.add_argument("config")

    g = sub.add_parser("semigroup", help="tabulate ‖Φ_τΦ_s − Φ_{τ+s}‖")
    g.add_argument("config")
    g.add_argument("--pairs", help='e.g. "1,1;0.5,2" (default: outputs.semigroup in the config)')

    m = sub.add_parser("mlf", help="evaluate E_{alpha,beta}(z)")
    m.add_argument("--alpha", type=float, required=True)
    m.add_argument("--beta", type=float, default=1.0)
    m.add_argument("--z", required=True, help="RE or RE,IM")

    sub.add_parser("verify", help="run the oracle cross-check suite")
    return p


def _join_negative_values(argv):
    # "--z -1,0" would otherwise be read as an unknown option
    out = []
    it = iter(range(len(argv)))
    for i in it:
        if argv[i] in ("--z", "--pairs") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(argv[i])
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        if args.command == "mlf":
            return run_mlf(args.alpha, args.beta, _parse_z(args.z))
        if args.command == "verify":
            return run_verify()
        cfg = parse_config(args.config)
        if args.command == "simulate":
            return run_simulate(cfg, args.out)
        if args.command == "eigen":
            return run_eigen(cfg)
        if args.command == "semigroup":
            pairs = _parse_pairs(args.pairs) if args.pairs else list(cfg.outputs.semigroup)
            if not pairs:
                raise _ConfigError("no (tau, s) pairs: pass --pairs or set outputs.semigroup")
            return run_semigroup(cfg, pairs)
    except (ParseError, ValidationError, InvalidOrder, _ConfigError) as exc:
        print(f"fracdirac: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FracDiracError, ArithmeticError) as exc:
        print(f"fracdirac: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_CONFIG  # pragma: no cover - argparse enforces a command


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
