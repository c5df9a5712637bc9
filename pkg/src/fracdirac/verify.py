"""Cross-checks of the closed forms against the independent grid numerics."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .dynamics import InitialState, classical_solution, solve
from .field import FieldConfig, lambda_matrix
from .matrix_mlf import semigroup_defect
from .mlf import MlOrder, ml_eval, ml_half_oracle
from .numerics import SampledFunction, caputo_pc_solve, integral_identity_residual, left_inverse_residual

__all__ = ["Check", "CANONICAL_FIELDS", "run_checks"]

CANONICAL_FIELDS = {
    "pure-B": FieldConfig((0, 0, 0), (0, 0, 1), 1.0),
    "pure-E": FieldConfig((1, 0, 0), (0, 0, 0), 1.0),
    "null": FieldConfig((1, 0, 0), (0, 1, 0), 1.0),
}


class Check(NamedTuple):
    name: str
    value: float
    tolerance: float
    passed: bool


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def _classical() -> float:
    rng = np.random.default_rng(11)
    taus = np.linspace(0.0, 5.0, 50)
    worst = 0.0
    for _ in range(10):
        cfg = FieldConfig(rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3), rng.choice([-2.0, -1.0, 1.0, 2.0]))
        init = InitialState(rng.normal(size=(1, 4)) + 1j * rng.normal(size=(1, 4)),
                            rng.normal(size=(1, 4)) + 1j * rng.normal(size=(1, 4)))
        a = solve(1.0, lambda_matrix(cfg), init, taus)
        b = classical_solution(cfg, init, taus)
        for u, v in ((a.x, b.x), (a.pi, b.pi)):
            dev = np.linalg.norm(u - v, axis=1) / np.linalg.norm(v, axis=1)
            worst = max(worst, float(dev.max()))
    return worst


def _oracle(alpha: float, field: FieldConfig, h: float = 1e-3) -> float:
    n = int(math.floor(alpha)) + 1
    rng = np.random.default_rng(5)
    init = InitialState(rng.normal(size=(n, 4)), rng.normal(size=(n, 4)))
    lam = lambda_matrix(field)
    pc = caputo_pc_solve(alpha, lam, init, h, 2.0)
    ex = solve(alpha, lam, init, pc.taus)
    return max(_rel(pc.pi, ex.pi), _rel(pc.x, ex.x))


def _identity() -> float:
    worst = 0.0
    for alpha in (0.5, 1.0):
        for beta in (1.0, 2.0):
            for mu in (0.5, alpha):
                for lam in (-1.0, 2j):
                    for tau in (0.5, 1.0, 2.0):
                        worst = max(worst, integral_identity_residual(alpha, beta, mu, lam, tau))
    return worst


def _left_inverse() -> float:
    taus = np.linspace(0.0, 1.0, 1001)
    worst = 0.0
    for beta in (0.5, 0.8):
        for vals in (np.ones_like(taus), taus, taus**2):
            worst = max(worst, left_inverse_residual(beta, SampledFunction(taus, vals)))
    return worst


def _half_oracle() -> float:
    worst = 0.0
    for z in np.linspace(-18.0, 4.0, 89):
        ref = ml_half_oracle(z)
        worst = max(worst, abs(ml_eval(MlOrder(0.5, 1.0), z) - ref) / (1.0 + abs(ref)))
    return worst


def _semigroup_half() -> float:
    return semigroup_defect(0.5, np.diag([-1.0, 0.0, 0.0, 0.0]), 1.0, 1.0)


def run_checks(progress: Callable[[Check], None] | None = None) -> list[Check]:
    jobs: list[tuple[str, Callable[[], float], float, Callable[[float], bool]]] = [
        ("mittag-leffler vs erfc (alpha=1/2)", _half_oracle, 1e-8, None),
        ("alpha=1 vs matrix exponential", _classical, 1e-9, None),
    ]
    for alpha in (0.5, 0.7, 1.3):
        for name, cfg in CANONICAL_FIELDS.items():
            jobs.append(
                (f"predictor-corrector alpha={alpha} {name}", lambda a=alpha, c=cfg: _oracle(a, c), 5e-3, None)
            )
    jobs += [
        ("power-law integral identity", _identity, 1e-5, None),
        ("left-inverse identity (h=1e-3)", _left_inverse, 5e-3, None),
        ("semigroup defect alpha=1/2 (0.153 +- 0.01)", _semigroup_half, 0.01, lambda v: abs(v - 0.153) <= 0.01),
    ]
    out = []
    for name, fn, tol, test in jobs:
        value = fn()
        ok = test(value) if test else value <= tol
        chk = Check(name, value, tol, bool(ok))
        out.append(chk)
        if progress:
            progress(chk)
    return out
