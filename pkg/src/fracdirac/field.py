"""Constant electromagnetic field: mixed tensor, invariants, spectrum of Λ = -2eF.

Index conventions: metric diag(+1, -1, -1, -1), ε^{0123} = +1,
F^{0k} = -E_k and F^{ij} = -ε_{ijk} B_k.  The mixed tensor F^μ_ν is

    [[0,   E1,  E2,  E3],
     [E1,  0,   B3, -B2],
     [E2, -B3,  0,   B1],
     [E3,  B2, -B1,  0 ]]
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotDiagonalizable

__all__ = [
    "METRIC",
    "FieldConfig",
    "EigenStructure",
    "build_mixed_tensor",
    "contravariant_tensor",
    "lambda_matrix",
    "invariants",
    "invariants_from_lambda",
    "eigen_ab",
    "is_field_matrix",
    "modal_decomposition",
    "charpoly_residual",
]

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

DEGENERACY_RTOL = 1e-9
MAX_MODAL_COND = 1e8


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


_EPS4 = _levi_civita4()


def _vec3(v, name):
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 components")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} components must be finite")
    return arr


@dataclass(frozen=True)
class FieldConfig:
    e_field: tuple = (0.0, 0.0, 0.0)
    b_field: tuple = (0.0, 0.0, 0.0)
    charge: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "e_field", tuple(_vec3(self.e_field, "e_field").tolist()))
        object.__setattr__(self, "b_field", tuple(_vec3(self.b_field, "b_field").tolist()))
        q = float(self.charge)
        if not math.isfinite(q):
            raise ValueError("charge must be finite")
        object.__setattr__(self, "charge", q)


def build_mixed_tensor(cfg: FieldConfig) -> np.ndarray:
    e1, e2, e3 = cfg.e_field
    b1, b2, b3 = cfg.b_field
    return np.array(
        [
            [0.0, e1, e2, e3],
            [e1, 0.0, b3, -b2],
            [e2, -b3, 0.0, b1],
            [e3, b2, -b1, 0.0],
        ]
    )


def contravariant_tensor(cfg: FieldConfig) -> np.ndarray:
    """F^{μν} = F^μ_ρ g^{ρν}."""
    return build_mixed_tensor(cfg) @ METRIC


def lambda_matrix(cfg: FieldConfig) -> np.ndarray:
    return -2.0 * cfg.charge * build_mixed_tensor(cfg)


def invariants(cfg: FieldConfig) -> tuple[float, float]:
    """(S, P) = (2e² F_{μν}F^{μν}, 2e² F_{μν}*F^{μν}) by explicit contraction."""
    f_up = contravariant_tensor(cfg)
    f_down = METRIC @ f_up @ METRIC
    dual_up = 0.5 * np.einsum("abcd,cd->ab", _EPS4, f_down)
    e2 = cfg.charge**2
    s = 2.0 * e2 * float(np.sum(f_down * f_up))
    p = 2.0 * e2 * float(np.sum(f_down * dual_up))
    return s, p


def is_field_matrix(lam, rtol: float = 1e-12) -> bool:
    """True when g·Λ is real antisymmetric, i.e. Λ = -2eF for some field."""
    lam = np.asarray(lam)
    scale = 1.0 + np.linalg.norm(lam)
    if np.iscomplexobj(lam) and np.max(np.abs(lam.imag), initial=0.0) > rtol * scale:
        return False
    low = METRIC @ np.real(lam)
    return bool(np.max(np.abs(low + low.T)) <= rtol * scale)


def invariants_from_lambda(lam) -> tuple[float, float]:
    """(S, P) recovered from a field-shaped Λ.

    S = -tr(Λ²)/2 and P = 2·Pf(g Λ), which reproduce :func:`invariants`.
    """
    lam = np.real(np.asarray(lam))
    s = -0.5 * float(np.trace(lam @ lam))
    m = METRIC @ lam
    pf = m[0, 1] * m[2, 3] - m[0, 2] * m[1, 3] + m[0, 3] * m[1, 2]
    return s, 2.0 * float(pf)


def eigen_ab(s: float, p: float) -> tuple[float, float]:
    """a = sqrt((S + sqrt(S²+P²))/2), b = sqrt((-S + sqrt(S²+P²))/2)."""
    r = math.hypot(s, p)
    # take the well-conditioned root first and recover the other from a·b = |P|/2
    if s >= 0.0:
        a = math.sqrt(max(0.0, 0.5 * (s + r)))
        b = 0.5 * abs(p) / a if a > 0.0 else math.sqrt(max(0.0, 0.5 * (r - s)))
    else:
        b = math.sqrt(max(0.0, 0.5 * (r - s)))
        a = 0.5 * abs(p) / b if b > 0.0 else math.sqrt(max(0.0, 0.5 * (s + r)))
    return a, b


def charpoly_residual(lam_value: complex, s: float, p: float) -> float:
    """|λ⁴ + Sλ² - P²/4| / max(1, |λ|⁴)."""
    l2 = lam_value * lam_value
    return abs(l2 * l2 + s * l2 - 0.25 * p * p) / max(1.0, abs(lam_value) ** 4)


@dataclass(frozen=True, eq=False)
class EigenStructure:
    """Spectrum of Λ in the order (+b, -b, +ia, -ia).

    ``modal`` has the eigenvectors as columns, so Λ N = N diag(eigenvalues) and
    Λ = N diag(eigenvalues) N^{-1}.  ``modal``/``modal_inv`` are None when Λ
    is not diagonalizable.  For a Λ that is not field-shaped the eigenvalues
    come from a general solver and a, b, S, P are NaN.
    """

    a: float
    b: float
    eigenvalues: np.ndarray
    modal: np.ndarray | None
    modal_inv: np.ndarray | None
    diagonalizable: bool
    s_invariant: float
    p_invariant: float
    lam: np.ndarray = field(repr=False)

    def to_modal(self, v):
        """Modal coordinates c with v = N c."""
        self._require_modal()
        return self.modal_inv @ np.asarray(v, dtype=complex)

    def from_modal(self, c):
        self._require_modal()
        return self.modal @ np.asarray(c, dtype=complex)

    def _require_modal(self):
        if not self.diagonalizable:
            raise NotDiagonalizable("Λ has no complete eigenbasis")


def _group(eigs, tol):
    groups: list[list[int]] = []
    for i, lam in enumerate(eigs):
        for g in groups:
            if abs(eigs[g[0]] - lam) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _normalise_phase(v):
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > (1.0 - 1e-8) * np.max(np.abs(v))))
    return v * (abs(v[k]) / v[k])


def _eigenbasis(lam, eigs, tol):
    n = lam.shape[0]
    cols = np.zeros((n, n), dtype=complex)
    done = set()
    for g in _group(eigs, tol):
        if g[0] in done:
            continue
        mu = np.mean([eigs[i] for i in g])
        if abs(mu.imag) <= tol:
            mu = mu.real
        _, sv, vh = np.linalg.svd(lam - mu * np.eye(n))
        m = len(g)
        if np.any(sv[n - m :] > 10.0 * tol):
            return None
        basis = vh[n - m :].conj()
        for i, vec in zip(g, basis):
            cols[:, i] = _normalise_phase(vec)
        done.update(g)
        # keep the imaginary pair conjugate so real inputs stay real
        if m == 1 and abs(eigs[g[0]].imag) > tol:
            for j in range(n):
                if j not in done and abs(eigs[j] - np.conj(eigs[g[0]])) <= tol and np.isrealobj(lam):
                    cols[:, j] = cols[:, g[0]].conj()
                    done.add(j)
                    break
    return cols


def modal_decomposition(lam) -> EigenStructure:
    lam = np.asarray(lam)
    if lam.shape != (4, 4):
        raise ValueError("Λ must be 4×4")
    # relative to ‖Λ‖ so that Λ and cΛ share one eigenbasis at every scale
    tol = DEGENERACY_RTOL * float(np.linalg.norm(lam))
    if is_field_matrix(lam):
        lam = np.real(lam).astype(float)
        s, p = invariants_from_lambda(lam)
        a, b = eigen_ab(s, p)
        # adding 0.0 turns -0.0 parts into +0.0
        eigs = np.array([b, -b, 1j * a, -1j * a], dtype=complex) + 0.0
    else:
        s = p = a = b = math.nan
        ev = np.linalg.eigvals(lam)
        eigs = np.array(sorted(ev, key=lambda z: (-round(z.real, 12), -round(z.imag, 12))))
    cols = _eigenbasis(lam, eigs, tol)
    modal = modal_inv = None
    diag = False
    if cols is not None and np.linalg.cond(cols) < MAX_MODAL_COND:
        modal = cols
        modal_inv = np.linalg.inv(cols)
        diag = True
    return EigenStructure(
        a=a,
        b=b,
        eigenvalues=eigs,
        modal=modal,
        modal_inv=modal_inv,
        diagonalizable=diag,
        s_invariant=s,
        p_invariant=p,
        lam=np.array(lam),
    )
