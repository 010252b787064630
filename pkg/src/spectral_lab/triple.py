"""Finite spectral triples: axiom checks and inner fluctuations."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, UnsupportedKODimension
from .linalg import (
    DEFAULT_TOL,
    AntiUnitaryOp,
    anticommutator,
    as_matrix,
    commutator,
    dagger,
    hermiticity_residual,
    matrix_from_literal,
    matrix_to_literal,
    max_norm,
    require_hermitian,
)


class SignTable(NamedTuple):
    eps: int  # J^2 = eps
    eps_prime: int  # J D = eps' D J
    eps_dprime: int  # J gamma = eps'' gamma J


# Conventions vary across the literature; callers may pass their own table.
DEFAULT_SIGN_TABLES = {
    0: SignTable(+1, +1, +1),
    2: SignTable(-1, +1, -1),
    4: SignTable(-1, +1, +1),
    6: SignTable(+1, +1, -1),
}


def sign_table(ko_dim: int, tables: dict | None = None) -> SignTable:
    """Signs (eps, eps', eps'') of the real structure for an even KO-dimension."""
    k = int(ko_dim) % 8
    if k % 2:
        raise UnsupportedKODimension(f"odd KO-dimension {ko_dim} is not supported")
    table = (tables or DEFAULT_SIGN_TABLES)[k]
    if any(s not in (1, -1) for s in table):
        raise ValueError(f"sign table entries must be +1 or -1, got {table}")
    return SignTable(*table)


@dataclass(frozen=True)
class FiniteSpectralTriple:
    """Represented algebra generators, Dirac operator, grading and real structure.

    Matrices are not checked against the axioms at construction time; use
    :func:`check_axioms` for that.  Only shapes and the unitarity of ``j.u``
    are enforced here.
    """

    algebra_gens: tuple
    d: np.ndarray
    gamma: np.ndarray
    j: AntiUnitaryOp
    ko_dim: int
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        d = as_matrix(self.d, "d")
        n = d.shape[0]
        gamma = as_matrix(self.gamma, "gamma")
        gens = tuple(as_matrix(a, f"generator {i}") for i, a in enumerate(self.algebra_gens))
        j = self.j if isinstance(self.j, AntiUnitaryOp) else AntiUnitaryOp(self.j)
        for name, m in [("gamma", gamma), ("j.u", j.u), *((f"generator {i}", a) for i, a in enumerate(gens))]:
            if m.shape != (n, n):
                raise DimensionMismatch(f"{name} has shape {m.shape}, Dirac operator is {n}x{n}")
        if self.labels and len(self.labels) != n:
            raise DimensionMismatch(f"{len(self.labels)} basis labels for a {n}-dimensional Hilbert space")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "algebra_gens", gens)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "ko_dim", int(self.ko_dim) % 8)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def hilbert_dim(self) -> int:
        return self.d.shape[0]

    @property
    def signs(self) -> SignTable:
        return sign_table(self.ko_dim)

    def with_d(self, d) -> "FiniteSpectralTriple":
        return replace(self, d=d)


AXIOMS = (
    "d_self_adjoint",
    "grading_involution",
    "grading_anticommutes_d",
    "grading_commutes_algebra",
    "j_squared",
    "j_commutes_d",
    "j_commutes_grading",
    "order_zero",
    "order_one",
)

# Axioms whose residual depends on the real structure J.
J_AXIOMS = frozenset({"j_squared", "j_commutes_d", "j_commutes_grading", "order_zero", "order_one"})


@dataclass
class AxiomReport:
    residuals: dict
    tol: float
    worst: dict = field(default_factory=dict)

    @property
    def passed(self) -> dict:
        return {k: r <= self.tol for k, r in self.residuals.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    @property
    def failed(self) -> list:
        return [k for k, p in self.passed.items() if not p]

    def worst_offender(self) -> str:
        k = max(self.residuals, key=self.residuals.get, default=None)
        if k is None or self.residuals[k] == 0:
            return "none"
        where = self.worst.get(k)
        return f"{k} (residual {self.residuals[k]:.3e}{', ' + where if where else ''})"


def _algebra_elements(gens, depth: int):
    """Generators, then products of up to `depth` generators, labelled."""
    elems = [(f"a{i}", a) for i, a in enumerate(gens)]
    layer = elems
    for _ in range(depth - 1):
        layer = [(f"{la}*{lb}", a @ b) for (la, a), (lb, b) in product(layer, elems)]
        elems = elems + layer
    return elems


def check_axioms(t: FiniteSpectralTriple, tol: float = DEFAULT_TOL, depth: int = 2) -> AxiomReport:
    """Max-norm residual of every axiom of a real even finite spectral triple.

    The order-zero and order-one conditions are tested on all pairs drawn
    from the generators and their products of up to `depth` factors.  Since
    both conditions are bilinear, this covers the whole algebra once the
    products span it.
    """
    d, g, j = t.d, t.gamma, t.j
    s = t.signs
    n = t.hilbert_dim
    eye = np.eye(n)
    res = {}
    worst = {}

    res["d_self_adjoint"] = hermiticity_residual(d)
    res["grading_involution"] = max(hermiticity_residual(g), max_norm(g @ g - eye))
    res["grading_anticommutes_d"] = max_norm(anticommutator(g, d))
    res["j_squared"] = max_norm(j.square() - s.eps * eye)
    # J M = s M J  <=>  u conj(M) = s M u
    res["j_commutes_d"] = max_norm(j.u @ np.conj(d) - s.eps_prime * d @ j.u)
    res["j_commutes_grading"] = max_norm(j.u @ np.conj(g) - s.eps_dprime * g @ j.u)

    res["grading_commutes_algebra"] = 0.0
    for i, a in enumerate(t.algebra_gens):
        r = max_norm(commutator(g, a))
        if r > res["grading_commutes_algebra"]:
            res["grading_commutes_algebra"] = r
            worst["grading_commutes_algebra"] = f"a{i}"

    elems = _algebra_elements(t.algebra_gens, depth)
    opp = [(lb, j.conjugate(dagger(b))) for lb, b in elems]
    da = [(la, a, commutator(d, a)) for la, a in elems]
    res["order_zero"] = res["order_one"] = 0.0
    for (la, a, dca), (lb, jb) in product(da, opp):
        r0 = max_norm(commutator(a, jb))
        r1 = max_norm(commutator(dca, jb))
        if r0 > res["order_zero"]:
            res["order_zero"], worst["order_zero"] = r0, f"a={la}, b={lb}"
        if r1 > res["order_one"]:
            res["order_one"], worst["order_one"] = r1, f"a={la}, b={lb}"

    return AxiomReport({k: res[k] for k in AXIOMS}, tol, worst)


def fluctuate(t: FiniteSpectralTriple, a, tol: float = DEFAULT_TOL) -> FiniteSpectralTriple:
    """Inner fluctuation ``D -> D + A + eps' J A J^{-1}`` by a Hermitian `A`."""
    a = require_hermitian(a, tol, "fluctuation")
    if a.shape != t.d.shape:
        raise DimensionMismatch(f"fluctuation is {a.shape}, Dirac operator is {t.d.shape}")
    return t.with_d(t.d + a + t.signs.eps_prime * t.j.conjugate(a))


def one_form(t: FiniteSpectralTriple, pairs) -> np.ndarray:
    """``sum_i a_i [D, b_i]`` for pairs of represented algebra elements."""
    out = np.zeros_like(t.d)
    for a, b in pairs:
        out = out + as_matrix(a) @ commutator(t.d, as_matrix(b))
    return out


def gauge_unitary(t: FiniteSpectralTriple, u) -> np.ndarray:
    """Adjoint action ``U = u J u J^{-1}`` of a unitary algebra element."""
    u = as_matrix(u)
    return u @ t.j.conjugate(u)


def triple_to_dict(t: FiniteSpectralTriple) -> dict:
    out = {
        "d": matrix_to_literal(t.d),
        "gamma": matrix_to_literal(t.gamma),
        "j_unitary": matrix_to_literal(t.j.u),
        "generators": [matrix_to_literal(a) for a in t.algebra_gens],
        "ko_dim": t.ko_dim,
    }
    if t.labels:
        out["labels"] = list(t.labels)
    return out


def triple_from_dict(data: dict) -> FiniteSpectralTriple:
    required = {"d", "gamma", "j_unitary", "generators", "ko_dim"}
    missing = required - set(data)
    if missing:
        raise KeyError(f"triple is missing section(s): {', '.join(sorted(missing))}")
    unknown = set(data) - required - {"labels"}
    if unknown:
        raise KeyError(f"unknown triple section(s): {', '.join(sorted(unknown))}")
    return FiniteSpectralTriple(
        algebra_gens=tuple(matrix_from_literal(g) for g in data["generators"]),
        d=matrix_from_literal(data["d"]),
        gamma=matrix_from_literal(data["gamma"]),
        j=AntiUnitaryOp(matrix_from_literal(data["j_unitary"])),
        ko_dim=int(data["ko_dim"]),
        labels=tuple(data.get("labels", ())),
    )
