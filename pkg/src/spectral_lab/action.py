"""Spectral actions of a finite Dirac operator, with and without a fermion state.

The bosonic action is the cutoff trace ``Tr f(D^2 / Lambda^2)``; the fermionic
action the expectation ``<psi|D psi>``; the extended action replaces D by
``D + P_psi`` where ``P_psi`` is the rank-one orthogonal projector onto psi.
All traces may be restricted to a "physical" subspace through an orthogonal
projector ``Pi``, in which case ``Tr(Pi f(.) Pi)`` is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NegativeArgument, NonSmoothCutoff, ZeroState
from .linalg import (
    DEFAULT_TOL,
    as_matrix,
    as_vector,
    dagger,
    eigh,
    hermiticity_residual,
    max_norm,
    require_hermitian,
)
from .triple import FiniteSpectralTriple

CUTOFF_KINDS = ("sharp", "gaussian", "polynomial-decay", "polynomial")


@dataclass(frozen=True)
class CutoffFunction:
    """Cutoff profile ``f`` on ``[0, inf)``.

    ``sharp``             1 on ``[0, 1]``, 0 beyond (closed at 1)
    ``gaussian``          ``exp(-x)``
    ``polynomial-decay``  ``(1 + x)**(-p)`` with ``params = (p,)``, ``p > 0``
    ``polynomial``        ``sum_k c_k x**k`` with ``params = (c_0, c_1, ...)``
    """

    kind: str = "gaussian"
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in CUTOFF_KINDS:
            raise ValueError(f"unknown cutoff kind {self.kind!r}; expected one of {CUTOFF_KINDS}")
        params = tuple(float(p) for p in self.params)
        if self.kind in ("sharp", "gaussian") and params:
            raise ValueError(f"{self.kind} cutoff takes no parameters")
        if self.kind == "polynomial-decay" and (len(params) != 1 or not params[0] > 0):
            raise ValueError("polynomial-decay cutoff needs one positive exponent p")
        if self.kind == "polynomial" and not params:
            raise ValueError("polynomial cutoff needs at least one coefficient")
        object.__setattr__(self, "params", params)

    def __call__(self, x):
        return cutoff_eval(self, x)

    @property
    def degree(self) -> int | None:
        """Polynomial degree, or None for the non-polynomial kinds."""
        if self.kind != "polynomial":
            return None
        c = np.trim_zeros(np.asarray(self.params), "b")
        return max(len(c) - 1, 0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "CutoffFunction":
        unknown = set(data) - {"kind", "params"}
        if unknown:
            raise KeyError(f"unknown cutoff key(s): {', '.join(sorted(unknown))}")
        return cls(data["kind"], tuple(data.get("params", ())))


def _cutoff_values(f: CutoffFunction, x):
    """Evaluate `f` with no domain check; also valid for complex arrays."""
    if f.kind == "sharp":
        return np.where(np.real(x) <= 1.0, 1.0, 0.0)
    if f.kind == "gaussian":
        return np.exp(-x)
    if f.kind == "polynomial-decay":
        return (1.0 + x) ** (-f.params[0])
    return np.polynomial.polynomial.polyval(x, f.params)


def cutoff_eval(f: CutoffFunction, x):
    """Value of the cutoff function at ``x >= 0`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise NegativeArgument(f"cutoff functions are defined on x >= 0, got {x!r}")
    out = _cutoff_values(f, xa)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FermionState:
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "psi", as_vector(self.psi, name="psi"))

    @classmethod
    def zero(cls, dim: int) -> "FermionState":
        return cls(np.zeros(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.psi.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.psi)

    def normalized(self) -> np.ndarray:
        nrm = np.linalg.norm(self.psi)
        if nrm == 0:
            raise ZeroState("the zero state cannot be normalized")
        return self.psi / nrm


def _as_state(psi) -> FermionState:
    return psi if isinstance(psi, FermionState) else FermionState(psi)


@dataclass(frozen=True)
class ActionConfig:
    lam: float = 1.0
    cutoff: CutoffFunction = field(default_factory=CutoffFunction)
    physical_projector: np.ndarray | None = None

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"cutoff scale must be positive and finite, got {self.lam!r}")
        if self.physical_projector is not None:
            p = as_matrix(self.physical_projector, "physical_projector")
            if hermiticity_residual(p) > 1e-10 or max_norm(p @ p - p) > 1e-10:
                raise ValueError("physical_projector must be a Hermitian idempotent")
            object.__setattr__(self, "physical_projector", p)


def _dirac(t) -> np.ndarray:
    return t.d if isinstance(t, FiniteSpectralTriple) else as_matrix(t, "d")


def _check_projector_dim(cfg: ActionConfig, n: int):
    p = cfg.physical_projector
    if p is not None and p.shape[0] != n:
        raise DimensionMismatch(f"physical projector is {p.shape[0]}-dimensional, Dirac operator {n}")


def state_projector(psi) -> np.ndarray:
    """Rank-one orthogonal projector ``|psi><psi| / <psi|psi>``."""
    v = _as_state(psi).normalized()
    return np.outer(v, np.conj(v))


def _spectral_trace(m, cfg: ActionConfig, tol: float) -> float:
    """``Tr Pi f(m^2 / Lambda^2) Pi`` for Hermitian `m`."""
    w, v = eigh(m, tol)
    fw = np.asarray(cfg.cutoff(np.square(w / cfg.lam)), dtype=float)
    if cfg.physical_projector is None:
        return float(np.sum(fw))
    # Tr(Pi V f V^dagger Pi) = sum_i f_i <v_i|Pi|v_i>
    weights = np.real(np.einsum("ij,ik,kj->j", np.conj(v), cfg.physical_projector, v))
    return float(np.sum(fw * weights))


def bosonic_action(t, cfg: ActionConfig, tol: float = DEFAULT_TOL) -> float:
    """``Tr f(D^2 / Lambda^2)``, restricted to the physical subspace if one is set."""
    d = _dirac(t)
    _check_projector_dim(cfg, d.shape[0])
    return _spectral_trace(d, cfg, tol)


def fermionic_action(t, psi) -> float:
    """Expectation ``<psi|D psi>`` (unnormalized, real for Hermitian D)."""
    d = _dirac(t)
    v = as_vector(_as_state(psi).psi, d.shape[0], "psi")
    val = np.vdot(v, d @ v)
    bound = 1e-10 * max(np.vdot(v, v).real, 1.0) * max(np.linalg.norm(d, 2), 1.0)
    if abs(val.imag) > bound:
        raise ValueError(f"<psi|D psi> has imaginary part {val.imag:.3e}; is D Hermitian?")
    return float(val.real)


def extended_action(t, psi, cfg: ActionConfig, tol: float = DEFAULT_TOL) -> float:
    """``Tr_ph f((D + P_psi)^2 / Lambda^2)``; a zero state gives the bosonic action."""
    d = _dirac(t)
    _check_projector_dim(cfg, d.shape[0])
    if psi is None or _as_state(psi).is_zero:
        return _spectral_trace(d, cfg, tol)
    state = _as_state(psi)
    if state.dim != d.shape[0]:
        raise DimensionMismatch(f"psi has length {state.dim}, Dirac operator is {d.shape[0]}-dimensional")
    return _spectral_trace(d + state_projector(state), cfg, tol)


@dataclass(frozen=True)
class CrossTermReport:
    """Audit of the quadratic cross term ``Tr (D P + P D)^2`` for a unit state.

    ``lhs`` is explicit matrix arithmetic.  ``paper_rhs`` is
    ``3 <D>^2 + <D^2>`` and ``derived_rhs`` is ``2 <D>^2 + 2 <D^2>``, which
    follows from expanding the square and using ``P D^k P = <D^k> P``.
    """

    lhs: float
    paper_rhs: float
    derived_rhs: float
    expect_d: float
    expect_d2: float

    @property
    def paper_discrepancy(self) -> float:
        return self.lhs - self.paper_rhs

    @property
    def derived_discrepancy(self) -> float:
        return self.lhs - self.derived_rhs

    def as_record(self) -> dict:
        return {
            "lhs": self.lhs,
            "paper_rhs": self.paper_rhs,
            "derived_rhs": self.derived_rhs,
            "expect_d": self.expect_d,
            "expect_d2": self.expect_d2,
            "paper_discrepancy": self.paper_discrepancy,
            "derived_discrepancy": self.derived_discrepancy,
        }


def cross_term_quadratic(t, psi) -> CrossTermReport:
    d = _dirac(t)
    state = _as_state(psi)
    if state.dim != d.shape[0]:
        raise DimensionMismatch(f"psi has length {state.dim}, Dirac operator is {d.shape[0]}-dimensional")
    p = state_projector(state)
    x = d @ p + p @ d
    lhs = np.trace(x @ x)
    v = state.normalized()
    dv = d @ v
    e1 = np.vdot(v, dv).real
    e2 = np.vdot(dv, dv).real  # <v|D^2 v> for Hermitian D
    return CrossTermReport(
        lhs=float(lhs.real),
        paper_rhs=float(3 * e1**2 + e2),
        derived_rhs=float(2 * e1**2 + 2 * e2),
        expect_d=float(e1),
        expect_d2=float(e2),
    )


def _matpoly_mul(a: list, b: list) -> list:
    out = [None] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for k, y in enumerate(b):
            out[i + k] = x @ y if out[i + k] is None else out[i + k] + x @ y
    return out


def _polynomial_coefficients(d, p, cfg: ActionConfig, order: int) -> list:
    """Exact Taylor coefficients of ``Tr Pi f(X(e)) Pi`` for polynomial f.

    ``X(e) = (D + e P)^2 / Lambda^2 = A + e B + e^2 C`` is a matrix polynomial
    in ``e``; powers of it are formed by convolving matrix coefficients.
    """
    lam2 = cfg.lam**2
    x = [d @ d / lam2, (d @ p + p @ d) / lam2, p @ p / lam2]
    pi = cfg.physical_projector
    n = d.shape[0]
    coeffs = np.zeros(order + 1)
    power = [np.eye(n, dtype=np.complex128)]
    for k, ck in enumerate(cfg.cutoff.params):
        if k > 0:
            power = _matpoly_mul(power, x)[: order + 1]
        if ck == 0:
            continue
        for i, m in enumerate(power[: order + 1]):
            tr = np.trace(m) if pi is None else np.trace(pi @ m @ pi)
            coeffs[i] += ck * tr.real
    return list(coeffs)


def _matrix_cutoff(f: CutoffFunction, x: np.ndarray) -> np.ndarray:
    """Cutoff function of a general (non-normal) square matrix."""
    n = x.shape[0]
    if f.kind == "gaussian":
        return scipy.linalg.expm(-x)
    if f.kind == "polynomial-decay":
        return scipy.linalg.fractional_matrix_power(np.eye(n) + x, -f.params[0])
    raise NonSmoothCutoff(f"no analytic continuation for cutoff kind {f.kind!r}")


def contour_radius(d, lam: float) -> float:
    """Radius of the circle in the complex coupling plane used for Taylor coefficients.

    Keeps ``|e B + e^2 C| <= 1/2`` so that the continuation of f stays away
    from singularities (the branch point at ``x = -1`` of polynomial-decay)
    and from exponential growth (gaussian).
    """
    dn = float(np.linalg.norm(d, 2))
    return min(1.0, -dn + math.sqrt(dn * dn + 0.5 * lam * lam))


def _contour_coefficients(d, p, cfg: ActionConfig, order: int, nodes: int = 64) -> list:
    """Taylor coefficients by the trapezoidal rule for the Cauchy integral."""
    r = contour_radius(d, cfg.lam)
    lam2 = cfg.lam**2
    a, b, c = d @ d / lam2, (d @ p + p @ d) / lam2, p @ p / lam2
    pi = cfg.physical_projector
    theta = 2 * np.pi * np.arange(nodes) / nodes
    z = r * np.exp(1j * theta)
    vals = np.empty(nodes, dtype=np.complex128)
    for k, e in enumerate(z):
        fx = _matrix_cutoff(cfg.cutoff, a + e * b + e * e * c)
        vals[k] = np.trace(fx) if pi is None else np.trace(pi @ fx @ pi)
    # c_k = (1 / N) sum_j s(z_j) z_j^{-k}
    return [float(np.real(np.mean(vals * z ** (-k)))) for k in range(order + 1)]


def perturbative_expansion(t, psi, cfg: ActionConfig, order: int, tol: float = DEFAULT_TOL) -> list:
    """Taylor coefficients of ``s(e) = Tr_ph f((D + e P_psi)^2 / Lambda^2)`` at ``e = 0``.

    Parameters
    ----------
    t : FiniteSpectralTriple or array_like
        Triple (or bare Hermitian Dirac operator).
    psi : FermionState, array_like or None
        Fermion state; a zero state gives ``c_k = 0`` for ``k >= 1``.
    cfg : ActionConfig
        Cutoff function, scale and optional physical projector.
    order : int
        Highest coefficient, ``0 <= order <= 4``.

    Returns
    -------
    list of float
        ``[c_0, ..., c_order]`` with ``c_0`` the bosonic action.  Polynomial
        cutoffs are expanded exactly; gaussian and polynomial-decay ones by a
        64-node Cauchy integral around ``e = 0``.

    Raises
    ------
    NonSmoothCutoff
        For the sharp cutoff with ``order >= 1``.
    """
    if not 0 <= order <= 4:
        raise ValueError(f"expansion order must be between 0 and 4, got {order}")
    d = require_hermitian(_dirac(t), tol, "d")
    n = d.shape[0]
    _check_projector_dim(cfg, n)
    c0 = bosonic_action(d, cfg, tol)
    if order == 0:
        return [c0]
    if cfg.cutoff.kind == "sharp":
        raise NonSmoothCutoff("the sharp cutoff has no Taylor expansion beyond order 0")
    if psi is None or _as_state(psi).is_zero:
        return [c0] + [0.0] * order
    state = _as_state(psi)
    if state.dim != n:
        raise DimensionMismatch(f"psi has length {state.dim}, Dirac operator is {n}-dimensional")
    p = state_projector(state)
    if cfg.cutoff.kind == "polynomial":
        coeffs = _polynomial_coefficients(d, p, cfg, order)
    else:
        coeffs = _contour_coefficients(d, p, cfg, order)
    coeffs[0] = c0
    return coeffs


def circle_spectrum(n_min: int, n_max: int) -> np.ndarray:
    """Dirac spectrum ``n + 1/2`` of the circle for ``n_min <= n <= n_max``."""
    return np.arange(n_min, n_max + 1, dtype=float) + 0.5


def weyl_count(spectrum, lam: float) -> int:
    """Number of eigenvalues with ``|lambda| <= lam``."""
    if not lam > 0:
        raise ValueError(f"cutoff scale must be positive, got {lam!r}")
    return int(np.count_nonzero(np.abs(np.asarray(spectrum, dtype=float)) <= lam))


def weyl_scan(spectrum, lambdas) -> np.ndarray:
    s = np.sort(np.abs(np.asarray(spectrum, dtype=float)))
    return np.searchsorted(s, np.asarray(lambdas, dtype=float), side="right")


def weyl_slope(spectrum, lam_min: float, lam_max: float, steps: int = 301) -> float:
    """Least-squares slope of the counting function over ``[lam_min, lam_max]``."""
    grid = np.linspace(lam_min, lam_max, steps)
    slope, _ = np.polyfit(grid, weyl_scan(spectrum, grid), 1)
    return float(slope)
