"""One-generation lepton sector as a finite spectral triple.

Basis of the particle sector is ``(nu_L, e_L, e_R[, N])``; the conjugate
sector repeats it.  The real structure swaps the two sectors and conjugates,
so ``J^2 = 1``, ``JD = DJ`` and ``J gamma = -gamma J`` (KO-dimension 6).

The algebra ``C + H`` acts on the particle sector by the quaternion ``q`` on
the doublet, ``conj(lambda)`` on ``e_R`` and ``lambda`` on ``N``; on the
conjugate sector every lepton sees ``lambda``.  With
``sterile_in_algebra=False`` the algebra acts as zero on ``N`` and ``N^c``.

Masses are in GeV throughout; only :func:`neutrino_mass_estimate` returns eV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DimensionMismatch, InvalidParams, NonPositiveInput, NotSU2
from .linalg import AntiUnitaryOp, as_vector, dagger, eigh, max_norm
from .triple import FiniteSpectralTriple

SIGMA2 = np.array([[0, -1j], [1j, 0]])
GEV_TO_EV = 1e9
DEFAULT_VEV_GEV = 246.0

_QUATERNION_UNITS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1j], [1j, 0]]),
    np.array([[0, 1], [-1, 0]], dtype=np.complex128),
    np.array([[1j, 0], [0, -1j]]),
)


@dataclass(frozen=True)
class LeptonDoublet:
    nu: complex
    e: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.nu, self.e], dtype=np.complex128)

    @classmethod
    def from_vector(cls, v) -> "LeptonDoublet":
        v = as_vector(v, 2, "lepton doublet")
        return cls(complex(v[0]), complex(v[1]))


@dataclass(frozen=True)
class HiggsDoublet:
    h_plus: complex
    h_zero: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.h_plus, self.h_zero], dtype=np.complex128)

    @classmethod
    def from_vector(cls, v) -> "HiggsDoublet":
        v = as_vector(v, 2, "Higgs doublet")
        return cls(complex(v[0]), complex(v[1]))

    @classmethod
    def vacuum(cls, v: float = DEFAULT_VEV_GEV) -> "HiggsDoublet":
        return cls(0.0, v)


def su2_residual(h) -> float:
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (2, 2):
        return math.inf
    return max(max_norm(dagger(h) @ h - np.eye(2)), abs(np.linalg.det(h) - 1))


@dataclass(frozen=True)
class GaugeElement:
    """Element ``(h, z)`` of ``SU(2) x U(1)``."""

    h: np.ndarray
    z: complex

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128)
        if su2_residual(h) > 1e-12:
            raise NotSU2(f"h is not in SU(2) (residual {su2_residual(h):.2e})")
        if abs(abs(self.z) - 1) > 1e-12:
            raise ValueError(f"|z| must be 1, got {abs(self.z)!r}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "z", complex(self.z))

    @classmethod
    def identity(cls) -> "GaugeElement":
        return cls(np.eye(2), 1.0)


@dataclass(frozen=True)
class LeptonModelParams:
    y_e: float = 1.0
    y_nu: float = 0.0
    v: float = DEFAULT_VEV_GEV
    include_sterile: bool = False
    m_r: float = 0.0
    kappa: float = 1.0
    sterile_in_algebra: bool = True

    def __post_init__(self):
        for f in ("y_e", "y_nu", "v", "m_r", "kappa"):
            x = getattr(self, f)
            if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
                raise InvalidParams(f"{f} must be a finite real number, got {x!r}")
        if not self.v > 0:
            raise InvalidParams(f"v must be positive, got {self.v}")
        if self.y_e < 0:
            raise InvalidParams(f"y_e must be nonnegative, got {self.y_e}")
        if not self.include_sterile and (self.y_nu != 0 or self.m_r != 0):
            raise InvalidParams("y_nu and m_r need include_sterile=True")

    @property
    def m_dirac(self) -> float:
        """Neutrino Dirac mass ``y_nu * v``."""
        return self.y_nu * self.v

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in fields(cls))


def basis_labels(p: LeptonModelParams) -> tuple:
    part = ["nu_L", "e_L", "e_R"] + (["N"] if p.include_sterile else [])
    return tuple(part + [f"{s}^c" for s in part])


def _index(p: LeptonModelParams) -> dict:
    return {name: k for k, name in enumerate(basis_labels(p))}


def algebra_element(p: LeptonModelParams, lam: complex, q) -> np.ndarray:
    """Represented image of ``(lam, q)`` in ``C + H``."""
    q = np.asarray(q, dtype=np.complex128)
    idx = _index(p)
    n = len(idx)
    half = n // 2
    a = np.zeros((n, n), dtype=np.complex128)
    a[0:2, 0:2] = q
    a[idx["e_R"], idx["e_R"]] = np.conj(lam)
    a[half:, half:] = lam * np.eye(half)
    if p.include_sterile:
        s = lam if p.sterile_in_algebra else 0.0
        a[idx["N"], idx["N"]] = s
        a[idx["N^c"], idx["N^c"]] = s
    return a


def algebra_generators(p: LeptonModelParams) -> list:
    """Real basis of ``C + H``: ``(1, 0), (i, 0), (0, 1), (0, I), (0, J), (0, K)``."""
    zero = np.zeros((2, 2))
    gens = [algebra_element(p, 1.0, zero), algebra_element(p, 1j, zero)]
    gens += [algebra_element(p, 0.0, u) for u in _QUATERNION_UNITS]
    return gens


def _yukawa_block(p: LeptonModelParams, v: float) -> np.ndarray:
    idx = _index(p)
    half = len(idx) // 2
    y = np.zeros((half, half), dtype=np.complex128)
    y[idx["e_L"], idx["e_R"]] = y[idx["e_R"], idx["e_L"]] = p.y_e * v
    if p.include_sterile:
        y[idx["nu_L"], idx["N"]] = y[idx["N"], idx["nu_L"]] = p.y_nu * v
    return y


def lepton_dirac(p: LeptonModelParams, v: float | None = None) -> np.ndarray:
    """Finite Dirac operator ``[[Y, M], [M^dagger, conj(Y)]]``."""
    v = p.v if v is None else v
    y = _yukawa_block(p, v)
    half = y.shape[0]
    m = np.zeros_like(y)
    if p.include_sterile:
        k = _index(p)["N"]
        m[k, k] = p.m_r
    d = np.zeros((2 * half, 2 * half), dtype=np.complex128)
    d[:half, :half] = y
    d[half:, half:] = np.conj(y)
    d[:half, half:] = m
    d[half:, :half] = dagger(m)
    return d


def build_lepton_triple(p: LeptonModelParams) -> FiniteSpectralTriple:
    labels = basis_labels(p)
    half = len(labels) // 2
    g = np.array([1.0, 1.0, -1.0] + ([-1.0] if p.include_sterile else []))
    gamma = np.diag(np.concatenate([g, -g])).astype(np.complex128)
    swap = np.block([[np.zeros((half, half)), np.eye(half)], [np.eye(half), np.zeros((half, half))]])
    return FiniteSpectralTriple(
        algebra_gens=tuple(algebra_generators(p)),
        d=lepton_dirac(p),
        gamma=gamma,
        j=AntiUnitaryOp(swap),
        ko_dim=6,
        labels=labels,
    )


def physical_projector(p: LeptonModelParams) -> np.ndarray:
    """Projector onto the states that are not sterile (drops ``N`` and ``N^c``)."""
    keep = np.array([0.0 if s.startswith("N") else 1.0 for s in basis_labels(p)])
    return np.diag(keep).astype(np.complex128)


def higgs_fluctuation(p: LeptonModelParams, phi: float) -> np.ndarray:
    """Hermitian fluctuation on the particle sector shifting the vev ``v -> v + phi``.

    After :func:`~spectral_lab.triple.fluctuate` the ``J``-image shifts the
    conjugate sector as well.
    """
    y = _yukawa_block(p, phi)
    a = np.zeros((2 * y.shape[0],) * 2, dtype=np.complex128)
    a[: y.shape[0], : y.shape[0]] = y
    return a


def neutral_mass_block(p: LeptonModelParams, d=None) -> np.ndarray:
    """Restriction of D to ``(nu_L, N, nu_L^c, N^c)``."""
    if not p.include_sterile:
        raise InvalidParams("the neutral mass block needs include_sterile=True")
    idx = _index(p)
    sel = [idx["nu_L"], idx["N"], idx["nu_L^c"], idx["N^c"]]
    d = lepton_dirac(p) if d is None else np.asarray(d)
    return d[np.ix_(sel, sel)]


def light_neutrino_mass(p: LeptonModelParams) -> float:
    """Smallest ``|eigenvalue|`` of the neutral mass block."""
    w = eigh(neutral_mass_block(p)).eigenvalues
    return float(np.min(np.abs(w)))


def seesaw_mass_matrix(p: LeptonModelParams) -> np.ndarray:
    """Symmetric ``(nu, N)`` Majorana mass matrix ``[[0, m_D], [m_D, m_R]]``."""
    return np.array([[0.0, p.m_dirac], [p.m_dirac, p.m_r]])


def gauge_transform(l: LeptonDoublet, hd: HiggsDoublet, g: GaugeElement):
    """``L -> h L conj(z)`` and ``H -> h H z``."""
    lv = g.h @ l.vector * np.conj(g.z)
    hv = g.h @ hd.vector * g.z
    return LeptonDoublet.from_vector(lv), HiggsDoublet.from_vector(hv)


def invariant_term(hd: HiggsDoublet, l: LeptonDoublet, n: complex | None = None) -> complex:
    """``H^T sigma_2 L``, or ``<N | H^T sigma_2 L> = conj(n) H^T sigma_2 L``."""
    val = complex(hd.vector @ SIGMA2 @ l.vector)
    return val if n is None else complex(np.conj(n) * val)


def check_intertwine(h) -> float:
    """Residual ``max|sigma_2 h sigma_2^{-1} - conj(h)|`` for ``h`` in SU(2)."""
    h = np.asarray(h, dtype=np.complex128)
    if su2_residual(h) > 1e-10:
        raise NotSU2(f"h is not in SU(2) (residual {su2_residual(h):.2e})")
    # sigma_2 is its own inverse
    return max_norm(SIGMA2 @ h @ SIGMA2 - np.conj(h))


def majorana_term(m: float, psi_l, c: AntiUnitaryOp) -> float:
    """``m <C psi_L | psi_L> + c.c.`` with c-number amplitudes."""
    psi = np.asarray(psi_l, dtype=np.complex128)
    if psi.ndim != 1 or psi.shape[0] != c.dim:
        raise DimensionMismatch(f"psi_L has shape {psi.shape}, charge conjugation acts on dimension {c.dim}")
    val = m * np.vdot(c(psi), psi)
    return float(2 * val.real)


def weinberg_term(p: LeptonModelParams, l: LeptonDoublet, hd: HiggsDoublet, c: AntiUnitaryOp | None = None) -> complex:
    """Dimension-five operator ``kappa (conj(C e) H+ - conj(C nu) H0)(H+ e - H0 nu)``.

    `c` acts on the doublet ``(nu, e)``; the default is plain complex
    conjugation.  Gauge covariance needs ``c.u`` proportional to the identity.
    """
    c = AntiUnitaryOp(np.eye(2)) if c is None else c
    cnu, ce = c(l.vector)
    left = np.conj(ce) * hd.h_plus - np.conj(cnu) * hd.h_zero
    right = hd.h_plus * l.e - hd.h_zero * l.nu
    return complex(p.kappa * left * right)


def neutrino_mass_estimate(kappa: float, v: float, lam: float) -> float:
    """Majorana mass ``kappa v^2 / Lambda`` in eV, for `v` and `lam` in GeV."""
    if kappa < 0 or not v > 0 or not lam > 0:
        raise NonPositiveInput(f"need kappa >= 0, v > 0, lambda > 0; got {kappa}, {v}, {lam}")
    return kappa * v * v / lam * GEV_TO_EV


def sample_su2(seed: int) -> GaugeElement:
    """Haar-random ``h`` in SU(2) (normalised Gaussian quaternion) and uniform phase ``z``."""
    rng = np.random.default_rng(seed)
    a, b, c, d = rng.standard_normal(4)
    nrm = math.sqrt(a * a + b * b + c * c + d * d)
    a, b, c, d = a / nrm, b / nrm, c / nrm, d / nrm
    h = np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])
    z = complex(np.exp(2j * np.pi * rng.random()))
    return GaugeElement(h, z)
