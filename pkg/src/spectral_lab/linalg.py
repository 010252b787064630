"""Dense complex linear algebra kernel.

Every operator in the package (Dirac operators, gradings, projectors,
Yukawa blocks) is a plain square ``complex128`` numpy array.  This module
validates such arrays, diagonalises Hermitian ones, applies scalar functions
through the spectrum and implements antiunitary maps ``v -> u @ conj(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian

DEFAULT_TOL = 1e-10


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return `m` as a square, finite complex128 array (copying only if needed)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_vector(v, dim: int | None = None, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=np.complex128)
    if a.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {a.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def max_norm(m) -> float:
    """Largest absolute entry; 0 for empty input."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermiticity_residual(m) -> float:
    m = np.asarray(m)
    return max_norm(m - dagger(m))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def require_hermitian(m, tol: float = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    res = hermiticity_residual(a)
    if res > tol:
        raise NotHermitian(f"{name} is not Hermitian: max|m - m^dagger| = {res:.3e} > {tol:.1e}")
    return a


class EigenDecomposition(NamedTuple):
    """Ascending real eigenvalues and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ dagger(self.vectors)


def eigh(m, tol: float = DEFAULT_TOL) -> EigenDecomposition:
    """Diagonalise a Hermitian matrix.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Hermitian to within `tol` in the max norm.  The Hermitian part
        ``(m + m^dagger) / 2`` is what actually gets diagonalised.
    tol : float
        Hermiticity tolerance.

    Returns
    -------
    EigenDecomposition
        Eigenvalues in ascending order.  Inside a degenerate eigenspace the
        vectors are only defined up to a unitary rotation.

    Raises
    ------
    NotHermitian
        If ``max|m - m^dagger| > tol``.
    NoConvergence
        If LAPACK fails to converge.
    """
    a = require_hermitian(m, tol)
    a = 0.5 * (a + dagger(a))
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(w, v)


def matrix_function(m, f: Callable[[np.ndarray], np.ndarray], tol: float = DEFAULT_TOL) -> np.ndarray:
    """Apply the scalar function `f` to a Hermitian matrix through its spectrum.

    `f` receives the whole eigenvalue array and must act elementwise.
    """
    w, v = eigh(m, tol)
    fw = np.asarray(f(w))
    return (v * fw) @ dagger(v)


def spectral_projector(dec: EigenDecomposition, select: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the eigenvectors flagged by the boolean mask."""
    vs = dec.vectors[:, np.asarray(select, dtype=bool)]
    return vs @ dagger(vs)


@dataclass(frozen=True)
class AntiUnitaryOp:
    """Antiunitary map ``v -> u @ conj(v)``, stored through its unitary part."""

    u: np.ndarray

    def __post_init__(self):
        u = as_matrix(self.u, "antiunitary u")
        if max_norm(dagger(u) @ u - np.eye(u.shape[0])) > 1e-10:
            raise ValueError("unitary part of an antiunitary operator must satisfy u^dagger u = 1")
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    def __call__(self, v) -> np.ndarray:
        return apply_antiunitary(self, v)

    def square(self) -> np.ndarray:
        """The linear operator J^2 = u conj(u)."""
        return self.u @ np.conj(self.u)

    def conjugate(self, m) -> np.ndarray:
        """The linear operator J m J^{-1} = u conj(m) u^dagger."""
        return self.u @ np.conj(m) @ dagger(self.u)


def apply_antiunitary(j: AntiUnitaryOp, v) -> np.ndarray:
    v = as_vector(v, j.dim, "vector")
    return j.u @ np.conj(v)


def matrix_to_literal(m) -> dict:
    """Serialise a square matrix as ``{"dim": n, "entries": [[re, im], ...]}`` (row-major)."""
    a = as_matrix(m)
    return {
        "dim": int(a.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in a.ravel()],
    }


def matrix_from_literal(lit) -> np.ndarray:
    """Inverse of :func:`matrix_to_literal`."""
    if not isinstance(lit, dict) or set(lit) != {"dim", "entries"}:
        raise ValueError('matrix literal must be an object with exactly the keys "dim" and "entries"')
    dim = lit["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim <= 0:
        raise ValueError(f"matrix literal dim must be a positive integer, got {dim!r}")
    entries = lit["entries"]
    if not isinstance(entries, list) or len(entries) != dim * dim:
        n = len(entries) if isinstance(entries, list) else "non-list"
        raise DimensionMismatch(f"matrix literal of dim {dim} needs {dim * dim} entries, got {n}")
    return as_matrix(vector_from_literal(entries).reshape(dim, dim))


def vector_to_literal(v) -> list:
    return [[float(z.real), float(z.imag)] for z in as_vector(v)]


def vector_from_literal(pairs) -> np.ndarray:
    out = []
    for k, p in enumerate(pairs):
        if isinstance(p, (int, float)) and not isinstance(p, bool):
            out.append(complex(p, 0.0))
        elif isinstance(p, (list, tuple)) and len(p) == 2:
            out.append(complex(float(p[0]), float(p[1])))
        else:
            raise ValueError(f"entry {k} must be a number or a [re, im] pair, got {p!r}")
    return as_vector(np.array(out, dtype=np.complex128))
