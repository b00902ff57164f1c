"""Dense complex linear algebra with explicit tolerances.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``.
Operators are vectorized by column stacking, so that
``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, NonHermitianError

__all__ = [
    "ToleranceConfig",
    "HermitianEigenSystem",
    "OperatorSpan",
    "as_matrix",
    "vec",
    "unvec",
    "opnorm",
    "dagger",
    "hs_inner",
    "is_hermitian",
    "hermitian_eigensystem",
    "spectral_projections",
    "nullspace",
    "matrix_exp_hermitian",
    "orthonormalize_span",
    "span_residual",
    "span_distance",
    "range_basis",
    "range_projection",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by the whole pipeline.

    Attributes:
        eps_rank: relative singular-value cutoff used for every rank decision.
        eps_cluster: eigenvalues closer than ``eps_cluster * max(1, ||M||)``
            are treated as one eigenvalue.
        eps_zero: relative threshold for "this matrix is zero".
        seed: seed for randomized strategies and simulations.
    """

    eps_rank: float = 1e-9
    eps_cluster: float = 1e-8
    eps_zero: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        for name in ("eps_rank", "eps_cluster", "eps_zero"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be an unsigned integer, got {self.seed!r}")

    @property
    def residual(self) -> float:
        """Threshold for identities checked on computed projections and units.

        Computed spectral projections carry errors of order
        machine-epsilon / eigen-gap, so structural identities (PBP in CP,
        [P, B] = 0, matrix-unit relations) are tested at a looser level
        than raw zero tests.
        """
        return 1e3 * self.eps_zero

    def rng(self, offset: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.seed + offset)


DEFAULT_TOL = ToleranceConfig()


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatchError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def opnorm(m: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(A^dagger B)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def is_hermitian(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return np.linalg.norm(m - dagger(m)) <= tol.eps_zero * max(1.0, opnorm(m))


def _require_hermitian(m, tol: ToleranceConfig) -> np.ndarray:
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NonHermitianError(
            f"matrix is not Hermitian (||M - M^dagger|| = {np.linalg.norm(m - dagger(m)):.3e})"
        )
    return (m + dagger(m)) / 2


@dataclass(frozen=True)
class HermitianEigenSystem:
    """Clustered spectral data of a Hermitian matrix.

    ``eigenvectors`` is unitary; its columns are grouped by cluster in the
    order of ``eigenvalues`` (ascending).
    """

    eigenvalues: np.ndarray
    multiplicities: tuple[int, ...]
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    def cluster_slices(self) -> list[slice]:
        out, start = [], 0
        for k in self.multiplicities:
            out.append(slice(start, start + k))
            start += k
        return out

    def reconstruct(self) -> np.ndarray:
        lam = np.repeat(self.eigenvalues, self.multiplicities)
        u = self.eigenvectors
        return (u * lam) @ dagger(u)


def hermitian_eigensystem(m, tol: ToleranceConfig = DEFAULT_TOL) -> HermitianEigenSystem:
    """Eigen-decompose a Hermitian matrix and merge numerically equal eigenvalues.

    Raw eigenvalues (ascending) are chained into one cluster whenever the gap
    between neighbours is at most ``eps_cluster * max(1, ||M||)``; the
    cluster's value is the mean of its members.
    """
    h = _require_hermitian(m, tol)
    raw, vecs = np.linalg.eigh(h)
    gap = tol.eps_cluster * max(1.0, opnorm(h))
    values, mults = [], []
    start = 0
    for i in range(1, len(raw) + 1):
        if i == len(raw) or raw[i] - raw[i - 1] > gap:
            values.append(float(np.mean(raw[start:i])))
            mults.append(i - start)
            start = i
    return HermitianEigenSystem(np.array(values), tuple(mults), vecs)


def spectral_projections(m, tol: ToleranceConfig = DEFAULT_TOL) -> list[tuple[float, np.ndarray]]:
    """Pairs ``(eigenvalue, projection)`` for each eigenvalue cluster, ascending."""
    es = hermitian_eigensystem(m, tol)
    out = []
    for lam, sl in zip(es.eigenvalues, es.cluster_slices()):
        v = es.eigenvectors[:, sl]
        out.append((float(lam), v @ dagger(v)))
    return out


def nullspace(m, tol: ToleranceConfig = DEFAULT_TOL, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the right nullspace, returned as columns.

    Singular values at or below ``eps_rank * max(sigma_max, scale)`` count
    as zero.  Pass ``scale`` (the norm the matrix would have if it were not
    zero) when the input may be pure rounding noise.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d array, got shape {a.shape}")
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if rows == 0:
        return np.eye(cols, dtype=np.complex128)
    _, s, vh = np.linalg.svd(a, full_matrices=rows < cols)
    cutoff = tol.eps_rank * max(s[0] if s.size else 0.0, scale)
    if cutoff == 0.0:
        return np.eye(cols, dtype=np.complex128)
    rank = int(np.sum(s > cutoff))
    return dagger(vh[rank:])


def matrix_exp_hermitian(h, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """exp(iH) for Hermitian H via its eigen-decomposition."""
    h = _require_hermitian(h, tol)
    lam, u = np.linalg.eigh(h)
    return (u * np.exp(1j * lam)) @ dagger(u)


@dataclass(frozen=True)
class OperatorSpan:
    """A subspace of d x d operators with a Hilbert-Schmidt orthonormal basis.

    ``basis`` has shape ``(r, d, d)``.
    """

    dim: int
    basis: np.ndarray
    label: str = "span"
    _flat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.complex128).reshape(-1, self.dim, self.dim)
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        # rows are vec(B_i); used for projections
        object.__setattr__(self, "_flat", basis.reshape(len(basis), self.dim * self.dim))

    def __len__(self) -> int:
        return self.basis.shape[0]

    def __iter__(self):
        return iter(self.basis)

    def coefficients(self, m) -> np.ndarray:
        return self._flat.conj() @ np.asarray(m, dtype=np.complex128).reshape(-1)

    def project(self, m) -> np.ndarray:
        """Orthogonal (Hilbert-Schmidt) projection of ``m`` onto the span."""
        if len(self) == 0:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return (self.coefficients(m) @ self._flat).reshape(self.dim, self.dim)

    def residual(self, m) -> float:
        m = np.asarray(m, dtype=np.complex128)
        return float(np.linalg.norm(m - self.project(m)))

    def contains(self, m, atol: float) -> bool:
        """True when ``m`` is within ``atol * max(1, ||m||_F)`` of the span."""
        m = np.asarray(m, dtype=np.complex128)
        return self.residual(m) <= atol * max(1.0, float(np.linalg.norm(m)))

    def gram(self) -> np.ndarray:
        return self._flat.conj() @ self._flat.T

    def with_label(self, label: str) -> "OperatorSpan":
        return OperatorSpan(self.dim, self.basis, label)


def orthonormalize_span(
    mats: Iterable, tol: ToleranceConfig = DEFAULT_TOL, label: str = "span", dim: int | None = None
) -> OperatorSpan:
    """Hilbert-Schmidt orthonormal basis of the linear span of ``mats``.

    The basis is the set of leading left singular vectors of the stacked
    vectorizations, so its size is the numerical rank of the input.
    """
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    if not mats:
        return OperatorSpan(dim or 1, np.zeros((0, dim or 1, dim or 1)), label)
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise DimensionMismatchError(f"expected {d}x{d} operators, got {m.shape}")
    a = np.stack([m.reshape(-1) for m in mats], axis=1)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return OperatorSpan(d, np.zeros((0, d, d)), label)
    rank = int(np.sum(s > tol.eps_rank * s[0]))
    return OperatorSpan(d, u[:, :rank].T.reshape(rank, d, d), label)


def span_residual(a: OperatorSpan, b: OperatorSpan) -> float:
    """Largest distance from a basis element of ``a`` to the span ``b``."""
    if len(a) == 0:
        return 0.0
    return max(b.residual(m) for m in a.basis)


def span_distance(a: OperatorSpan, b: OperatorSpan) -> float:
    """Symmetric mutual projection residual; ``inf`` when dimensions differ."""
    if a.dim != b.dim or len(a) != len(b):
        return float("inf")
    return max(span_residual(a, b), span_residual(b, a))


def range_basis(p: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Orthonormal columns spanning the range of a projection."""
    lam, u = np.linalg.eigh((p + dagger(p)) / 2)
    if rank is None:
        rank = int(round(float(np.real(np.trace(p)))))
    return u[:, len(lam) - rank:][:, ::-1]


def range_projection(vectors: Sequence | np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the span of the given column vectors."""
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim == 1:
        v = v[:, None]
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((v.shape[0], v.shape[0]), dtype=np.complex128)
    u = u[:, s > 1e-12 * s[0]]
    return u @ dagger(u)
