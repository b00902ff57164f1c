"""Noise commutant, fixed-point space and interaction algebra as operator spans."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .channels import KrausChannel, superoperator
from .errors import DimensionMismatchError, EmptyInputError, NotSelfAdjointSpanError
from .linalg import (
    DEFAULT_TOL,
    OperatorSpan,
    ToleranceConfig,
    as_matrix,
    dagger,
    nullspace,
    opnorm,
    unvec,
    vec,
)

__all__ = [
    "commutator_map",
    "commutant_basis",
    "fixed_point_basis",
    "algebra_basis",
    "hermitian_spanning_set",
]


def _common_dim(ops: Sequence) -> tuple[list[np.ndarray], int]:
    if len(ops) == 0:
        raise EmptyInputError("need at least one operator")
    mats = [as_matrix(a, f"operator {i}") for i, a in enumerate(ops)]
    d = mats[0].shape[0]
    for i, a in enumerate(mats):
        if a.shape != (d, d):
            raise DimensionMismatchError(f"operator {i} has shape {a.shape}, expected {(d, d)}")
    return mats, d


def commutator_map(a: np.ndarray) -> np.ndarray:
    """Matrix C with C @ vec(B) == vec(A B - B A)."""
    d = a.shape[0]
    eye = np.eye(d)
    return np.kron(eye, a) - np.kron(a.T, eye)


def _identity_first(null: np.ndarray, d: int, tol: ToleranceConfig) -> np.ndarray:
    """Re-pick an orthonormal basis of the column space with vec(I)/sqrt(d) first.

    Columns of ``null`` are orthonormal.  Falls back to ``null`` unchanged
    when the identity is not (numerically) in their span.
    """
    u = vec(np.eye(d, dtype=np.complex128)) / np.sqrt(d)
    coeff = dagger(null) @ u
    if abs(np.linalg.norm(coeff) - 1.0) > tol.residual:
        return null
    rest = null - np.outer(u, coeff.conj())
    if null.shape[1] == 1:
        return u[:, None]
    w, s, _ = np.linalg.svd(rest, full_matrices=False)
    return np.column_stack([u, w[:, : null.shape[1] - 1]])


def _to_span(columns: np.ndarray, d: int, label: str) -> OperatorSpan:
    basis = np.stack([unvec(columns[:, i], d) for i in range(columns.shape[1])]) if columns.size else np.zeros((0, d, d))
    return OperatorSpan(d, basis, label)


def _stacked_commutators(mats: list[np.ndarray], cols: np.ndarray, d: int) -> np.ndarray:
    """Rows vec([A_k, X_j]) for every generator k, stacked in generator order."""
    xs = cols.T.reshape(-1, d, d).transpose(0, 2, 1)  # unvec each column
    blocks = []
    for a in mats:
        c = a @ xs - xs @ a
        blocks.append(c.transpose(0, 2, 1).reshape(len(xs), -1).T)
    return np.vstack(blocks)


# fixed so results do not depend on ToleranceConfig.seed
_PRESCREEN_COEFFS = np.random.default_rng(20060101).standard_normal(4096)


def commutant_basis(ops: Sequence, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorSpan:
    """Orthonormal basis of {B : [B, A_k] = 0 for all k}.

    The commutant of a fixed linear combination of the generators contains
    the answer; its (usually small) basis is computed first, and the
    stacked commutator system of all generators, restricted to it, is then
    solved with a single SVD and rank decision.  The first basis element is
    I / sqrt(d).
    """
    mats, d = _common_dim(ops)
    # a commutator map has norm up to 2 ||A||; scalar generators give pure rounding noise
    scale = 2 * max(opnorm(a) for a in mats)
    if len(mats) == 1:
        null = nullspace(commutator_map(mats[0]), tol, scale)
    else:
        coeffs = _PRESCREEN_COEFFS[np.arange(len(mats)) % len(_PRESCREEN_COEFFS)]
        combo = sum(c * a for c, a in zip(coeffs, mats))
        # exact commutant vectors are null vectors of the combination; extras are removed below
        pre = nullspace(commutator_map(combo), tol, 2 * opnorm(combo))
        if pre.shape[1] == 0:
            null = pre
        else:
            null = pre @ nullspace(_stacked_commutators(mats, pre, d), tol, scale)
    return _to_span(_identity_first(null, d, tol), d, "commutant")


def fixed_point_basis(ch: KrausChannel, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorSpan:
    """Orthonormal basis of {T : Phi(T) = T}, the nullspace of S - I."""
    s = superoperator(ch)
    # S - I is pure rounding noise for a channel made of scalar Kraus operators
    null = nullspace(s - np.eye(s.shape[0]), tol, 1.0 + opnorm(s))
    return _to_span(_identity_first(null, ch.dim, tol), ch.dim, "fixed_points")


def algebra_basis(ops: Sequence, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorSpan:
    """The double commutant of ``ops``.

    For a set closed under adjoints (or the Kraus set of a unital channel)
    this is the unital *-algebra the operators generate.
    """
    first = commutant_basis(ops, tol)
    return commutant_basis(list(first.basis), tol).with_label("algebra")


def hermitian_spanning_set(span: OperatorSpan, tol: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Hermitian operators spanning the same (complex) space as ``span``.

    Real and imaginary parts of every basis element are collected and
    reduced to a basis of their real span, which is orthonormal for the
    Hilbert-Schmidt inner product.
    """
    for i, b in enumerate(span.basis):
        r = span.residual(dagger(b))
        if r > tol.residual:
            raise NotSelfAdjointSpanError(
                f"adjoint of basis element {i} is {r:.3e} away from the span; "
                "the span is not closed under adjoints (non-unital channel?)"
            )
    if len(span) == 0:
        return []
    d = span.dim
    herm = []
    for b in span.basis:
        herm.append((b + dagger(b)) / 2)
        herm.append((b - dagger(b)) / 2j)
    real_rows = np.stack([np.concatenate([h.real.reshape(-1), h.imag.reshape(-1)]) for h in herm], axis=1)
    u, s, _ = np.linalg.svd(real_rows, full_matrices=False)
    rank = int(np.sum(s > tol.eps_rank * s[0]))
    out = []
    for i in range(rank):
        h = (u[: d * d, i] + 1j * u[d * d :, i]).reshape(d, d)
        out.append((h + dagger(h)) / 2)
    return out
