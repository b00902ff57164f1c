"""Kraus channels, projection classification, unitization and standard builders."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ChannelSpecError,
    DimensionMismatchError,
    EmptyInputError,
    InjectivityError,
    NonNormalError,
    NotAProjectionError,
    ParameterError,
    StructureError,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    dagger,
    is_hermitian,
    matrix_exp_hermitian,
    opnorm,
)

__all__ = [
    "PAULI_I",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "KrausChannel",
    "ProjectionStatus",
    "TrivialStructureWarning",
    "new_channel",
    "apply",
    "superoperator",
    "dual",
    "projection_status",
    "unitize",
    "collective_operator",
    "build_phase_damping",
    "build_zz_damping",
    "build_two_qubit_dephasing",
    "build_collective",
    "channel_to_dict",
    "channel_from_dict",
    "save_channel",
    "load_channel",
]

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class TrivialStructureWarning(UserWarning):
    """The requested channel is valid but its commutant has no matrix blocks."""


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Channel T -> sum_k A_k T A_k^dagger with precomputed unitality flags."""

    dim: int
    kraus: tuple[np.ndarray, ...]
    trace_preserving: bool
    unital: bool
    name: str = ""

    def __len__(self) -> int:
        return len(self.kraus)

    def __call__(self, t) -> np.ndarray:
        return apply(self, t)

    @property
    def is_unital_channel(self) -> bool:
        return self.trace_preserving and self.unital


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


def new_channel(kraus: Sequence, tol: ToleranceConfig = DEFAULT_TOL, name: str = "") -> KrausChannel:
    """Validate Kraus operators and compute trace-preservation and unitality flags."""
    if len(kraus) == 0:
        raise EmptyInputError("a channel needs at least one Kraus operator")
    ops = [as_matrix(k, f"Kraus operator {i}") for i, k in enumerate(kraus)]
    d = ops[0].shape[0]
    for i, k in enumerate(ops):
        if k.shape != (d, d):
            raise DimensionMismatchError(f"Kraus operator {i} has shape {k.shape}, expected {(d, d)}")
    eye = np.eye(d)
    tp = sum(dagger(k) @ k for k in ops)
    un = sum(k @ dagger(k) for k in ops)
    return KrausChannel(
        dim=d,
        kraus=tuple(_frozen(k) for k in ops),
        trace_preserving=bool(np.linalg.norm(tp - eye) <= tol.eps_zero * d),
        unital=bool(np.linalg.norm(un - eye) <= tol.eps_zero * d),
        name=name,
    )


def apply(ch: KrausChannel, t) -> np.ndarray:
    t = np.asarray(t, dtype=np.complex128)
    if t.shape != (ch.dim, ch.dim):
        raise DimensionMismatchError(f"operator has shape {t.shape}, channel acts on dim {ch.dim}")
    return sum(k @ t @ dagger(k) for k in ch.kraus)


def superoperator(ch: KrausChannel) -> np.ndarray:
    """Matrix S with S @ vec(T) == vec(apply(ch, T)) (column stacking)."""
    return sum(np.kron(np.conj(k), k) for k in ch.kraus)


def dual(ch: KrausChannel) -> KrausChannel:
    return KrausChannel(
        dim=ch.dim,
        kraus=tuple(_frozen(dagger(k)) for k in ch.kraus),
        trace_preserving=ch.unital,
        unital=ch.trace_preserving,
        name=f"dual({ch.name})" if ch.name else "",
    )


@dataclass(frozen=True)
class ProjectionStatus:
    fixed: bool
    reducing: bool
    invariant_forward: bool
    invariant_adjoint: bool
    sub_fixed: bool
    super_fixed: bool

    def flags(self) -> tuple[bool, ...]:
        return (
            self.fixed,
            self.reducing,
            self.invariant_forward,
            self.invariant_adjoint,
            self.sub_fixed,
            self.super_fixed,
        )

    @property
    def consistent(self) -> bool:
        return len(set(self.flags())) == 1


def _check_projection(p, tol: ToleranceConfig, dim: int) -> np.ndarray:
    p = as_matrix(p, "projection")
    if p.shape != (dim, dim):
        raise DimensionMismatchError(f"projection has shape {p.shape}, expected {(dim, dim)}")
    if not is_hermitian(p, tol) or np.linalg.norm(p @ p - p) > tol.residual:
        raise NotAProjectionError("matrix is not a Hermitian idempotent")
    return p


def projection_status(ch: KrausChannel, p, tol: ToleranceConfig = DEFAULT_TOL) -> ProjectionStatus:
    """Evaluate the six fixed/reducing/invariance conditions for a projection.

    For a unital trace-preserving channel the six conditions coincide; a
    disagreement there raises :class:`StructureError`.
    """
    p = _check_projection(p, tol, ch.dim)
    atol = tol.residual
    image = apply(ch, p)
    diff_eigs = np.linalg.eigvalsh((image - p + dagger(image - p)) / 2)
    status = ProjectionStatus(
        fixed=bool(np.linalg.norm(image - p) <= atol),
        reducing=all(np.linalg.norm(k @ p - p @ k) <= atol for k in ch.kraus),
        invariant_forward=all(np.linalg.norm(k @ p - p @ k @ p) <= atol for k in ch.kraus),
        invariant_adjoint=all(np.linalg.norm(p @ k - p @ k @ p) <= atol for k in ch.kraus),
        sub_fixed=bool(diff_eigs.max() <= atol),
        super_fixed=bool(diff_eigs.min() >= -atol),
    )
    if ch.is_unital_channel and not status.consistent:
        raise StructureError(f"projection conditions disagree for a unital channel: {status}")
    return status


def _normal_eigen(t: np.ndarray, tol: ToleranceConfig) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and a unitary eigenbasis of a normal matrix."""
    if is_hermitian(t, tol):
        lam, u = np.linalg.eigh((t + dagger(t)) / 2)
        return lam.astype(np.complex128), u
    from scipy.linalg import schur

    r, q = schur(t, output="complex")
    return np.diag(r).copy(), q


def _eigen_clusters(lam: np.ndarray, scale: float, tol: ToleranceConfig) -> list[complex]:
    reps: list[complex] = []
    for x in lam:
        if not any(abs(x - r) <= tol.eps_cluster * scale for r in reps):
            reps.append(complex(x))
    return reps


def unitize(ops: Sequence, tol: ToleranceConfig = DEFAULT_TOL, name: str = "") -> KrausChannel:
    """Channel with Kraus operators exp(i T_k) / sqrt(n) built from normal operators T_k.

    Because exp(i.) must separate the eigenvalues of each T_k, the new
    channel's commutant equals {T_k}'. Hermitian inputs give unitary Kraus
    factors, hence a unital trace-preserving channel.
    """
    if len(ops) == 0:
        raise EmptyInputError("unitize needs at least one operator")
    mats = [as_matrix(t, f"operator {i}") for i, t in enumerate(ops)]
    d = mats[0].shape[0]
    kraus = []
    for i, t in enumerate(mats):
        if t.shape != (d, d):
            raise DimensionMismatchError(f"operator {i} has shape {t.shape}, expected {(d, d)}")
        scale = max(1.0, opnorm(t))
        if np.linalg.norm(t @ dagger(t) - dagger(t) @ t) > tol.eps_zero * scale**2:
            raise NonNormalError(f"operator {i} is not normal")
        lam, u = _normal_eigen(t, tol)
        reps = _eigen_clusters(lam, scale, tol)
        for a in range(len(reps)):
            for b in range(a + 1, len(reps)):
                delta = reps[a] - reps[b]
                k = round(delta.real / (2 * np.pi))
                if k != 0 and abs(delta - 2 * np.pi * k) <= tol.eps_cluster * scale:
                    raise InjectivityError(
                        f"operator {i}: eigenvalues {reps[a]:.6g} and {reps[b]:.6g} "
                        "differ by a multiple of 2*pi"
                    )
        if is_hermitian(t, tol):
            f = matrix_exp_hermitian(t, tol)
        else:
            f = (u * np.exp(1j * lam)) @ dagger(u)
        kraus.append(f / np.sqrt(len(mats)))
    return new_channel(kraus, tol, name=name)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must satisfy 0 < p < 1, got {p}")
    return p


def build_phase_damping(p: float) -> KrausChannel:
    """Single-qubit phase flip: {sqrt(1-p) I, sqrt(p) Z}."""
    p = _check_p(p)
    return new_channel([np.sqrt(1 - p) * PAULI_I, np.sqrt(p) * PAULI_Z], name=f"phase-damping(p={p:g})")


def build_zz_damping(p: float) -> KrausChannel:
    p = _check_p(p)
    return new_channel(
        [np.sqrt(1 - p) * np.eye(4), np.sqrt(p) * np.kron(PAULI_Z, PAULI_Z)],
        name=f"zz-damping(p={p:g})",
    )


def build_two_qubit_dephasing(p: float) -> KrausChannel:
    """Independent phase flips on two qubits, written with four Kraus operators."""
    p = _check_p(p)
    z1 = np.kron(PAULI_Z, PAULI_I)
    z2 = np.kron(PAULI_I, PAULI_Z)
    q = np.sqrt(p * (1 - p))
    return new_channel(
        [(1 - p) * np.eye(4), q * z1, q * z2, p * z1 @ z2],
        name=f"two-qubit-dephasing(p={p:g})",
    )


def collective_operator(pauli: np.ndarray, n: int) -> np.ndarray:
    """Sum over qubits j of the Pauli acting on qubit j (qubit 1 is the leftmost factor)."""
    terms = []
    for j in range(n):
        factors = [PAULI_I] * n
        factors[j] = pauli
        terms.append(reduce(np.kron, factors))
    return sum(terms)


def build_collective(n: int, tol: ToleranceConfig = DEFAULT_TOL) -> KrausChannel:
    """n-qubit collective rotation channel {exp(iX)/sqrt3, exp(iY)/sqrt3, exp(iZ)/sqrt3}."""
    if int(n) != n or n < 1:
        raise ParameterError(f"number of qubits must be a positive integer, got {n!r}")
    n = int(n)
    if n <= 2:
        warnings.warn(
            f"the {n}-qubit collective channel has no ampliated blocks in its commutant",
            TrivialStructureWarning,
            stacklevel=2,
        )
    ops = [collective_operator(s, n) for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    return unitize(ops, tol, name=f"collective:{n}")


# -- channel spec files --------------------------------------------------------


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def channel_to_dict(ch: KrausChannel) -> dict:
    out = {"dim": ch.dim, "kraus": [_encode_matrix(k) for k in ch.kraus]}
    if ch.name:
        out["name"] = ch.name
    return out


def _decode_matrix(obj, dim: int, index: int) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise ChannelSpecError(f"Kraus matrix {index} must have {dim} rows")
    rows = []
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ChannelSpecError(f"Kraus matrix {index} row {r} has {got} entries, expected {dim}")
        entries = []
        for z in row:
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
            ):
                raise ChannelSpecError(f"Kraus matrix {index}: entries must be [re, im] pairs, got {z!r}")
            entries.append(complex(z[0], z[1]))
        rows.append(entries)
    return np.array(rows, dtype=np.complex128)


def channel_from_dict(obj: dict, tol: ToleranceConfig = DEFAULT_TOL) -> KrausChannel:
    if not isinstance(obj, dict):
        raise ChannelSpecError("channel spec must be a JSON object")
    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ChannelSpecError(f"'dim' must be a positive integer, got {dim!r}")
    kraus = obj.get("kraus")
    if not isinstance(kraus, list) or not kraus:
        raise ChannelSpecError("'kraus' must be a non-empty list of matrices")
    name = obj.get("name", "")
    if not isinstance(name, str):
        raise ChannelSpecError("'name' must be a string")
    mats = [_decode_matrix(k, dim, i) for i, k in enumerate(kraus)]
    return new_channel(mats, tol, name=name)


def save_channel(ch: KrausChannel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(ch), indent=1))


def load_channel(path, tol: ToleranceConfig = DEFAULT_TOL) -> KrausChannel:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ChannelSpecError(f"{path}: invalid JSON ({exc})") from exc
    return channel_from_dict(obj, tol)
