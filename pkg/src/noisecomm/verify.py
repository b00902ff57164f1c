"""Noiseless subsystems: encoding, decoding, simulation and structural diagnostics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .channels import KrausChannel, apply, new_channel
from .commutant import commutant_basis, fixed_point_basis
from .errors import DimensionMismatchError, NoiseCommError, ParameterError
from .linalg import DEFAULT_TOL, ToleranceConfig, dagger, span_distance
from .structure import WedderburnStructure, block_pattern_residual

__all__ = [
    "DensityMatrix",
    "NoiselessComponent",
    "Diagnostic",
    "NoiselessReport",
    "SupportLeakageError",
    "random_density_matrix",
    "trace_distance",
    "noiseless_components",
    "encode",
    "decode",
    "verify_noiseless",
    "verify_structure",
    "planted_channel",
]


class SupportLeakageError(NoiseCommError, ValueError):
    """State has weight outside the range of the encoding isometry."""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatchError(f"density matrix must be square, got {rho.shape}")
        if np.linalg.norm(rho - dagger(rho)) > 1e-8:
            raise ValueError("density matrix is not Hermitian")
        rho = (rho + dagger(rho)) / 2
        if abs(np.trace(rho).real - 1.0) > 1e-8:
            raise ValueError(f"density matrix has trace {np.trace(rho).real}")
        if np.linalg.eigvalsh(rho).min() < -1e-8:
            raise ValueError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)


def random_density_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random state G G^dagger / tr(G G^dagger) for complex Gaussian G."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ dagger(g)
    return DensityMatrix(rho / np.trace(rho).real)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    diff = a - b
    return float(0.5 * np.abs(np.linalg.eigvalsh((diff + dagger(diff)) / 2)).sum())


@dataclass(frozen=True, eq=False)
class NoiselessComponent:
    """One summand 1_n (x) M_m of the commutant, seen as a place to store data.

    ``isometry`` maps C^n (x) C^m (noisy factor first) into the full space.
    """

    component_index: int
    logical_dim: int
    cofactor_dim: int
    isometry: np.ndarray

    @property
    def kind(self) -> str:
        return "subspace" if self.cofactor_dim == 1 else "subsystem"

    @property
    def usable(self) -> bool:
        return self.logical_dim >= 2


def noiseless_components(structure: WedderburnStructure) -> list[NoiselessComponent]:
    """One entry per component; those with ``usable`` set can hold a qubit or more."""
    u = structure.structuring_unitary
    out = []
    for k, (off, comp) in enumerate(zip(structure.offsets(), structure.components)):
        n, m = comp.n, comp.m
        block = u[:, off : off + n * m]
        # structuring-unitary columns run (copy i, index a); reorder to (a, i)
        order = [i * n + a for a in range(n) for i in range(m)]
        out.append(NoiselessComponent(k, m, n, block[:, order]))
    return out


def _as_density(rho, name: str) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(np.asarray(rho))


def encode(nc: NoiselessComponent, ancilla, logical) -> DensityMatrix:
    ancilla = _as_density(ancilla, "ancilla")
    logical = _as_density(logical, "logical")
    if ancilla.dim != nc.cofactor_dim or logical.dim != nc.logical_dim:
        raise DimensionMismatchError(
            f"component needs ancilla dim {nc.cofactor_dim} and logical dim {nc.logical_dim}, "
            f"got {ancilla.dim} and {logical.dim}"
        )
    v = nc.isometry
    return DensityMatrix(v @ np.kron(ancilla.matrix, logical.matrix) @ dagger(v))


def _pull_back(nc: NoiselessComponent, state) -> tuple[np.ndarray, float]:
    rho = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
    if rho.shape != (nc.isometry.shape[0],) * 2:
        raise DimensionMismatchError(f"state has shape {rho.shape}, expected dim {nc.isometry.shape[0]}")
    inner = dagger(nc.isometry) @ rho @ nc.isometry
    return inner, 1.0 - float(np.trace(inner).real)


def _partial_trace_noisy(inner: np.ndarray, n: int, m: int) -> np.ndarray:
    out = np.trace(inner.reshape(n, m, n, m), axis1=0, axis2=2)
    out = (out + dagger(out)) / 2
    return out / np.trace(out).real


def decode(nc: NoiselessComponent, state, tol: ToleranceConfig = DEFAULT_TOL) -> DensityMatrix:
    """Pull the state back through the isometry and trace out the noisy factor."""
    inner, leak = _pull_back(nc, state)
    if leak > tol.residual:
        raise SupportLeakageError(f"{leak:.3e} of the state lies outside the encoded component")
    return DensityMatrix(_partial_trace_noisy(inner, nc.cofactor_dim, nc.logical_dim))


@dataclass(frozen=True)
class NoiselessReport:
    max_trace_distance: float
    trials: int
    repetitions: int
    max_leakage: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_trace_distance <= self.threshold and self.max_leakage <= self.threshold


def verify_noiseless(
    ch: KrausChannel,
    nc: NoiselessComponent,
    trials: int = 50,
    repetitions: int = 5,
    tol: ToleranceConfig = DEFAULT_TOL,
    threshold: float = 1e-9,
) -> NoiselessReport:
    """Encode random states, apply the channel repeatedly, decode and compare.

    Trial t draws its states from a generator seeded with ``tol.seed + t``,
    so the report depends only on the seed and the trial count.
    """
    if trials < 1 or repetitions < 1:
        raise ParameterError("trials and repetitions must be positive")
    worst, worst_leak = 0.0, 0.0
    for t in range(trials):
        rng = tol.rng(t)
        anc = random_density_matrix(nc.cofactor_dim, rng)
        sigma = random_density_matrix(nc.logical_dim, rng)
        rho = encode(nc, anc, sigma).matrix
        for _ in range(repetitions):
            rho = apply(ch, rho)
        inner, leak = _pull_back(nc, rho)
        worst_leak = max(worst_leak, abs(leak))
        out = _partial_trace_noisy(inner, nc.cofactor_dim, nc.logical_dim)
        worst = max(worst, trace_distance(out, sigma))
    return NoiselessReport(worst, trials, repetitions, worst_leak, threshold)


@dataclass(frozen=True)
class Diagnostic:
    name: str
    passed: bool
    residual: float


def verify_structure(ch: KrausChannel, structure: WedderburnStructure, tol: ToleranceConfig = DEFAULT_TOL) -> list[Diagnostic]:
    """Check every structural identity of ``structure`` against the channel itself."""
    atol = tol.residual
    diags: list[Diagnostic] = []

    def add(name: str, residual: float, limit: float = atol) -> None:
        diags.append(Diagnostic(name, bool(residual <= limit), float(residual)))

    pattern = structure.pattern
    add("sum_nm_equals_dim", abs(sum(n * m for n, m in pattern) - ch.dim), 0)
    commutant = commutant_basis(list(ch.kraus), tol)
    add("commutant_dim", abs(sum(m * m for _, m in pattern) - len(commutant)), 0)
    if ch.dim == structure.dim and ch.is_unital_channel:
        add("fixed_points_equal_commutant", span_distance(fixed_point_basis(ch, tol), commutant))
    else:
        diags.append(Diagnostic("fixed_points_equal_commutant", False, float("inf")))
    if ch.dim != structure.dim:
        diags.append(Diagnostic("dimension", False, float(abs(ch.dim - structure.dim))))
        return diags
    central = max(
        (
            np.linalg.norm(c.linked.central_projection.matrix @ a - a @ c.linked.central_projection.matrix)
            for c in structure.components
            for a in ch.kraus
        ),
        default=0.0,
    )
    add("central_projections_commute", central)
    u = structure.structuring_unitary
    add("structuring_unitary", np.linalg.norm(dagger(u) @ u - np.eye(ch.dim)))
    off, rep = 0.0, 0.0
    for a in ch.kraus:
        o, r = block_pattern_residual(structure, a)
        off, rep = max(off, o), max(rep, r)
    add("block_diagonal", off)
    add("repeated_blocks_equal", rep)
    add("matrix_unit_relations", max((c.units.relation_residual() for c in structure.components), default=0.0))
    in_commutant = max(
        (commutant.residual(c.units[i, j]) for c in structure.components for i in range(c.m) for j in range(c.m)),
        default=0.0,
    )
    add("matrix_units_in_commutant", in_commutant)
    return diags


def _block_unitary(pattern: Sequence[tuple[int, int]], rng: np.random.Generator) -> np.ndarray:
    blocks = []
    for n, m in pattern:
        k = unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random()) * np.eye(1)
        blocks.append(np.kron(np.asarray(k).reshape(n, n), np.eye(m)))
    d = sum(n * m for n, m in pattern)
    out = np.zeros((d, d), dtype=np.complex128)
    pos = 0
    for b in blocks:
        out[pos : pos + len(b), pos : pos + len(b)] = b
        pos += len(b)
    return out


def planted_channel(
    pattern: Sequence[tuple[int, int]], generators: int = 3, seed: int = 0
) -> tuple[KrausChannel, list[tuple[int, int]]]:
    """Random mixed-unitary channel whose algebra is sum_k M_{n_k} (x) 1_{m_k}, hidden by a random unitary.

    Returns the channel and the pattern in canonical order (descending n,
    then descending m).
    """
    pattern = [(int(n), int(m)) for n, m in pattern]
    if not pattern or any(n < 1 or m < 1 for n, m in pattern):
        raise ParameterError(f"invalid pattern {pattern!r}")
    d = sum(n * m for n, m in pattern)
    if d > 64:
        raise ParameterError(f"pattern has total dimension {d} > 64")
    if generators < 3:
        raise ParameterError("need at least three generators")
    rng = np.random.default_rng(seed)
    g = np.asarray(unitary_group.rvs(d, random_state=rng)).reshape(d, d) if d > 1 else np.eye(1)
    kraus = [g @ _block_unitary(pattern, rng) @ dagger(g) / np.sqrt(generators) for _ in range(generators)]
    ch = new_channel(kraus, name=f"planted{pattern}")
    return ch, sorted(pattern, key=lambda nm: (-nm[0], -nm[1]))
