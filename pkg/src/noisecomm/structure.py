"""Wedderburn decomposition of the interaction algebra of a unital channel.

The pipeline is

1. ``commutant_basis``: the noise commutant A' as an operator span;
2. ``minimal_family``: a maximal family of mutually orthogonal minimal
   projections of A' (each carries an irreducible piece of A);
3. ``detect_links``: grouping of those projections into classes carrying
   unitarily equivalent pieces; each class is one summand M_n (x) 1_m;
4. ``matrix_units``: units E_ij inside A' moving between linked ranges;
5. ``structuring_unitary``: the change of basis that block-diagonalizes
   every Kraus operator.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .channels import KrausChannel
from .commutant import algebra_basis, commutant_basis, hermitian_spanning_set
from .errors import (
    NonUnitalChannelError,
    NotAProjectionError,
    NotInSpanError,
    StructureError,
)
from .linalg import (
    DEFAULT_TOL,
    OperatorSpan,
    ToleranceConfig,
    dagger,
    orthonormalize_span,
    range_basis,
    spectral_projections,
)

__all__ = [
    "Projection",
    "MinimalFamily",
    "LinkedClass",
    "MatrixUnitSystem",
    "Component",
    "WedderburnStructure",
    "compress_span",
    "is_minimal",
    "minimal_family",
    "joint_eigenvalue_signature",
    "detect_links",
    "matrix_units",
    "structuring_unitary",
    "analyze",
    "structure_string",
    "block_pattern_residual",
]

Strategy = Literal["paper_recursive", "randomized_generic"]
LinkMethod = Literal["corner", "signature", "subset_enumeration"]

_STRATEGY_ALIASES = {"paper": "paper_recursive", "generic": "randomized_generic"}
_LINK_ALIASES = {"subset": "subset_enumeration"}


@dataclass(frozen=True, eq=False)
class Projection:
    matrix: np.ndarray
    rank: int

    @classmethod
    def from_matrix(cls, m, tol: ToleranceConfig = DEFAULT_TOL) -> "Projection":
        p = np.asarray(m, dtype=np.complex128)
        d = p.shape[0]
        if p.shape != (d, d):
            raise NotAProjectionError(f"projection must be square, got {p.shape}")
        if np.linalg.norm(p - dagger(p)) > tol.residual or np.linalg.norm(p @ p - p) > tol.residual:
            raise NotAProjectionError("matrix is not a Hermitian idempotent")
        tr = float(np.real(np.trace(p)))
        rank = int(round(tr))
        if abs(tr - rank) > tol.residual * d or rank < 1:
            raise NotAProjectionError(f"trace {tr} is not a positive integer")
        p = (p + dagger(p)) / 2
        p.setflags(write=False)
        return cls(p, rank)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MinimalFamily:
    projections: tuple[Projection, ...]

    def __len__(self) -> int:
        return len(self.projections)

    def __getitem__(self, i: int) -> Projection:
        return self.projections[i]

    @property
    def ranks(self) -> list[int]:
        return [p.rank for p in self.projections]


@dataclass(frozen=True)
class LinkedClass:
    """Linked minimal projections; together they carry M_n (x) 1_m."""

    member_indices: tuple[int, ...]
    block_rank: int
    multiplicity: int
    central_projection: Projection

    @property
    def n(self) -> int:
        return self.block_rank

    @property
    def m(self) -> int:
        return self.multiplicity


@dataclass(frozen=True, eq=False)
class MatrixUnitSystem:
    """m x m array of operators E_ij (held as shape (m, m, d, d))."""

    units: np.ndarray

    @property
    def size(self) -> int:
        return self.units.shape[0]

    def __getitem__(self, ij) -> np.ndarray:
        return self.units[ij]

    def relation_residual(self) -> float:
        """Largest violation of E_ij E_kl = delta_jk E_il and E_ij^dagger = E_ji."""
        e = self.units
        m = self.size
        worst = 0.0
        for i, j, k, l in itertools.product(range(m), repeat=4):
            target = e[i, l] if j == k else 0.0
            worst = max(worst, float(np.linalg.norm(e[i, j] @ e[k, l] - target)))
        for i, j in itertools.product(range(m), repeat=2):
            worst = max(worst, float(np.linalg.norm(dagger(e[i, j]) - e[j, i])))
        return worst


@dataclass(frozen=True, eq=False)
class Component:
    linked: LinkedClass
    units: MatrixUnitSystem

    @property
    def n(self) -> int:
        return self.linked.block_rank

    @property
    def m(self) -> int:
        return self.linked.multiplicity


@dataclass(frozen=True, eq=False)
class WedderburnStructure:
    """A ~ sum_k M_{n_k} (x) 1_{m_k}, with A' ~ sum_k 1_{n_k} (x) M_{m_k}.

    Columns of ``structuring_unitary`` are grouped by component (canonical
    order), then by copy i = 1..m_k, then by a basis index a = 1..n_k, so
    that U^dagger A U = sum_k 1_{m_k} (x) A_k for every A in the algebra.
    """

    dim: int
    components: tuple[Component, ...]
    structuring_unitary: np.ndarray
    family: MinimalFamily
    commutant: OperatorSpan
    algebra_dim: int

    @property
    def pattern(self) -> list[tuple[int, int]]:
        return [(c.n, c.m) for c in self.components]

    @property
    def commutant_dim(self) -> int:
        return len(self.commutant)

    def offsets(self) -> list[int]:
        out, pos = [], 0
        for c in self.components:
            out.append(pos)
            pos += c.n * c.m
        return out


# -- Part I: minimal projections -------------------------------------------------


def _as_projection(p, tol: ToleranceConfig) -> Projection:
    return p if isinstance(p, Projection) else Projection.from_matrix(p, tol)


def _require_in_span(p: Projection, span: OperatorSpan, tol: ToleranceConfig) -> None:
    r = span.residual(p.matrix)
    if r > tol.residual * max(1.0, np.sqrt(p.rank)):
        raise NotInSpanError(f"projection is {r:.3e} away from the {span.label} span")


def compress_span(span: OperatorSpan, p, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorSpan:
    """Orthonormal basis of {P B P : B in span}, as operators on the full space.

    ``p`` must itself lie in the span (a projection reducing the algebra).
    """
    p = _as_projection(p, tol)
    _require_in_span(p, span, tol)
    pm = p.matrix
    return orthonormalize_span([pm @ b @ pm for b in span.basis], tol, label="compression", dim=span.dim)


def _scalar_defect(p: Projection, b: np.ndarray) -> float:
    """|| P B P - (tr(PBP)/rank) P ||."""
    pbp = p.matrix @ b @ p.matrix
    lam = np.trace(pbp) / p.rank
    return float(np.linalg.norm(pbp - lam * p.matrix))


def is_minimal(p, commutant: OperatorSpan, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff P B P is a multiple of P for every basis element B."""
    p = _as_projection(p, tol)
    _require_in_span(p, commutant, tol)
    return all(_scalar_defect(p, b) <= tol.residual for b in commutant.basis)


def _split(span: OperatorSpan, p: Projection, h: np.ndarray, tol: ToleranceConfig) -> list[Projection]:
    """Spectral projections of a Hermitian h = P h P restricted to range(P)."""
    v = range_basis(p.matrix, p.rank)
    out = []
    for _, q in spectral_projections(dagger(v) @ h @ v, tol):
        out.append(Projection.from_matrix(v @ q @ dagger(v), tol))
    return out


def _widest_choice(span: OperatorSpan, p: Projection, tol: ToleranceConfig) -> np.ndarray | None:
    """A Hermitian element of the compressed span with the largest non-scalar part."""
    best, best_defect = None, tol.residual
    for h in hermitian_spanning_set(span, tol):
        defect = _scalar_defect(p, h)
        if defect > best_defect:
            best, best_defect = h, defect
    return best


def _refine(span: OperatorSpan, p: Projection, tol: ToleranceConfig, depth: int = 0) -> list[Projection]:
    if depth > span.dim:
        raise StructureError("minimal projection search did not terminate")
    comp = compress_span(span, p, tol) if depth else span
    if all(_scalar_defect(p, b) <= tol.residual for b in comp.basis):
        return [p]
    h = _widest_choice(comp, p, tol)
    if h is None:
        return [p]
    pieces = _split(comp, p, p.matrix @ h @ p.matrix, tol)
    if len(pieces) < 2:
        raise StructureError("non-scalar Hermitian element has a single eigenvalue cluster")
    out = []
    for q in pieces:
        out.extend(_refine(comp, q, tol, depth + 1))
    return out


def _family_key(p: Projection):
    diag = np.round(np.real(np.diag(p.matrix)), 6)
    return (p.rank, tuple(-diag))


def _finish_family(projs: list[Projection], dim: int, tol: ToleranceConfig) -> MinimalFamily:
    projs = sorted(projs, key=_family_key)
    total = sum(p.matrix for p in projs)
    if np.linalg.norm(total - np.eye(dim)) > tol.residual * dim:
        raise StructureError("minimal projections do not sum to the identity")
    for a, b in itertools.combinations(projs, 2):
        if np.linalg.norm(a.matrix @ b.matrix) > tol.residual:
            raise StructureError("minimal projections are not mutually orthogonal")
    return MinimalFamily(tuple(projs))


def minimal_family(
    commutant: OperatorSpan,
    tol: ToleranceConfig = DEFAULT_TOL,
    strategy: Strategy | str = "randomized_generic",
) -> MinimalFamily:
    """Maximal family of mutually orthogonal minimal projections in the commutant.

    ``paper_recursive`` splits along the spectral projections of one
    Hermitian element and recurses into the non-minimal pieces.
    ``randomized_generic`` splits once along a random Hermitian element
    (seeded by ``tol.seed``); any piece that is not minimal, which only
    happens on an accidental eigenvalue collision, is refined recursively.
    """
    strategy = _STRATEGY_ALIASES.get(strategy, strategy)
    d = commutant.dim
    unit = Projection.from_matrix(np.eye(d), tol)
    _require_in_span(unit, commutant, tol)
    if strategy == "paper_recursive":
        return _finish_family(_refine(commutant, unit, tol), d, tol)
    if strategy != "randomized_generic":
        raise ValueError(f"unknown strategy {strategy!r}")
    herm = hermitian_spanning_set(commutant, tol)
    coeffs = tol.rng().standard_normal(len(herm))
    h = sum(c * b for c, b in zip(coeffs, herm)) if herm else np.zeros((d, d))
    out = []
    for q in _split(commutant, unit, h, tol):
        if is_minimal(q, commutant, tol):
            out.append(q)
        else:
            out.extend(_refine(compress_span(commutant, q, tol), q, tol, depth=1))
    return _finish_family(out, d, tol)


# -- Part II: links --------------------------------------------------------------


def joint_eigenvalue_signature(kraus: Sequence, xi, tol: ToleranceConfig = DEFAULT_TOL) -> list[complex] | None:
    """Eigenvalues (lambda_k) with A_k xi = lambda_k xi, or None if xi is not a joint eigenvector."""
    xi = np.asarray(xi, dtype=np.complex128).reshape(-1)
    nrm = np.linalg.norm(xi)
    if abs(nrm - 1.0) > tol.residual:
        raise ValueError(f"xi must be a unit vector, has norm {nrm}")
    sig = []
    for a in kraus:
        ax = np.asarray(a) @ xi
        lam = np.vdot(xi, ax)
        if np.linalg.norm(ax - lam * xi) > tol.residual:
            return None
        sig.append(complex(lam))
    return sig


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        a, b = self.find(i), self.find(j)
        if a != b:
            self.parent[max(a, b)] = min(a, b)

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return sorted(out.values())


def _rank_groups(family: MinimalFamily) -> dict[int, list[int]]:
    groups: dict[int, list[int]] = {}
    for i, p in enumerate(family.projections):
        groups.setdefault(p.rank, []).append(i)
    return groups


def _corner_links(family: MinimalFamily, commutant: OperatorSpan, tol: ToleranceConfig) -> list[list[int]]:
    uf = _UnionFind(len(family))
    for members in _rank_groups(family).values():
        for i, j in itertools.combinations(members, 2):
            pi, pj = family[i].matrix, family[j].matrix
            corner = max(np.linalg.norm(pi @ b @ pj) for b in commutant.basis)
            if corner > tol.residual:
                uf.union(i, j)
    return uf.groups()


def _signature_links(family: MinimalFamily, kraus: Sequence, tol: ToleranceConfig) -> list[list[int]]:
    if any(p.rank != 1 for p in family.projections):
        raise ValueError("the signature link test only applies to families of rank-one projections")
    sigs = []
    for i, p in enumerate(family.projections):
        xi = range_basis(p.matrix, 1)[:, 0]
        sig = joint_eigenvalue_signature(kraus, xi, tol)
        if sig is None:
            raise StructureError(f"range vector of projection {i} is not a joint eigenvector")
        sigs.append(np.array(sig))
    uf = _UnionFind(len(family))
    for i, j in itertools.combinations(range(len(family)), 2):
        scale = max(1.0, float(np.abs(sigs[i]).max(initial=0.0)))
        if np.abs(sigs[i] - sigs[j]).max(initial=0.0) <= tol.eps_cluster * scale:
            uf.union(i, j)
    return uf.groups()


def _subset_links(family: MinimalFamily, commutant: OperatorSpan, tol: ToleranceConfig) -> list[list[int]]:
    """Smallest subsets of equal-rank projections whose sum commutes with the commutant."""

    def central(indices) -> bool:
        ps = sum(family[i].matrix for i in indices)
        return all(np.linalg.norm(ps @ b - b @ ps) <= tol.residual for b in commutant.basis)

    classes = []
    for members in _rank_groups(family).values():
        remaining = list(members)
        while remaining:
            found = None
            for size in range(1, len(remaining) + 1):
                for subset in itertools.combinations(remaining, size):
                    if central(subset):
                        found = list(subset)
                        break
                if found:
                    break
            if found is None:
                raise StructureError("no subset of equal-rank projections is central")
            classes.append(found)
            remaining = [i for i in remaining if i not in found]
    return sorted(classes)


def detect_links(
    family: MinimalFamily,
    commutant: OperatorSpan,
    kraus: Sequence,
    tol: ToleranceConfig = DEFAULT_TOL,
    method: LinkMethod | str = "corner",
) -> list[LinkedClass]:
    """Partition the family into linked classes.

    ``corner`` links P_i and P_j when P_i A' P_j is nonzero (then closes
    transitively); ``signature`` compares joint eigenvalues of rank-one
    members; ``subset_enumeration`` searches for the smallest central sums
    and is exponential in the number of equal-rank projections.
    """
    method = _LINK_ALIASES.get(method, method)
    if method == "corner":
        groups = _corner_links(family, commutant, tol)
    elif method == "signature":
        groups = _signature_links(family, kraus, tol)
    elif method == "subset_enumeration":
        groups = _subset_links(family, commutant, tol)
    else:
        raise ValueError(f"unknown link method {method!r}")
    out = []
    for g in groups:
        ranks = {family[i].rank for i in g}
        if len(ranks) != 1:
            raise StructureError(f"linked projections {g} have different ranks {sorted(ranks)}")
        central = Projection.from_matrix(sum(family[i].matrix for i in g), tol)
        out.append(LinkedClass(tuple(g), ranks.pop(), len(g), central))
    return out


# -- matrix units and the structuring unitary -------------------------------------


def _fix_phase(w: np.ndarray) -> np.ndarray:
    """Rotate a partial isometry so the largest entry of its first nonzero column is real positive."""
    norms = np.linalg.norm(w, axis=0)
    col = int(np.argmax(norms > 1e-8 * max(1.0, norms.max())))
    z = w[np.argmax(np.abs(w[:, col])), col]
    return w * (np.conj(z) / abs(z))


def matrix_units(
    cls: LinkedClass,
    family: MinimalFamily,
    commutant: OperatorSpan,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> MatrixUnitSystem:
    """Matrix units E_ij in the commutant with E_ii the class members (in order).

    E_1j is the partial-isometry part of the largest corner P_1 B P_j over
    the commutant basis; every other unit is routed through index 1.
    """
    members = [family[i] for i in cls.member_indices]
    m, d = len(members), family[0].dim
    n = cls.block_rank
    first = [members[0].matrix]
    for pj in members[1:]:
        corners = [members[0].matrix @ b @ pj.matrix for b in commutant.basis]
        c = max(corners, key=np.linalg.norm)
        if np.linalg.norm(c) <= tol.residual:
            raise StructureError("linked projections have no nonzero commutant corner")
        u, s, vh = np.linalg.svd(c)
        if s[n - 1] <= tol.residual * s[0] or (len(s) > n and s[n] > tol.residual * s[0]):
            raise StructureError(f"commutant corner does not have rank {n}")
        first.append(_fix_phase(u[:, :n] @ vh[:n]))
    e = np.zeros((m, m, d, d), dtype=np.complex128)
    for j in range(m):
        e[0, j] = first[j]
        e[j, 0] = dagger(first[j]) if j else first[0]
    for i, j in itertools.product(range(1, m), repeat=2):
        e[i, j] = e[i, 0] @ e[0, j]
    e.setflags(write=False)
    return MatrixUnitSystem(e)


def structuring_unitary(components: Sequence[Component], dim: int, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Unitary whose columns run over components, copies i, then basis index a.

    Copy i of component k is the image of a fixed basis of range(E_11)
    under E_i1, so all copies are transported coherently.
    """
    if len(components) == 1 and components[0].m == 1:
        # irreducible: any unitary works, so keep the standard basis
        return np.eye(dim, dtype=np.complex128)
    cols = []
    for comp in components:
        base = range_basis(comp.units[0, 0], comp.n)
        for i in range(comp.m):
            cols.append(comp.units[i, 0] @ base)
    if not cols:
        return np.eye(dim, dtype=np.complex128)
    u = np.hstack(cols)
    if u.shape != (dim, dim):
        raise StructureError(f"structuring unitary has shape {u.shape}, expected {(dim, dim)}")
    err = np.linalg.norm(dagger(u) @ u - np.eye(dim))
    if err > tol.residual * dim:
        raise StructureError(f"matrix units are inconsistent: ||U^dagger U - I|| = {err:.3e}")
    return u


def block_pattern_residual(structure: WedderburnStructure, a: np.ndarray) -> tuple[float, float]:
    """(off-block norm, max difference between repeated blocks) of U^dagger A U."""
    u = structure.structuring_unitary
    b = dagger(u) @ np.asarray(a) @ u
    mask = np.zeros(b.shape, dtype=bool)
    repeat = 0.0
    for off, comp in zip(structure.offsets(), structure.components):
        n = comp.n
        ref = b[off : off + n, off : off + n]
        for i in range(comp.m):
            s = off + i * n
            mask[s : s + n, s : s + n] = True
            repeat = max(repeat, float(np.linalg.norm(b[s : s + n, s : s + n] - ref)))
    return float(np.linalg.norm(b[~mask])), repeat


# -- driver ------------------------------------------------------------------------


def analyze(
    ch: KrausChannel,
    tol: ToleranceConfig = DEFAULT_TOL,
    strategy: Strategy | str = "randomized_generic",
    link_method: LinkMethod | str = "corner",
) -> WedderburnStructure:
    """Full decomposition of the interaction algebra of a unital channel.

    Raises :class:`NonUnitalChannelError` for channels that are not both
    unital and trace preserving, and :class:`StructureError` when any
    internal identity (dimension counts, unit relations, block form) fails.
    """
    if not ch.is_unital_channel:
        raise NonUnitalChannelError()
    kraus = list(ch.kraus)
    commutant = commutant_basis(kraus, tol)
    family = minimal_family(commutant, tol, strategy)
    classes = detect_links(family, commutant, kraus, tol, link_method)
    classes.sort(key=lambda c: (-c.block_rank, -c.multiplicity, min(c.member_indices)))
    components = []
    for cls in classes:
        units = matrix_units(cls, family, commutant, tol)
        r = units.relation_residual()
        if r > tol.residual:
            raise StructureError(f"matrix-unit relations violated by {r:.3e}")
        components.append(Component(cls, units))
    u = structuring_unitary(components, ch.dim, tol)
    algebra_dim = len(algebra_basis(kraus, tol))
    structure = WedderburnStructure(ch.dim, tuple(components), u, family, commutant, algebra_dim)
    pattern = structure.pattern
    checks = {
        "sum n*m = dim": (sum(n * m for n, m in pattern), ch.dim),
        "sum m^2 = dim A'": (sum(m * m for _, m in pattern), len(commutant)),
        "sum n^2 = dim A": (sum(n * n for n, _ in pattern), algebra_dim),
    }
    for name, (got, want) in checks.items():
        if got != want:
            raise StructureError(f"dimension identity {name} fails: {got} != {want} (pattern {pattern})")
    return structure


def _render(n: int, m: int, view: str) -> str:
    if view == "algebra":
        big, amp = n, m
        if big == 1:
            return "C" if amp == 1 else f"C·I{amp}"
        return f"M{big}" if amp == 1 else f"(M{big}⊗I{amp})"
    big, amp = m, n
    if big == 1:
        return "C" if amp == 1 else f"C·I{amp}"
    return f"M{big}" if amp == 1 else f"(I{amp}⊗M{big})"


def structure_string(structure: WedderburnStructure, view: Literal["algebra", "commutant"] = "algebra") -> str:
    """Render the decomposition, smallest summands first.

    Algebra view writes M_n (x) 1_m as ``(Mn⊗Im)``; the commutant view
    writes the matching 1_n (x) M_m as ``(In⊗Mm)`` and scalars as ``C·In``.
    """
    if view not in ("algebra", "commutant"):
        raise ValueError(f"unknown view {view!r}")
    return " ⊕ ".join(_render(c.n, c.m, view) for c in reversed(structure.components))
