from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exactlin import (
    BlockConstraint,
    RatMatrix,
    ShapeError,
    block_diag,
    flatten_blocks,
    solve_linear_system,
    solve_right,
)
from .hocalc import Zigzag, kunneth_iso, zz_induced
from .pairtop import SPair, Triple, connecting_map, interval_pair, relative_cohomology, smash

logger = logging.getLogger(__name__)

KIND_MAP = "a"
KIND_TRIPLE = "b"
KIND_TWIST = "c"
KINDS = (KIND_MAP, KIND_TRIPLE, KIND_TWIST)

Family = Tuple[RatMatrix, ...]


class QuiverError(RuntimeError):
    """Raised when a quiver, representation or module violates its shape rules."""


@dataclass(frozen=True)
class QObject:
    """A quiver object [X, Y, n, i]: geometric when it has a pair, abstract when it has a dim."""

    id: str
    degree: int
    twist: int
    pair: Optional[SPair] = None
    dim: Optional[int] = None

    def __post_init__(self) -> None:
        if (self.pair is None) == (self.dim is None):
            raise QuiverError(f"Object '{self.id}' needs exactly one of pair or dim")
        if self.degree < 0:
            raise QuiverError(f"Object '{self.id}' has negative degree {self.degree}")
        if self.dim is not None and self.dim < 0:
            raise QuiverError(f"Object '{self.id}' has negative dimension")

    @property
    def is_geometric(self) -> bool:
        return self.pair is not None

    @property
    def space_dim(self) -> int:
        if self.pair is None:
            return self.dim
        return relative_cohomology(self.pair, self.degree).dim


@dataclass(frozen=True)
class QMorphism:
    id: str
    kind: str
    source: str
    target: str
    zigzag: Optional[Zigzag] = None
    triple: Optional[Triple] = None
    matrix: Optional[RatMatrix] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise QuiverError(f"Morphism '{self.id}' has unknown kind '{self.kind}'")


def _check_shape(m: QMorphism, source: QObject, target: QObject) -> None:
    if source.is_geometric != target.is_geometric:
        raise QuiverError(f"Morphism '{m.id}' joins a geometric and an abstract object")
    if m.kind == KIND_MAP:
        if (source.degree, source.twist) != (target.degree, target.twist):
            raise QuiverError(f"Morphism '{m.id}' of kind a must keep degree and twist")
    elif m.kind == KIND_TRIPLE:
        if target.degree != source.degree + 1 or target.twist != source.twist:
            raise QuiverError(f"Morphism '{m.id}' of kind b must go [Y,Z,n-1,i] -> [X,Y,n,i]")
    elif source.degree != target.degree + 1 or source.twist != target.twist + 1:
        raise QuiverError(f"Morphism '{m.id}' of kind c must go [.., n+1, i+1] -> [.., n, i]")


def _geometric_rho(m: QMorphism, source: QObject, target: QObject) -> RatMatrix:
    if m.kind == KIND_MAP:
        if m.zigzag is None:
            raise QuiverError(f"Morphism '{m.id}' of kind a needs a zigzag or a matrix")
        if m.zigzag.start != target.pair or m.zigzag.end != source.pair:
            raise QuiverError(f"Zigzag of '{m.id}' must run from the target pair to the source pair")
        return zz_induced(m.zigzag, source.degree)
    if m.kind == KIND_TRIPLE:
        if m.triple is None:
            raise QuiverError(f"Morphism '{m.id}' of kind b needs a triple")
        if m.triple.pair_xy != target.pair:
            raise QuiverError(f"Triple of '{m.id}' does not match its objects")
        if m.zigzag is None:
            if m.triple.pair_yz != source.pair:
                raise QuiverError(f"Triple of '{m.id}' does not match its objects")
            return connecting_map(m.triple, target.degree)
        # the zigzag carries the source pair onto the middle pair of the triple
        if m.zigzag.start != m.triple.pair_yz or m.zigzag.end != source.pair:
            raise QuiverError(f"Zigzag of '{m.id}' must run from the middle pair of its triple to the source pair")
        return connecting_map(m.triple, target.degree) @ zz_induced(m.zigzag, source.degree)
    if source.pair != smash(target.pair, interval_pair()):
        raise QuiverError(f"Source of '{m.id}' is not the circle twist of its target")
    return kunneth_iso(target.pair, interval_pair(), source.degree).inverse()


def compute_rho(m: QMorphism, source: QObject, target: QObject) -> RatMatrix:
    """ρ(m): ρ(source) → ρ(target), shape (dim target) × (dim source)."""
    _check_shape(m, source, target)
    if m.matrix is not None:
        matrix = m.matrix
    elif source.is_geometric:
        matrix = _geometric_rho(m, source, target)
    else:
        raise QuiverError(f"Morphism '{m.id}' between abstract objects needs a matrix")
    if matrix.shape != (target.space_dim, source.space_dim):
        raise QuiverError(
            f"Morphism '{m.id}' has a {matrix.rows}x{matrix.cols} matrix, "
            f"expected {target.space_dim}x{source.space_dim}"
        )
    return matrix


@dataclass(frozen=True)
class QuiverRep:
    objects: Tuple[QObject, ...]
    morphisms: Tuple[QMorphism, ...]
    rho: Mapping[str, RatMatrix] = field(default_factory=dict)
    dims: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def build(cls, objects: Iterable[QObject], morphisms: Iterable[QMorphism]) -> "QuiverRep":
        return cls((), ()).extend(objects, morphisms)

    def extend(
        self,
        objects: Iterable[QObject] = (),
        morphisms: Iterable[QMorphism] = (),
    ) -> "QuiverRep":
        """Add objects and morphisms, computing ρ only for the new morphisms."""
        all_objects = self.objects + tuple(objects)
        all_morphisms = self.morphisms + tuple(morphisms)
        by_id: Dict[str, QObject] = {}
        for obj in all_objects:
            if obj.id in by_id:
                raise QuiverError(f"Duplicate object id '{obj.id}'")
            by_id[obj.id] = obj
        dims = dict(self.dims)
        for obj in all_objects:
            if obj.id not in dims:
                dims[obj.id] = obj.space_dim
        if len({m.id for m in all_morphisms}) != len(all_morphisms):
            raise QuiverError("Duplicate morphism ids")
        rho = dict(self.rho)
        for m in all_morphisms:
            if m.source not in by_id or m.target not in by_id:
                raise QuiverError(f"Morphism '{m.id}' refers to a missing object")
            if m.id not in rho:
                rho[m.id] = compute_rho(m, by_id[m.source], by_id[m.target])
        return QuiverRep(all_objects, all_morphisms, rho, dims)

    def object(self, object_id: str) -> QObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise QuiverError(f"Unknown object '{object_id}'")

    def morphism(self, morphism_id: str) -> QMorphism:
        for m in self.morphisms:
            if m.id == morphism_id:
                return m
        raise QuiverError(f"Unknown morphism '{morphism_id}'")

    @property
    def object_ids(self) -> List[str]:
        return sorted(obj.id for obj in self.objects)

    def morphisms_between(self, source: str, target: str) -> List[QMorphism]:
        return [m for m in self.morphisms if m.source == source and m.target == target]

    def subquiver(self, object_ids: Iterable[str]) -> "QuiverRep":
        """Full subquiver on the given objects."""
        keep = set(object_ids)
        missing = keep - {obj.id for obj in self.objects}
        if missing:
            raise QuiverError(f"Unknown objects {sorted(missing)}")
        morphisms = tuple(m for m in self.morphisms if m.source in keep and m.target in keep)
        return QuiverRep(
            tuple(obj for obj in self.objects if obj.id in keep),
            morphisms,
            {m.id: self.rho[m.id] for m in morphisms},
            {k: v for k, v in self.dims.items() if k in keep},
        )

    def is_subquiver_of(self, other: "QuiverRep") -> bool:
        other_ids = {obj.id: obj for obj in other.objects}
        if any(other_ids.get(obj.id) != obj for obj in self.objects):
            return False
        return all(other.rho.get(m.id) == self.rho[m.id] for m in self.morphisms)

    @property
    def twists(self) -> List[int]:
        return sorted({obj.twist for obj in self.objects})

    @property
    def degrees(self) -> List[int]:
        return sorted({obj.degree for obj in self.objects})

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())


# -- commutant -----------------------------------------------------------------


@dataclass(frozen=True)
class Commutant:
    """
    End(ρ|Q): families (e_q) with e_q·ρ(f) = ρ(f)·e_p for every f: p → q.

    Families list one block per object in sorted id order.
    """

    quiver: QuiverRep
    object_ids: Tuple[str, ...]
    basis: Tuple[Family, ...]
    structure_constants: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    identity: Tuple[Fraction, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def block_index(self, object_id: str) -> int:
        return self.object_ids.index(object_id)

    def element(self, coords: Sequence[Fraction]) -> Family:
        if len(coords) != self.dim:
            raise ShapeError(f"Expected {self.dim} coordinates, got {len(coords)}")
        dims = [self.quiver.dims[q] for q in self.object_ids]
        blocks = [RatMatrix.zeros(d, d) for d in dims]
        for c, family in zip(coords, self.basis):
            if c:
                blocks = [b + f.scale(c) for b, f in zip(blocks, family)]
        return tuple(blocks)

    def coordinates(self, family: Sequence[RatMatrix]) -> Tuple[Fraction, ...]:
        return _coordinates_in(self.basis, family, self.quiver.total_dim)

    def multiply(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        out = [Fraction(0)] * self.dim
        for i, a in enumerate(x):
            if not a:
                continue
            for j, b in enumerate(y):
                if b:
                    for k, c in enumerate(self.structure_constants[i][j]):
                        out[k] += a * b * c
        return tuple(out)

    def left_multiplication(self, k: int) -> RatMatrix:
        columns = [self.structure_constants[k][j] for j in range(self.dim)]
        return RatMatrix.from_columns(columns, rows=self.dim)


def _basis_matrix(basis: Sequence[Family], total: int) -> RatMatrix:
    if not basis:
        return RatMatrix.zeros(total, 0)
    return RatMatrix.from_columns([flatten_blocks(f) for f in basis], rows=total)


def _coordinates_in(basis: Sequence[Family], family: Sequence[RatMatrix], total: int) -> Tuple[Fraction, ...]:
    flat = flatten_blocks(family)
    matrix = _basis_matrix(basis, len(flat))
    try:
        solution = solve_right(matrix, RatMatrix.from_columns([flat], rows=len(flat)))
    except ShapeError:
        raise QuiverError("Family does not lie in the commutant") from None
    return solution.column(0)


def _multiply_families(x: Family, y: Family) -> Family:
    return tuple(a @ b for a, b in zip(x, y))


def commutant(rep: QuiverRep) -> Commutant:
    ids = tuple(rep.object_ids)
    index = {q: k for k, q in enumerate(ids)}
    dims = [rep.dims[q] for q in ids]
    constraints = [
        BlockConstraint(row_block=index[m.target], col_block=index[m.source], matrix=rep.rho[m.id])
        for m in rep.morphisms
    ]
    basis = tuple(tuple(family) for family in solve_linear_system(dims, constraints))
    total = sum(d * d for d in dims)
    constants = []
    for x in basis:
        row = []
        for y in basis:
            row.append(_coordinates_in(basis, _multiply_families(x, y), total))
        constants.append(tuple(row))
    identity = _coordinates_in(basis, tuple(RatMatrix.identity(d) for d in dims), total)
    logger.debug("Commutant over %s objects has dimension %s", len(ids), len(basis))
    return Commutant(rep, ids, basis, tuple(constants), identity)


def verify_structure(c: Commutant) -> bool:
    """Associativity of the structure constants on all basis triples."""
    units = [tuple(Fraction(int(i == k)) for i in range(c.dim)) for k in range(c.dim)]
    for x in units:
        for y in units:
            xy = c.multiply(x, y)
            for z in units:
                if c.multiply(xy, z) != c.multiply(x, c.multiply(y, z)):
                    return False
    return all(c.multiply(c.identity, u) == u == c.multiply(u, c.identity) for u in units)


@dataclass(frozen=True)
class Restriction:
    source: Commutant
    target: Commutant
    matrix: RatMatrix

    @property
    def injective(self) -> bool:
        return self.matrix.rank() == self.source.dim

    @property
    def surjective(self) -> bool:
        return self.matrix.rank() == self.target.dim

    @property
    def is_iso(self) -> bool:
        return self.injective and self.surjective


def restriction(c_plus: Commutant, sub: QuiverRep, *, target: Optional[Commutant] = None) -> Restriction:
    """Restrict every family of End(ρ|Q⁺) to the objects of a subquiver."""
    if not sub.is_subquiver_of(c_plus.quiver):
        raise QuiverError("Restriction target is not a subquiver")
    target = target or commutant(sub)
    blocks = [c_plus.block_index(q) for q in target.object_ids]
    columns = [
        _coordinates_in(target.basis, [family[b] for b in blocks], sub.total_dim) for family in c_plus.basis
    ]
    matrix = RatMatrix.from_columns(columns, rows=target.dim) if columns else RatMatrix.zeros(target.dim, 0)
    return Restriction(c_plus, target, matrix)


def is_algebra_hom(r: Restriction) -> bool:
    image = [r.matrix.column(k) for k in range(r.source.dim)]
    for i in range(r.source.dim):
        for j in range(r.source.dim):
            left = _apply(r.matrix, r.source.structure_constants[i][j])
            if left != r.target.multiply(image[i], image[j]):
                return False
    return _apply(r.matrix, r.source.identity) == r.target.identity


def _apply(matrix: RatMatrix, vector: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return (matrix @ RatMatrix.from_columns([vector], rows=len(vector))).column(0)


def equivalent(q0: QuiverRep, q1: QuiverRep, q_plus: QuiverRep) -> bool:
    if not (q0.is_subquiver_of(q_plus) and q1.is_subquiver_of(q_plus)):
        raise QuiverError("Both quivers must be subquivers of the enlarged quiver")
    c_plus = commutant(q_plus)
    return restriction(c_plus, q0).is_iso and restriction(c_plus, q1).is_iso


# -- modules -------------------------------------------------------------------


@dataclass(frozen=True)
class ModuleOverCommutant:
    dim: int
    action: Tuple[RatMatrix, ...]

    def act(self, coords: Sequence[Fraction]) -> RatMatrix:
        out = RatMatrix.zeros(self.dim, self.dim)
        for c, a in zip(coords, self.action):
            if c:
                out = out + a.scale(c)
        return out

    def validate(self, c: Commutant) -> "ModuleOverCommutant":
        if len(self.action) != c.dim:
            raise QuiverError(f"Module lists {len(self.action)} actions for a {c.dim}-dimensional commutant")
        for a in self.action:
            if a.shape != (self.dim, self.dim):
                raise QuiverError(f"Action matrix {a.shape} does not fit a {self.dim}-dimensional module")
        for i in range(c.dim):
            for j in range(c.dim):
                if self.action[i] @ self.action[j] != self.act(c.structure_constants[i][j]):
                    raise QuiverError(f"Action does not respect the product of basis elements {i} and {j}")
        if self.act(c.identity) != RatMatrix.identity(self.dim):
            raise QuiverError("The identity family does not act as the identity")
        return self


def module_from_object(c: Commutant, object_id: str) -> ModuleOverCommutant:
    b = c.block_index(object_id)
    return ModuleOverCommutant(c.quiver.dims[object_id], tuple(family[b] for family in c.basis))


def regular_module(c: Commutant) -> ModuleOverCommutant:
    return ModuleOverCommutant(c.dim, tuple(c.left_multiplication(k) for k in range(c.dim)))


def zero_module(c: Commutant) -> ModuleOverCommutant:
    return ModuleOverCommutant(0, tuple(RatMatrix.zeros(0, 0) for _ in range(c.dim)))


@dataclass(frozen=True)
class FreeCover:
    copies: int
    matrix: RatMatrix


def free_cover(m: ModuleOverCommutant, c: Commutant) -> FreeCover:
    """Surjection E^d → m sending the unit of the i-th copy to the i-th basis vector of m."""
    m.validate(c)
    d = m.dim
    columns = [m.action[k].column(i) for i in range(d) for k in range(c.dim)]
    matrix = RatMatrix.from_columns(columns, rows=d) if columns else RatMatrix.zeros(d, 0)
    for k in range(c.dim):
        regular = block_diag([c.left_multiplication(k)] * d) if d else RatMatrix.zeros(0, 0)
        if matrix @ regular != m.action[k] @ matrix:
            raise QuiverError(f"Free cover is not equivariant for basis element {k}")
    if matrix.rank() != d:
        raise QuiverError("Free cover is not surjective")
    return FreeCover(d, matrix)
