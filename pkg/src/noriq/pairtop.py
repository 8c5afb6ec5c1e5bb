from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exactlin import (
    RatMatrix,
    Subspace,
    coordinates,
    hstack,
    image_basis,
    kernel_basis,
    rref,
)

logger = logging.getLogger(__name__)

Label = Hashable
Simplex = Tuple[Label, ...]

INTERVAL_START = "0"
INTERVAL_END = "1"
INTERVAL_MID = "1/2"


class ComplexError(RuntimeError):
    """Raised when a complex, pair, map or triple violates its invariants."""


class CohomologyCheckError(ComplexError):
    """Raised when a computed identity (exactness, equivalence, isomorphism) fails to hold."""


def render_label(label: Label) -> str:
    if isinstance(label, tuple):
        return "(" + ",".join(render_label(part) for part in label) + ")"
    return str(label)


def _faces(simplex: Simplex) -> Iterable[Simplex]:
    for size in range(1, len(simplex) + 1):
        yield from combinations(simplex, size)


@dataclass(frozen=True)
class OrderedComplex:
    vertices: Tuple[Label, ...]
    simplices: FrozenSet[Simplex]

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise ComplexError("Vertex labels must be unique")
        order = {v: i for i, v in enumerate(self.vertices)}
        for simplex in self.simplices:
            if not simplex:
                raise ComplexError("Empty simplices are not allowed")
            try:
                positions = [order[v] for v in simplex]
            except KeyError as exc:
                raise ComplexError(f"Simplex {simplex!r} uses unknown vertex {exc.args[0]!r}") from None
            if any(a >= b for a, b in zip(positions, positions[1:])):
                raise ComplexError(f"Simplex {simplex!r} is not strictly increasing in the vertex order")
            if len(simplex) > 1:
                for i in range(len(simplex)):
                    face = simplex[:i] + simplex[i + 1 :]
                    if face not in self.simplices:
                        raise ComplexError(f"Complex is not face-closed: {face!r} missing")
        for v in self.vertices:
            if (v,) not in self.simplices:
                raise ComplexError(f"Vertex {v!r} does not appear in any simplex")

    @classmethod
    def build(cls, vertices: Sequence[Label], simplices: Iterable[Iterable[Label]]) -> "OrderedComplex":
        """Close *simplices* under faces, sorting each by the given vertex order."""
        order = {v: i for i, v in enumerate(vertices)}
        closed = set()
        for raw in simplices:
            try:
                simplex = tuple(sorted(set(raw), key=order.__getitem__))
            except KeyError as exc:
                raise ComplexError(f"Unknown vertex {exc.args[0]!r}") from None
            if simplex in closed or not simplex:
                continue
            closed.update(_faces(simplex))
        used = {v for s in closed for v in s}
        kept = tuple(v for v in vertices if v in used)
        return cls(kept, frozenset(closed))

    @cached_property
    def index(self) -> Dict[Label, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @cached_property
    def maximal(self) -> List[Simplex]:
        faces = set()
        for simplex in self.simplices:
            for i in range(len(simplex)):
                if len(simplex) > 1:
                    faces.add(simplex[:i] + simplex[i + 1 :])
        return sorted((s for s in self.simplices if s not in faces), key=self.sort_key)

    def sort_key(self, simplex: Simplex) -> Tuple[int, ...]:
        return tuple(self.index[v] for v in simplex)

    def of_dim(self, n: int) -> List[Simplex]:
        return self._by_dim.get(n, [])

    @cached_property
    def _by_dim(self) -> Dict[int, List[Simplex]]:
        grouped: Dict[int, List[Simplex]] = {}
        for simplex in self.simplices:
            grouped.setdefault(len(simplex) - 1, []).append(simplex)
        for simplices in grouped.values():
            simplices.sort(key=self.sort_key)
        return grouped

    def subcomplex(self, simplices: Iterable[Iterable[Label]]) -> "OrderedComplex":
        sub = OrderedComplex.build(self.vertices, simplices)
        if not sub.simplices <= self.simplices:
            raise ComplexError("Requested subcomplex is not contained in the complex")
        return sub

    def __len__(self) -> int:
        return len(self.simplices)


@dataclass(frozen=True)
class SPair:
    total: OrderedComplex
    sub: OrderedComplex

    def __post_init__(self) -> None:
        if not self.sub.simplices:
            raise ComplexError("The subcomplex of a pair must be nonempty")
        if not self.sub.simplices <= self.total.simplices:
            raise ComplexError("Subcomplex is not contained in the total complex")
        if [v for v in self.total.vertices if v in self.sub.index] != list(self.sub.vertices):
            raise ComplexError("Subcomplex vertex order must be inherited from the total complex")

    @classmethod
    def build(
        cls,
        vertices: Sequence[Label],
        simplices: Iterable[Iterable[Label]],
        sub: Iterable[Iterable[Label]],
    ) -> "SPair":
        total = OrderedComplex.build(vertices, simplices)
        return cls(total, total.subcomplex(sub))

    @cached_property
    def relative_cells(self) -> Dict[int, List[Simplex]]:
        cells: Dict[int, List[Simplex]] = {}
        for n in range(self.total.dimension + 1):
            cells[n] = [s for s in self.total.of_dim(n) if s not in self.sub.simplices]
        return cells

    def cells(self, n: int) -> List[Simplex]:
        return self.relative_cells.get(n, [])

    @cached_property
    def cell_index(self) -> Dict[Simplex, int]:
        index: Dict[Simplex, int] = {}
        for cells in self.relative_cells.values():
            for i, cell in enumerate(cells):
                index[cell] = i
        return index

    @property
    def dimension(self) -> int:
        return self.total.dimension

    def summary(self) -> str:
        return f"{len(self.total.vertices)} vertices, {len(self.total)} simplices, {len(self.sub)} in sub"


@dataclass(frozen=True)
class PairMap:
    source: SPair
    target: SPair
    vertex_map: Tuple[Tuple[Label, Label], ...]

    def __post_init__(self) -> None:
        mapping = dict(self.vertex_map)
        missing = [v for v in self.source.total.vertices if v not in mapping]
        if missing:
            raise ComplexError(f"Vertex map misses {render_label(missing[0])}")
        for v, w in mapping.items():
            if w not in self.target.total.index:
                raise ComplexError(f"Vertex {render_label(v)} maps outside the target: {render_label(w)}")
        for simplex in self.source.total.simplices:
            image = self._image_set(simplex, mapping)
            if image not in self.target.total.simplices:
                raise ComplexError(f"Image of {render_label(simplex)} is not a simplex of the target")
            if simplex in self.source.sub.simplices and image not in self.target.sub.simplices:
                raise ComplexError(f"Image of sub simplex {render_label(simplex)} leaves the target sub")

    def _image_set(self, simplex: Simplex, mapping: Mapping[Label, Label]) -> Simplex:
        index = self.target.total.index
        return tuple(sorted({mapping[v] for v in simplex}, key=index.__getitem__))

    @classmethod
    def from_function(cls, source: SPair, target: SPair, fn) -> "PairMap":
        return cls(source, target, tuple((v, fn(v)) for v in source.total.vertices))

    @cached_property
    def mapping(self) -> Dict[Label, Label]:
        return dict(self.vertex_map)

    def __call__(self, vertex: Label) -> Label:
        return self.mapping[vertex]

    def oriented_image(self, simplex: Simplex) -> Tuple[int, Optional[Simplex]]:
        """Image of an ordered simplex as (sign, simplex); degenerate images give (0, None)."""
        images = [self.mapping[v] for v in simplex]
        if len(set(images)) < len(images):
            return 0, None
        index = self.target.total.index
        positions = [index[w] for w in images]
        inversions = sum(1 for i in range(len(positions)) for j in range(i + 1, len(positions)) if positions[i] > positions[j])
        ordered = tuple(sorted(images, key=index.__getitem__))
        return (-1 if inversions % 2 else 1), ordered


@dataclass(frozen=True)
class Triple:
    outer: OrderedComplex
    middle: OrderedComplex
    inner: OrderedComplex

    def __post_init__(self) -> None:
        if not self.inner.simplices:
            raise ComplexError("The innermost complex of a triple must be nonempty")
        if not (self.inner.simplices <= self.middle.simplices <= self.outer.simplices):
            raise ComplexError("Triple must satisfy inner ⊆ middle ⊆ outer")

    @classmethod
    def build(
        cls,
        outer: OrderedComplex,
        middle: Iterable[Iterable[Label]],
        inner: Iterable[Iterable[Label]],
    ) -> "Triple":
        return cls(outer, outer.subcomplex(middle), outer.subcomplex(inner))

    @property
    def pair_xy(self) -> SPair:
        return SPair(self.outer, self.middle)

    @property
    def pair_xz(self) -> SPair:
        return SPair(self.outer, self.inner)

    @property
    def pair_yz(self) -> SPair:
        return SPair(self.middle, self.inner)


@dataclass(frozen=True)
class CohomologyBasis:
    pair: SPair
    degree: int
    basis: RatMatrix
    boundaries: RatMatrix

    @property
    def dim(self) -> int:
        return self.basis.cols

    def coordinates(self, cocycles: RatMatrix) -> RatMatrix:
        """Coordinates of cocycle columns modulo coboundaries."""
        if cocycles.cols == 0 or self.dim == 0:
            return RatMatrix.zeros(self.dim, cocycles.cols)
        solution = coordinates(hstack([self.boundaries, self.basis]), cocycles)
        return solution.submatrix(range(self.boundaries.cols, solution.rows), range(cocycles.cols))


# -- standard pairs ---------------------------------------------------------


def interval_pair() -> SPair:
    """The interval with both endpoints marked, our model of the algebraic circle."""
    return SPair.build(
        (INTERVAL_START, INTERVAL_END),
        [(INTERVAL_START, INTERVAL_END)],
        [(INTERVAL_START,), (INTERVAL_END,)],
    )


def cone_interval_pair() -> SPair:
    return SPair.build((INTERVAL_START, INTERVAL_END), [(INTERVAL_START, INTERVAL_END)], [(INTERVAL_START,)])


def subdivided_interval_pair(*, mark_midpoint: bool = False) -> SPair:
    vertices = (INTERVAL_START, INTERVAL_MID, INTERVAL_END)
    sub = [(INTERVAL_START,), (INTERVAL_END,)]
    if mark_midpoint:
        sub.append((INTERVAL_MID,))
    return SPair.build(vertices, [(INTERVAL_START, INTERVAL_MID), (INTERVAL_MID, INTERVAL_END)], sub)


def point_pair() -> SPair:
    return SPair.build(("pt",), [("pt",)], [("pt",)])


def points_pair(d: int) -> SPair:
    """d+1 isolated points x0..xd with x0 marked."""
    vertices = tuple(f"x{k}" for k in range(d + 1))
    return SPair.build(vertices, [(v,) for v in vertices], [("x0",)])


def simplex_closure(vertices: Sequence[Label], simplices: Iterable[Iterable[Label]]) -> OrderedComplex:
    return OrderedComplex.build(vertices, simplices)


# -- cochains and cohomology ------------------------------------------------


@lru_cache(maxsize=4096)
def coboundary(p: SPair, n: int) -> RatMatrix:
    """Matrix of δ: C^n(p) → C^(n+1)(p) on relative cells, δφ(σ) = Σ (−1)^i φ(∂_i σ)."""
    sources = p.cells(n) if n >= 0 else []
    targets = p.cells(n + 1)
    index = {cell: i for i, cell in enumerate(sources)}
    entries = [Fraction(0)] * (len(targets) * len(sources))
    for r, tau in enumerate(targets):
        for i in range(len(tau)):
            face = tau[:i] + tau[i + 1 :]
            c = index.get(face)
            if c is not None:
                entries[r * len(sources) + c] += -1 if i % 2 else 1
    return RatMatrix(len(targets), len(sources), tuple(entries))


@lru_cache(maxsize=4096)
def relative_cohomology(p: SPair, n: int) -> CohomologyBasis:
    if n < 0:
        raise ComplexError("Cohomology degree must be nonnegative")
    size = len(p.cells(n))
    cocycles = kernel_basis(coboundary(p, n)) if size else Subspace.full(0)
    if n > 0 and size:
        boundaries = image_basis(coboundary(p, n - 1)).basis
    else:
        boundaries = RatMatrix.zeros(size, 0)
    if cocycles.dim == boundaries.cols:
        representatives = RatMatrix.zeros(size, 0)
    else:
        _, _, pivots = rref(hstack([boundaries, cocycles.basis]))
        chosen = [p_ - boundaries.cols for p_ in pivots if p_ >= boundaries.cols]
        representatives = cocycles.basis.submatrix(range(size), chosen)
    logger.debug("H^%s of pair (%s): dim %s", n, p.summary(), representatives.cols)
    return CohomologyBasis(p, n, representatives, boundaries)


def cohomology_dims(p: SPair, top: Optional[int] = None) -> List[int]:
    top = p.dimension + 1 if top is None else top
    return [relative_cohomology(p, n).dim for n in range(top + 1)]


def pullback_cochains(f: PairMap, n: int) -> RatMatrix:
    """Matrix of f^#: C^n(target) → C^n(source) on relative cells."""
    sources = f.source.cells(n)
    targets = f.target.cells(n)
    index = {cell: i for i, cell in enumerate(targets)}
    entries = [Fraction(0)] * (len(sources) * len(targets))
    for r, sigma in enumerate(sources):
        sign, image = f.oriented_image(sigma)
        if not sign:
            continue
        c = index.get(image)
        if c is not None:
            entries[r * len(targets) + c] = Fraction(sign)
    return RatMatrix(len(sources), len(targets), tuple(entries))


@lru_cache(maxsize=8192)
def induced_map(f: PairMap, n: int) -> RatMatrix:
    """Matrix of f^*: H^n(target) → H^n(source) in the stored bases."""
    source = relative_cohomology(f.source, n)
    target = relative_cohomology(f.target, n)
    if source.dim == 0 or target.dim == 0:
        return RatMatrix.zeros(source.dim, target.dim)
    return source.coordinates(pullback_cochains(f, n) @ target.basis)


@lru_cache(maxsize=4096)
def is_cohomology_equivalence(f: PairMap) -> bool:
    top = max(f.source.dimension, f.target.dimension) + 1
    for n in range(top + 1):
        if not induced_map(f, n).is_invertible():
            return False
    return True


def connecting_map(t: Triple, n: int) -> RatMatrix:
    """Matrix of ∂: H^(n−1)(Y,Z) → H^n(X,Y) by the snake construction."""
    target = relative_cohomology(t.pair_xy, n)
    if n < 1:
        return RatMatrix.zeros(target.dim, 0)
    source = relative_cohomology(t.pair_yz, n - 1)
    if source.dim == 0 or target.dim == 0:
        return RatMatrix.zeros(target.dim, source.dim)
    yz = t.pair_yz
    yz_index = {cell: i for i, cell in enumerate(yz.cells(n - 1))}
    cells = t.pair_xy.cells(n)
    columns = []
    for j in range(source.dim):
        phi = source.basis.column(j)
        values = []
        for tau in cells:
            total = Fraction(0)
            for i in range(len(tau)):
                k = yz_index.get(tau[:i] + tau[i + 1 :])
                if k is not None and phi[k]:
                    total += -phi[k] if i % 2 else phi[k]
            values.append(total)
        columns.append(values)
    cochains = RatMatrix.from_columns(columns, rows=len(cells))
    return target.coordinates(cochains)


@dataclass(frozen=True)
class LongExactSequence:
    triple: Triple
    labels: Tuple[str, ...]
    dims: Tuple[int, ...]
    maps: Tuple[RatMatrix, ...]

    @property
    def euler_characteristic(self) -> int:
        return sum(d if i % 2 == 0 else -d for i, d in enumerate(self.dims))


def inclusion_map(source: SPair, target: SPair) -> PairMap:
    return PairMap.from_function(source, target, lambda v: v)


def long_exact_triple(t: Triple) -> LongExactSequence:
    top = t.outer.dimension + 1
    labels: List[str] = []
    dims: List[int] = []
    maps: List[RatMatrix] = []
    xz_to_xy = inclusion_map(t.pair_xz, t.pair_xy)
    yz_to_xz = inclusion_map(t.pair_yz, t.pair_xz)
    for n in range(top + 1):
        labels += [f"H^{n}(X,Y)", f"H^{n}(X,Z)", f"H^{n}(Y,Z)"]
        dims += [
            relative_cohomology(t.pair_xy, n).dim,
            relative_cohomology(t.pair_xz, n).dim,
            relative_cohomology(t.pair_yz, n).dim,
        ]
        maps += [induced_map(xz_to_xy, n), induced_map(yz_to_xz, n), connecting_map(t, n + 1)]

    for slot in range(len(dims)):
        incoming = maps[slot - 1] if slot > 0 else RatMatrix.zeros(dims[0], 0)
        outgoing = maps[slot]
        if slot == len(dims) - 1:
            outgoing = RatMatrix.zeros(0, dims[slot])
        if image_basis(incoming) != kernel_basis(outgoing):
            raise CohomologyCheckError(f"Long exact sequence is not exact at {labels[slot]}")
    logger.debug("Long exact sequence verified over %s slots", len(dims))
    return LongExactSequence(t, tuple(labels), tuple(dims), tuple(maps))


# -- constructions ----------------------------------------------------------


def wedge(ps: Sequence[SPair]) -> Tuple[SPair, List[PairMap]]:
    if not ps:
        raise ComplexError("Wedge of an empty family is undefined")
    vertices = [(k, v) for k, p in enumerate(ps) for v in p.total.vertices]
    simplices = [tuple((k, v) for v in s) for k, p in enumerate(ps) for s in p.total.simplices]
    sub = [tuple((k, v) for v in s) for k, p in enumerate(ps) for s in p.sub.simplices]
    total = OrderedComplex(tuple(vertices), frozenset(simplices))
    pair = SPair(total, OrderedComplex.build(total.vertices, sub))
    inclusions = [
        PairMap.from_function(p, pair, lambda v, k=k: (k, v)) for k, p in enumerate(ps)
    ]
    return pair, inclusions


def wedge_projection(w: SPair, parts: Sequence[SPair], k: int) -> PairMap:
    """Collapse every summand but the k-th of a wedge onto a marked vertex of the k-th."""
    anchor = parts[k].sub.vertices[0]
    return PairMap.from_function(w, parts[k], lambda v: v[1] if v[0] == k else anchor)


def fold(p: SPair, k: int = 2) -> PairMap:
    """Wedge of k copies of p onto p."""
    w, _ = wedge([p] * k)
    return PairMap.from_function(w, p, lambda v: v[1])


def wedge_maps(maps: Sequence[PairMap]) -> PairMap:
    source, _ = wedge([f.source for f in maps])
    target, _ = wedge([f.target for f in maps])
    return PairMap.from_function(source, target, lambda v: (v[0], maps[v[0]](v[1])))


def _staircases(a: int, b: int) -> List[List[Tuple[int, int]]]:
    paths = []
    for steps in combinations(range(a + b), a):
        i = j = 0
        path = [(0, 0)]
        chosen = set(steps)
        for s in range(a + b):
            if s in chosen:
                i += 1
            else:
                j += 1
            path.append((i, j))
        paths.append(path)
    return paths


def _product_vertices(k: OrderedComplex, l: OrderedComplex) -> Tuple[Label, ...]:
    return tuple((v, w) for v in k.vertices for w in l.vertices)


def product_complex(k: OrderedComplex, l: OrderedComplex) -> OrderedComplex:
    """Staircase triangulation of k × l with the lexicographic vertex order."""
    simplices = []
    for sigma in k.maximal:
        for tau in l.maximal:
            for path in _staircases(len(sigma) - 1, len(tau) - 1):
                simplices.append(tuple((sigma[i], tau[j]) for i, j in path))
    return OrderedComplex.build(_product_vertices(k, l), simplices)


def _projection(simplex: Simplex, side: int, order: Mapping[Label, int]) -> Simplex:
    return tuple(sorted({vertex[side] for vertex in simplex}, key=order.__getitem__))


def _product_sub(total: OrderedComplex, p: SPair, q: SPair) -> OrderedComplex:
    kept = []
    for simplex in total.simplices:
        if (
            _projection(simplex, 0, p.total.index) in p.sub.simplices
            or _projection(simplex, 1, q.total.index) in q.sub.simplices
        ):
            kept.append(simplex)
    return OrderedComplex.build(total.vertices, kept)


def smash(p: SPair, q: SPair) -> SPair:
    total = product_complex(p.total, q.total)
    return SPair(total, _product_sub(total, p, q))


def full_product_pair(p: SPair, q: SPair) -> SPair:
    """Product pair whose simplices are all vertex sets with simplicial projections."""
    simplices = []
    for sigma in p.total.maximal:
        for tau in q.total.maximal:
            simplices.append(tuple((v, w) for v in sigma for w in tau))
    total = OrderedComplex.build(_product_vertices(p.total, q.total), simplices)
    return SPair(total, _product_sub(total, p, q))


def smash_maps(f: PairMap, g: PairMap) -> PairMap:
    """f ∧ g on staircase products; raises ComplexError when the product is not simplicial."""
    return PairMap.from_function(
        smash(f.source, g.source), smash(f.target, g.target), lambda v: (f(v[0]), g(v[1]))
    )


def full_product_maps(f: PairMap, g: PairMap) -> PairMap:
    return PairMap.from_function(
        full_product_pair(f.source, g.source),
        full_product_pair(f.target, g.target),
        lambda v: (f(v[0]), g(v[1])),
    )


def staircase_inclusion(p: SPair, q: SPair) -> PairMap:
    return inclusion_map(smash(p, q), full_product_pair(p, q))


def is_monotone(f: PairMap) -> bool:
    """True when f is weakly order preserving on every simplex."""
    source = f.source.total.index
    target = f.target.total.index
    for simplex in f.source.total.maximal:
        images = [target[f(v)] for v in sorted(simplex, key=source.__getitem__)]
        if any(a > b for a, b in zip(images, images[1:])):
            return False
    return True


def cone(p: SPair) -> SPair:
    return smash(p, cone_interval_pair())


def suspension(p: SPair) -> SPair:
    return smash(p, interval_pair())


def smash_triple(t: Triple, q: SPair) -> Triple:
    """(X, Y, Z) ∧ (K, L) = (X×K, Y×K ∪ X×L, Z×K ∪ X×L); its outer pair is (X,Y) ∧ (K,L)."""
    total = product_complex(t.outer, q.total)
    return Triple(total, _product_sub(total, t.pair_xy, q), _product_sub(total, t.pair_xz, q))


def smash_triple_excision(t: Triple, q: SPair) -> PairMap:
    """Inclusion of (Y,Z) ∧ (K,L) into the middle pair of ``smash_triple(t, q)``."""
    return inclusion_map(smash(t.pair_yz, q), smash_triple(t, q).pair_yz)


def suspension_triple(p: SPair) -> Triple:
    """(X×Δ¹) ⊇ (X×{0,1}) ∪ (Y×Δ¹) ⊇ (X×{0}) ∪ (Y×Δ¹)."""
    sp = suspension(p)
    inner = [
        s
        for s in sp.sub.simplices
        if all(v[1] == INTERVAL_START for v in s) or _projection(s, 0, p.total.index) in p.sub.simplices
    ]
    return Triple(sp.total, sp.sub, OrderedComplex.build(sp.total.vertices, inner))


def end_inclusion(p: SPair, t: Triple, end: str = INTERVAL_END) -> PairMap:
    """x ↦ (x, end) into the middle pair of a suspension triple."""
    return PairMap.from_function(p, t.pair_yz, lambda v: (v, end))


def suspension_iso(p: SPair, n: int) -> RatMatrix:
    """H^n(p) → H^(n+1)(Σp): connecting map of the suspension triple after the end inclusion."""
    if n < 0:
        raise ComplexError("Degree must be nonnegative")
    t = suspension_triple(p)
    h = induced_map(end_inclusion(p, t), n)
    if h.shape == (0, 0):
        return RatMatrix.zeros(0, 0)
    if not h.is_invertible():
        raise CohomologyCheckError("End inclusion is not a cohomology isomorphism")
    iso = connecting_map(t, n + 1) @ h.inverse()
    if not iso.is_invertible():
        raise CohomologyCheckError(f"Suspension map in degree {n} is not invertible")
    return iso


@dataclass(frozen=True)
class MappingCylinder:
    pair: SPair
    inclusion: PairMap
    retraction: PairMap


def _cylinder_simplices(f: PairMap, simplices: Iterable[Simplex], targets: Iterable[Simplex]) -> List[Simplex]:
    out = [tuple(("tgt", w) for w in s) for s in targets]
    for sigma in simplices:
        for i in range(len(sigma)):
            front = [("src", v) for v in sigma[: i + 1]]
            back = [("tgt", f(v)) for v in sigma[i:]]
            out.append(tuple(dict.fromkeys(front + back)))
    return out


def mapping_cylinder(f: PairMap) -> MappingCylinder:
    """Factor f as a subcomplex inclusion followed by a retraction that is a cohomology isomorphism."""
    vertices = [("src", v) for v in f.source.total.vertices] + [("tgt", w) for w in f.target.total.vertices]
    total = OrderedComplex.build(
        vertices, _cylinder_simplices(f, f.source.total.maximal, f.target.total.maximal)
    )
    sub = total.subcomplex(_cylinder_simplices(f, f.source.sub.maximal, f.target.sub.maximal))
    pair = SPair(total, sub)
    inclusion = PairMap.from_function(f.source, pair, lambda v: ("src", v))
    retraction = PairMap.from_function(pair, f.target, lambda v: f(v[1]) if v[0] == "src" else v[1])
    if not is_cohomology_equivalence(retraction):
        raise CohomologyCheckError("Mapping cylinder retraction is not a cohomology isomorphism")
    logger.debug("Mapping cylinder built: %s", pair.summary())
    return MappingCylinder(pair, inclusion, retraction)


def target_inclusion(c: MappingCylinder) -> PairMap:
    return PairMap.from_function(c.retraction.target, c.pair, lambda w: ("tgt", w))


def compose(g: PairMap, f: PairMap) -> PairMap:
    if f.target != g.source:
        raise ComplexError("Cannot compose maps whose pairs do not match")
    return PairMap.from_function(f.source, g.target, lambda v: g(f(v)))


def identity_map(p: SPair) -> PairMap:
    return inclusion_map(p, p)


def constant_map(source: SPair, target: SPair) -> PairMap:
    anchor = target.sub.vertices[0]
    return PairMap.from_function(source, target, lambda v: anchor)


def _is_injective(f: PairMap) -> bool:
    images = list(f.mapping.values())
    return len(set(images)) == len(images)


@dataclass(frozen=True)
class Pushout:
    pair: SPair
    left: PairMap
    right: PairMap


def glue_pushout(f1: PairMap, f2: PairMap) -> Pushout:
    if f1.source != f2.source:
        raise ComplexError("Pushout maps must share their source")
    if not (_is_injective(f1) and _is_injective(f2)):
        raise ComplexError("Pushout maps must be injective on vertices")
    back = {f2(a): f1(a) for a in f1.source.total.vertices}
    left_pair, right_pair = f1.target, f2.target
    vertices = [("L", b) for b in left_pair.total.vertices] + [
        ("R", c) for c in right_pair.total.vertices if c not in back
    ]

    def right_label(c: Label) -> Label:
        return ("L", back[c]) if c in back else ("R", c)

    def relabel(simplices: Iterable[Simplex], fn) -> List[Simplex]:
        return [tuple(fn(v) for v in s) for s in simplices]

    simplices = relabel(left_pair.total.maximal, lambda b: ("L", b)) + relabel(
        right_pair.total.maximal, right_label
    )
    sub = relabel(left_pair.sub.maximal, lambda b: ("L", b)) + relabel(right_pair.sub.maximal, right_label)
    total = OrderedComplex.build(vertices, simplices)
    pair = SPair(total, total.subcomplex(sub))
    left = PairMap.from_function(left_pair, pair, lambda b: ("L", b))
    right = PairMap.from_function(right_pair, pair, right_label)
    return Pushout(pair, left, right)


@dataclass(frozen=True)
class HomotopyPushout:
    pair: SPair
    f: PairMap
    s: PairMap
    f_tilde: PairMap
    s_tilde: PairMap


def homotopy_pushout(f: PairMap, s: PairMap) -> HomotopyPushout:
    """Double mapping cylinder of B ← A → C; f̃: C → D and s̃: B → D."""
    if f.source != s.source:
        raise ComplexError("Homotopy pushout needs maps with a common source")
    cyl_f = mapping_cylinder(f)
    cyl_s = mapping_cylinder(s)
    glued = glue_pushout(cyl_f.inclusion, cyl_s.inclusion)
    f_tilde = compose(glued.right, target_inclusion(cyl_s))
    s_tilde = compose(glued.left, target_inclusion(cyl_f))
    if is_cohomology_equivalence(s) and not is_cohomology_equivalence(s_tilde):
        raise CohomologyCheckError("Homotopy pushout lost the cohomology equivalence")
    return HomotopyPushout(glued.pair, f, s, f_tilde, s_tilde)
