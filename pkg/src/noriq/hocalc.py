from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .exactlin import IntMatrix, RatMatrix, integer_inverse, smith_normal_form
from .pairtop import (
    INTERVAL_END,
    INTERVAL_MID,
    INTERVAL_START,
    CohomologyCheckError,
    OrderedComplex,
    PairMap,
    SPair,
    Triple,
    coboundary,
    connecting_map,
    constant_map,
    fold,
    full_product_maps,
    homotopy_pushout,
    identity_map,
    induced_map,
    interval_pair,
    is_cohomology_equivalence,
    is_monotone,
    points_pair,
    product_complex,
    relative_cohomology,
    smash,
    smash_maps,
    staircase_inclusion,
    subdivided_interval_pair,
    suspension,
    suspension_iso,
    wedge,
    wedge_maps,
)

logger = logging.getLogger(__name__)

FORWARD = "forward"
BACKWARD = "backward"


class ZigzagError(RuntimeError):
    """Raised when a zigzag is broken, uncertified or used against the wrong witness."""


class LatticeError(RuntimeError):
    """Raised when an induced map does not preserve an integral lattice."""


@dataclass(frozen=True)
class Arrow:
    map: PairMap
    direction: str

    @property
    def start(self) -> SPair:
        return self.map.source if self.direction == FORWARD else self.map.target

    @property
    def end(self) -> SPair:
        return self.map.target if self.direction == FORWARD else self.map.source


@dataclass(frozen=True)
class Zigzag:
    """
    A morphism in the homotopy category, written as a chain of pair maps.

    Backward arrows stand for formal inverses and must be cohomology
    equivalences. An empty chain is the identity on ``start``.
    """

    start: SPair
    arrows: Tuple[Arrow, ...] = ()

    def __post_init__(self) -> None:
        current = self.start
        for position, arrow in enumerate(self.arrows):
            if arrow.direction not in (FORWARD, BACKWARD):
                raise ZigzagError(f"Unknown arrow direction '{arrow.direction}'")
            if arrow.start != current:
                raise ZigzagError(f"Arrow {position} does not start where the previous one ended")
            if arrow.direction == BACKWARD and not is_cohomology_equivalence(arrow.map):
                raise ZigzagError(f"Backward arrow {position} is not a cohomology equivalence")
            current = arrow.end

    @property
    def end(self) -> SPair:
        return self.arrows[-1].end if self.arrows else self.start

    def __len__(self) -> int:
        return len(self.arrows)


def forward(f: PairMap) -> Zigzag:
    return Zigzag(f.source, (Arrow(f, FORWARD),))


def backward(s: PairMap) -> Zigzag:
    return Zigzag(s.target, (Arrow(s, BACKWARD),))


def identity_zigzag(p: SPair) -> Zigzag:
    return Zigzag(p)


def zero_zigzag(source: SPair, target: SPair) -> Zigzag:
    return forward(constant_map(source, target))


def zz_compose(*zigzags: Zigzag) -> Zigzag:
    """Compose left to right: the first zigzag is traversed first."""
    if not zigzags:
        raise ZigzagError("Nothing to compose")
    arrows: List[Arrow] = []
    for previous, following in zip(zigzags, zigzags[1:]):
        if previous.end != following.start:
            raise ZigzagError("Composed zigzags do not meet")
    for z in zigzags:
        arrows.extend(z.arrows)
    return Zigzag(zigzags[0].start, tuple(arrows))


def zz_induced(z: Zigzag, n: int) -> RatMatrix:
    """Matrix of z^*: H^n(end) → H^n(start)."""
    result = RatMatrix.identity(relative_cohomology(z.start, n).dim)
    for arrow in z.arrows:
        matrix = induced_map(arrow.map, n)
        if arrow.direction == BACKWARD:
            if not matrix.is_invertible():
                raise ZigzagError(f"Backward arrow is not invertible in degree {n}")
            matrix = matrix.inverse()
        result = result @ matrix
    return result


# -- products and wedges of zigzags ------------------------------------------


def _smash_arrow(arrow: Arrow, other: PairMap, *, left: bool) -> List[Arrow]:
    f, g = (arrow.map, other) if left else (other, arrow.map)
    if is_monotone(f) and is_monotone(g):
        return [Arrow(smash_maps(f, g), arrow.direction)]
    into_source = staircase_inclusion(f.source, g.source)
    into_target = staircase_inclusion(f.target, g.target)
    product = full_product_maps(f, g)
    if arrow.direction == FORWARD:
        return [Arrow(into_source, FORWARD), Arrow(product, FORWARD), Arrow(into_target, BACKWARD)]
    return [Arrow(into_target, FORWARD), Arrow(product, BACKWARD), Arrow(into_source, BACKWARD)]


def smash_zigzags(z1: Zigzag, z2: Zigzag) -> Zigzag:
    """Arrow-wise z1 ∧ z2: first z1 ∧ id, then id ∧ z2."""
    arrows: List[Arrow] = []
    for arrow in z1.arrows:
        arrows.extend(_smash_arrow(arrow, identity_map(z2.start), left=True))
    for arrow in z2.arrows:
        arrows.extend(_smash_arrow(arrow, identity_map(z1.end), left=False))
    return Zigzag(smash(z1.start, z2.start), tuple(arrows))


def wedge_zigzags(zs: Sequence[Zigzag]) -> Zigzag:
    """Arrow-wise wedge, advancing one summand at a time."""
    current = [z.start for z in zs]
    start, _ = wedge(current)
    arrows: List[Arrow] = []
    for k, z in enumerate(zs):
        for arrow in z.arrows:
            maps = [identity_map(p) for p in current]
            maps[k] = arrow.map
            arrows.append(Arrow(wedge_maps(maps), arrow.direction))
            current[k] = arrow.end
    return Zigzag(start, tuple(arrows))


# -- cogroup structure ---------------------------------------------------------


@dataclass(frozen=True)
class SuspensionWitness:
    """Identifies ``pair`` literally with base ∧ interval."""

    pair: SPair
    base: SPair

    def __post_init__(self) -> None:
        if self.pair != suspension(self.base):
            raise ZigzagError("Pair is not the suspension of the witness base")

    @classmethod
    def of(cls, base: SPair) -> "SuspensionWitness":
        return cls(suspension(base), base)


def _swap_ends(label: str) -> str:
    return {INTERVAL_START: INTERVAL_END, INTERVAL_END: INTERVAL_START}[label]


def inversion(w: SuspensionWitness) -> Zigzag:
    """The self-map of Σ(base) reversing the suspension coordinate."""
    circle = interval_pair()
    flip = PairMap.from_function(circle, circle, _swap_ends)
    return smash_zigzags(identity_zigzag(w.base), forward(flip))


def pinch(w: SuspensionWitness) -> Zigzag:
    """Comultiplication Σ → Σ ∨ Σ through the interval subdivided at its midpoint."""
    circle = interval_pair()
    halved = subdivided_interval_pair()
    halved_marked = subdivided_interval_pair(mark_midpoint=True)
    squash = PairMap.from_function(
        halved, circle, lambda t: INTERVAL_END if t == INTERVAL_MID else t
    )
    relax = PairMap.from_function(halved, halved_marked, lambda t: t)
    base_id = identity_map(w.base)
    c_tilde = smash_maps(base_id, squash)
    i_tilde = smash_maps(base_id, relax)

    halves = (
        {INTERVAL_START: INTERVAL_START, INTERVAL_END: INTERVAL_MID},
        {INTERVAL_START: INTERVAL_MID, INTERVAL_END: INTERVAL_END},
    )
    both, _ = wedge([w.pair, w.pair])
    q_tilde = PairMap.from_function(
        both, smash(w.base, halved_marked), lambda v: (v[1][0], halves[v[0]][v[1][1]])
    )
    return Zigzag(
        w.pair,
        (Arrow(c_tilde, BACKWARD), Arrow(i_tilde, FORWARD), Arrow(q_tilde, BACKWARD)),
    )


def _check_on_witness(f: Zigzag, w: SuspensionWitness) -> None:
    if f.start != w.pair:
        raise ZigzagError("Map does not start at the suspension witness pair")


def cogroup_sum(f: Zigzag, g: Zigzag, w: SuspensionWitness) -> Zigzag:
    """fold ∘ (f ∨ g) ∘ pinch."""
    _check_on_witness(f, w)
    _check_on_witness(g, w)
    if f.end != g.end:
        raise ZigzagError("Summands must share their target")
    return zz_compose(pinch(w), wedge_zigzags([f, g]), forward(fold(f.end)))


def negate(f: Zigzag, w: SuspensionWitness) -> Zigzag:
    _check_on_witness(f, w)
    return zz_compose(inversion(w), f)


def int_combination(
    terms: Sequence[Tuple[int, Zigzag]],
    w: SuspensionWitness,
    *,
    target: Optional[SPair] = None,
) -> Zigzag:
    """Σ a_k·f_k as left-to-right iterated sums, |a| copies per term."""
    total: Optional[Zigzag] = None
    for index, (coefficient, f) in enumerate(terms):
        _check_on_witness(f, w)
        if target is None:
            target = f.end
        if f.end != target:
            raise ZigzagError(f"Term {index} does not end at the combination target")
        piece = f if coefficient > 0 else negate(f, w)
        for _ in range(abs(coefficient)):
            total = piece if total is None else cogroup_sum(total, piece, w)
    if total is None:
        if target is None:
            raise ZigzagError("Empty combination needs a target")
        return zero_zigzag(w.pair, target)
    return total


# -- Künneth -----------------------------------------------------------------


def _factor_value(cochain, cells_index, simplex) -> Fraction:
    if len(set(simplex)) < len(simplex):
        return Fraction(0)
    position = cells_index.get(simplex)
    return cochain[position] if position is not None else Fraction(0)


def kunneth_iso(p: SPair, q: SPair, n: int) -> RatMatrix:
    """
    Cross product ⊕_{a+b=n} H^a(p) ⊗ H^b(q) → H^n(p ∧ q).

    Front/back face formula on the staircase product: (u × v)(σ) is u on the
    first a+1 vertices projected to p times v on the last b+1 projected to q.
    Columns run over a ascending, then i (basis of H^a(p)) outer and j inner.
    """
    product = smash(p, q)
    cells = product.cells(n)
    columns: List[List[Fraction]] = []
    for a in range(n + 1):
        b = n - a
        left = relative_cohomology(p, a)
        right = relative_cohomology(q, b)
        if not left.dim or not right.dim:
            continue
        left_index = {c: k for k, c in enumerate(p.cells(a))}
        right_index = {c: k for k, c in enumerate(q.cells(b))}
        for i in range(left.dim):
            u = left.basis.column(i)
            for j in range(right.dim):
                v = right.basis.column(j)
                values = []
                for sigma in cells:
                    front = tuple(vertex[0] for vertex in sigma[: a + 1])
                    back = tuple(vertex[1] for vertex in sigma[a:])
                    x = _factor_value(u, left_index, front)
                    values.append(x * _factor_value(v, right_index, back) if x else Fraction(0))
                columns.append(values)
    target = relative_cohomology(product, n)
    if not columns and target.dim == 0:
        return RatMatrix.zeros(0, 0)
    cochains = RatMatrix.from_columns(columns, rows=len(cells))
    iso = target.coordinates(cochains)
    if not iso.is_invertible():
        raise CohomologyCheckError(f"Cross product in degree {n} is not an isomorphism")
    return iso


# -- Puppe connector -----------------------------------------------------------


def puppe_connector(t: Triple) -> Zigzag:
    """
    Roof (X,Y) → (X×Δ¹, X×{0} ∪ Z×Δ¹ ∪ Y×{1}) ← Σ(Y,Z).

    The forward leg is x ↦ (x, 1); the backward leg includes the suspension.
    In cohomology the roof composed with the suspension isomorphism of (Y,Z)
    is the connecting map of the triple.
    """
    circle = interval_pair()
    total = product_complex(t.outer, circle.total)
    z_simplices = t.inner.simplices

    def in_roof(simplex) -> bool:
        base = tuple(sorted({v[0] for v in simplex}, key=t.outer.index.__getitem__))
        ends = {v[1] for v in simplex}
        if ends == {INTERVAL_START}:
            return True
        if base in z_simplices:
            return True
        return ends == {INTERVAL_END} and base in t.middle.simplices

    roof = SPair(total, OrderedComplex.build(total.vertices, [s for s in total.simplices if in_roof(s)]))
    lift = PairMap.from_function(t.pair_xy, roof, lambda x: (x, INTERVAL_END))
    include = PairMap.from_function(suspension(t.pair_yz), roof, lambda v: v)
    return Zigzag(t.pair_xy, (Arrow(lift, FORWARD), Arrow(include, BACKWARD)))


def puppe_contract_holds(t: Triple, n: int) -> bool:
    if n < 1:
        return True
    left = zz_induced(puppe_connector(t), n) @ suspension_iso(t.pair_yz, n - 1)
    return left == connecting_map(t, n)


def ore_square(f: PairMap, s: PairMap) -> Zigzag:
    """Rewrite C ← A → B (s backward, f forward) as the roof C → D ← B."""
    square = homotopy_pushout(f, s)
    roof = Zigzag(s.target, (Arrow(square.f_tilde, FORWARD), Arrow(square.s_tilde, BACKWARD)))
    logger.debug("Ore square built on %s", square.pair.summary())
    return roof


# -- lattices ------------------------------------------------------------------


@dataclass(frozen=True)
class Lattice:
    pair: SPair
    degree: int
    basis: IntMatrix

    @property
    def rank(self) -> int:
        return self.basis.cols


def _boundary(p: SPair, n: int) -> IntMatrix:
    # ∂_n is the transpose of δ_(n−1)
    delta = coboundary(p, n - 1)
    return IntMatrix(delta.cols, delta.rows, tuple(int(x) for x in delta.transpose().entries))


def _columns(m: IntMatrix, start: int) -> IntMatrix:
    keep = list(range(start, m.cols))
    return IntMatrix(m.rows, len(keep), tuple(m[i, j] for i in range(m.rows) for j in keep))


def _rank_of_diagonal(d: IntMatrix) -> int:
    return sum(1 for k in range(min(d.rows, d.cols)) if d[k, k])


def homology_lattice(p: SPair, n: int) -> Lattice:
    """Integral cycles spanning H_n(p; Z) modulo torsion."""
    size = len(p.cells(n))
    if size == 0:
        return Lattice(p, n, IntMatrix(0, 0, ()))
    if n == 0 or not p.cells(n - 1):
        cycles = IntMatrix.identity(size)
    else:
        _, d, v = smith_normal_form(_boundary(p, n))
        cycles = _columns(v, _rank_of_diagonal(d))
    if cycles.cols == 0:
        return Lattice(p, n, cycles)
    above = _boundary(p, n + 1) if p.cells(n + 1) else IntMatrix(size, 0, ())
    if n == 0 or not p.cells(n - 1):
        in_cycles = above
    else:
        coords = integer_inverse(v) @ above
        first = v.cols - cycles.cols
        in_cycles = IntMatrix(
            cycles.cols, coords.cols, tuple(coords[i, j] for i in range(first, v.cols) for j in range(coords.cols))
        )
    if in_cycles.cols == 0:
        return Lattice(p, n, cycles)
    u, d, _ = smith_normal_form(in_cycles)
    free = _columns(integer_inverse(u), _rank_of_diagonal(d))
    basis = cycles @ free
    logger.debug("Homology lattice of rank %s in degree %s", basis.cols, n)
    return Lattice(p, n, basis)


def pushforward_on_lattice(f: Zigzag, lattice: Lattice) -> IntMatrix:
    """Integer matrix of f_* on the lattice basis, dual to f^* under the Kronecker pairing."""
    if f.start != lattice.pair or f.end != lattice.pair:
        raise ZigzagError("Pushforward needs an endomorphism of the lattice pair")
    n = lattice.degree
    cohomology = relative_cohomology(lattice.pair, n)
    if cohomology.dim != lattice.rank:
        raise LatticeError("Lattice rank differs from the cohomology dimension")
    if lattice.rank == 0:
        return IntMatrix(0, 0, ())
    pairing = cohomology.basis.transpose() @ lattice.basis.to_rational()
    m = zz_induced(f, n)
    f_star = pairing.inverse() @ m.transpose() @ pairing
    if any(value.denominator != 1 for value in f_star.entries):
        raise LatticeError("Induced map does not preserve the integral lattice")
    return IntMatrix(f_star.rows, f_star.cols, tuple(int(value) for value in f_star.entries))


# -- integer matrices on a wedge of circles ---------------------------------------


def elementary_point_map(x0: SPair, i: int, j: int) -> PairMap:
    """e_ij on d+1 points: x_i ↦ x_j, every other point ↦ x_0."""
    source = f"x{i}"
    return PairMap.from_function(x0, x0, lambda v: f"x{j}" if v == source else "x0")


def realize_matrix_on_wedge(alpha: IntMatrix, d: int) -> Tuple[SuspensionWitness, Zigzag, RatMatrix]:
    """
    Realize an integer matrix as an endomorphism of Σ(d+1 points, 1 point).

    Returns the witness, f = Σ a_ij·Σe_ij and φ: Q^d → H¹ with φ·alpha = f^*·φ.
    """
    if alpha.rows != d or alpha.cols != d:
        raise ZigzagError(f"Expected a {d}x{d} matrix, got {alpha.rows}x{alpha.cols}")
    x0 = points_pair(d)
    w = SuspensionWitness.of(x0)
    circle_id = identity_map(interval_pair())
    terms = [
        (alpha[i, j], forward(smash_maps(elementary_point_map(x0, i + 1, j + 1), circle_id)))
        for i in range(d)
        for j in range(d)
        if alpha[i, j]
    ]
    f = int_combination(terms, w, target=w.pair)
    phi = suspension_iso(x0, 0)
    if phi @ alpha.to_rational() != zz_induced(f, 1) @ phi:
        raise ZigzagError("Realized map does not match the integer matrix")
    return w, f, phi
