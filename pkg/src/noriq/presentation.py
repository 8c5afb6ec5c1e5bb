from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .exactlin import (
    RatMatrix,
    Subspace,
    block_diag,
    image_basis,
    intersect,
    kernel_basis,
    kron,
    solve_right,
)
from .hocalc import (
    BACKWARD,
    Arrow,
    FORWARD,
    Lattice,
    SuspensionWitness,
    Zigzag,
    elementary_point_map,
    forward,
    homology_lattice,
    identity_zigzag,
    int_combination,
    kunneth_iso,
    pushforward_on_lattice,
    smash_zigzags,
    zz_induced,
)
from .noriquiver import (
    KIND_MAP,
    Commutant,
    ModuleOverCommutant,
    QMorphism,
    QObject,
    QuiverRep,
    commutant,
    free_cover,
    regular_module,
    restriction,
)
from .pairtop import (
    PairMap,
    SPair,
    compose,
    homotopy_pushout,
    identity_map,
    interval_pair,
    mapping_cylinder,
    points_pair,
    relative_cohomology,
    smash,
    suspension,
    suspension_iso,
    wedge,
)
from .rewrites import NormalizationChain, normalize

logger = logging.getLogger(__name__)

Check = Tuple[str, bool]


class PresentationError(RuntimeError):
    """Raised when a presentation witness fails verification."""


@dataclass(frozen=True)
class ElementaryObject:
    """H^n(X, Y)(i)."""

    pair: SPair
    degree: int
    twist: int = 0

    @property
    def dim(self) -> int:
        return relative_cohomology(self.pair, self.degree).dim


def _require(checks: List[Check], name: str, ok: bool) -> None:
    checks.append((name, ok))
    if not ok:
        raise PresentationError(f"Check failed: {name}")


# -- kernels as images -------------------------------------------------------------


def _is_identity(f: PairMap) -> bool:
    return f.source == f.target and all(v == w for v, w in f.vertex_map)


def left_roof(z: Zigzag) -> Tuple[PairMap, PairMap]:
    """
    Rewrite a zigzag as s⁻¹∘g with g: start → D and s: end → D.

    Each forward arrow met after a backward one is pushed across it with a
    homotopy pushout; s stays a cohomology equivalence throughout.
    """
    g = identity_map(z.start)
    s = g
    for arrow in z.arrows:
        if arrow.direction == BACKWARD:
            s = compose(s, arrow.map)
        elif _is_identity(s):
            g = compose(arrow.map, g)
            s = identity_map(arrow.map.target)
        else:
            square = homotopy_pushout(arrow.map, s)
            g = compose(square.f_tilde, g)
            s = square.s_tilde
    return g, s


@dataclass(frozen=True)
class KernelImage:
    f: Zigzag
    image: Subspace
    kernels: Subspace
    checks: Tuple[Check, ...]


def kernel_image_presentation(
    maps: Sequence[Zigzag],
    n: int,
    *,
    target: Optional[SPair] = None,
) -> KernelImage:
    """
    Build f: (X, Y) → (X1, Y1) whose pullback has image ⋂ ker f_α^*.

    The sources are wedged into X0, the wedge map is made an inclusion by its
    mapping cylinder and X1 is the cylinder with X0 added to its subcomplex.
    """
    if target is None:
        if not maps:
            raise PresentationError("An empty family needs an explicit target")
        target = maps[0].end
    for z in maps:
        if z.end != target:
            raise PresentationError("All maps must land in the same pair")
    ambient = relative_cohomology(target, n).dim
    kernels = intersect([kernel_basis(zz_induced(z, n)) for z in maps], ambient_dim=ambient)
    checks: List[Check] = []
    if not maps:
        f = identity_zigzag(target)
        _require(checks, "image equals intersection of kernels", image_basis(zz_induced(f, n)) == kernels)
        return KernelImage(f, kernels, kernels, tuple(checks))

    roofs = [left_roof(z) for z in maps]
    common = identity_map(target)
    lifted: List[PairMap] = []
    for g, s in roofs:
        if _is_identity(s):
            lifted.append(compose(common, g))
            continue
        square = homotopy_pushout(common, s)
        lifted = [compose(square.s_tilde, h) for h in lifted]
        lifted.append(compose(square.f_tilde, g))
        common = compose(square.s_tilde, common)

    sources, _ = wedge([h.source for h in lifted])
    glued = PairMap.from_function(sources, common.target, lambda v: lifted[v[0]](v[1]))
    cylinder = mapping_cylinder(glued)
    total = cylinder.pair.total
    sub = list(cylinder.pair.sub.simplices)
    sub.extend(tuple(("src", v) for v in s) for s in sources.total.simplices)
    x1 = SPair(total, total.subcomplex(sub))
    collapse = PairMap.from_function(cylinder.pair, x1, lambda v: v)
    arrows = [Arrow(cylinder.retraction, BACKWARD), Arrow(collapse, FORWARD)]
    if not _is_identity(common):
        arrows.insert(0, Arrow(common, FORWARD))
    f = Zigzag(target, tuple(arrows))
    image = image_basis(zz_induced(f, n))
    _require(checks, "image equals intersection of kernels", image == kernels)
    logger.debug("Kernel-image presentation over %s maps: image of dim %s", len(maps), image.dim)
    return KernelImage(f, image, kernels, tuple(checks))


# -- commutator suspension ---------------------------------------------------------


@dataclass(frozen=True)
class CommutatorSuspension:
    carrier: SPair
    degree: int
    lattice: Lattice
    pairing: RatMatrix
    plus: ElementaryObject
    witness: SuspensionWitness
    beta: RatMatrix
    pullbacks: Tuple[RatMatrix, ...]
    pushforwards: Tuple[RatMatrix, ...]
    f_plus: Tuple[Zigzag, ...]
    checks: Tuple[Check, ...]

    def commutator(self, k: int) -> RatMatrix:
        """β⁻¹(kron(f_*, I) − kron(I, f^*))β on H^(n+1)(X_+)."""
        d = self.pushforwards[k].rows
        m = self.pullbacks[k].rows
        middle = kron(self.pushforwards[k], RatMatrix.identity(m)) - kron(RatMatrix.identity(d), self.pullbacks[k])
        return self.beta.inverse() @ middle @ self.beta

    def kernel(self) -> Subspace:
        return intersect(
            [kernel_basis(self.commutator(k)) for k in range(len(self.pullbacks))],
            ambient_dim=self.plus.dim,
        )


def _plus_pair(p: SPair, n: int, d: int, twist: int) -> Tuple[SPair, SuspensionWitness, ElementaryObject, RatMatrix]:
    x0 = points_pair(d)
    w = SuspensionWitness.of(smash(x0, p))
    plus = ElementaryObject(w.pair, n + 1, twist)
    cross = kunneth_iso(x0, p, n)
    shift = suspension_iso(w.base, n)
    beta = (shift @ cross).inverse() if cross.rows else RatMatrix.zeros(0, 0)
    return x0, w, plus, beta


def _lattice_pairing(p: SPair, n: int) -> Tuple[Lattice, RatMatrix]:
    lattice = homology_lattice(p, n)
    reps = relative_cohomology(p, n).basis
    return lattice, reps.transpose() @ lattice.basis.to_rational()


def commutator_suspension(
    p: SPair,
    n: int,
    endos: Sequence[Zigzag],
    *,
    twist: int = 0,
) -> CommutatorSuspension:
    """
    Realize f ↦ (f_* ⊗ 1) − (1 ⊗ f^*) by maps f_+ on X_+ = Σ(X0 ∧ p).

    X0 is d+1 points with d the rank of H_n(p); f_* is realized on X0 by the
    elementary point maps and the lattice keeps every coefficient integral.
    """
    lattice, pairing = _lattice_pairing(p, n)
    d = lattice.rank
    x0, w, plus, beta = _plus_pair(p, n, d, twist)
    pullbacks = []
    pushforwards = []
    f_plus = []
    checks: List[Check] = []
    circle = identity_zigzag(interval_pair())
    for k, f in enumerate(endos):
        if f.start != p or f.end != p:
            raise PresentationError("Commutator suspension needs endomorphisms of the carrier")
        pushed = pushforward_on_lattice(f, lattice)
        terms = []
        for i in range(d):
            for j in range(d):
                if pushed[i, j]:
                    point_part = smash_zigzags(forward(elementary_point_map(x0, i + 1, j + 1)), identity_zigzag(p))
                    terms.append((pushed[i, j], smash_zigzags(point_part, circle)))
        terms.append((-1, smash_zigzags(smash_zigzags(identity_zigzag(x0), f), circle)))
        f_k = int_combination(terms, w, target=w.pair)
        pullbacks.append(zz_induced(f, n))
        pushforwards.append(pushed.to_rational())
        f_plus.append(f_k)
    cs = CommutatorSuspension(
        p, n, lattice, pairing, plus, w, beta, tuple(pullbacks), tuple(pushforwards), tuple(f_plus), ()
    )
    for k, f_k in enumerate(f_plus):
        _require(checks, f"commutator identity {k}", zz_induced(f_k, n + 1) == cs.commutator(k))
    return replace(cs, checks=tuple(checks))


def commutator_matrices(
    p: SPair,
    n: int,
    pullbacks: Sequence[RatMatrix],
    *,
    twist: int = 0,
) -> CommutatorSuspension:
    """The same commutator data when the endomorphisms are only known as matrices on H^n(p)."""
    lattice, pairing = _lattice_pairing(p, n)
    _, w, plus, beta = _plus_pair(p, n, lattice.rank, twist)
    pushforwards = tuple(pairing.inverse() @ a.transpose() @ pairing for a in pullbacks)
    return CommutatorSuspension(p, n, lattice, pairing, plus, w, beta, tuple(pullbacks), pushforwards, (), ())


# -- main pipeline -----------------------------------------------------------------


@dataclass(frozen=True)
class QuotientWitness:
    """
    A surjection of E-modules from d copies of an elementary carrier onto m.

    ``embedding`` places the carrier E inside H^(n+1)(X_+) as the common
    kernel of the commutators; ``reduction`` is the surjection from
    H^(n+1)(X1) onto it when the geometric chain was run.
    """

    source: Optional[ElementaryObject]
    copies: int
    carrier: ModuleOverCommutant
    embedding: RatMatrix
    reduction: Optional[RatMatrix]
    map: RatMatrix
    target: ModuleOverCommutant
    transport: RatMatrix
    geometric: bool
    checks: Tuple[Check, ...]

    @property
    def rank(self) -> int:
        return self.map.rank()


@dataclass(frozen=True)
class SubWitness:
    """An injection of m into d copies of the dual carrier; the dual pair itself is not built."""

    module: ModuleOverCommutant
    copies: int
    carrier: ModuleOverCommutant
    map: RatMatrix
    quotient: QuotientWitness
    dual_geometry_constructed: bool
    checks: Tuple[Check, ...]

    @property
    def rank(self) -> int:
        return self.map.rank()


def _transport_matrix(chain: NormalizationChain, start: Commutant) -> Tuple[RatMatrix, Commutant]:
    transport = RatMatrix.identity(start.dim)
    current = start
    for step in chain.steps:
        c_plus = commutant(step.enlarged)
        to_original = restriction(c_plus, step.original, target=current)
        to_reduced = restriction(c_plus, step.reduced)
        if not (to_original.is_iso and to_reduced.is_iso):
            raise PresentationError(f"Rewrite step {step.step} does not restrict isomorphically")
        transport = to_reduced.matrix @ to_original.matrix.inverse() @ transport
        current = to_reduced.target
    return transport, current


def _transported_module(m: ModuleOverCommutant, transport: RatMatrix, final: Commutant) -> ModuleOverCommutant:
    back = transport.inverse()
    return ModuleOverCommutant(m.dim, tuple(m.act(back.column(k)) for k in range(final.dim)))


def _vec(matrix: RatMatrix) -> List[Fraction]:
    return list(matrix.entries)


def _carrier_data(
    final: QuiverRep, full_geometry: Optional[bool]
) -> Tuple[SPair, int, int, List[RatMatrix], RatMatrix, Optional[List[Zigzag]]]:
    """Carrier pair, degree, twist, endomorphism matrices on it, conjugator, endomorphism zigzags."""
    q = final.objects[0]
    endos = list(final.morphisms)
    if q.is_geometric:
        zigzags = [m.zigzag for m in endos if m.matrix is None and m.zigzag is not None]
        if full_geometry is None:
            full_geometry = len(zigzags) == len(endos)
        if full_geometry and len(zigzags) != len(endos):
            raise PresentationError("Full geometry needs every endomorphism as a zigzag")
        conj = RatMatrix.identity(final.dims[q.id])
        return q.pair, q.degree, q.twist, [final.rho[m.id] for m in endos], conj, zigzags if full_geometry else None
    if full_geometry:
        raise PresentationError(f"Object {q.id} has no pair to build geometry on")
    dim = final.dims[q.id]
    points = points_pair(dim)
    phi = suspension_iso(points, 0)
    conjugated = [phi @ final.rho[m.id] @ phi.inverse() for m in endos]
    return suspension(points), 1, q.twist, conjugated, phi, None


def quotient_presentation(
    rep: QuiverRep,
    m: ModuleOverCommutant,
    *,
    full_geometry: Optional[bool] = None,
) -> QuotientWitness:
    """
    Present m as a quotient of copies of an elementary object.

    The quiver is normalized to one object, m is carried along the
    restriction isomorphisms, E is realized inside H^(n+1)(X_+) as the joint
    kernel of the commutator maps and the free cover E^d → m finishes the
    chain. With ``full_geometry`` the kernel is also presented as the image
    of a pullback from an explicit pair X1.
    """
    start = commutant(rep)
    m.validate(start)
    checks: List[Check] = []
    chain = normalize(rep)
    transport, final_c = _transport_matrix(chain, start)
    final = chain.final
    moved = _transported_module(m, transport, final_c).validate(final_c)
    cover = free_cover(moved, final_c)
    carrier = regular_module(final_c)

    if m.dim == 0 or not final.objects:
        _require(checks, "surjective", cover.matrix.rank() == m.dim)
        return QuotientWitness(
            None, 0, carrier, RatMatrix.zeros(0, final_c.dim), None, cover.matrix, m, transport, False, tuple(checks)
        )

    p, n, twist, pullbacks, conj, zigzags = _carrier_data(final, full_geometry)
    geometric = zigzags is not None
    if geometric:
        cs = commutator_suspension(p, n, zigzags, twist=twist)
    else:
        cs = commutator_matrices(p, n, pullbacks, twist=twist)
    checks.extend(cs.checks)

    pairing_inverse = cs.pairing.inverse()
    columns = []
    for family in final_c.basis:
        moved_e = conj @ family[0] @ conj.inverse()
        columns.append(_vec(pairing_inverse @ moved_e.transpose()))
    size = cs.beta.rows
    embedding = cs.beta.inverse() @ RatMatrix.from_columns(columns, rows=size) if columns else RatMatrix.zeros(size, 0)
    _require(checks, "embedding spans the commutator kernel", image_basis(embedding) == cs.kernel())
    _require(checks, "embedding injective", embedding.rank() == final_c.dim)
    identity_m = RatMatrix.identity(cs.pairing.rows)
    for k, family in enumerate(final_c.basis):
        moved_e = conj @ family[0] @ conj.inverse()
        action = cs.beta.inverse() @ kron(identity_m, moved_e) @ cs.beta
        _require(checks, f"embedding equivariant {k}", action @ embedding == embedding @ final_c.left_multiplication(k))

    source = cs.plus
    reduction = None
    if geometric:
        presented = kernel_image_presentation(cs.f_plus, n + 1, target=cs.plus.pair)
        checks.extend(presented.checks)
        pullback = zz_induced(presented.f, n + 1)
        _require(checks, "pullback image is the carrier", image_basis(pullback) == image_basis(embedding))
        reduction = solve_right(embedding, pullback)
        _require(checks, "reduction surjective", reduction.rank() == final_c.dim)
        source = ElementaryObject(presented.f.end, n + 1, twist)

    _require(checks, "surjective", cover.matrix.rank() == m.dim)
    for k in range(start.dim):
        moved_coords = transport.column(k)
        regular = block_diag([carrier.act(moved_coords)] * cover.copies)
        _require(checks, f"equivariant {k}", cover.matrix @ regular == m.action[k] @ cover.matrix)
    logger.info("Quotient presentation: %s copies of a %s-dimensional carrier", cover.copies, final_c.dim)
    return QuotientWitness(
        source, cover.copies, carrier, embedding, reduction, cover.matrix, m, transport, geometric, tuple(checks)
    )


# -- duality -----------------------------------------------------------------------


def _dual_module(m: ModuleOverCommutant) -> ModuleOverCommutant:
    return ModuleOverCommutant(m.dim, tuple(a.transpose() for a in m.action))


def dualize(witness):
    """Transpose a quotient witness into a sub witness and back."""
    if isinstance(witness, QuotientWitness):
        return SubWitness(
            _dual_module(witness.target),
            witness.copies,
            _dual_module(witness.carrier),
            witness.map.transpose(),
            witness,
            False,
            (("transposed", True),),
        )
    if isinstance(witness, SubWitness):
        return replace(witness.quotient, map=witness.map.transpose())
    raise PresentationError(f"Cannot dualize {type(witness).__name__}")


def opposite_quiver(rep: QuiverRep) -> QuiverRep:
    """Abstract quiver with reversed arrows and transposed matrices; its commutant is E^op."""
    objects = [QObject(obj.id, 0, 0, dim=rep.dims[obj.id]) for obj in rep.objects]
    morphisms = [
        QMorphism(m.id, KIND_MAP, m.target, m.source, matrix=rep.rho[m.id].transpose()) for m in rep.morphisms
    ]
    return QuiverRep.build(objects, morphisms)


def _opposite_coordinates(c: Commutant, c_op: Commutant) -> RatMatrix:
    """Columns: coordinates in c of the transposed basis families of c_op."""
    columns = []
    for family in c_op.basis:
        reordered = [family[c_op.block_index(q)].transpose() for q in c.object_ids]
        columns.append(c.coordinates(reordered))
    return RatMatrix.from_columns(columns, rows=c.dim) if columns else RatMatrix.zeros(c.dim, 0)


def sub_presentation(rep: QuiverRep, m: ModuleOverCommutant) -> SubWitness:
    """Embed m into copies of a dual elementary module by transposing a quotient of m^*."""
    c = commutant(rep)
    m.validate(c)
    dual_rep = opposite_quiver(rep)
    c_op = commutant(dual_rep)
    to_c = _opposite_coordinates(c, c_op)
    m_dual = ModuleOverCommutant(m.dim, tuple(m.act(to_c.column(k)).transpose() for k in range(c_op.dim)))
    quotient = quotient_presentation(dual_rep, m_dual.validate(c_op), full_geometry=False)
    sub = dualize(quotient)
    checks: List[Check] = list(sub.checks)
    _require(checks, "injective", sub.map.rank() == m.dim)
    from_c = to_c.inverse() if c.dim else RatMatrix.zeros(0, 0)
    for k in range(c.dim):
        carrier_action = block_diag([_carrier_action(quotient, from_c.column(k)).transpose()] * quotient.copies)
        _require(checks, f"equivariant {k}", sub.map @ m.action[k] == carrier_action @ sub.map)
    return replace(sub, module=m, checks=tuple(checks))


def _carrier_action(quotient: QuotientWitness, coords: Sequence[Fraction]) -> RatMatrix:
    """Action on the carrier of an element given in the coordinates of the quotient's starting commutant."""
    vector = RatMatrix.from_columns([list(coords)], rows=len(coords))
    return quotient.carrier.act((quotient.transport @ vector).column(0))
