"""Quiver rewrites that preserve the commutant: twist clones, degree clones and wedge reduction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple

from .exactlin import RatMatrix
from .hocalc import backward, forward, identity_zigzag, puppe_connector, smash_zigzags, zz_compose
from .noriquiver import (
    KIND_MAP,
    KIND_TRIPLE,
    KIND_TWIST,
    QMorphism,
    QObject,
    QuiverRep,
    commutant,
    equivalent,
)
from .pairtop import (
    end_inclusion,
    interval_pair,
    smash,
    smash_triple,
    smash_triple_excision,
    suspension,
    suspension_triple,
    wedge,
    wedge_projection,
)

logger = logging.getLogger(__name__)

Check = Tuple[str, bool]


class RewriteError(RuntimeError):
    """Raised when a rewrite precondition fails or a rewrite does not verify."""


@dataclass(frozen=True)
class ObjectClone:
    bad: str
    added_objects: Tuple[str, ...]
    added_morphisms: Tuple[str, ...]


@dataclass(frozen=True)
class Square:
    """Two matrix paths that must agree entrywise."""

    name: str
    left: RatMatrix
    right: RatMatrix

    @property
    def commutes(self) -> bool:
        return self.left == self.right


@dataclass(frozen=True)
class RewriteResult:
    step: str
    original: QuiverRep
    enlarged: QuiverRep
    reduced: QuiverRep
    witnesses: Dict[str, RatMatrix] = field(default_factory=dict)
    clones: Tuple[ObjectClone, ...] = ()
    squares: Tuple[Square, ...] = ()
    checks: Tuple[Check, ...] = ()

    @property
    def is_identity(self) -> bool:
        return not self.clones and self.original is self.reduced


def _identity_result(step: str, rep: QuiverRep) -> RewriteResult:
    return RewriteResult(step, rep, rep, rep, checks=(("unchanged", True),))


class _Ids:
    def __init__(self, rep: QuiverRep) -> None:
        self.taken: Set[str] = {obj.id for obj in rep.objects} | {m.id for m in rep.morphisms}

    def fresh(self, base: str) -> str:
        candidate = base
        k = 1
        while candidate in self.taken:
            k += 1
            candidate = f"{base}#{k}"
        self.taken.add(candidate)
        return candidate


def _finish(
    step: str,
    rep: QuiverRep,
    plus: QuiverRep,
    keep: List[str],
    witnesses: Dict[str, RatMatrix],
    clones: List[ObjectClone],
    squares: List[Square],
) -> RewriteResult:
    reduced = plus.subquiver(keep)
    checks: List[Check] = [(f"lambda[{q}] invertible", w.is_invertible()) for q, w in sorted(witnesses.items())]
    checks += [(f"square {s.name}", s.commutes) for s in squares]
    for name, ok in checks:
        if not ok:
            raise RewriteError(f"{step}: check '{name}' failed")
    ok = equivalent(rep, reduced, plus)
    checks.append(("equivalent", ok))
    if not ok:
        raise RewriteError(f"{step}: reduced quiver is not equivalent to the original")
    logger.debug(
        "%s: %s objects -> %s objects through %s", step, len(rep.objects), len(reduced.objects), len(plus.objects)
    )
    return RewriteResult(step, rep, plus, reduced, witnesses, tuple(clones), tuple(squares), tuple(checks))


# -- twist ---------------------------------------------------------------------


def _twist_clone_object(q: QObject, new_id: str) -> QObject:
    if q.is_geometric:
        return QObject(new_id, q.degree + 1, q.twist + 1, pair=smash(q.pair, interval_pair()))
    return QObject(new_id, q.degree + 1, q.twist + 1, dim=q.dim)


def _twisted_triple_morphism(f: QMorphism, f_id: str, source: str, target: str) -> QMorphism:
    """Clone of a kind b morphism on the smashed triple, entered through its excision."""
    circle = interval_pair()
    adapter = backward(smash_triple_excision(f.triple, circle))
    if f.zigzag is not None:
        adapter = zz_compose(adapter, smash_zigzags(f.zigzag, identity_zigzag(circle)))
    return QMorphism(f_id, KIND_TRIPLE, source, target, zigzag=adapter, triple=smash_triple(f.triple, circle))


def _twist_layer(
    plus: QuiverRep,
    layer: List[str],
    active: Set[str],
    ids: _Ids,
    witnesses: Dict[str, RatMatrix],
    clones: List[ObjectClone],
    squares: List[Square],
) -> Tuple[QuiverRep, List[str]]:
    clone_of: Dict[str, str] = {}
    kappa: Dict[str, str] = {}
    new_objects = []
    new_morphisms = []
    for q_id in layer:
        q = plus.object(q_id)
        t_id = ids.fresh(f"T[{q_id}]")
        k_id = ids.fresh(f"kappa[{q_id}]")
        clone_of[q_id], kappa[q_id] = t_id, k_id
        new_objects.append(_twist_clone_object(q, t_id))
        matrix = None if q.is_geometric else RatMatrix.identity(q.dim)
        new_morphisms.append(QMorphism(k_id, KIND_TWIST, t_id, q_id, matrix=matrix))
    plus = plus.extend(new_objects, new_morphisms)
    lam = {q: plus.rho[kappa[q]] for q in layer}
    for q in layer:
        witnesses[clone_of[q]] = lam[q]

    added: Dict[str, List[str]] = {q: [clone_of[q], kappa[q]] for q in layer}
    own = set(kappa.values())
    in_layer = set(layer)
    extra = []
    pending: List[Tuple[str, QMorphism]] = []
    for f in list(plus.morphisms):
        if f.id in own:
            continue
        if f.source in in_layer and f.target in in_layer:
            f_id = ids.fresh(f"T[{f.id}]")
            if f.kind == KIND_MAP and f.matrix is None and f.zigzag is not None:
                zigzag = smash_zigzags(f.zigzag, identity_zigzag(interval_pair()))
                extra.append(QMorphism(f_id, KIND_MAP, clone_of[f.source], clone_of[f.target], zigzag=zigzag))
            elif f.kind == KIND_TRIPLE and f.matrix is None and f.triple is not None:
                extra.append(_twisted_triple_morphism(f, f_id, clone_of[f.source], clone_of[f.target]))
            else:
                payload = lam[f.target].inverse() @ plus.rho[f.id] @ lam[f.source]
                extra.append(QMorphism(f_id, f.kind, clone_of[f.source], clone_of[f.target], matrix=payload))
            pending.append((f_id, f))
            added[f.target].append(f_id)
        elif f.kind == KIND_TWIST and f.target in in_layer and f.source in active and f.source not in in_layer:
            f_id = ids.fresh(f"{f.id}>T")
            source = plus.object(f.source)
            if f.matrix is None and source.is_geometric:
                # the source pair is already (X,Y) ∧ I, the pair of the clone
                extra.append(
                    QMorphism(f_id, KIND_MAP, f.source, clone_of[f.target], zigzag=identity_zigzag(source.pair))
                )
            else:
                payload = lam[f.target].inverse() @ plus.rho[f.id]
                extra.append(QMorphism(f_id, KIND_MAP, f.source, clone_of[f.target], matrix=payload))
            pending.append((f_id, f))
            added[f.target].append(f_id)
    plus = plus.extend((), extra)

    for new_id, f in pending:
        right = plus.rho[f.id]
        if f.source in in_layer:
            right = right @ lam[f.source]
        squares.append(Square(new_id, lam[f.target] @ plus.rho[new_id], right))
    for q in layer:
        clones.append(ObjectClone(q, tuple(added[q][:1]), tuple(added[q][1:])))
    return plus, [clone_of[q] for q in layer]


def clone_twist(rep: QuiverRep) -> RewriteResult:
    """Replace the lowest twist layer by circle-twisted clones until it meets the next twist."""
    twists = rep.twists
    if len(twists) <= 1:
        return _identity_result("clone_twist", rep)
    low, nxt = twists[0], twists[1]
    ids = _Ids(rep)
    witnesses: Dict[str, RatMatrix] = {}
    clones: List[ObjectClone] = []
    squares: List[Square] = []
    plus = rep
    active = {obj.id for obj in rep.objects}
    layer = sorted(obj.id for obj in rep.objects if obj.twist == low)
    for _ in range(nxt - low):
        plus, new_layer = _twist_layer(plus, layer, active, ids, witnesses, clones, squares)
        active = (active - set(layer)) | set(new_layer)
        layer = new_layer
    return _finish("clone_twist", rep, plus, sorted(active), witnesses, clones, squares)


# -- degree ----------------------------------------------------------------------


def _degree_layer(
    plus: QuiverRep,
    layer: List[str],
    active: Set[str],
    ids: _Ids,
    witnesses: Dict[str, RatMatrix],
    clones: List[ObjectClone],
    squares: List[Square],
) -> Tuple[QuiverRep, List[str]]:
    h_of: Dict[str, str] = {}
    s_of: Dict[str, str] = {}
    iota: Dict[str, str] = {}
    delta: Dict[str, str] = {}
    objects = []
    morphisms = []
    for q_id in layer:
        q = plus.object(q_id)
        h_of[q_id] = ids.fresh(f"H[{q_id}]")
        s_of[q_id] = ids.fresh(f"S[{q_id}]")
        iota[q_id] = ids.fresh(f"iota[{q_id}]")
        delta[q_id] = ids.fresh(f"delta[{q_id}]")
        if q.is_geometric:
            t = suspension_triple(q.pair)
            objects.append(QObject(h_of[q_id], q.degree, q.twist, pair=t.pair_yz))
            objects.append(QObject(s_of[q_id], q.degree + 1, q.twist, pair=suspension(q.pair)))
            morphisms.append(QMorphism(iota[q_id], KIND_MAP, h_of[q_id], q_id, zigzag=forward(end_inclusion(q.pair, t))))
            morphisms.append(QMorphism(delta[q_id], KIND_TRIPLE, h_of[q_id], s_of[q_id], triple=t))
        else:
            unit = RatMatrix.identity(q.dim)
            objects.append(QObject(h_of[q_id], q.degree, q.twist, dim=q.dim))
            objects.append(QObject(s_of[q_id], q.degree + 1, q.twist, dim=q.dim))
            morphisms.append(QMorphism(iota[q_id], KIND_MAP, h_of[q_id], q_id, matrix=unit))
            morphisms.append(QMorphism(delta[q_id], KIND_TRIPLE, h_of[q_id], s_of[q_id], matrix=unit))
    plus = plus.extend(objects, morphisms)
    iota_m = {q: plus.rho[iota[q]] for q in layer}
    lam = {q: plus.rho[delta[q]] @ iota_m[q].inverse() for q in layer}
    for q in layer:
        witnesses[s_of[q]] = lam[q]

    added: Dict[str, List[str]] = {q: [h_of[q], s_of[q], iota[q], delta[q]] for q in layer}
    own = set(iota.values()) | set(delta.values())
    in_layer = set(layer)
    extra = []
    pending: List[Tuple[str, str, RatMatrix]] = []
    for f in list(plus.morphisms):
        if f.id in own:
            continue
        if f.source in in_layer and f.target in in_layer:
            p, q = f.source, f.target
            s_id = ids.fresh(f"S[{f.id}]")
            h_id = ids.fresh(f"H[{f.id}]")
            if f.matrix is None and f.zigzag is not None:
                zigzag = smash_zigzags(f.zigzag, identity_zigzag(interval_pair()))
                extra.append(QMorphism(s_id, KIND_MAP, s_of[p], s_of[q], zigzag=zigzag))
            else:
                payload = lam[q] @ plus.rho[f.id] @ lam[p].inverse()
                extra.append(QMorphism(s_id, KIND_MAP, s_of[p], s_of[q], matrix=payload))
            h_payload = iota_m[q].inverse() @ plus.rho[f.id] @ iota_m[p]
            extra.append(QMorphism(h_id, KIND_MAP, h_of[p], h_of[q], matrix=h_payload))
            pending.append((s_id, f.id, lam[q] @ plus.rho[f.id] @ lam[p].inverse()))
            added[q] += [s_id, h_id]
        elif f.source in in_layer and f.target in active and f.target not in in_layer:
            q, p = f.source, f.target
            r_id = ids.fresh(f"puppe[{f.id}]")
            if f.kind == KIND_TRIPLE and f.matrix is None and f.triple is not None:
                connector = puppe_connector(f.triple)
                if f.zigzag is not None:
                    connector = zz_compose(connector, smash_zigzags(f.zigzag, identity_zigzag(interval_pair())))
                extra.append(QMorphism(r_id, KIND_MAP, s_of[q], p, zigzag=connector))
            else:
                extra.append(QMorphism(r_id, KIND_MAP, s_of[q], p, matrix=plus.rho[f.id] @ lam[q].inverse()))
            pending.append((r_id, f.id, None))
            added[q].append(r_id)
    plus = plus.extend((), extra)

    for new_id, old_id, expected in pending:
        if expected is not None:
            squares.append(Square(new_id, plus.rho[new_id], expected))
        else:
            q = plus.morphism(old_id).source
            squares.append(Square(new_id, plus.rho[new_id] @ lam[q], plus.rho[old_id]))
    for q in layer:
        clones.append(ObjectClone(q, tuple(added[q][:2]), tuple(added[q][2:])))
    return plus, [s_of[q] for q in layer]


def clone_degree(rep: QuiverRep) -> RewriteResult:
    """Replace the lowest degree layer by suspension clones until it meets the next degree."""
    if len(rep.twists) > 1:
        raise RewriteError("Degree cloning needs a single twist")
    degrees = rep.degrees
    if len(degrees) <= 1:
        return _identity_result("clone_degree", rep)
    low, nxt = degrees[0], degrees[1]
    ids = _Ids(rep)
    witnesses: Dict[str, RatMatrix] = {}
    clones: List[ObjectClone] = []
    squares: List[Square] = []
    plus = rep
    active = {obj.id for obj in rep.objects}
    layer = sorted(obj.id for obj in rep.objects if obj.degree == low)
    for _ in range(nxt - low):
        plus, new_layer = _degree_layer(plus, layer, active, ids, witnesses, clones, squares)
        active = (active - set(layer)) | set(new_layer)
        layer = new_layer
    return _finish("clone_degree", rep, plus, sorted(active), witnesses, clones, squares)


# -- single object ---------------------------------------------------------------


def _selector(dims: List[int], k: int) -> RatMatrix:
    """Projection from the direct sum onto summand k."""
    offset = sum(dims[:k])
    rows = [[int(c == offset + r) for c in range(sum(dims))] for r in range(dims[k])]
    return RatMatrix.from_rows(rows, cols=sum(dims))


def reduce_to_single_object(rep: QuiverRep) -> RewriteResult:
    """Merge all objects into one wedge (or direct sum) carrying every morphism as an endomorphism."""
    if len(rep.twists) > 1 or len(rep.degrees) > 1:
        raise RewriteError("Reduction to one object needs a single degree and twist")
    if len(rep.objects) <= 1:
        return _identity_result("reduce_to_single_object", rep)
    ids = _Ids(rep)
    parts = [rep.object(q) for q in rep.object_ids]
    index = {q.id: k for k, q in enumerate(parts)}
    degree, twist = parts[0].degree, parts[0].twist
    geometric = all(q.is_geometric for q in parts)
    dims = [rep.dims[q.id] for q in parts]
    q0_id = ids.fresh("q0")

    if geometric:
        w, inclusions = wedge([q.pair for q in parts])
        collapses = [wedge_projection(w, [q.pair for q in parts], k) for k in range(len(parts))]
        q0 = QObject(q0_id, degree, twist, pair=w)
    else:
        q0 = QObject(q0_id, degree, twist, dim=sum(dims))

    proj: Dict[str, str] = {}
    incl: Dict[str, str] = {}
    links: List[QMorphism] = []
    for k, q in enumerate(parts):
        proj[q.id] = ids.fresh(f"pi[{q.id}]")
        incl[q.id] = ids.fresh(f"iota[{q.id}]")
        if geometric:
            links.append(QMorphism(proj[q.id], KIND_MAP, q0_id, q.id, zigzag=forward(inclusions[k])))
            links.append(QMorphism(incl[q.id], KIND_MAP, q.id, q0_id, zigzag=forward(collapses[k])))
        else:
            selector = _selector(dims, k)
            links.append(QMorphism(proj[q.id], KIND_MAP, q0_id, q.id, matrix=selector))
            links.append(QMorphism(incl[q.id], KIND_MAP, q.id, q0_id, matrix=selector.transpose()))
    plus = rep.extend([q0], links)
    p_mat = {q.id: plus.rho[proj[q.id]] for q in parts}
    j_mat = {q.id: plus.rho[incl[q.id]] for q in parts}

    endos: List[QMorphism] = []
    expected: Dict[str, RatMatrix] = {}
    for q in parts:
        e_id = ids.fresh(f"e[{q.id}]")
        expected[e_id] = j_mat[q.id] @ p_mat[q.id]
        if geometric:
            k = index[q.id]
            z = zz_compose(forward(collapses[k]), forward(inclusions[k]))
            endos.append(QMorphism(e_id, KIND_MAP, q0_id, q0_id, zigzag=z))
        else:
            endos.append(QMorphism(e_id, KIND_MAP, q0_id, q0_id, matrix=expected[e_id]))
    for h in rep.morphisms:
        e_id = ids.fresh(f"e[{h.id}]")
        expected[e_id] = j_mat[h.target] @ rep.rho[h.id] @ p_mat[h.source]
        if geometric and h.matrix is None and h.zigzag is not None:
            z = zz_compose(forward(collapses[index[h.target]]), h.zigzag, forward(inclusions[index[h.source]]))
            endos.append(QMorphism(e_id, KIND_MAP, q0_id, q0_id, zigzag=z))
        else:
            endos.append(QMorphism(e_id, KIND_MAP, q0_id, q0_id, matrix=expected[e_id]))
    plus = plus.extend((), endos)

    squares = [Square(e.id, plus.rho[e.id], expected[e.id]) for e in endos]
    projectors = [expected[e.id] for e in endos[: len(parts)]]
    total = projectors[0]
    for projector in projectors[1:]:
        total = total + projector
    squares.append(Square("projectors sum to identity", total, RatMatrix.identity(plus.dims[q0_id])))
    clones = [ObjectClone(q.id, (q0_id,), (proj[q.id], incl[q.id])) for q in parts]
    return _finish("reduce_to_single_object", rep, plus, [q0_id], {}, clones, squares)


# -- driver ----------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizationChain:
    original: QuiverRep
    steps: Tuple[RewriteResult, ...]

    @property
    def final(self) -> QuiverRep:
        return self.steps[-1].reduced if self.steps else self.original


def normalize(rep: QuiverRep) -> NormalizationChain:
    """Eliminate twists, then degrees, then merge everything into one object."""
    steps: List[RewriteResult] = []
    current = rep
    while len(current.twists) > 1:
        steps.append(clone_twist(current))
        current = steps[-1].reduced
    while len(current.degrees) > 1:
        steps.append(clone_degree(current))
        current = steps[-1].reduced
    if len(current.objects) > 1:
        steps.append(reduce_to_single_object(current))
    dims = {commutant(r.reduced).dim for r in steps} | {commutant(rep).dim}
    if len(dims) != 1:
        raise RewriteError(f"Commutant dimension changed along the chain: {sorted(dims)}")
    logger.info("Normalized %s objects in %s steps", len(rep.objects), len(steps))
    return NormalizationChain(rep, tuple(steps))


def verify(result: RewriteResult) -> List[Check]:
    """Recompute every check of a rewrite step."""
    checks: List[Check] = [(f"lambda[{q}] invertible", w.is_invertible()) for q, w in sorted(result.witnesses.items())]
    checks += [(f"square {s.name}", s.commutes) for s in result.squares]
    checks.append(("subquiver original", result.original.is_subquiver_of(result.enlarged)))
    checks.append(("subquiver reduced", result.reduced.is_subquiver_of(result.enlarged)))
    checks.append(("equivalent", equivalent(result.original, result.reduced, result.enlarged)))
    return checks
