from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .exactlin import IntMatrix, RatMatrix, ShapeError, image_basis, kernel_basis, kron, vstack
from .formats import load_manifest, load_pair, load_quiver, load_triple
from .hocalc import (
    LatticeError,
    SuspensionWitness,
    Zigzag,
    ZigzagError,
    cogroup_sum,
    forward,
    identity_zigzag,
    inversion,
    puppe_contract_holds,
    realize_matrix_on_wedge,
    smash_zigzags,
    zero_zigzag,
    zz_induced,
)
from .noriquiver import (
    KIND_MAP,
    KIND_TRIPLE,
    KIND_TWIST,
    QMorphism,
    QObject,
    QuiverError,
    QuiverRep,
    commutant,
    module_from_object,
    regular_module,
    zero_module,
)
from .pairtop import (
    ComplexError,
    OrderedComplex,
    SPair,
    Triple,
    constant_map,
    interval_pair,
    points_pair,
    relative_cohomology,
    smash,
    suspension,
    suspension_iso,
)
from .presentation import (
    PresentationError,
    commutator_suspension,
    kernel_image_presentation,
    quotient_presentation,
    sub_presentation,
)
from .rewrites import RewriteError, normalize, verify

logger = logging.getLogger(__name__)

FAILURES = (
    ComplexError,
    LatticeError,
    PresentationError,
    QuiverError,
    RewriteError,
    ShapeError,
    ZigzagError,
)


@dataclass(frozen=True)
class CorpusSizes:
    suspension_pairs: int = 50
    matrices: int = 20
    triples: int = 20
    single_object: int = 10
    mixed_quivers: int = 30
    map_families: int = 30
    commutators: int = 20
    presentations: int = 10
    geometric_presentations: int = 3


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    failures: Tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class Corpus:
    seed: int
    pairs: List[SPair] = field(default_factory=list)
    endo_cases: List[Tuple[SuspensionWitness, Zigzag, Zigzag]] = field(default_factory=list)
    matrices: List[IntMatrix] = field(default_factory=list)
    triples: List[Triple] = field(default_factory=list)
    single_object: List[QuiverRep] = field(default_factory=list)
    mixed: List[QuiverRep] = field(default_factory=list)
    families: List[Tuple[SPair, List[Zigzag], int]] = field(default_factory=list)
    commutators: List[Tuple[SPair, int, List[Zigzag]]] = field(default_factory=list)
    presentations: List[Tuple[QuiverRep, str]] = field(default_factory=list)

    def fingerprint(self) -> Tuple[object, ...]:
        return (
            self.seed,
            tuple(p.summary() for p in self.pairs),
            tuple(len(f.arrows) + len(g.arrows) for _, f, g in self.endo_cases),
            tuple(m.entries for m in self.matrices),
            tuple(len(t.outer) for t in self.triples),
            tuple(tuple(sorted(rep.dims.items())) for rep in self.single_object + self.mixed),
            tuple(len(maps) for _, maps, _ in self.families),
            tuple(p.summary() for p, _, _ in self.commutators),
            tuple(kind for _, kind in self.presentations),
        )


# -- random objects ----------------------------------------------------------------


def random_pair(rng: random.Random, *, max_vertices: int = 4) -> SPair:
    """A random complex on a few vertices with a nonempty subcomplex spanned by some vertices."""
    vertices = [f"v{k}" for k in range(rng.randint(2, max_vertices))]
    simplices = [(v,) for v in vertices]
    for _ in range(rng.randint(1, len(vertices))):
        size = rng.randint(2, min(3, len(vertices)))
        simplices.append(tuple(rng.sample(vertices, size)))
    total = OrderedComplex.build(vertices, simplices)
    marked = set(rng.sample(vertices, rng.randint(1, len(vertices) - 1)))
    ordered = sorted(total.simplices, key=total.sort_key)
    sub = [s for s in ordered if set(s) <= marked and (len(s) == 1 or rng.random() < 0.5)]
    return SPair(total, total.subcomplex(sub))


def random_triple(rng: random.Random) -> Triple:
    pair = random_pair(rng, max_vertices=5)
    outer = pair.total
    middle = [s for s in sorted(outer.simplices, key=outer.sort_key) if rng.random() < 0.6] + list(pair.sub.simplices)
    middle_complex = outer.subcomplex(middle)
    inner = [(middle_complex.vertices[0],)]
    inner += [s for s in sorted(middle_complex.simplices, key=middle_complex.sort_key) if rng.random() < 0.3]
    return Triple.build(outer, middle_complex.simplices, inner)


def random_int_matrix(rng: random.Random, d: int, bound: int) -> IntMatrix:
    return IntMatrix.from_rows([[rng.randint(-bound, bound) for _ in range(d)] for _ in range(d)], cols=d)


def _random_rows(rng: random.Random, rows: int, cols: int, bound: int = 2) -> List[List[int]]:
    return [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)]


def random_single_object(rng: random.Random) -> QuiverRep:
    dim = rng.randint(1, 4)
    objects = [QObject("q", 0, 0, dim=dim)]
    morphisms = []
    for k in range(rng.randint(0, 3)):
        style = rng.choice(("random", "nilpotent", "scalar"))
        if style == "nilpotent":
            rows = [[int(j == i + 1) * rng.randint(0, 2) for j in range(dim)] for i in range(dim)]
        elif style == "scalar":
            c = rng.randint(-2, 2)
            rows = [[c * int(i == j) for j in range(dim)] for i in range(dim)]
        else:
            rows = _random_rows(rng, dim, dim)
        morphisms.append(QMorphism(f"f{k}", KIND_MAP, "q", "q", matrix=RatMatrix.from_rows(rows)))
    return QuiverRep.build(objects, morphisms)


def random_mixed_quiver(rng: random.Random, *, max_total_dim: int = 8) -> QuiverRep:
    """Abstract quiver on up to four objects with random degrees, twists and arrows of all kinds."""
    count = rng.randint(1, 4)
    objects = []
    budget = max_total_dim
    for k in range(count):
        dim = rng.randint(1, max(1, min(2, budget - (count - k - 1))))
        budget -= dim
        objects.append(QObject(f"o{k}", rng.randint(0, 1), rng.randint(0, 1), dim=dim))
    morphisms = []
    for k in range(rng.randint(0, 4)):
        p, q = rng.choice(objects), rng.choice(objects)
        if (p.degree, p.twist) == (q.degree, q.twist):
            kind = KIND_MAP
        elif q.degree == p.degree + 1 and q.twist == p.twist:
            kind = KIND_TRIPLE
        elif p.degree == q.degree + 1 and p.twist == q.twist + 1:
            kind = KIND_TWIST
        else:
            continue
        rows = _random_rows(rng, q.dim, p.dim, bound=1)
        morphisms.append(QMorphism(f"m{k}", kind, p.id, q.id, matrix=RatMatrix.from_rows(rows, cols=p.dim)))
    return QuiverRep.build(objects, morphisms)


def random_geometric_quiver(rng: random.Random) -> QuiverRep:
    """Small quiver on pairs: a circle endomorphism, a realized wedge endomorphism or an untwisting arrow."""
    style = rng.choice(("circle", "wedge", "twist"))
    if style == "twist":
        p = points_pair(1)
        return QuiverRep.build(
            [QObject("P", 0, 0, pair=p), QObject("SP", 1, 1, pair=smash(p, interval_pair()))],
            [QMorphism("untwist", KIND_TWIST, "SP", "P")],
        )
    if style == "wedge":
        w, f, _ = realize_matrix_on_wedge(random_int_matrix(rng, 2, 1), 2)
    else:
        w = SuspensionWitness.of(points_pair(1))
        f = rng.choice([identity_zigzag(w.pair), inversion(w)])
    return QuiverRep.build([QObject("S", 1, 0, pair=w.pair)], [QMorphism("f", KIND_MAP, "S", "S", zigzag=f)])


def _suspension_endos(w: SuspensionWitness) -> List[Zigzag]:
    circle = identity_zigzag(interval_pair())
    collapse = smash_zigzags(forward(constant_map(w.base, w.base)), circle)
    return [identity_zigzag(w.pair), inversion(w), collapse, zero_zigzag(w.pair, w.pair)]


def _fits(pair: SPair, max_simplices: int) -> bool:
    return len(suspension(pair).total) <= max_simplices


def build_corpus(seed: int, max_simplices: int = 150, *, sizes: CorpusSizes = CorpusSizes()) -> Corpus:
    """Seeded randomized corpus; identical seeds give identical corpora."""
    rng = random.Random(seed)
    corpus = Corpus(seed)

    while len(corpus.pairs) < sizes.suspension_pairs:
        pair = random_pair(rng)
        if _fits(pair, max_simplices):
            corpus.pairs.append(pair)
    for pair in corpus.pairs:
        w = SuspensionWitness.of(pair)
        endos = _suspension_endos(w)
        corpus.endo_cases.append((w, rng.choice(endos), rng.choice(endos)))

    corpus.matrices = [random_int_matrix(rng, rng.randint(1, 4), 3) for _ in range(sizes.matrices)]
    while len(corpus.triples) < sizes.triples:
        try:
            corpus.triples.append(random_triple(rng))
        except ComplexError:
            continue
    corpus.single_object = [random_single_object(rng) for _ in range(sizes.single_object)]
    corpus.mixed = [random_mixed_quiver(rng) for _ in range(sizes.mixed_quivers)]

    for k in range(sizes.map_families):
        w = SuspensionWitness.of(corpus.pairs[k % len(corpus.pairs)])
        endos = _suspension_endos(w)
        maps = [rng.choice(endos) for _ in range(rng.randint(0, 2))]
        degree = rng.randint(0, w.pair.dimension)
        corpus.families.append((w.pair, maps, degree))

    circle = suspension(points_pair(1))
    for k in range(sizes.commutators):
        if k % 3 == 0:
            w = SuspensionWitness.of(points_pair(1))
            corpus.commutators.append((circle, 1, [rng.choice([identity_zigzag(w.pair), inversion(w)])]))
        else:
            d = 1 + k % 4
            w, f, _ = realize_matrix_on_wedge(random_int_matrix(rng, d, 1), d)
            corpus.commutators.append((w.pair, 1, [f]))

    kinds = ("regular", "zero", "object")
    corpus.presentations = [
        (random_mixed_quiver(rng), kinds[k % len(kinds)]) for k in range(sizes.presentations)
    ]
    corpus.presentations += [
        (random_geometric_quiver(rng), kinds[k % len(kinds)]) for k in range(sizes.geometric_presentations)
    ]
    logger.debug("Built corpus for seed %s", seed)
    return corpus


def extend_from_manifest(corpus: Corpus, manifest: Path) -> Corpus:
    """Add file-based pairs, triples and quivers listed in *manifest*."""
    doc, paths = load_manifest(manifest)
    for entry in doc.entries:
        path = paths[entry.name]
        if entry.kind == "pair":
            pair = load_pair(path)
            corpus.pairs.append(pair)
            w = SuspensionWitness.of(pair)
            corpus.endo_cases.append((w, identity_zigzag(w.pair), inversion(w)))
        elif entry.kind == "triple":
            corpus.triples.append(load_triple(path))
        elif entry.kind == "quiver":
            rep = load_quiver(path)
            corpus.mixed.append(rep)
            corpus.presentations.append((rep, "regular"))
    return corpus


# -- checks ------------------------------------------------------------------------


def _run(name: str, cases: Iterable[object], check: Callable[[object], Optional[str]]) -> CheckResult:
    failures = []
    count = 0
    for index, case in enumerate(cases):
        count += 1
        try:
            problem = check(case)
        except FAILURES as exc:
            problem = f"{type(exc).__name__}: {exc}"
        if problem:
            failures.append(f"case {index}: {problem}")
    result = CheckResult(name, count, tuple(failures))
    logger.debug("%s: %s cases, %s failures", name, count, len(failures))
    return result


def _check_additivity(case) -> Optional[str]:
    w, f, g = case
    total = cogroup_sum(f, g, w)
    for n in range(w.pair.dimension + 1):
        if zz_induced(total, n) != zz_induced(f, n) + zz_induced(g, n):
            return f"sum not additive in degree {n}"
    return None


def _check_suspension(pair: SPair) -> Optional[str]:
    lifted = suspension(pair)
    for n in range(pair.dimension + 1):
        if relative_cohomology(lifted, n + 1).dim != relative_cohomology(pair, n).dim:
            return f"dimension shift fails in degree {n}"
        if not suspension_iso(pair, n).is_invertible():
            return f"suspension iso singular in degree {n}"
    return None


def _check_realization(alpha: IntMatrix) -> Optional[str]:
    w, f, phi = realize_matrix_on_wedge(alpha, alpha.rows)
    if phi @ alpha.to_rational() != zz_induced(f, 1) @ phi:
        return "realized map does not induce the matrix"
    return None


def _check_puppe(t: Triple) -> Optional[str]:
    for n in range(1, t.outer.dimension + 2):
        if not puppe_contract_holds(t, n):
            return f"connector disagrees with the connecting map in degree {n}"
    return None


def _brute_force_commutant(rep: QuiverRep):
    dim = rep.dims["q"]
    blocks = []
    for m in rep.morphisms:
        a = rep.rho[m.id]
        blocks.append(kron(RatMatrix.identity(dim), a.transpose()) - kron(a, RatMatrix.identity(dim)))
    if not blocks:
        return image_basis(RatMatrix.identity(dim * dim))
    return kernel_basis(vstack(blocks))


def _check_commutant(rep: QuiverRep) -> Optional[str]:
    c = commutant(rep)
    dim = rep.dims["q"]
    flat = RatMatrix.from_columns([list(family[0].entries) for family in c.basis], rows=dim * dim)
    if image_basis(flat) != _brute_force_commutant(rep):
        return "commutant differs from the flattened kernel"
    return None


def _check_clones(rep: QuiverRep) -> Optional[str]:
    chain = normalize(rep)
    expected = commutant(rep).dim
    for step in chain.steps:
        failed = [name for name, ok in verify(step) if not ok]
        if failed:
            return f"{step.step}: {failed[0]}"
        if commutant(step.reduced).dim != expected:
            return f"{step.step}: commutant dimension changed"
    return None


def _check_kernel_image(case) -> Optional[str]:
    target, maps, n = case
    presented = kernel_image_presentation(maps, n, target=target)
    if presented.image != presented.kernels:
        return "image differs from the intersection of kernels"
    return None


def _check_commutator(case) -> Optional[str]:
    p, n, endos = case
    cs = commutator_suspension(p, n, endos)
    failed = [name for name, ok in cs.checks if not ok]
    return failed[0] if failed else None


def _module_for(rep: QuiverRep, kind: str):
    c = commutant(rep)
    if kind == "zero":
        return zero_module(c)
    if kind == "object" and rep.objects:
        return module_from_object(c, rep.objects[-1].id)
    return regular_module(c)


def _check_presentation(case) -> Optional[str]:
    rep, kind = case
    m = _module_for(rep, kind)
    quotient = quotient_presentation(rep, m)
    if quotient.rank != m.dim or not all(ok for _, ok in quotient.checks):
        return "quotient witness is not a verified surjection"
    sub = sub_presentation(rep, m)
    if sub.rank != m.dim or not all(ok for _, ok in sub.checks):
        return "sub witness is not a verified injection"
    return None


def _checks(corpus: Corpus) -> List[CheckResult]:
    return [
        _run("cogroup_additivity", corpus.endo_cases, _check_additivity),
        _run("suspension_isomorphism", corpus.pairs, _check_suspension),
        _run("matrix_realization", corpus.matrices, _check_realization),
        _run("puppe_contract", corpus.triples, _check_puppe),
        _run("commutant_oracle", corpus.single_object, _check_commutant),
        _run("clone_equivalence", corpus.mixed, _check_clones),
        _run("kernel_image_exactness", corpus.families, _check_kernel_image),
        _run("commutator_identity", corpus.commutators, _check_commutator),
        _run("presentation_replay", corpus.presentations, _check_presentation),
    ]


def run_suite(
    corpus: Corpus,
    *,
    rebuild: Optional[Callable[[], Corpus]] = None,
    render: Optional[Callable[[Sequence[CheckResult]], str]] = None,
) -> List[CheckResult]:
    """
    Evaluate every invariant check on *corpus* in a fixed order.

    With *rebuild* and *render* the whole suite is replayed on a rebuilt
    corpus and the two rendered reports must agree byte for byte.
    """
    results = _checks(corpus)
    if rebuild is None or render is None:
        results.append(CheckResult("determinism", 0))
        return results
    replayed = rebuild()
    problems = []
    if replayed.fingerprint() != corpus.fingerprint():
        problems.append("corpus differs between runs")
    if render(results) != render(_checks(replayed)):
        problems.append("report differs between runs")
    results.append(CheckResult("determinism", 1, tuple(problems)))
    return results


def summarize(results: Sequence[CheckResult]) -> Dict[str, int]:
    return {
        "checks": len(results),
        "cases": sum(r.cases for r in results),
        "failed": sum(1 for r in results if not r.passed),
    }
