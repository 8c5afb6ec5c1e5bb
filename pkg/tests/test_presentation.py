from pathlib import Path

import pytest

from src.noriq.exactlin import IntMatrix, RatMatrix
from src.noriq.formats import load_quiver
from src.noriq.hocalc import (
    BACKWARD,
    FORWARD,
    Arrow,
    Zigzag,
    forward,
    identity_zigzag,
    realize_matrix_on_wedge,
    zz_induced,
)
from src.noriq.noriquiver import (
    KIND_MAP,
    ModuleOverCommutant,
    QMorphism,
    QObject,
    QuiverError,
    QuiverRep,
    commutant,
    module_from_object,
    regular_module,
    zero_module,
)
from src.noriq.pairtop import (
    INTERVAL_END,
    INTERVAL_START,
    PairMap,
    constant_map,
    identity_map,
    interval_pair,
    is_cohomology_equivalence,
    mapping_cylinder,
    points_pair,
)
from src.noriq.presentation import (
    PresentationError,
    SubWitness,
    commutator_matrices,
    commutator_suspension,
    dualize,
    kernel_image_presentation,
    left_roof,
    opposite_quiver,
    quotient_presentation,
    sub_presentation,
)

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def _flip() -> PairMap:
    circle = interval_pair()
    return PairMap.from_function(
        circle, circle, lambda t: INTERVAL_END if t == INTERVAL_START else INTERVAL_START
    )


def _nilpotent() -> QuiverRep:
    return QuiverRep.build(
        [QObject("A", 0, 0, dim=2)],
        [QMorphism("n", KIND_MAP, "A", "A", matrix=RatMatrix.from_rows([[0, 1], [0, 0]]))],
    )


def _abstract_arrow() -> QuiverRep:
    return QuiverRep.build(
        [QObject("A", 0, 0, dim=2), QObject("B", 0, 0, dim=1)],
        [QMorphism("f", KIND_MAP, "A", "B", matrix=RatMatrix.from_rows([[1, 0]]))],
    )


def _all_passed(checks):
    return all(ok for _, ok in checks)


def test_left_roof_of_forward_chain_keeps_identity_leg():
    z = forward(_flip())
    g, s = left_roof(z)
    assert g.mapping == _flip().mapping
    assert s.source == s.target == interval_pair()


def test_left_roof_pushes_forward_arrows_across_backward_ones():
    retraction = mapping_cylinder(identity_map(interval_pair())).retraction
    z = Zigzag(interval_pair(), (Arrow(retraction, BACKWARD), Arrow(retraction, FORWARD)))
    g, s = left_roof(z)
    assert is_cohomology_equivalence(s)
    roof = Zigzag(interval_pair(), (Arrow(g, FORWARD), Arrow(s, BACKWARD)))
    assert zz_induced(roof, 1) == zz_induced(z, 1)


def test_kernel_image_of_zero_map_is_everything():
    circle = interval_pair()
    presented = kernel_image_presentation([forward(constant_map(circle, circle))], 1)
    assert presented.kernels.dim == 1
    assert presented.image == presented.kernels
    assert _all_passed(presented.checks)


def test_kernel_image_of_identity_is_zero():
    presented = kernel_image_presentation([identity_zigzag(interval_pair())], 1)
    assert presented.kernels.dim == 0
    assert presented.image.dim == 0
    assert presented.f.start == interval_pair()


def test_kernel_image_needs_target_for_empty_family():
    with pytest.raises(PresentationError):
        kernel_image_presentation([], 1)
    presented = kernel_image_presentation([], 1, target=interval_pair())
    assert presented.image.dim == 1


@pytest.mark.parametrize("endo", [identity_zigzag(interval_pair()), forward(_flip())])
def test_commutator_suspension_of_scalar_endomorphisms(endo):
    cs = commutator_suspension(interval_pair(), 1, [endo])
    assert cs.plus.degree == 2
    assert cs.plus.dim == 1
    assert cs.commutator(0).is_zero()
    assert cs.kernel().dim == 1
    assert _all_passed(cs.checks)


def test_commutator_suspension_rejects_foreign_maps():
    with pytest.raises(PresentationError):
        commutator_suspension(interval_pair(), 1, [identity_zigzag(points_pair(1))])


def test_commutator_matrices_kernel_is_centralizer():
    shift = RatMatrix.from_rows([[0, 1], [0, 0]])
    cs = commutator_matrices(points_pair(2), 0, [shift])
    assert cs.plus.dim == 4
    assert cs.kernel().dim == 2


def test_commutator_suspension_of_realized_swap():
    swap = IntMatrix.from_rows([[0, 1], [1, 0]], cols=2)
    w, f, _ = realize_matrix_on_wedge(swap, 2)
    cs = commutator_suspension(w.pair, 1, [f])
    assert cs.plus.dim == 4
    assert cs.commutator(0).rank() == 2
    assert cs.kernel().dim == 2
    assert _all_passed(cs.checks)


def test_quotient_presentation_of_regular_module():
    rep = _nilpotent()
    c = commutant(rep)
    witness = quotient_presentation(rep, regular_module(c))
    assert witness.copies == 2
    assert witness.rank == 2
    assert not witness.geometric
    assert witness.source.degree == 2
    assert witness.embedding.shape == (witness.source.dim, c.dim)
    assert _all_passed(witness.checks)


def test_quotient_presentation_through_normalization():
    rep = _abstract_arrow()
    c = commutant(rep)
    witness = quotient_presentation(rep, module_from_object(c, "A"))
    assert witness.copies == 2
    assert witness.rank == 2
    assert witness.transport.shape == (c.dim, c.dim)


def test_quotient_presentation_of_zero_module():
    rep = _nilpotent()
    witness = quotient_presentation(rep, zero_module(commutant(rep)))
    assert witness.source is None
    assert witness.copies == 0


def test_quotient_presentation_builds_geometry_for_bare_pair():
    rep = QuiverRep.build([QObject("S", 1, 0, pair=interval_pair())], [])
    c = commutant(rep)
    witness = quotient_presentation(rep, regular_module(c))
    assert witness.geometric
    assert witness.reduction is not None
    assert witness.reduction.rank() == c.dim
    assert _all_passed(witness.checks)


def test_quotient_presentation_matrix_mode_for_geometric_object():
    rep = QuiverRep.build(
        [QObject("S", 1, 0, pair=interval_pair())],
        [QMorphism("flip", KIND_MAP, "S", "S", zigzag=forward(_flip()))],
    )
    witness = quotient_presentation(rep, regular_module(commutant(rep)), full_geometry=False)
    assert not witness.geometric
    assert witness.reduction is None
    assert witness.rank == 1


def test_full_geometry_requires_a_pair():
    rep = _nilpotent()
    with pytest.raises(PresentationError):
        quotient_presentation(rep, regular_module(commutant(rep)), full_geometry=True)


def test_invalid_module_is_rejected():
    rep = _nilpotent()
    with pytest.raises(QuiverError):
        quotient_presentation(rep, ModuleOverCommutant(1, (RatMatrix.identity(1),)))


def test_opposite_quiver_has_same_commutant_dimension():
    rep = _abstract_arrow()
    op = opposite_quiver(rep)
    assert op.morphism("f").source == "B"
    assert commutant(op).dim == commutant(rep).dim


def test_sub_presentation_is_injective():
    rep = _abstract_arrow()
    c = commutant(rep)
    m = module_from_object(c, "A")
    sub = sub_presentation(rep, m)
    assert isinstance(sub, SubWitness)
    assert sub.rank == m.dim
    assert not sub.dual_geometry_constructed
    assert sub.module == m
    assert _all_passed(sub.checks)


def test_dualize_round_trip():
    rep = _nilpotent()
    quotient = quotient_presentation(rep, regular_module(commutant(rep)))
    sub = dualize(quotient)
    assert sub.map == quotient.map.transpose()
    assert dualize(sub).map == quotient.map
    with pytest.raises(PresentationError):
        dualize(object())


def test_quotient_presentation_of_twisted_corpus_quiver_is_geometric():
    rep = load_quiver(CORPUS / "twist_quiver.json")
    c = commutant(rep)
    witness = quotient_presentation(rep, regular_module(c))
    assert witness.geometric
    assert witness.reduction is not None
    assert witness.rank == c.dim
    assert _all_passed(witness.checks)
