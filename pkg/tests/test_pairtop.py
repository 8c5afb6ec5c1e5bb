import pytest

from src.noriq.exactlin import RatMatrix
from src.noriq.pairtop import (
    ComplexError,
    OrderedComplex,
    PairMap,
    SPair,
    Triple,
    cohomology_dims,
    compose,
    cone,
    connecting_map,
    fold,
    glue_pushout,
    homotopy_pushout,
    identity_map,
    induced_map,
    interval_pair,
    is_cohomology_equivalence,
    long_exact_triple,
    mapping_cylinder,
    point_pair,
    points_pair,
    relative_cohomology,
    render_label,
    smash,
    smash_triple,
    smash_triple_excision,
    suspension,
    suspension_iso,
    suspension_triple,
    wedge,
)


def _circle() -> SPair:
    return SPair.build(("a", "b", "c"), [("a", "b"), ("b", "c"), ("a", "c")], [("a",)])


def test_build_closes_under_faces_and_orders_vertices():
    complex_ = OrderedComplex.build(("a", "b", "c"), [("c", "a", "b")])
    assert ("a", "b", "c") in complex_.simplices
    assert ("a", "c") in complex_.simplices
    assert complex_.dimension == 2
    assert complex_.maximal == [("a", "b", "c")]


def test_invalid_complexes_raise():
    with pytest.raises(ComplexError):
        OrderedComplex.build(("a",), [("a", "z")])
    with pytest.raises(ComplexError):
        OrderedComplex(("a", "b"), frozenset({("b", "a"), ("a",), ("b",)}))
    with pytest.raises(ComplexError):
        SPair.build(("a", "b"), [("a", "b")], [])


def test_map_must_send_sub_into_sub():
    source = SPair.build(("a", "b"), [("a", "b")], [("a",)])
    target = SPair.build(("x", "y"), [("x", "y")], [("x",)])
    with pytest.raises(ComplexError):
        PairMap(source, target, (("a", "y"), ("b", "x")))
    assert PairMap(source, target, (("a", "x"), ("b", "y")))("b") == "y"


def test_render_label_nests_tuples():
    assert render_label(("a", ("b", 1))) == "(a,(b,1))"


@pytest.mark.parametrize(
    "pair, expected",
    [
        (interval_pair(), [0, 1, 0]),
        (points_pair(3), [3, 0]),
        (point_pair(), [0, 0]),
        (_circle(), [0, 1, 0]),
    ],
)
def test_cohomology_dims_of_standard_pairs(pair, expected):
    assert cohomology_dims(pair) == expected


def test_constructions_shift_cohomology():
    assert relative_cohomology(suspension(interval_pair()), 2).dim == 1
    assert cohomology_dims(cone(_circle())) == [0, 0, 0, 0]
    assert relative_cohomology(smash(_circle(), interval_pair()), 2).dim == 1
    w, inclusions = wedge([interval_pair(), _circle()])
    assert relative_cohomology(w, 1).dim == 2
    assert len(inclusions) == 2


def test_induced_maps_compose_contravariantly():
    f = fold(interval_pair())
    assert induced_map(f, 1).shape == (2, 1)
    assert induced_map(f, 1).rank() == 1
    ident = identity_map(_circle())
    assert induced_map(ident, 1) == RatMatrix.identity(1)
    assert induced_map(compose(ident, ident), 1) == RatMatrix.identity(1)


def test_connecting_map_of_filled_triangle():
    outer = OrderedComplex.build(("a", "b", "c"), [("a", "b", "c")])
    t = Triple.build(outer, [("a", "b"), ("b", "c"), ("a", "c")], [("a",)])
    delta = connecting_map(t, 2)
    assert delta.shape == (1, 1)
    assert delta.is_invertible()
    assert long_exact_triple(t).euler_characteristic == 0


@pytest.mark.parametrize("degree, pair", [(0, points_pair(2)), (1, interval_pair()), (1, _circle())])
def test_suspension_iso_is_invertible(degree, pair):
    iso = suspension_iso(pair, degree)
    dim = relative_cohomology(pair, degree).dim
    assert iso.shape == (dim, dim)
    assert iso.is_invertible()


def test_mapping_cylinder_retraction_is_equivalence():
    f = fold(interval_pair())
    cyl = mapping_cylinder(f)
    assert cyl.retraction.target == f.target
    assert is_cohomology_equivalence(cyl.retraction)
    assert compose(cyl.retraction, cyl.inclusion).mapping == f.mapping


def test_glue_pushout_requires_injective_legs():
    f = fold(interval_pair())
    with pytest.raises(ComplexError):
        glue_pushout(f, f)


def test_homotopy_pushout_keeps_equivalences():
    p = interval_pair()
    s = identity_map(p)
    f = identity_map(p)
    hp = homotopy_pushout(f, s)
    assert is_cohomology_equivalence(hp.s_tilde)
    assert hp.f_tilde.source == p
    assert hp.s_tilde.target == hp.pair


def test_smash_triple_outer_pair_and_excision():
    t = suspension_triple(points_pair(1))
    circle = interval_pair()
    smashed = smash_triple(t, circle)
    assert smashed.pair_xy == smash(t.pair_xy, circle)
    excision = smash_triple_excision(t, circle)
    assert excision.source == smash(t.pair_yz, circle)
    assert is_cohomology_equivalence(excision)
    assert cohomology_dims(smashed.pair_yz) == cohomology_dims(smash(t.pair_yz, circle))
