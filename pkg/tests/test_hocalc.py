import pytest

from src.noriq.exactlin import IntMatrix, RatMatrix
from src.noriq.hocalc import (
    SuspensionWitness,
    ZigzagError,
    backward,
    cogroup_sum,
    forward,
    homology_lattice,
    identity_zigzag,
    int_combination,
    inversion,
    kunneth_iso,
    negate,
    ore_square,
    puppe_connector,
    puppe_contract_holds,
    pushforward_on_lattice,
    realize_matrix_on_wedge,
    zero_zigzag,
    zz_compose,
    zz_induced,
)
from src.noriq.pairtop import (
    OrderedComplex,
    SPair,
    Triple,
    fold,
    identity_map,
    induced_map,
    interval_pair,
    points_pair,
    suspension_iso,
)


@pytest.fixture
def witness():
    return SuspensionWitness.of(points_pair(1))


def _filled_triangle_triple() -> Triple:
    outer = OrderedComplex.build(("a", "b", "c"), [("a", "b", "c")])
    return Triple.build(outer, [("a", "b"), ("b", "c"), ("a", "c")], [("a",)])


def test_backward_arrow_must_be_equivalence():
    with pytest.raises(ZigzagError):
        backward(fold(interval_pair()))


def test_compose_checks_endpoints():
    f = forward(fold(interval_pair()))
    with pytest.raises(ZigzagError):
        zz_compose(f, f)
    assert zz_induced(f, 1) == induced_map(fold(interval_pair()), 1)


def test_witness_must_match_suspension():
    with pytest.raises(ZigzagError):
        SuspensionWitness(interval_pair(), points_pair(1))


def test_cogroup_operations_act_on_cohomology(witness):
    ident = identity_zigzag(witness.pair)
    assert zz_induced(ident, 1) == RatMatrix.identity(1)
    assert zz_induced(cogroup_sum(ident, ident, witness), 1) == RatMatrix.from_rows([[2]])
    assert zz_induced(negate(ident, witness), 1) == RatMatrix.from_rows([[-1]])
    assert zz_induced(int_combination([(3, ident), (-1, ident)], witness), 1) == RatMatrix.from_rows([[2]])


def test_empty_combination_is_zero(witness):
    zero = int_combination([], witness, target=witness.pair)
    assert zz_induced(zero, 1).is_zero()
    with pytest.raises(ZigzagError):
        int_combination([], witness)


def test_combination_terms_must_share_the_target(witness):
    ident = identity_zigzag(witness.pair)
    elsewhere = zero_zigzag(witness.pair, interval_pair())
    with pytest.raises(ZigzagError, match="Term 1"):
        int_combination([(1, ident), (2, elsewhere)], witness)
    with pytest.raises(ZigzagError, match="Term 0"):
        int_combination([(1, ident)], witness, target=interval_pair())


def test_kunneth_iso_of_two_circles():
    iso = kunneth_iso(interval_pair(), interval_pair(), 2)
    assert iso.shape == (1, 1)
    assert iso.is_invertible()


def test_puppe_connector_matches_connecting_map():
    t = _filled_triangle_triple()
    roof = puppe_connector(t)
    assert roof.start == t.pair_xy
    assert len(roof) == 2
    assert puppe_contract_holds(t, 2)


def test_homology_lattice_and_pushforward(witness):
    lattice = homology_lattice(witness.pair, 1)
    assert lattice.rank == 1
    assert pushforward_on_lattice(inversion(witness), lattice) == IntMatrix.from_rows([[-1]])
    assert pushforward_on_lattice(identity_zigzag(witness.pair), lattice) == IntMatrix.identity(1)


def test_realize_matrix_on_wedge_intertwines():
    alpha = IntMatrix.from_rows([[0, 1], [2, 0]])
    w, f, phi = realize_matrix_on_wedge(alpha, 2)
    assert w.base == points_pair(2)
    assert phi == suspension_iso(points_pair(2), 0)
    assert phi @ alpha.to_rational() == zz_induced(f, 1) @ phi


def test_realize_matrix_rejects_wrong_shape():
    with pytest.raises(ZigzagError):
        realize_matrix_on_wedge(IntMatrix.identity(2), 3)


def test_ore_square_builds_roof():
    p = interval_pair()
    s = identity_map(p)
    roof = ore_square(identity_map(p), s)
    assert roof.start == s.target
    assert len(roof) == 2
    assert zz_induced(roof, 1).is_invertible()


def test_circle_lattice_of_triangle():
    circle = SPair.build(("a", "b", "c"), [("a", "b"), ("b", "c"), ("a", "c")], [("a",)])
    assert homology_lattice(circle, 1).rank == 1
    assert homology_lattice(circle, 0).rank == 0
