import pytest

from src.noriq.exactlin import RatMatrix
from src.noriq.hocalc import forward
from src.noriq.noriquiver import KIND_MAP, KIND_TRIPLE, KIND_TWIST, QMorphism, QObject, QuiverRep, commutant
from src.noriq.pairtop import (
    INTERVAL_END,
    INTERVAL_START,
    PairMap,
    interval_pair,
    points_pair,
    smash,
    suspension_triple,
)
from src.noriq.rewrites import (
    RewriteError,
    clone_degree,
    clone_twist,
    normalize,
    reduce_to_single_object,
    verify,
)


def _degree_step() -> QuiverRep:
    return QuiverRep.build(
        [QObject("A", 0, 0, dim=1), QObject("B", 1, 0, dim=1)],
        [QMorphism("d", KIND_TRIPLE, "A", "B", matrix=RatMatrix.identity(1))],
    )


def _twist_step() -> QuiverRep:
    return QuiverRep.build(
        [QObject("A", 1, 1, dim=1), QObject("B", 0, 0, dim=1)],
        [QMorphism("c", KIND_TWIST, "A", "B", matrix=RatMatrix.from_rows([[2]]))],
    )


def _two_circles() -> QuiverRep:
    circle = interval_pair()
    flip = PairMap.from_function(
        circle, circle, lambda t: INTERVAL_END if t == INTERVAL_START else INTERVAL_START
    )
    return QuiverRep.build(
        [QObject("L", 1, 0, pair=circle), QObject("R", 1, 0, pair=circle)],
        [QMorphism("flip", KIND_MAP, "L", "R", zigzag=forward(flip))],
    )


def test_clone_twist_reaches_next_twist():
    rep = _twist_step()
    result = clone_twist(rep)
    assert result.reduced.twists == [1]
    assert "A" in result.reduced.object_ids
    assert len(result.reduced.objects) == 2
    assert all(ok for _, ok in verify(result))


def test_clone_degree_reaches_next_degree():
    rep = _degree_step()
    result = clone_degree(rep)
    assert result.reduced.degrees == [1]
    assert [c.bad for c in result.clones] == ["A"]
    assert all(ok for _, ok in verify(result))


def test_clone_degree_on_geometric_object():
    rep = QuiverRep.build(
        [QObject("P", 0, 0, pair=points_pair(1)), QObject("S", 1, 0, pair=interval_pair())],
        [],
    )
    result = clone_degree(rep)
    assert result.reduced.degrees == [1]
    assert commutant(result.reduced).dim == commutant(rep).dim == 2


def test_clone_degree_needs_single_twist():
    rep = QuiverRep.build([QObject("A", 0, 0, dim=1), QObject("B", 0, 1, dim=1)], [])
    with pytest.raises(RewriteError):
        clone_degree(rep)


def test_reduce_to_single_object_merges_geometric_objects():
    rep = _two_circles()
    result = reduce_to_single_object(rep)
    assert len(result.reduced.objects) == 1
    (merged,) = result.reduced.objects
    assert merged.is_geometric
    assert result.reduced.dims[merged.id] == 2
    assert all(square.commutes for square in result.squares)
    assert commutant(result.reduced).dim == commutant(rep).dim == 1


def test_reduce_rejects_mixed_degrees():
    with pytest.raises(RewriteError):
        reduce_to_single_object(_degree_step())


def test_single_object_is_left_alone():
    rep = QuiverRep.build([QObject("A", 0, 0, dim=2)], [])
    result = reduce_to_single_object(rep)
    assert result.is_identity
    assert normalize(rep).final is rep


@pytest.mark.parametrize("builder", [_degree_step, _twist_step, _two_circles])
def test_normalize_keeps_commutant_dimension(builder):
    rep = builder()
    chain = normalize(rep)
    final = chain.final
    assert len(final.objects) == 1
    assert len(final.twists) == 1
    assert len(final.degrees) == 1
    assert commutant(final).dim == commutant(rep).dim
    for step in chain.steps:
        assert all(ok for _, ok in verify(step))


def _geometric_twist() -> QuiverRep:
    p = points_pair(1)
    return QuiverRep.build(
        [QObject("P", 0, 0, pair=p), QObject("SP", 1, 1, pair=smash(p, interval_pair()))],
        [QMorphism("untwist", KIND_TWIST, "SP", "P")],
    )


def _geometric_twist_with_triple() -> QuiverRep:
    p = points_pair(1)
    t = suspension_triple(p)
    return QuiverRep.build(
        [
            QObject("A", 0, 0, pair=t.pair_yz),
            QObject("B", 1, 0, pair=t.pair_xy),
            QObject("C", 1, 1, pair=smash(t.pair_yz, interval_pair())),
        ],
        [
            QMorphism("delta", KIND_TRIPLE, "A", "B", triple=t),
            QMorphism("untwist", KIND_TWIST, "C", "A"),
        ],
    )


def test_clone_twist_keeps_geometric_morphisms_geometric():
    result = clone_twist(_geometric_twist())
    assert all(m.matrix is None and m.zigzag is not None for m in result.reduced.morphisms)
    assert all(ok for _, ok in verify(result))


def test_clone_twist_smashes_triples():
    rep = _geometric_twist_with_triple()
    result = clone_twist(rep)
    clones = [m for m in result.enlarged.morphisms if m.kind == KIND_TRIPLE and m.id != "delta"]
    assert len(clones) == 1
    assert clones[0].triple is not None and clones[0].zigzag is not None
    assert clones[0].matrix is None
    assert all(ok for _, ok in verify(result))


@pytest.mark.parametrize("builder", [_geometric_twist, _geometric_twist_with_triple])
def test_normalize_geometric_quiver_ends_with_zigzags(builder):
    rep = builder()
    final = normalize(rep).final
    assert len(final.objects) == 1
    assert final.objects[0].is_geometric
    assert all(m.matrix is None and m.zigzag is not None for m in final.morphisms)
    assert commutant(final).dim == commutant(rep).dim
