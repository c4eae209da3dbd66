import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chorus.bell import HofClass, HofEvent, OffsetTable, apply_update, classify_hof, effective_l3


def ev(reest_cell=2, reest_beam=2, prepared=(0,), serving=1, target=2):
    return HofEvent(ue=0, serving=serving, target=target, access_beam=prepared[0],
                    prepared_beams=tuple(prepared), reest_cell=reest_cell, reest_beam=reest_beam,
                    step=10)


def test_classification_examples():
    assert classify_hof(ev(None, None)) is HofClass.COVERAGE_HOLE
    assert classify_hof(ev(2, 2)) is HofClass.WRONG_BEAM_PREPARED
    assert classify_hof(ev(1, 4)) is HofClass.EARLY_EXECUTION
    assert classify_hof(ev(7, 0)) is HofClass.WRONG_CELL_PREPARED
    # target re-established through a prepared beam
    assert classify_hof(ev(2, 0)) is HofClass.EARLY_EXECUTION


def test_classification_is_total():
    seen = set()
    for cell, beam in itertools.product([None, 0, 1, 2, 3], [0, 1, 2]):
        e = ev(cell, None if cell is None else beam, prepared=(0, 1), serving=1, target=2)
        cls = classify_hof(e)
        assert isinstance(cls, HofClass)
        seen.add(cls)
    assert seen == set(HofClass)


def test_half_specified_reestablishment_rejected():
    with pytest.raises(ValueError):
        ev(2, None)


def test_update_example():
    t = OffsetTable(3, 4)
    t.apply(ev(2, 2, prepared=(0,)), HofClass.WRONG_BEAM_PREPARED)
    assert t[2, 0] == -1.0 and t[2, 2] == 1.0
    assert np.count_nonzero(t.offsets) == 2


@pytest.mark.parametrize("cls", [HofClass.EARLY_EXECUTION, HofClass.COVERAGE_HOLE,
                                 HofClass.WRONG_CELL_PREPARED])
def test_other_classes_leave_table(cls):
    t = OffsetTable(3, 4)
    t.apply(ev(1, 2), cls)
    assert not t.offsets.any()


def test_offsets_saturate_at_clamp():
    t = OffsetTable(3, 4, delta=1.0, clamp=12.0)
    for _ in range(100):
        t.apply(ev(2, 2, prepared=(0,)), HofClass.WRONG_BEAM_PREPARED)
    assert t[2, 0] == -12.0 and t[2, 2] == 12.0


def test_only_access_beam_variant():
    t = OffsetTable(3, 4, penalize_all_prepared=False)
    t.apply(ev(2, 3, prepared=(0, 1)), HofClass.WRONG_BEAM_PREPARED)
    assert t[2].tolist() == [-1.0, 0.0, 0.0, 1.0]


@settings(max_examples=150)
@given(prepared=st.sets(st.integers(0, 7), min_size=1, max_size=4), reest=st.integers(0, 11),
       delta=st.floats(0.1, 4.0))
def test_total_changes_by_prepared_count(prepared, reest, delta):
    if reest in prepared:
        return
    prepared = tuple(sorted(prepared))
    t = OffsetTable(3, 12, delta=delta, clamp=1e9)
    before = t.total()
    new = apply_update(t, ev(2, reest, prepared=prepared), HofClass.WRONG_BEAM_PREPARED)
    assert new.total() - before == pytest.approx((1 - len(prepared)) * delta)
    assert t.total() == before          # apply_update leaves its input alone


def test_effective_l3():
    assert effective_l3(-85.0, 0.0) == -85.0
    assert effective_l3(-85.0, 3.0) == -82.0
    l3 = np.array([-80.0, -90.0, -85.0])
    assert np.argmax(effective_l3(l3, 4.0)) == np.argmax(l3)


def test_records_roundtrip():
    t = OffsetTable(2, 3)
    t.apply(ev(1, 1, prepared=(0,), serving=0, target=1), HofClass.WRONG_BEAM_PREPARED)
    recs = t.to_records()
    assert {"cell": 1, "beam": 1, "offset_db": -1.0} in recs
    u = OffsetTable(2, 3)
    u.load_records(recs)
    assert np.array_equal(u.offsets, t.offsets)
