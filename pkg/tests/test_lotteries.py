import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrpref.errors import (MalformedLottery, NegativeConsumption, NonStochastic, NotInMStar,
                             ParamOutOfRange, RaggedHorizon, StageOutOfRange)
from corrpref.lotteries import (ConditionalForm, TemporalLottery, build_parametric, canonicalize,
                                corr, corr_perfect, deterministic, dump_json, early, from_dict,
                                gradual, iid, iid_scaled, leaf, load_json, node, stage_node,
                                to_conditional_form, to_matrix_pair)


def ex1():
    d = node(1, [(0.5, node(5, [(1.0, leaf(10))])), (0.5, node(5, [(1.0, leaf(0))]))])
    d2 = node(1, [(1.0, node(5, [(0.5, leaf(10)), (0.5, leaf(0))]))])
    return d, d2


def test_zero_probability_branches_are_dropped():
    d = node(0, [(1.0, leaf(1)), (0.0, leaf(2))])
    assert d.branches == ((1.0, leaf(1)),)


def test_identical_children_merge():
    d = node(0, [(0.25, leaf(1)), (0.75, leaf(1))])
    assert len(d.branches) == 1 and d.branches[0][0] == pytest.approx(1.0)


def test_branch_order_does_not_matter():
    a = node(0, [(0.3, leaf(1)), (0.7, leaf(2))])
    b = node(0, [(0.7, leaf(2)), (0.3, leaf(1))])
    assert a == b and hash(a) == hash(b)


@pytest.mark.parametrize("branches", [[(0.5, leaf(1)), (0.4, leaf(2))],
                                      [(1.2, leaf(1)), (-0.2, leaf(2))]])
def test_non_stochastic(branches):
    with pytest.raises(NonStochastic):
        node(0, branches)


def test_ragged_and_negative():
    with pytest.raises(RaggedHorizon):
        node(0, [(0.5, leaf(1)), (0.5, node(1, [(1.0, leaf(1))]))])
    with pytest.raises(NegativeConsumption):
        leaf(-1)
    with pytest.raises(NegativeConsumption):
        canonicalize(TemporalLottery(-2.0, ((1.0, leaf(1)),)))


def test_deterministic_stream():
    d = deterministic(1, 2, 3)
    assert d.depth == 2 and [n.c for n in d.nodes()] == [1, 2, 3]


trees = st.recursive(
    st.builds(lambda c: leaf(c), st.floats(0, 50)),
    lambda kids: st.lists(kids, min_size=1, max_size=3).flatmap(
        lambda ch: st.tuples(st.floats(0, 50), st.lists(st.floats(0.05, 1), min_size=len(ch),
                                                        max_size=len(ch)))
        .map(lambda t: (t[0], ch, t[1]))),
    max_leaves=8)


def _build(obj):
    if isinstance(obj, TemporalLottery):
        return obj
    c, ch, w = obj
    w = np.array(w) / np.sum(w)
    # equalise horizons by padding shallower children with deterministic chains
    kids = [_build(k) for k in ch]
    depth = max(k.depth for k in kids)
    padded = []
    for k in kids:
        while k.depth < depth:
            k = node(k.c, [(1.0, k)])
        padded.append(k)
    return node(c, list(zip(w.tolist(), padded)))


@given(trees)
def test_json_round_trip(obj):
    d = _build(obj)
    assert from_dict(json.loads(dump_json(d))) == d


def test_load_json_rejects_unknown_keys(tmp_path):
    f = tmp_path / "d.json"
    f.write_text('{"c": 1, "branches": []}')
    with pytest.raises(MalformedLottery):
        load_json(f)
    f.write_text("{not json")
    with pytest.raises(MalformedLottery):
        load_json(f)


def test_matrix_pair_example1():
    d, d2 = ex1()
    a, b = to_matrix_pair(d), to_matrix_pair(d2)
    assert a.M.tolist() == [[1, 0], [0, 1]] and a.mu.tolist() == [0.5, 0.5]
    assert b.M.tolist() == [[0.5, 0.5]] and b.mu.tolist() == [1.0]
    assert a.consumption_marginal() == b.consumption_marginal() == {5.0: 1.0}


def test_stage_bounds():
    d, _ = ex1()
    with pytest.raises(StageOutOfRange):
        stage_node(d, 1)
    three = node(0, [(1.0, node(1, [(0.5, deterministic(2, 3)), (0.5, deterministic(4, 5))]))])
    assert to_matrix_pair(three, 1).M.tolist() == [[1, 0], [0, 1]]
    with pytest.raises(StageOutOfRange):
        stage_node(node(0, [(0.5, deterministic(1, 2, 3)), (0.5, deterministic(2, 2, 3))]), 1)


def test_conditional_form_round_trip():
    cf = ConditionalForm({1.0: 0.4, 2.0: 0.6}, {1.0: {1.0: 0.7, 2.0: 0.3}, 2.0: {1.0: 0.2, 2.0: 0.8}})
    assert to_conditional_form(cf.to_lottery(3.0)).close_to(cf)


def test_not_in_mstar():
    d = node(0, [(0.5, node(1, [(1.0, leaf(1))])), (0.5, node(1, [(1.0, leaf(2))]))])
    with pytest.raises(NotInMStar):
        to_conditional_form(d)


def test_parametric_families():
    ell = {2.0: 0.5, 1.0: 0.5}
    assert corr(0.0, 1, 2, 1) == iid(ell, 1)
    assert corr(1.0, 1, 2, 1) == corr_perfect(ell, 1)
    assert iid_scaled(0.0, 1, 2, 1) == iid(ell, 1)
    assert gradual(1.0, 1, 3, 2, 1) == early(0.0, 1, 3, 2, 1)
    assert build_parametric("corr", eps=0.3, c0=1, x=2, y=1) == corr(0.3, 1, 2, 1)
    with pytest.raises(ParamOutOfRange):
        corr(1.5, 1, 2, 1)
    with pytest.raises(ParamOutOfRange):
        corr(0.5, 1, 1, 2)
    with pytest.raises(ParamOutOfRange):
        build_parametric("nope")
