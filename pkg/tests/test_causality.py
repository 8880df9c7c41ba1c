import pytest
from hypothesis import given
from hypothesis import strategies as st

from crdtkit.causality import (
    Dot, DotContext, HybridTimestamp as TS, VersionVector as VV, dot_seen, hlc_local, hlc_receive,
    next_dot, ts_compare, vv_join, vv_leq,
)

vvs = st.dictionaries(st.sampled_from("ABCD"), st.integers(0, 6)).map(VV)
dots = st.builds(Dot, st.sampled_from("ABCD"), st.integers(1, 8))


def test_next_dot():
    assert next_dot(VV({"A": 2, "B": 1}), "A") == Dot("A", 3)
    assert next_dot(VV(), "B") == Dot("B", 1)
    assert next_dot(VV({"A": 2, "B": 1}), "C") == Dot("C", 1)


def test_vv_join_and_leq():
    assert vv_join(VV({"A": 2, "B": 1}), VV({"A": 1, "B": 3})) == VV({"A": 2, "B": 3})
    assert vv_join(VV(), VV({"C": 4})) == VV({"C": 4})
    assert vv_leq(VV({"A": 1}), VV({"A": 2, "B": 1}))
    assert not vv_leq(VV({"A": 2}), VV({"B": 2}))
    assert vv_leq(VV(), VV())


def test_vv_drops_zero_entries():
    assert VV({"A": 0, "B": 1}) == VV({"B": 1})
    assert hash(VV({"A": 0})) == hash(VV())
    with pytest.raises(ValueError):
        VV({"A": -1})


def test_dot_seen():
    assert dot_seen(VV({"A": 3}), Dot("A", 2))
    assert not dot_seen(VV({"A": 3}), Dot("A", 4))
    assert not dot_seen(VV(), Dot("B", 1))


@given(vvs, vvs, vvs)
def test_vv_join_is_a_semilattice(a, b, c):
    assert vv_join(a, b) == vv_join(b, a)
    assert vv_join(a, vv_join(b, c)) == vv_join(vv_join(a, b), c)
    assert vv_join(a, a) == a
    assert vv_leq(a, vv_join(a, b)) and vv_leq(b, vv_join(a, b))


def test_hlc_local():
    assert hlc_local(TS(10, 0, "A"), 12) == TS(12, 0, "A")
    assert hlc_local(TS(10, 3, "A"), 10) == TS(10, 4, "A")
    assert hlc_local(TS(10, 3, "A"), 7) == TS(10, 4, "A")


def test_hlc_receive():
    assert hlc_receive(TS(10, 2, "A"), TS(10, 5, "B"), 9) == TS(10, 6, "A")
    assert hlc_receive(TS(10, 2, "A"), TS(8, 9, "B"), 15) == TS(15, 0, "A")
    assert hlc_receive(TS(10, 2, "A"), TS(12, 0, "B"), 9) == TS(12, 1, "A")


@given(st.integers(0, 20), st.integers(0, 5), st.integers(0, 20), st.integers(0, 5), st.integers(0, 30))
def test_hlc_receive_dominates_both_inputs(p1, l1, p2, l2, now):
    local, msg = TS(p1, l1, "A"), TS(p2, l2, "B")
    out = hlc_receive(local, msg, now)
    assert ts_compare(out, local) > 0 and ts_compare(out, msg) > 0
    assert out.physical >= now


def test_ts_compare():
    assert ts_compare(TS(10, 0, "A"), TS(10, 0, "B")) == -1
    assert ts_compare(TS(9, 9, "B"), TS(10, 0, "A")) == -1
    assert ts_compare(TS(10, 1, "A"), TS(10, 0, "A")) == 1
    assert ts_compare(TS(1, 1, "A"), TS(1, 1, "A")) == 0


def test_dot_context_compacts_contiguous_cloud():
    ctx = DotContext(VV({"A": 1}), [Dot("A", 2), Dot("A", 4), Dot("B", 1)])
    assert ctx.vv == VV({"A": 2, "B": 1})
    assert ctx.cloud == frozenset([Dot("A", 4)])
    assert ctx.seen(Dot("A", 4)) and not ctx.seen(Dot("A", 3))
    assert ctx.add(Dot("A", 3)) == DotContext(VV({"A": 4, "B": 1}))


@given(st.lists(dots), st.lists(dots))
def test_dot_context_join_is_set_union(xs, ys):
    a, b = DotContext.of_dots(xs), DotContext.of_dots(ys)
    joined = a.join(b)
    assert set(joined.dots()) == set(a.dots()) | set(b.dots())
    assert a.leq(joined) and b.leq(joined)
    assert joined.leq(a) == (set(b.dots()) <= set(a.dots()))
