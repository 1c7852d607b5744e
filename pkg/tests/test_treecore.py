import itertools
import random

import pytest
from hypothesis import given, strategies as st

from offbranch.treecore import (
    EmptySequence,
    EpBranch,
    NodeSyntaxError,
    eventually_dominates,
    format_node,
    hair_binary,
    hair_omega,
    is_antichain,
    is_prefix,
    level,
    max_chain_len,
    minimal_elements,
    parse_node,
    pred,
    prefixes,
    rs,
)

import oracles

nodes = st.lists(st.integers(0, 5), max_size=6).map(tuple)
bin_nodes = st.lists(st.integers(0, 1), max_size=7).map(tuple)
SMALL = [s for n in range(5) for s in itertools.product(range(3), repeat=n)]


@pytest.mark.parametrize(
    "sigma, tau, expected",
    [((), (3, 1), True), ((0, 1), (0, 1), True), ((1,), (0, 1), False), ((0, 1), (0,), False)],
)
def test_is_prefix(sigma, tau, expected):
    assert is_prefix(sigma, tau) is expected


def test_prefix_order_is_partial_order_exhaustively():
    for a in SMALL:
        assert is_prefix(a, a)
    for a, b in itertools.product(SMALL, repeat=2):
        if is_prefix(a, b) and is_prefix(b, a):
            assert a == b
    chains = [(a, b) for a, b in itertools.product(SMALL, repeat=2) if is_prefix(a, b)]
    for a, b in chains:
        for c in SMALL:
            if is_prefix(b, c):
                assert is_prefix(a, c)


def test_level():
    assert level(()) == 0
    assert level((5, 0, 2)) == 3
    assert level((1, 1, 0)) == 3


def test_rs():
    assert rs((2, 5)) == (2, 6)
    assert rs((0,)) == (1,)
    with pytest.raises(EmptySequence):
        rs(())


@given(nodes.filter(bool), nodes)
def test_rs_incomparable_with_extensions(sigma, tau):
    ext = sigma + tau
    assert not is_prefix(rs(sigma), ext)
    assert not is_prefix(ext, rs(sigma))


def test_pred():
    assert pred((1, 0)) == (1,)
    assert pred((0,)) == ()
    assert pred(()) == ()


@given(bin_nodes, st.integers(0, 1))
def test_pred_inverts_successor(sigma, i):
    assert pred(sigma + (i,)) == sigma


def test_minimal_elements():
    assert minimal_elements({(0,), (0, 1), (1, 1)}) == {(0,), (1, 1)}
    assert minimal_elements(set()) == frozenset()
    anti = {(0, 0), (0, 1), (2,)}
    assert minimal_elements(anti) == anti


@given(st.sets(nodes, max_size=12))
def test_minimal_elements_is_covering_antichain(s):
    m = minimal_elements(s)
    assert is_antichain(m)
    assert all(any(is_prefix(a, b) for a in m) for b in s)


def test_is_antichain():
    assert is_antichain({(0,), (1,)})
    assert not is_antichain({(0,), (0, 1)})
    assert is_antichain(set())


def test_max_chain_len():
    assert max_chain_len({(0,), (1,), (2, 3)}) == 1
    assert max_chain_len({(0,), (0, 0), (0, 0, 0)}) == 3
    assert max_chain_len(set()) == 0


@given(st.sets(nodes, max_size=10))
def test_max_chain_len_matches_chain_enumeration(s):
    assert max_chain_len(s) == (oracles.longest_chain(s) if s else 0)


def test_hair_omega():
    assert hair_omega([(2,), (2, 0), (2, 0, 1)]) == {(3,), (2, 1), (2, 0, 2)}
    assert hair_omega([]) == frozenset()
    assert hair_omega([(7,)]) == {(8,)}
    # the root is skipped
    assert hair_omega([(), (4,)]) == {(5,)}


@given(nodes)
def test_hair_of_prefix_chain_is_antichain(g):
    h = hair_omega(prefixes(g))
    assert is_antichain(h)
    assert len(h) == len(g)


def test_hair_binary():
    assert hair_binary((0, 1, 1)) == {(1,), (0, 0), (0, 1, 0)}
    assert hair_binary(()) == frozenset()
    assert hair_binary((1,)) == {(0,)}


@given(bin_nodes)
def test_hair_binary_antichain(g):
    h = hair_binary(g)
    assert is_antichain(h)
    assert len(h) == len(g)


def test_node_literals():
    assert format_node(()) == "e"
    assert format_node((2, 0, 1)) == "2.0.1"
    assert parse_node("2.0.1") == (2, 0, 1)
    assert parse_node("e") == ()
    with pytest.raises(NodeSyntaxError):
        parse_node("2..1")


@given(nodes)
def test_literal_roundtrip(sigma):
    assert parse_node(format_node(sigma)) == sigma


def test_epbranch():
    b = EpBranch((3,), (1, 2))
    assert b.node_at(0) == ()
    assert b.node_at(5) == (3, 1, 2, 1, 2)
    assert b.contains((3, 1)) and not b.contains((3, 2))
    with pytest.raises(ValueError):
        EpBranch((1,), ())


def test_eventually_dominates_examples():
    three, five = EpBranch((), (3,)), EpBranch((), (5,))
    assert eventually_dominates(three, five)
    assert not eventually_dominates(five, five)
    assert eventually_dominates(EpBranch((9, 9), (1,)), EpBranch((), (2,)))
    assert not eventually_dominates(EpBranch((), (2,)), EpBranch((9, 9), (1,)))


def _direct(f, g):
    span = 10 * (len(f.stem) + len(g.stem) + len(f.period) * len(g.period))
    bad = [n for n in range(span) if g.value(n) <= f.value(n)]
    # finite iff no violation in the final stretch, which is past every stem
    return not bad or bad[-1] < span // 2


def test_eventually_dominates_against_direct_comparison():
    rng = random.Random(5)
    for _ in range(500):
        def branch():
            return EpBranch(
                tuple(rng.randrange(6) for _ in range(rng.randrange(4))),
                tuple(rng.randrange(6) for _ in range(rng.randint(1, 4))),
            )

        f, g = branch(), branch()
        assert eventually_dominates(f, g) == _direct(f, g)
