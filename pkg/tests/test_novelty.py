import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mabfws.model import ContractViolation
from mabfws.novelty import NoveltyTable, OutgoingNoveltyTable
from oracles import tuple_novelty


def test_first_state_scores_one():
    t = NoveltyTable(2)
    assert t.evaluate_and_insert({"p"}, (0,)) == 1


def test_exact_repeat_is_beyond():
    t = NoveltyTable(2)
    t.evaluate_and_insert({"p", "q"}, (0,))
    assert t.evaluate_and_insert({"p", "q"}, (0,)) == t.beyond == 3


def test_pair_sequence_cap_two():
    t = NoveltyTable(2)
    assert [t.evaluate_and_insert(s) for s in ({"p"}, {"q"}, {"p", "q"})] == [1, 1, 2]


def test_pair_sequence_cap_one():
    t = NoveltyTable(1)
    assert [t.evaluate_and_insert(s) for s in ({"p"}, {"q"}, {"p", "q"})] == [1, 1, 2]
    assert t.beyond == 2


def test_partitions_are_isolated():
    t = NoveltyTable(2)
    t.evaluate_and_insert({"p"}, (1,))
    assert t.novelty({"p"}, (2,)) == 1
    assert t.novelty({"p"}, (1,)) == 3


def test_atom_outside_universe():
    t = NoveltyTable(1, universe=frozenset({1, 2}))
    with pytest.raises(ContractViolation):
        t.evaluate_and_insert({3})


def test_invalid_level():
    with pytest.raises(ValueError):
        NoveltyTable(3)


# ---------------------------------------------------------------- outgoing


def test_first_transmission_is_one():
    t = OutgoingNoveltyTable(1, range(5))
    assert t.probe(frozenset({0, 1})) == 1


def test_sent_repeat_probes_to_sentinel():
    t = OutgoingNoveltyTable(2, range(5))
    s = frozenset({0, 1})
    t.probe(s)
    t.commit(s)
    assert t.probe(s) == 6


def test_withheld_projection_leaves_no_trace():
    t = OutgoingNoveltyTable(1, range(5))
    s = frozenset({0, 1})
    assert t.probe(s) == 1
    t.discard(s)
    assert t.probe(s) == 1


def test_commit_without_probe():
    t = OutgoingNoveltyTable(1, range(5))
    with pytest.raises(ContractViolation):
        t.commit(frozenset({0}))


def test_private_atom_rejected():
    t = OutgoingNoveltyTable(1, {0, 1})
    with pytest.raises(ContractViolation):
        t.probe(frozenset({7}))


def test_sent_union_without_cover_is_not_sentinel():
    t = OutgoingNoveltyTable(1, range(5))
    for s in ({0}, {1}):
        t.probe(frozenset(s))
        t.commit(frozenset(s))
    assert t.probe(frozenset({0, 1})) == 2  # cap + 1: no single sent state covers it


def replay(stream, cap, n_public):
    table = OutgoingNoveltyTable(cap, range(n_public))
    out = []
    for projection, h in stream:
        w = table.probe(projection, h)
        sent = w <= cap
        if sent:
            table.commit(projection, h)
        else:
            table.discard(projection, h)
        out.append((w, sent))
    return out


def random_stream(rng, n_public, length, partitions):
    return [
        (frozenset(f for f in range(n_public) if rng.random() < 0.35), (rng.randrange(partitions),))
        for _ in range(length)
    ]


def brute_force(stream, cap, n_public):
    committed: dict = {}
    out = []
    for projection, h in stream:
        part = committed.setdefault(h, [])
        w = tuple_novelty(projection, part, cap, n_public)
        if w <= cap:
            part.append(projection)
        out.append((w, w <= cap))
    return out


@pytest.mark.parametrize("cap", [1, 2])
def test_thousand_random_streams_match_brute_force(cap):
    rng = random.Random(7 + cap)
    for _ in range(1000):
        n_public = rng.randint(1, 10)
        stream = random_stream(rng, n_public, rng.randint(1, 12), rng.randint(1, 3))
        assert replay(stream, cap, n_public) == brute_force(stream, cap, n_public)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.frozensets(st.integers(0, 5), max_size=6), max_size=10), st.sampled_from([1, 2]))
def test_sent_projections_each_bring_a_new_tuple(stream, cap):
    decisions = replay([(p, ()) for p in stream], cap, 6)
    sent = [p for p, (_, ok) in zip(stream, decisions) if ok]
    for k, p in enumerate(sent):
        assert tuple_novelty(p, sent[:k], cap, 6) <= cap


@settings(max_examples=100, deadline=None)
@given(st.lists(st.frozensets(st.integers(0, 5), max_size=6), max_size=10))
def test_sent_set_is_subset_of_secure_sent_set(stream):
    decisions = replay([(p, ()) for p in stream], 2, 6)
    seen = set()
    for p, (w, ok) in zip(stream, decisions):
        if ok:
            assert p not in seen
        if p in seen:
            assert w == 7
        if ok:
            seen.add(p)
