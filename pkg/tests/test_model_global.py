import random

from hypothesis import given, settings, strategies as st

from cpsm import oracle
from cpsm.constraints import MiningConfig
from cpsm.data import SequenceDB, parse_plain
from cpsm.kernel import EQ, Status
from cpsm.mining import mine
from cpsm.model_global import build_global_model, frequent_alternatives, suffix_masks

from conftest import databases


def fix_prefix(model, tokens):
    db = model.db
    acts = [(model.S[j], EQ, db.symbol(t)) for j, t in enumerate(tokens)]
    return model.space.apply(acts)


def fix_pattern(model, tokens):
    """Assign the whole of S: tokens then ε."""
    db = model.db
    ids = [db.symbol(t) for t in tokens] + [db.epsilon] * (model.k - len(tokens))
    return model.space.apply([(s, EQ, v) for s, v in zip(model.S, ids)])


def decoded(report):
    return {tuple(report.db.decode(p.pattern)) for p in report.patterns}


def test_toy_minsup_two(toy):
    r = mine(toy, MiningConfig(theta=2))
    assert decoded(r) == {("A",), ("B",), ("C",), ("A", "C")}


def test_toy_minsup_three(toy):
    assert mine(toy, MiningConfig(theta=3)).solution_count == 0


def test_toy_minsup_one(toy):
    r = mine(toy, MiningConfig(theta=1))
    assert r.solution_count == len(oracle.enumerate_frequent(toy, MiningConfig(theta=1))) == 14


def test_pattern_length_and_first_symbol(toy):
    m = build_global_model(toy, MiningConfig())
    assert m.k == 4
    assert toy.epsilon not in m.S[0].values()


def test_exists_embedding_toy_assignment(toy):
    m = build_global_model(toy, MiningConfig(projected_frequency=False))
    assert fix_pattern(m, ["A", "B"]) is Status.OK
    assert [c.state for c in m.C] == [True, False]


def test_reverse_pruning_when_covered(toy):
    m = build_global_model(toy, MiningConfig(projected_frequency=False))
    assert m.space.apply([(m.S[0], EQ, toy.symbol("A")), (m.C[0], EQ, 1)]) is Status.OK
    assert set(m.S[1].values()) == {toy.symbol("C"), toy.symbol("B"), toy.epsilon}


def test_projection_by_prefix():
    db = parse_plain("b a a e c b c b b\n")
    m = build_global_model(db, MiningConfig())
    assert fix_prefix(m, ["a", "c"]) is Status.OK
    assert {db.tokens[v] for v in m.projected_symbols(0)} == {"b", "c"}


def test_projection_by_empty_and_single_prefix(toy):
    m = build_global_model(toy, MiningConfig())
    assert {toy.tokens[v] for v in m.projected_symbols(0)} == {"A", "B", "C"}
    fix_prefix(m, ["C"])
    assert {toy.tokens[v] for v in m.projected_symbols(0)} == {"B"}


def test_local_frequency_alternatives(toy):
    m = build_global_model(toy, MiningConfig(theta=2))
    eps = toy.epsilon
    # the empty pattern is excluded, so ε is not offered at the root
    assert set(frequent_alternatives(m)) == {toy.symbol(t) for t in "ABC"}
    fix_prefix(m, ["A"])
    assert frequent_alternatives(m) == [toy.symbol("C"), eps]


@settings(max_examples=60, deadline=None)
@given(databases(), st.randoms(use_true_random=False))
def test_threshold_one_offers_every_projected_symbol(db, rnd):
    m = build_global_model(db, MiningConfig(theta=1))
    t = rnd.choice(db.transactions)
    prefix = [db.tokens[v] for v in t[: rnd.randint(0, min(len(t), m.k) - 1)]]
    assert fix_prefix(m, prefix) is Status.OK
    live = set()
    for i, c in enumerate(m.C):
        if not c.is_false:
            live |= m.projected_symbols(i)
    alts = frequent_alternatives(m)
    free = [v for v in m.S if not v.assigned]
    if not free:
        assert alts == []
        return
    dom = set(free[0].values())
    if db.epsilon in dom:
        assert alts[-1] == db.epsilon
        alts = alts[:-1]
    assert set(alts) == live & dom


def test_suffix_masks():
    assert suffix_masks([0, 2, 0]) == [0b101, 0b101, 0b001, 0]


@settings(max_examples=80, deadline=None)
@given(databases(), st.integers(1, 3))
def test_embedding_soundness_and_canonicity(db, theta):
    r = mine(db, MiningConfig(theta=theta))
    pats = [p.pattern for p in r.patterns]
    assert len(pats) == len(set(pats))
    for p in r.patterns:
        assert p.cover == {i for i, t in enumerate(db.transactions) if oracle.is_subsequence(p.pattern, t)}


@settings(max_examples=60, deadline=None)
@given(databases(), st.integers(1, 3))
def test_projected_frequency_keeps_solutions(db, theta):
    on = mine(db, MiningConfig(theta=theta, projected_frequency=True))
    off = mine(db, MiningConfig(theta=theta, projected_frequency=False))
    assert on.pairs() == off.pairs()
    assert on.nodes <= off.nodes


def cursor_trace_ok(db, config):
    m = build_global_model(db, config)
    history = []
    ok = [True]

    def hook(space, depth):
        now = [p.pos_e for p in m.embeddings]
        del history[depth:]
        if depth:
            parent = history[depth - 1]
            if any(a < b for a, b in zip(now, parent)):
                ok[0] = False
        history.append(now)

    m.space.search_all(node_hook=hook)
    return ok[0]


def test_cursor_monotone_random():
    rng = random.Random(3)
    for _ in range(40):
        sigma = rng.randint(1, 4)
        rows = [[f"s{rng.randrange(sigma)}" for _ in range(rng.randint(1, 7))] for _ in range(rng.randint(1, 8))]
        db = SequenceDB.from_tokens(rows)
        for pf in (True, False):
            assert cursor_trace_ok(db, MiningConfig(theta=rng.randint(1, 3), projected_frequency=pf))


def test_cursor_monotone_toy(toy):
    assert cursor_trace_ok(toy, MiningConfig(theta=1))


def test_output_order_follows_branching(toy):
    r = mine(toy, MiningConfig(theta=2))
    assert r.lines() == ["A C\t2", "A\t2", "C\t2", "B\t2"]
