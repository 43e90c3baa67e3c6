import itertools
import logging
import random

import pytest
from hypothesis import given, settings, strategies as st

from cpsm import oracle
from cpsm.constraints import ConfigError, MiningConfig, closed_filter, compile_regex, dominator
from cpsm.data import SequenceDB, concat, parse_plain
from cpsm.mining import mine

from conftest import databases, random_db


def patterns(db, **kw):
    return {tuple(db.decode(p.pattern)) for p in mine(db, MiningConfig(**kw)).patterns}


def agrees(db, **kw):
    cfg = MiningConfig(**kw)
    return mine(db, cfg).pairs() == set(oracle.enumerate_frequent(db, cfg))


# -- size


def test_min_size(toy):
    assert patterns(toy, theta=2, min_size=2) == {("A", "C")}
    assert patterns(toy, theta=2, min_size=1) == patterns(toy, theta=2)


def test_contradictory_sizes(toy):
    assert patterns(toy, theta=1, min_size=2, max_size=1) == set()


# -- items


def test_require(toy):
    got = patterns(toy, theta=1, required=["C"])
    assert got and all("C" in p for p in got)
    assert agrees(toy, theta=1, required=["C"])


def test_forbid_everything(toy):
    assert patterns(toy, theta=1, forbidden=["A", "B", "C"]) == set()


def test_unknown_item_rejected(toy):
    with pytest.raises(ConfigError):
        mine(toy, MiningConfig(required=["Z"]))


# -- regular expressions


def test_regex_star():
    db = parse_plain("a b b\n")
    assert patterns(db, theta=1, regex="a b*") == {("a",), ("a", "b"), ("a", "b", "b")}


def test_regex_universal(toy):
    assert patterns(toy, theta=1, regex=".*") == patterns(toy, theta=1)


def test_regex_empty_language(toy, caplog):
    with caplog.at_level(logging.WARNING):
        assert patterns(toy, theta=1, regex="A Z") == set()
    assert "Z" in caplog.text


def test_regex_syntax_errors(toy):
    for bad in ["(A", "A )", "|*"]:
        with pytest.raises(ConfigError):
            mine(toy, MiningConfig(regex=bad))


def test_regex_quoted_tokens():
    db = parse_plain("x|y z\n")
    assert patterns(db, theta=1, regex="'x|y' .*") == {("x|y",), ("x|y", "z")}


def test_dfa_agrees_with_python_re():
    db = parse_plain("a b c\n")
    exprs = ["a b* c?", "(a|b)+", ".* c", "a (b c)* | c", "(a?)(b?)", "."]
    for expr in exprs:
        dfa = compile_regex(expr, db)
        rx = oracle.regex_to_python(expr, db)
        for n in range(5):
            for w in itertools.product(range(3), repeat=n):
                assert dfa.accepts(w) == oracle.regex_accepts(rx, w), (expr, w)


@settings(max_examples=60, deadline=None)
@given(databases(max_symbols=3), st.sampled_from(["s0 .*", "(s0|s1)+", ".* s2", "s1? s0 s2*"]))
def test_regular_agrees_with_dfa(db, expr):
    dfa = compile_regex(expr, db)
    for p in mine(db, MiningConfig(theta=1, regex=expr)).patterns:
        assert dfa.accepts(p.pattern)


# -- frequency


def test_max_support(toy):
    r = mine(toy, MiningConfig(theta=1, max_support=1))
    assert all(p.support == 1 for p in r.patterns)
    assert ("A", "B") in {tuple(toy.decode(p.pattern)) for p in r.patterns}


def test_theta_zero_rejected(toy):
    with pytest.raises(ConfigError):
        mine(toy, MiningConfig(theta=0))


def test_theta_n_only_everywhere(toy):
    for p in mine(toy, MiningConfig(theta=2)).patterns:
        assert all(oracle.is_subsequence(p.pattern, t) for t in toy.transactions)


# -- discriminative


def two_class(pos_rows, neg_rows):
    merged, pos, _ = concat(SequenceDB.from_tokens(pos_rows), SequenceDB.from_tokens(neg_rows))
    return merged, pos


def test_discriminative_absent_from_negatives():
    db, pos = two_class([["a", "b"]], [["c"]])
    got = patterns(db, theta=1, positive=pos, discriminative=100)
    assert ("a", "b") in got and ("c",) not in got


def test_discriminative_ratio_violated():
    db, pos = two_class([["x"]] * 4, [["x"]])
    assert patterns(db, theta=1, positive=pos, discriminative=8) == set()
    assert patterns(db, theta=1, positive=pos, discriminative=4) == {("x",)}


def test_discriminative_eight_of_ten():
    db, pos = two_class([["x"]] * 8 + [["y"]] * 2, [["x"]] + [["y"]] * 9)
    r = mine(db, MiningConfig(theta=1, positive=pos, discriminative=8))
    [x] = [p for p in r.patterns if db.decode(p.pattern) == ["x"]]
    assert (x.support, x.negative_support) == (8, 1)


def test_discriminative_needs_positive(toy):
    with pytest.raises(ConfigError):
        mine(toy, MiningConfig(discriminative=2))


# -- gap and span


def test_gap_example():
    db = parse_plain("a d d d b c\n")
    assert ("a", "b", "c") in patterns(db, theta=1, model="decomposed", max_gap=3)
    assert ("a", "c") not in patterns(db, theta=1, model="decomposed", max_gap=3)


def test_gap_needs_decomposed(toy):
    with pytest.raises(ConfigError):
        mine(toy, MiningConfig(max_gap=1, model="global"))


def test_span_at_length_is_free(toy):
    full = toy.max_len()
    assert patterns(toy, theta=1, model="decomposed", max_span=full) == patterns(toy, theta=1)


def test_span_zero_admits_nothing(toy):
    assert patterns(toy, theta=1, model="decomposed", max_span=0) == set()
    assert patterns(toy, theta=1, model="decomposed", max_span=1) == {("A",), ("B",), ("C",)}


# -- closed


def test_closed_toy(toy):
    freq = oracle.enumerate_frequent(toy, MiningConfig(theta=2))
    closed = {tuple(toy.decode(p)) for p, _ in closed_filter(freq)}
    assert closed == {("B",), ("A", "C")}
    maximal = {tuple(toy.decode(p)) for p, _ in closed_filter(freq, maximal=True)}
    assert maximal == {("B",), ("A", "C")}
    assert patterns(toy, theta=2, closed=True) == closed


def test_closed_single():
    sols = [((0, 1), frozenset({0}))]
    assert closed_filter(sols) == sols


@settings(max_examples=60, deadline=None)
@given(databases(), st.integers(1, 2))
def test_closed_idempotent_with_dominators(db, theta):
    freq = oracle.enumerate_frequent(db, MiningConfig(theta=theta))
    once = closed_filter(freq)
    assert closed_filter(once) == once
    kept = {p for p, _ in once}
    for p, c in freq:
        if p not in kept:
            q = dominator(p, c, freq)
            assert q is not None and oracle.is_subsequence(p, q)


# -- generic properties


CONSTRAINTS = [
    dict(min_size=2),
    dict(max_size=2),
    dict(regex="s0 .*"),
    dict(max_support=2),
    dict(closed=True),
]


@settings(max_examples=60, deadline=None)
@given(databases(max_symbols=3), st.integers(1, 2), st.sampled_from(CONSTRAINTS))
def test_constraints_only_remove(db, theta, extra):
    base = mine(db, MiningConfig(theta=theta)).pairs()
    assert mine(db, MiningConfig(theta=theta, **extra)).pairs() <= base


@settings(max_examples=60, deadline=None)
@given(databases(), st.integers(1, 3))
def test_support_anti_monotone(db, theta):
    for p in mine(db, MiningConfig(theta=theta)).patterns:
        for cut in range(1, len(p.pattern)):
            assert len(oracle.cover(p.pattern[:cut], db)) >= p.support


def test_random_suites_match_oracle():
    rng = random.Random(2)
    for it in range(120):
        db = random_db(rng, max_symbols=4, max_n=8, max_len=6)
        toks = list(db.tokens)
        kw = dict(theta=rng.randint(1, 3), model=rng.choice(["global", "decomposed"]))
        kind = it % 6
        if kind == 0:
            kw.update(min_size=rng.choice([None, 1, 2, 3]), max_size=rng.choice([None, 1, 2, 3]))
        elif kind == 1:
            kw.update(required=rng.sample(toks, min(len(toks), rng.randint(0, 2))), forbidden=rng.sample(toks, 1))
        elif kind == 2:
            kw.update(regex=rng.choice(["s0 .*", "(s0|s1)+", ".* s2", "s1? s0 s2*"]))
        elif kind == 3:
            kw.update(max_support=rng.randint(1, len(db)))
        elif kind == 4 and len(db) > 1:
            pos = frozenset(rng.sample(range(len(db)), rng.randint(1, len(db) - 1)))
            kw.update(positive=pos, discriminative=rng.choice([0.5, 1, 2, 3]), theta=1)
        else:
            kw.update(closed=True)
        logging.disable(logging.WARNING)
        try:
            assert agrees(db, **kw), kw
        finally:
            logging.disable(logging.NOTSET)
