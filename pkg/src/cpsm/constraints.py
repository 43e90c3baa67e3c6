"""User constraints posted on the mining models, and the closed-pattern filter.

Pattern constraints (size, items, regular expressions) touch only the
pattern variables; cover constraints (frequency bounds, discriminative
ratio) touch only the cover booleans; gap/span constraints need the
embedding variables of the decomposed model.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .data import SequenceDB
from .kernel import (
    BoolLinear,
    FiniteVar,
    Inconsistent,
    Propagator,
    ReifEq,
    Space,
    Status,
)
from .oracle import is_subsequence

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


MODELS = ("global", "decomposed")


@dataclass
class MiningConfig:
    theta: int = 1
    max_support: Optional[int] = None
    min_size: Optional[int] = None
    max_size: Optional[int] = None
    max_gap: Optional[int] = None
    max_span: Optional[int] = None
    # ratio |cover on positive| / |cover on the rest| must reach this
    discriminative: Optional[float] = None
    positive: Optional[frozenset[int]] = None
    required: tuple[str, ...] = ()
    forbidden: tuple[str, ...] = ()
    regex: Optional[str] = None
    closed: bool = False
    model: str = "global"
    # None picks the per-model default: on for global, off for decomposed
    projected_frequency: Optional[bool] = None

    def __post_init__(self):
        self.required = tuple(self.required)
        self.forbidden = tuple(self.forbidden)
        if self.positive is not None:
            self.positive = frozenset(self.positive)

    @property
    def use_projected_frequency(self) -> bool:
        if self.projected_frequency is None:
            return self.model == "global"
        return self.projected_frequency

    def validate(self, db: Optional[SequenceDB] = None) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.theta < 1:
            raise ConfigError("minimum support must be at least 1")
        for name in ("max_gap", "max_span"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")
            if v is not None and self.model != "decomposed":
                raise ConfigError(f"{name} requires the decomposed model")
        for name in ("min_size", "max_size"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.discriminative is not None:
            if self.discriminative <= 0:
                raise ConfigError("discriminative ratio must be positive")
            if self.positive is None:
                raise ConfigError("discriminative constraint needs the positive transaction set")
        if db is not None:
            if self.positive is not None and not self.positive <= set(range(len(db))):
                raise ConfigError("positive set refers to unknown transactions")
            for tok in self.required + self.forbidden:
                if not db.has_symbol(tok):
                    raise ConfigError(f"symbol {tok!r} does not occur in the dataset")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["positive"] = sorted(self.positive) if self.positive is not None else None
        d["required"] = list(self.required)
        d["forbidden"] = list(self.forbidden)
        return d


def support_scope(config: MiningConfig, n: int) -> list[int]:
    """Transactions the support threshold is measured on."""
    if config.positive is not None:
        return sorted(config.positive)
    return list(range(n))


# -- regular expressions


_TOKEN = re.compile(r"\s+|[()|*+?]|'[^']*'|\"[^\"]*\"|[^\s()|*+?]+")


def _tokenize(expr: str) -> list[tuple[str, str]]:
    out = []
    for m in _TOKEN.finditer(expr):
        tok = m.group()
        if tok.isspace():
            continue
        if len(tok) == 1 and tok in "()|*+?":
            out.append(("op", tok))
        elif tok == ".":
            out.append(("any", tok))
        elif tok[0] in "'\"":
            out.append(("sym", tok[1:-1]))
        else:
            out.append(("sym", tok))
    return out


class _NFA:
    def __init__(self):
        self.eps: list[list[int]] = []
        self.edges: list[list[tuple[object, int]]] = []

    def state(self) -> int:
        self.eps.append([])
        self.edges.append([])
        return len(self.eps) - 1


class _Parser:
    """Recursive descent over tokens, building Thompson fragments (start, end)."""

    def __init__(self, tokens, nfa: _NFA, db: SequenceDB):
        self.toks, self.i, self.nfa, self.db = tokens, 0, nfa, db

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def parse(self):
        frag = self.alternation()
        if self.peek() is not None:
            raise ConfigError(f"unexpected {self.peek()[1]!r} in regular expression")
        return frag

    def alternation(self):
        frags = [self.concatenation()]
        while self.peek() == ("op", "|"):
            self.i += 1
            frags.append(self.concatenation())
        if len(frags) == 1:
            return frags[0]
        s, e = self.nfa.state(), self.nfa.state()
        for a, b in frags:
            self.nfa.eps[s].append(a)
            self.nfa.eps[b].append(e)
        return s, e

    def concatenation(self):
        s = e = self.nfa.state()
        while self.peek() is not None and self.peek() not in (("op", "|"), ("op", ")")):
            a, b = self.repetition()
            self.nfa.eps[e].append(a)
            e = b
        return s, e

    def repetition(self):
        a, b = self.atom()
        while self.peek() in (("op", "*"), ("op", "+"), ("op", "?")):
            op = self.toks[self.i][1]
            self.i += 1
            s, e = self.nfa.state(), self.nfa.state()
            self.nfa.eps[s].append(a)
            self.nfa.eps[b].append(e)
            if op in "*?":
                self.nfa.eps[s].append(e)
            if op in "*+":
                self.nfa.eps[b].append(a)
            a, b = s, e
        return a, b

    def atom(self):
        tok = self.peek()
        if tok is None:
            raise ConfigError("regular expression ends unexpectedly")
        kind, text = tok
        self.i += 1
        if tok == ("op", "("):
            frag = self.alternation()
            if self.peek() != ("op", ")"):
                raise ConfigError("unbalanced parenthesis in regular expression")
            self.i += 1
            return frag
        if kind == "op":
            raise ConfigError(f"unexpected {text!r} in regular expression")
        s, e = self.nfa.state(), self.nfa.state()
        if kind == "any":
            label = "any"
        elif self.db.has_symbol(text):
            label = self.db.symbol(text)
        else:
            log.warning("regular expression token %r does not occur in the dataset", text)
            label = None
        if label is not None:
            self.nfa.edges[s].append((label, e))
        return s, e


@dataclass
class PatternDFA:
    """Complete DFA over symbol ids; ``dead`` is the rejecting sink."""

    delta: list[list[int]]
    start: int
    accepting: frozenset[int]
    dead: int

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def accepts(self, word: Sequence[int]) -> bool:
        q = self.start
        for a in word:
            q = self.delta[q][a]
        return q in self.accepting


def compile_regex(expr: str, db: SequenceDB) -> PatternDFA:
    nfa = _NFA()
    start, end = _Parser(_tokenize(expr), nfa, db).parse()
    n_sym = db.n_symbols

    def closure(states):
        stack, seen = list(states), set(states)
        while stack:
            q = stack.pop()
            for r in nfa.eps[q]:
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)

    init = closure([start])
    index = {init: 0}
    subsets = [init]
    delta: list[list[int]] = []
    while len(delta) < len(subsets):
        cur = subsets[len(delta)]
        row = []
        for a in range(n_sym):
            nxt = closure([r for q in cur for label, r in nfa.edges[q] if label == a or label == "any"])
            if nxt not in index:
                index[nxt] = len(subsets)
                subsets.append(nxt)
            row.append(index[nxt])
        delta.append(row)
    accepting = frozenset(i for i, sub in enumerate(subsets) if end in sub)
    dead = index.get(frozenset())
    if dead is None:
        dead = len(delta)
        delta.append([dead] * n_sym)
    return PatternDFA(delta, 0, accepting, dead)


class Regular(Propagator):
    """ε-stripped S accepted by the DFA.

    Works on the DFA extended with an accepting sink that is entered by ε
    from accepting states and loops on ε only, so padding can only follow
    an accepted prefix.  Each run filters the layered (position, state)
    graph forwards and backwards.
    """

    def __init__(self, S: Sequence[FiniteVar], dfa: PatternDFA, eps: int):
        self.S, self.eps = list(S), eps
        q = dfa.n_states
        self.sink = q
        trans = []
        for state in range(q):
            row = {a: dfa.delta[state][a] for a in range(eps) if dfa.delta[state][a] != dfa.dead}
            if state in dfa.accepting:
                row[eps] = q
            trans.append(row)
        trans.append({eps: q})
        self.trans = trans
        self.start = dfa.start
        self.final = set(dfa.accepting) | {q}

    def attach(self, space):
        for v in self.S:
            space.watch(v, self)

    def propagate(self, space):
        dom = space.dom
        trans = self.trans
        k = len(self.S)
        masks = [dom[v.id] for v in self.S]
        layers = [{self.start}]
        for j in range(k):
            m = masks[j]
            nxt = set()
            for q in layers[j]:
                for a, r in trans[q].items():
                    if (m >> a) & 1:
                        nxt.add(r)
            layers.append(nxt)
        alive = layers[k] & self.final
        if not alive:
            raise Inconsistent
        supported = [0] * k
        for j in range(k - 1, -1, -1):
            m = masks[j]
            keep = set()
            sup = 0
            for q in layers[j]:
                for a, r in trans[q].items():
                    if (m >> a) & 1 and r in alive:
                        keep.add(q)
                        sup |= 1 << a
            supported[j] = sup
            alive = keep
        for v, sup in zip(self.S, supported):
            v.restrict(sup)
        if all(dom[v.id] & (dom[v.id] - 1) == 0 for v in self.S):
            space.subsume(self)


# -- posting


def _post(space: Space, p: Propagator) -> None:
    if space.post(p) is Status.FAILED:
        raise Inconsistent


def _settle(space: Space) -> None:
    if space.propagate() is Status.FAILED:
        raise Inconsistent


def post_size_bounds(model, min_size: Optional[int], max_size: Optional[int]) -> None:
    """min_size <= number of non-ε entries <= max_size, counted on the ε booleans."""
    k = len(model.S)
    if min_size is not None and min_size > k:
        raise Inconsistent
    lo = k - max_size if max_size is not None else None
    hi = k - min_size if min_size is not None else None
    if lo is None and hi is None:
        return
    _post(model.space, BoolLinear([1] * k, model.B, lo=lo, hi=hi))


def post_item_constraint(model, required: Sequence[int], forbidden: Sequence[int]) -> None:
    space = model.space
    for t in forbidden:
        for v in model.S:
            v.remove(t)
    for t in required:
        lits = []
        for v in model.S:
            b = space.new_bool()
            _post(space, ReifEq(b, v, t))
            lits.append(b)
        _post(space, BoolLinear([1] * len(lits), lits, lo=1))
    _settle(space)


def post_regular(model, dfa: PatternDFA) -> None:
    _post(model.space, Regular(model.S, dfa, model.eps))


def post_frequency_bounds(model, theta: int, max_support: Optional[int]) -> None:
    C = [model.C[i] for i in model.scope]
    _post(model.space, BoolLinear([1] * len(C), C, lo=theta, hi=max_support))


def post_discriminative(model, positive: Sequence[int], negative: Sequence[int], ratio) -> None:
    """sum(C[positive]) >= ratio * sum(C[negative]), cross-multiplied."""
    r = Fraction(str(ratio))
    coeffs = [r.denominator] * len(positive) + [-r.numerator] * len(negative)
    bools = [model.C[i] for i in positive] + [model.C[i] for i in negative]
    _post(model.space, BoolLinear(coeffs, bools, lo=0))


class DiffExceptNomatch(Propagator):
    """(x == nomatch_x) or (y == nomatch_y) or (y - x <= bound)."""

    def __init__(self, x: FiniteVar, y: FiniteVar, nomatch_x: int, nomatch_y: int, bound: int):
        self.x, self.y = x, y
        self.nx, self.ny, self.bound = nomatch_x, nomatch_y, bound

    def attach(self, space):
        space.watch(self.x, self)
        space.watch(self.y, self)

    def propagate(self, space):
        x, y, nx, ny, c = self.x, self.y, self.nx, self.ny, self.bound
        xm, ym = x.mask, y.mask
        if xm == 1 << nx or ym == 1 << ny:
            space.subsume(self)
            return
        if not (xm >> nx) & 1:
            # x matched: y's positions are capped
            limit = x.max() + c
            if limit < ny - 1:
                keep = ((1 << (max(limit, -1) + 1)) - 1) | (1 << ny)
                y.restrict(keep)
        if not (ym >> ny) & 1:
            # y matched: x's positions must be close enough behind
            floor = y.min() - c
            if floor > 0:
                x.restrict(~((1 << floor) - 1) | (1 << nx))
        xm, ym = x.mask, y.mask
        if not (xm >> nx) & 1 and not (ym >> ny) & 1 and y.max() - x.min() <= c:
            space.subsume(self)


def post_max_gap(model, gap: int) -> None:
    """Consecutive matched positions differ by at most gap + 1."""
    for i, E in enumerate(model.E):
        nm = model.nomatch[i]
        for j in range(1, len(E)):
            _post(model.space, DiffExceptNomatch(E[j - 1], E[j], nm, nm, gap + 1))


def post_max_span(model, span: int) -> None:
    """Matched positions lie within span of the first one (first to last inclusive)."""
    for i, E in enumerate(model.E):
        nm = model.nomatch[i]
        if span == 0:
            # even a single matched position spans 1
            E[0].assign(nm)
            continue
        for j in range(1, len(E)):
            _post(model.space, DiffExceptNomatch(E[0], E[j], nm, nm, span - 1))
    _settle(model.space)


def post_pattern_constraints(model, config: MiningConfig) -> None:
    db = model.db
    post_size_bounds(model, config.min_size, config.max_size)
    post_item_constraint(
        model,
        [db.symbol(t) for t in config.required],
        [db.symbol(t) for t in config.forbidden],
    )
    if config.regex is not None:
        post_regular(model, compile_regex(config.regex, db))


def post_cover_constraints(model, config: MiningConfig) -> None:
    post_frequency_bounds(model, config.theta, config.max_support)
    if config.discriminative is not None:
        positive = sorted(config.positive)
        negative = [i for i in range(len(model.db)) if i not in config.positive]
        post_discriminative(model, positive, negative, config.discriminative)


# -- preferences over the solution set


def closed_filter(solutions, maximal: bool = False):
    """Drop every pattern with a strict super-pattern of equal cover in ``solutions``.

    With ``maximal=True`` any strict super-pattern in ``solutions`` dominates.
    ``solutions`` is a sequence of (pattern, cover) pairs; order is kept.
    """
    solutions = list(solutions)
    groups = defaultdict(list)
    for p, cov in solutions:
        groups[None if maximal else frozenset(cov)].append(p)
    return [
        (p, cov)
        for p, cov in solutions
        if not any(
            len(q) > len(p) and is_subsequence(p, q)
            for q in groups[None if maximal else frozenset(cov)]
        )
    ]


def dominator(pattern, cover, solutions):
    """The first pattern in ``solutions`` that makes ``pattern`` non-closed, or None."""
    for q, d in solutions:
        if len(q) > len(pattern) and frozenset(d) == frozenset(cover) and is_subsequence(pattern, q):
            return q
    return None


__all__ = [
    "ConfigError",
    "MiningConfig",
    "PatternDFA",
    "Regular",
    "DiffExceptNomatch",
    "closed_filter",
    "compile_regex",
    "dominator",
    "post_cover_constraints",
    "post_discriminative",
    "post_frequency_bounds",
    "post_item_constraint",
    "post_max_gap",
    "post_max_span",
    "post_pattern_constraints",
    "post_regular",
    "post_size_bounds",
    "support_scope",
]
