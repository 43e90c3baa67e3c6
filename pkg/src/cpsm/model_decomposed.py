"""Mining model with explicit embedding variables.

For every transaction T_i, E_i[j] is the 1-based position of S_j in T_i
or the no-match value |T_i| + 1.  Whether T_i includes S is settled after
S is fixed, by an isolated first-solution search over (C_i, E_i).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import constraints as cons
from .constraints import MiningConfig
from .data import SequenceDB
from .kernel import (
    EQ,
    BoolVar,
    Brancher,
    Choice,
    FiniteVar,
    Implies,
    Inconsistent,
    Propagator,
    Space,
    bits,
)
from .model_global import InputOrderBrancher, Model, _base_model, _post_user_constraints


def position_masks(t: Sequence[int], n_symbols: int) -> list[int]:
    """masks[v] has bit x set when t[x-1] == v (1-based positions)."""
    masks = [0] * n_symbols
    for x, v in enumerate(t, 1):
        masks[v] |= 1 << x
    return masks


class PositionMatch(Propagator):
    """E = x -> S = t[x] for every position x; the no-match value is unconstrained.

    The per-position implications are grouped by symbol, so one symbol
    leaving dom(S) removes all of its positions from dom(E) at once.
    """

    def __init__(self, s: FiniteVar, e: FiniteVar, t: Sequence[int], eps: int):
        self.s, self.e, self.t, self.eps = s, e, tuple(t), eps
        self.nomatch = len(t) + 1
        self.pos = position_masks(t, eps)

    def attach(self, space):
        space.watch(self.s, self)
        space.watch(self.e, self, fix_only=True)

    def propagate(self, space):
        dom = space.dom
        allowed = 1 << self.nomatch
        pos = self.pos
        for v in bits(dom[self.s.id] & ~(1 << self.eps)):
            allowed |= pos[v]
        self.e.restrict(allowed)
        em = dom[self.e.id]
        if em & (em - 1) == 0:
            x = em.bit_length() - 1
            if x != self.nomatch:
                self.s.assign(self.t[x - 1])
            space.subsume(self)


class LtExceptNomatch(Propagator):
    """(x < y) or (y == nomatch).

    The smallest real position of x always bounds y's real positions from
    below; once y cannot be no-match this is plain x < y.
    """

    def __init__(self, x: FiniteVar, y: FiniteVar, nomatch: int):
        self.x, self.y, self.nomatch = x, y, nomatch

    def attach(self, space):
        space.watch(self.x, self)
        space.watch(self.y, self)

    def propagate(self, space):
        x, y, nm = self.x, self.y, self.nomatch
        nm_bit = 1 << nm
        real = x.mask & ~nm_bit
        if real:
            lb = (real & -real).bit_length() - 1
            y.restrict(~((1 << (lb + 1)) - 1) | nm_bit)
        ym = y.mask
        if ym == nm_bit:
            space.subsume(self)
            return
        if not ym & nm_bit:
            x.remove_above(y.max() - 1)
            y.remove_below(x.min() + 1)
            if x.max() < y.min():
                space.subsume(self)


class IsEmbedding(Propagator):
    """c <-> for all j: S_j = ε or E_j != nomatch.

    Pattern positions past the end of E (pattern longer than the
    transaction) can only hold ε when c is true.
    """

    def __init__(self, c: BoolVar, S: Sequence[FiniteVar], E: Sequence[FiniteVar], nomatch: int, eps: int):
        self.c, self.S, self.E = c, list(S), list(E)
        self.nomatch, self.eps = nomatch, eps

    def attach(self, space):
        space.watch(self.c, self, fix_only=True)
        for v in self.S:
            space.watch(v, self)
        for v in self.E:
            space.watch(v, self)

    def propagate(self, space):
        dom = space.dom
        eps_bit, nm_bit = 1 << self.eps, 1 << self.nomatch
        m = len(self.E)
        unknown = []
        for j, s in enumerate(self.S):
            sm = dom[s.id]
            if sm == eps_bit:
                continue
            if j < m:
                em = dom[self.E[j].id]
                if not em & nm_bit:
                    continue
                if not sm & eps_bit and em == nm_bit:
                    self.c.assign(0)
                    space.subsume(self)
                    return
            elif not sm & eps_bit:
                self.c.assign(0)
                space.subsume(self)
                return
            unknown.append(j)
        if not unknown:
            self.c.assign(1)
            space.subsume(self)
            return
        cm = dom[self.c.id]
        if cm == 2:
            for j in unknown:
                s = self.S[j]
                if j >= m or dom[self.E[j].id] == nm_bit:
                    s.assign(self.eps)
                elif not dom[s.id] & eps_bit:
                    self.E[j].remove(self.nomatch)
        elif cm == 1 and len(unknown) == 1:
            j = unknown[0]
            self.S[j].remove(self.eps)
            if j < m:
                self.E[j].assign(self.nomatch)


class Element(Propagator):
    """a == t[e], with a == none exactly when e is the no-match value."""

    def __init__(self, a: FiniteVar, e: FiniteVar, t: Sequence[int], none: int):
        self.a, self.e, self.t, self.none = a, e, tuple(t), none
        self.nomatch = len(t) + 1
        self.pos = position_masks(t, none)

    def attach(self, space):
        space.watch(self.a, self)
        space.watch(self.e, self)

    def propagate(self, space):
        em = self.e.mask
        image = 0
        for x in bits(em):
            image |= 1 << (self.none if x == self.nomatch else self.t[x - 1])
        self.a.restrict(image)
        am = self.a.mask
        allowed = 0
        for v in bits(am):
            allowed |= (1 << self.nomatch) if v == self.none else self.pos[v]
        self.e.restrict(allowed)
        if self.e.assigned:
            space.subsume(self)


class ProjectedFrequency(Propagator):
    """S_j = x -> |{i : C_i not false and x in dom(A_ij)}| >= theta."""

    def __init__(self, s: FiniteVar, pairs: Sequence[tuple[FiniteVar, BoolVar]], theta: int, eps: int):
        self.s, self.pairs, self.theta, self.eps = s, list(pairs), theta, eps

    def attach(self, space):
        space.watch(self.s, self)
        for a, c in self.pairs:
            space.watch(a, self)
            space.watch(c, self, fix_only=True)

    def propagate(self, space):
        dom = space.dom
        live = [dom[a.id] for a, c in self.pairs if dom[c.id] != 1]
        sm = dom[self.s.id]
        keep = sm & (1 << self.eps)
        for x in bits(sm & ~(1 << self.eps)):
            bit = 1 << x
            count = 0
            for am in live:
                if am & bit:
                    count += 1
                    if count >= self.theta:
                        keep |= bit
                        break
        self.s.restrict(keep)


class TrueFirst(Brancher):
    def __init__(self, b: BoolVar):
        self.b = b

    def choose(self, space):
        if self.b.assigned:
            return None
        return Choice([[(self.b, EQ, 1)], [(self.b, EQ, 0)]])


class SubSearchBrancher(Brancher):
    """Once S is fixed, decide every C_i by its own first-solution search.

    Each sub-search branches C'_i true-before-false, then E_i in order,
    smallest position first.  The results of all transactions are merged
    into a single alternative; a transaction with no consistent outcome
    fails the node.
    """

    def __init__(self, model: "DecomposedModel"):
        self.model = model

    def sub_search(self, space: Space, i: int):
        m = self.model
        E, cp = m.E[i], m.Cp[i]
        return space.solve_first(
            [TrueFirst(cp), InputOrderBrancher(E)],
            lambda sp: (cp.value, tuple(e.value for e in E)),
        )

    def choose(self, space):
        m = self.model
        if all(c.assigned for c in m.C) and all(e.assigned for E in m.E for e in E):
            return None
        actions = []
        for i in range(len(m.E)):
            result = self.sub_search(space, i)
            if result is None:
                return Choice([])
            found, witness = result
            actions.append((m.C[i], EQ, found))
            if m.Cp[i] is not m.C[i]:
                actions.append((m.Cp[i], EQ, found))
            actions.extend((e, EQ, x) for e, x in zip(m.E[i], witness))
        return Choice([actions])


@dataclass
class DecomposedModel(Model):
    E: list[list[FiniteVar]] = field(default_factory=list)
    nomatch: list[int] = field(default_factory=list)
    Cp: list[BoolVar] = field(default_factory=list)
    A: Optional[list[list[FiniteVar]]] = None
    half_reified: bool = False

    def witness(self, i: int) -> tuple[int, ...]:
        """E_i padded with no-match up to the pattern length."""
        values = tuple(e.value for e in self.E[i])
        return values + (self.nomatch[i],) * (self.k - len(values))


def needs_half_reification(config: MiningConfig) -> bool:
    """True when a constraint besides minimum support can falsify a C_i."""
    return config.max_support is not None or config.discriminative is not None


def post_embedding_vars(model: DecomposedModel, i: int) -> None:
    space, t = model.space, model.db.transactions[i]
    nm = len(t) + 1
    m = min(model.k, len(t))
    E = [space.new_var(range(1, nm + 1), name=f"E{i + 1},{j + 1}") for j in range(m)]
    model.E.append(E)
    model.nomatch.append(nm)


def post_position_match(model: DecomposedModel, i: int) -> None:
    space, t, E = model.space, model.db.transactions[i], model.E[i]
    for j, e in enumerate(E):
        space.post(PositionMatch(model.S[j], e, t, model.eps))
    for j in range(1, len(E)):
        space.post(LtExceptNomatch(E[j - 1], E[j], model.nomatch[i]))


def post_is_embedding(model: DecomposedModel, i: int, half: bool) -> None:
    space = model.space
    if half:
        cp = space.new_bool(name=f"C'{i + 1}")
        space.post(Implies(model.C[i], cp))
    else:
        cp = model.C[i]
    model.Cp.append(cp)
    space.post(IsEmbedding(cp, model.S, model.E[i], model.nomatch[i], model.eps))


def post_projected_frequency(model: DecomposedModel) -> None:
    space, db = model.space, model.db
    none = model.eps
    model.A = []
    for i, (t, E) in enumerate(zip(db.transactions, model.E)):
        row = []
        for j, e in enumerate(E):
            a = space.new_var(range(db.n_symbols + 1), name=f"A{i + 1},{j + 1}")
            space.post(Element(a, e, t, none))
            row.append(a)
        model.A.append(row)
    theta = model.config.theta
    for j, s in enumerate(model.S):
        pairs = [(model.A[i][j], model.C[i]) for i in model.scope if j < len(model.A[i])]
        space.post(ProjectedFrequency(s, pairs, theta, model.eps))


def build_decomposed_model(db: SequenceDB, config: MiningConfig) -> DecomposedModel:
    if config.model != "decomposed":
        config = replace(config, model="decomposed")
    base = _base_model(db, config)
    model = DecomposedModel(**{f: getattr(base, f) for f in ("space", "db", "config", "S", "B", "C", "scope")})
    space = model.space
    half = needs_half_reification(config)
    model.half_reified = half
    _post_user_constraints(model)
    for i in range(len(db)):
        post_embedding_vars(model, i)
        post_position_match(model, i)
        post_is_embedding(model, i, half)
    try:
        if config.max_gap is not None:
            cons.post_max_gap(model, config.max_gap)
        if config.max_span is not None:
            cons.post_max_span(model, config.max_span)
    except Inconsistent:
        space.failed = True
    if config.use_projected_frequency:
        post_projected_frequency(model)
    space.add_brancher(InputOrderBrancher(model.S))
    space.add_brancher(SubSearchBrancher(model))
    return model
