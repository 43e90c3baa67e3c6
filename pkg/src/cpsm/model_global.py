"""Mining model with one exists-embedding propagator per transaction.

Pattern array S (k entries over Σ ∪ {ε}, ε only as a suffix), one cover
boolean per transaction, and optionally a projected-symbol variable per
transaction feeding the local-frequency brancher.
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
    ReifEq,
    Space,
    bits,
)


@dataclass
class Model:
    space: Space
    db: SequenceDB
    config: MiningConfig
    S: list[FiniteVar]
    B: list[BoolVar]
    C: list[BoolVar]
    scope: list[int]
    X: Optional[list[FiniteVar]] = None
    embeddings: list = field(default_factory=list)

    @property
    def eps(self) -> int:
        return self.db.epsilon

    @property
    def k(self) -> int:
        return len(self.S)

    def pattern(self) -> tuple[int, ...]:
        eps = self.eps
        out = []
        for v in self.S:
            s = v.value
            if s == eps:
                break
            out.append(s)
        return tuple(out)

    def cover(self) -> frozenset[int]:
        dom = self.space.dom
        return frozenset(i for i, c in enumerate(self.C) if dom[c.id] == 2)

    def witness(self, i: int):
        return None

    def projected_symbols(self, i: int) -> frozenset[int]:
        """Symbols left in the projected suffix of transaction i."""
        return frozenset(v for v in self.X[i].values() if v != self.eps)


def pattern_length(db: SequenceDB, config: MiningConfig) -> int:
    k = db.max_len()
    if config.max_size is not None:
        k = min(k, config.max_size)
    return k


def suffix_masks(t: Sequence[int]) -> list[int]:
    """suffix[p] is the symbol set of t[p:] (0-based), suffix[len(t)] == 0."""
    out = [0] * (len(t) + 1)
    for p in range(len(t) - 1, -1, -1):
        out[p] = out[p + 1] | (1 << t[p])
    return out


def new_pattern_vars(space: Space, db: SequenceDB, k: int) -> tuple[list[FiniteVar], list[BoolVar]]:
    """S with ε-suffix structure, via B_j <-> S_j = ε and B_j -> B_{j+1}; S_1 != ε."""
    eps = db.epsilon
    values = range(db.n_symbols + 1)
    S = [space.new_var(values, name=f"S{j + 1}") for j in range(k)]
    B = [space.new_bool(name=f"B{j + 1}") for j in range(k)]
    for s, b in zip(S, B):
        space.post(ReifEq(b, s, eps))
    for j in range(k - 1):
        space.post(Implies(B[j], B[j + 1]))
    S[0].remove(eps)
    return S, B


class ExistsEmbedding(Propagator):
    """C <-> some embedding of S in t, with incremental prefix cursors.

    ``pos_s``/``pos_e`` are 0-based: S[:pos_s] is assigned and its
    leftmost embedding in t ends just before t[pos_e].  With ``x`` given,
    its domain is kept to the symbols of t[pos_e:] plus ε, which stays so
    an exhausted projection does not empty the domain.
    """

    def __init__(self, S: Sequence[FiniteVar], c: BoolVar, t: Sequence[int], eps: int,
                 x: Optional[FiniteVar] = None):
        self.S, self.c, self.t, self.eps, self.x = list(S), c, tuple(t), eps, x
        self.suffix = suffix_masks(self.t)
        self.pos_s = 0
        self.pos_e = 0

    def attach(self, space):
        n, k = len(self.t), len(self.S)
        # only S[pos_s] can move the cursor; later watches follow it
        space.watch(self.S[0], self, fix_only=True)
        if n < k:
            # S beyond the transaction matters as soon as ε leaves its domain
            space.watch(self.S[n], self)
        space.watch(self.c, self, fix_only=True)

    def _finish(self, space, pos_s, pos_e, covered):
        """Fix C and retire.

        The cursors are left alone: a retired propagator never reads them
        again before backtracking restores the entry state.  Retiring first
        keeps the C watch from queueing this propagator again.
        """
        space.subsume(self)
        cid = self.c.id
        space.set_dom(cid, space.dom[cid] & (2 if covered else 1))

    def _move(self, space, pos_s, pos_e):
        if pos_s != self.pos_s:
            space.save(self, "pos_s", pos_s)
        if pos_e != self.pos_e:
            space.save(self, "pos_e", pos_e)

    def propagate(self, space):
        dom = space.dom
        S, t, eps, suffix = self.S, self.t, self.eps, self.suffix
        n, k = len(t), len(S)
        limit = n if n < k else k
        pos_s, pos_e = self.pos_s, self.pos_e
        while pos_s < limit:
            m = dom[S[pos_s].id]
            if m & (m - 1):
                break
            v = m.bit_length() - 1
            if v == eps:
                # everything before matched, the rest is ε
                return self._finish(space, pos_s, pos_e, True)
            if not (suffix[pos_e] >> v) & 1:
                return self._finish(space, pos_s, pos_e, False)
            pos_e = t.index(v, pos_e) + 1
            pos_s += 1
        if pos_s != self.pos_s:
            if pos_s < limit:
                space.watch_trailed(S[pos_s], self, fix_only=True)
            self._move(space, pos_s, pos_e)
        if self.x is not None:
            self.x.restrict(suffix[pos_e] | (1 << eps))
        if pos_s >= k:
            return self._finish(space, pos_s, pos_e, True)
        if pos_s >= n:
            # S must end within this transaction
            r = dom[S[n].id]
            if r == 1 << eps:
                return self._finish(space, pos_s, pos_e, True)
            if not (r >> eps) & 1:
                return self._finish(space, pos_s, pos_e, False)
        if dom[self.c.id] == 2:
            S[pos_s].restrict(suffix[pos_e] | (1 << eps))


class InputOrderBrancher(Brancher):
    """Leftmost unassigned variable, every value in ascending order."""

    def __init__(self, variables: Sequence[FiniteVar]):
        self.vars = list(variables)

    def choose(self, space):
        dom = space.dom
        for v in self.vars:
            m = dom[v.id]
            if m & (m - 1):
                return Choice([[(v, EQ, s)] for s in bits(m)])
        return None


class LocalFrequencyBrancher(Brancher):
    """Branch on the first unassigned S_j only over symbols frequent in the projected db.

    A symbol is counted once per transaction of the support scope whose
    cover boolean is not false and whose projected-symbol domain holds it.
    ε, when still possible, is always the last alternative.
    """

    def __init__(self, S, X, C, scope, theta, eps):
        self.S, self.theta, self.eps = list(S), theta, eps
        self.watch = [(X[i].id, C[i].id) for i in scope]

    def choose(self, space):
        dom = space.dom
        for v in self.S:
            m = dom[v.id]
            if m & (m - 1):
                break
        else:
            return None
        eps = self.eps
        live = [dom[x] for x, c in self.watch if dom[c] != 1]
        alts = []
        theta = self.theta
        for s in bits(m & ~(1 << eps)):
            bit = 1 << s
            count = 0
            for xm in live:
                if xm & bit:
                    count += 1
                    if count >= theta:
                        alts.append([(v, EQ, s)])
                        break
        if (m >> eps) & 1:
            alts.append([(v, EQ, eps)])
        return Choice(alts)


def frequent_alternatives(model: Model) -> list[int]:
    """Values the local-frequency brancher would offer at the current node."""
    choice = LocalFrequencyBrancher(
        model.S, model.X, model.C, model.scope, model.config.theta, model.eps
    ).choose(model.space)
    return [] if choice is None else [alt[0][2] for alt in choice.alternatives]


def _base_model(db: SequenceDB, config: MiningConfig) -> Model:
    config.validate(db)
    space = Space()
    k = pattern_length(db, config)
    S, B = new_pattern_vars(space, db, k)
    C = [space.new_bool(name=f"C{i + 1}") for i in range(len(db))]
    scope = cons.support_scope(config, len(db))
    return Model(space, db, config, S, B, C, scope)


def _post_user_constraints(model: Model) -> None:
    try:
        cons.post_pattern_constraints(model, model.config)
        cons.post_cover_constraints(model, model.config)
    except Inconsistent:
        model.space.failed = True


def build_global_model(db: SequenceDB, config: MiningConfig) -> Model:
    if config.model != "global":
        config = replace(config, model="global")
    model = _base_model(db, config)
    space = model.space
    pf = config.use_projected_frequency
    if pf:
        model.X = [space.new_var(range(db.n_symbols + 1), name=f"X{i + 1}") for i in range(len(db))]
    _post_user_constraints(model)
    for i, t in enumerate(db.transactions):
        x = model.X[i] if pf else None
        p = ExistsEmbedding(model.S, model.C[i], t, model.eps, x)
        model.embeddings.append(p)
        space.post(p)
    if pf:
        space.add_brancher(
            LocalFrequencyBrancher(model.S, model.X, model.C, model.scope, config.theta, model.eps)
        )
    else:
        space.add_brancher(InputOrderBrancher(model.S))
    return model

