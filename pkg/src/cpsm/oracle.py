"""Brute-force reference semantics.

Nothing here shares code with the propagation engine; it exists to be
obviously right, not fast.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .data import SequenceDB

Pattern = tuple[int, ...]
Embedding = tuple[int, ...]


def is_subsequence(pattern: Sequence[int], transaction: Sequence[int]) -> bool:
    """Greedy left-to-right matching."""
    pos = 0
    n = len(transaction)
    for s in pattern:
        while pos < n and transaction[pos] != s:
            pos += 1
        if pos == n:
            return False
        pos += 1
    return True


def leftmost_embedding(pattern: Sequence[int], transaction: Sequence[int]) -> Optional[Embedding]:
    out = []
    pos = 0
    for s in pattern:
        while pos < len(transaction) and transaction[pos] != s:
            pos += 1
        if pos == len(transaction):
            return None
        out.append(pos + 1)
        pos += 1
    return tuple(out)


def gap_ok(e: Embedding, gap: Optional[int]) -> bool:
    return gap is None or all(e[j] - e[j - 1] - 1 <= gap for j in range(1, len(e)))


def span_ok(e: Embedding, span: Optional[int]) -> bool:
    return span is None or (len(e) > 0 and e[-1] - e[0] + 1 <= span)


def iter_embeddings(pattern, transaction, gap=None, span=None) -> Iterator[Embedding]:
    """All embeddings (1-based positions) in lexicographic order."""
    m, n = len(pattern), len(transaction)

    def rec(j, start, acc):
        if j == m:
            e = tuple(acc)
            if gap_ok(e, gap) and span_ok(e, span):
                yield e
            return
        for x in range(start, n):
            if transaction[x] == pattern[j]:
                acc.append(x + 1)
                yield from rec(j + 1, x + 1, acc)
                acc.pop()

    if m == 0:
        return
    yield from rec(0, 0, [])


def all_embeddings(pattern, transaction, gap=None, span=None) -> list[Embedding]:
    return list(iter_embeddings(pattern, transaction, gap, span))


def includes(pattern, transaction, gap=None, span=None) -> bool:
    return next(iter_embeddings(pattern, transaction, gap, span), None) is not None


def cover(pattern, db: SequenceDB, gap=None, span=None) -> frozenset[int]:
    """0-based indices of the transactions including ``pattern``."""
    if gap is None and span is None:
        return frozenset(i for i, t in enumerate(db.transactions) if is_subsequence(pattern, t))
    return frozenset(i for i, t in enumerate(db.transactions) if includes(pattern, t, gap, span))


# -- regular expressions, via Python's re over a private character per symbol

_REGEX_TOKEN = re.compile(r"\s+|[()|*+?]|'[^']*'|\"[^\"]*\"|[^\s()|*+?]+")


def regex_to_python(expr: str, db: SequenceDB) -> re.Pattern:
    out = []
    for m in _REGEX_TOKEN.finditer(expr):
        tok = m.group()
        if tok.isspace():
            continue
        if tok in "()|*+?" and len(tok) == 1:
            out.append("(?:" if tok == "(" else tok)
            continue
        if tok == ".":
            out.append(".")
            continue
        if tok[0] in "'\"":
            tok = tok[1:-1]
        if db.has_symbol(tok):
            out.append("(?:" + re.escape(chr(0x100 + db.symbol(tok))) + ")")
        else:
            out.append("(?:(?!))")
    return re.compile("".join(out), re.DOTALL)


def regex_accepts(compiled: re.Pattern, pattern: Sequence[int]) -> bool:
    return compiled.fullmatch("".join(chr(0x100 + s) for s in pattern)) is not None


# -- enumeration


def enumerate_frequent(db: SequenceDB, config) -> list[tuple[Pattern, frozenset[int]]]:
    """Every pattern satisfying ``config``, with its (gap/span aware) cover.

    Level-wise over Σ^≤k, extending only patterns whose plain support on
    the support set reaches θ.  Sorted by symbol sequence.
    """
    n = len(db)
    scope = frozenset(config.positive) if config.positive is not None else frozenset(range(n))
    k = db.max_len() if config.max_size is None else min(db.max_len(), config.max_size)
    gap, span = config.max_gap, config.max_span

    level = [((), frozenset(range(n)))]
    candidates: list[Pattern] = []
    for _ in range(k):
        nxt = []
        for p, parent in level:
            for s in range(db.n_symbols):
                q = p + (s,)
                # plain cover is anti-monotone: only the parent's cover can contain q
                plain = frozenset(i for i in parent if is_subsequence(q, db.transactions[i]))
                if len(plain & scope) >= config.theta:
                    nxt.append((q, plain))
        candidates.extend(q for q, _ in nxt)
        level = nxt

    required = [db.symbol(t) for t in config.required]
    forbidden = [db.symbol(t) for t in config.forbidden]
    compiled = regex_to_python(config.regex, db) if config.regex is not None else None
    alpha = Fraction(str(config.discriminative)) if config.discriminative is not None else None

    out = []
    for p in candidates:
        if config.min_size is not None and len(p) < config.min_size:
            continue
        if any(t not in p for t in required) or any(t in p for t in forbidden):
            continue
        if compiled is not None and not regex_accepts(compiled, p):
            continue
        cov = cover(p, db, gap, span)
        support = len(cov & scope)
        if support < config.theta:
            continue
        if config.max_support is not None and support > config.max_support:
            continue
        if alpha is not None and support < alpha * len(cov - scope):
            continue
        out.append((p, cov))

    if config.closed:
        out = [
            (p, c)
            for p, c in out
            if not any(len(q) > len(p) and c == d and is_subsequence(p, q) for q, d in out)
        ]
    out.sort(key=lambda pc: pc[0])
    return out
