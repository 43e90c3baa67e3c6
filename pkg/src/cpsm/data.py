"""Sequence databases: parsing, interning and summary statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

Text = Union[str, bytes]


class DataError(ValueError):
    pass


class EmptyDataset(DataError):
    pass


class ParseError(DataError):
    pass


class UnsupportedItemsets(DataError):
    pass


@dataclass(frozen=True)
class SequenceDB:
    """Transactions over interned symbols ``0..n_symbols-1``.

    ``tokens[s]`` is the original token of symbol ``s``.  The value
    ``epsilon`` (== ``n_symbols``) is reserved for padding and never stored.
    """

    transactions: tuple[tuple[int, ...], ...]
    tokens: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.transactions:
            raise EmptyDataset("dataset has no transactions")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    @classmethod
    def from_tokens(cls, rows: Iterable[Sequence[str]]) -> "SequenceDB":
        index: dict[str, int] = {}
        transactions = []
        for row in rows:
            if not row:
                continue
            transactions.append(tuple(index.setdefault(tok, len(index)) for tok in row))
        return cls(tuple(transactions), tuple(index))

    @property
    def n_symbols(self) -> int:
        return len(self.tokens)

    @property
    def epsilon(self) -> int:
        return len(self.tokens)

    def __len__(self):
        return len(self.transactions)

    def symbol(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise KeyError(f"unknown symbol {token!r}") from None

    def has_symbol(self, token: str) -> bool:
        return token in self._index

    def decode(self, pattern: Iterable[int]) -> list[str]:
        return [self.tokens[s] for s in pattern]

    def encode(self, tokens: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.symbol(t) for t in tokens)

    def max_len(self) -> int:
        return max(len(t) for t in self.transactions)


def _text(data: Text) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def parse_plain(data: Text) -> SequenceDB:
    """One transaction per line, whitespace separated tokens; blank lines skipped."""
    rows = [line.split() for line in _text(data).splitlines()]
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyDataset("no transactions in input")
    return SequenceDB.from_tokens(rows)


def parse_spmf(data: Text) -> SequenceDB:
    """SPMF sequence format restricted to single-item itemsets.

    Each itemset ends with -1, each transaction with -2.  Lines starting
    with '#', '%' or '@' are metadata and skipped.
    """
    rows: list[list[str]] = []
    current: list[str] = []
    itemset: list[str] = []
    for lineno, line in enumerate(_text(data).splitlines(), 1):
        if line.lstrip().startswith(("#", "%", "@")):
            continue
        for tok in line.split():
            try:
                value = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer token {tok!r}") from None
            if value == -1:
                if not itemset:
                    raise ParseError(f"line {lineno}: empty itemset")
                if len(itemset) > 1:
                    raise UnsupportedItemsets(
                        f"line {lineno}: itemset {' '.join(itemset)} has {len(itemset)} items"
                    )
                current.append(itemset[0])
                itemset = []
            elif value == -2:
                if itemset:
                    raise ParseError(f"line {lineno}: itemset not terminated by -1 before -2")
                if not current:
                    raise ParseError(f"line {lineno}: empty sequence")
                rows.append(current)
                current = []
            elif value < 0:
                raise ParseError(f"line {lineno}: unexpected terminator {value}")
            else:
                itemset.append(str(value))
    if itemset or current:
        raise ParseError("input ends inside a sequence (missing -2)")
    if not rows:
        raise EmptyDataset("no transactions in input")
    return SequenceDB.from_tokens(rows)


def to_plain(db: SequenceDB) -> str:
    return "".join(" ".join(db.decode(t)) + "\n" for t in db.transactions)


def load(path: Union[str, Path], fmt: str = "plain") -> SequenceDB:
    raw = Path(path).read_bytes()
    if fmt == "plain":
        return parse_plain(raw)
    if fmt == "spmf":
        return parse_spmf(raw)
    raise ValueError(f"unknown format {fmt!r}")


def concat(first: SequenceDB, second: SequenceDB) -> tuple[SequenceDB, list[int], list[int]]:
    """Union of two databases over a shared symbol table.

    Returns the merged db and the transaction indices of each part.
    """
    rows = [first.decode(t) for t in first.transactions]
    rows += [second.decode(t) for t in second.transactions]
    merged = SequenceDB.from_tokens(rows)
    n1 = len(first)
    return merged, list(range(n1)), list(range(n1, len(merged)))


@dataclass(frozen=True)
class DBStats:
    alphabet_size: int
    transaction_count: int
    total_symbols: int
    max_len: int
    avg_len: Fraction
    density: Fraction

    def format(self) -> str:
        return (
            f"|Σ|={self.alphabet_size} |D|={self.transaction_count} "
            f"||D||={self.total_symbols} max={self.max_len} "
            f"avg={float(self.avg_len):.3f} density={float(self.density):.3f}"
        )

    def as_dict(self) -> dict:
        return {
            "alphabet_size": self.alphabet_size,
            "transactions": self.transaction_count,
            "total_symbols": self.total_symbols,
            "max_len": self.max_len,
            "avg_len": round(float(self.avg_len), 3),
            "density": round(float(self.density), 3),
        }


def stats(db: SequenceDB) -> DBStats:
    total = sum(len(t) for t in db.transactions)
    n = len(db)
    return DBStats(
        alphabet_size=db.n_symbols,
        transaction_count=n,
        total_symbols=total,
        max_len=db.max_len(),
        avg_len=Fraction(total, n),
        density=Fraction(total, db.n_symbols * n),
    )


def resolve_minsup(value: str, n: int) -> int:
    """'12' -> 12, '5%' -> ceil(5 * n / 100)."""
    value = value.strip()
    if value.endswith("%"):
        pct = Fraction(value[:-1])
        return math.ceil(pct * n / 100)
    return int(value)
