"""Small finite-domain propagation engine.

Domains are Python ints used as bitsets over non-negative values.  All
state changes (domains, propagator attributes) go through a single trail,
so backtracking is an undo of the trail down to a mark.
"""

from __future__ import annotations

import enum
import time
from collections import deque
from typing import Callable, Iterable, Iterator, Optional, Sequence


class Inconsistent(Exception):
    """Raised by domain updates that wipe out a domain."""


class ConstructionError(ValueError):
    pass


class StopSearch(Exception):
    """Raise from a solution callback to end the search early."""


class SearchLimit(Exception):
    """Raised when the search exceeds its time budget."""


class Status(enum.Enum):
    OK = "ok"
    FAILED = "failed"


EQ = 0
NE = 1


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(values: Iterable[int]) -> int:
    m = 0
    for v in values:
        if v < 0:
            raise ConstructionError(f"negative domain value {v}")
        m |= 1 << v
    return m


class FiniteVar:
    __slots__ = ("space", "id", "name")

    def __init__(self, space: "Space", vid: int, name: str = ""):
        self.space = space
        self.id = vid
        self.name = name

    def __repr__(self):
        label = self.name or f"v{self.id}"
        return f"{label}{sorted(self.values())}"

    @property
    def mask(self) -> int:
        return self.space.dom[self.id]

    def values(self) -> list[int]:
        return list(bits(self.space.dom[self.id]))

    def size(self) -> int:
        return bin(self.space.dom[self.id]).count("1")

    def min(self) -> int:
        m = self.space.dom[self.id]
        return (m & -m).bit_length() - 1

    def max(self) -> int:
        return self.space.dom[self.id].bit_length() - 1

    def contains(self, v: int) -> bool:
        return v >= 0 and (self.space.dom[self.id] >> v) & 1 == 1

    def __contains__(self, v: int) -> bool:
        return self.contains(v)

    @property
    def assigned(self) -> bool:
        m = self.space.dom[self.id]
        return m & (m - 1) == 0

    @property
    def value(self) -> int:
        if not self.assigned:
            raise ValueError(f"{self!r} is not assigned")
        return self.min()

    # -- mutators; each returns True when the domain changed

    def restrict(self, mask: int) -> bool:
        return self.space.set_dom(self.id, self.space.dom[self.id] & mask)

    def remove(self, v: int) -> bool:
        return self.space.set_dom(self.id, self.space.dom[self.id] & ~(1 << v))

    def assign(self, v: int) -> bool:
        if v < 0:
            raise Inconsistent
        return self.space.set_dom(self.id, self.space.dom[self.id] & (1 << v))

    def remove_above(self, v: int) -> bool:
        if v < 0:
            raise Inconsistent
        return self.space.set_dom(self.id, self.space.dom[self.id] & ((1 << (v + 1)) - 1))

    def remove_below(self, v: int) -> bool:
        if v <= 0:
            return False
        return self.space.set_dom(self.id, self.space.dom[self.id] & ~((1 << v) - 1))


class BoolVar(FiniteVar):
    """A 0/1 variable; ``state`` is None while unknown."""

    __slots__ = ()

    @property
    def state(self) -> Optional[bool]:
        m = self.space.dom[self.id]
        if m == 3:
            return None
        return m == 2

    @property
    def is_true(self) -> bool:
        return self.space.dom[self.id] == 2

    @property
    def is_false(self) -> bool:
        return self.space.dom[self.id] == 1


class Propagator:
    """Base class.  Subclasses implement ``attach`` and ``propagate``.

    ``attach`` subscribes to variables with ``space.watch``.  ``propagate``
    prunes through the variable mutators, raises ``Inconsistent`` on
    failure and calls ``space.subsume(self)`` once entailed.  Attributes
    that must survive backtracking are changed with ``space.save``.
    """

    pid: int = -1
    active: bool = True
    queued: bool = False

    def attach(self, space: "Space") -> None:
        raise NotImplementedError

    def propagate(self, space: "Space") -> None:
        raise NotImplementedError


class Choice:
    """Ordered alternatives; each alternative is a list of (var, op, value)."""

    __slots__ = ("alternatives",)

    def __init__(self, alternatives: list[list[tuple[FiniteVar, int, int]]]):
        self.alternatives = alternatives

    def __repr__(self):
        return f"Choice({self.alternatives!r})"


class Brancher:
    def choose(self, space: "Space") -> Optional[Choice]:
        """Return the choice for this node, or None when nothing is left to branch on."""
        raise NotImplementedError


class Space:
    def __init__(self):
        self.dom: list[int] = []
        self.vars: list[FiniteVar] = []
        self._on_change: list[list[Propagator]] = []
        self._on_fix: list[list[Propagator]] = []
        self.propagators: list[Propagator] = []
        self.branchers: list[Brancher] = []
        self.trail: list[tuple] = []
        self.queue: deque[Propagator] = deque()
        self.failed = False
        self.nodes = 0
        self.propagations = 0
        self.deadline: Optional[float] = None

    # -- variables

    def new_var(self, values: Iterable[int], name: str = "") -> FiniteVar:
        mask = mask_of(values)
        if mask == 0:
            raise ConstructionError("empty initial domain")
        return self._add(FiniteVar, mask, name)

    def new_bool(self, name: str = "") -> BoolVar:
        return self._add(BoolVar, 3, name)

    def _add(self, cls, mask, name):
        var = cls(self, len(self.dom), name)
        self.dom.append(mask)
        self.vars.append(var)
        self._on_change.append([])
        self._on_fix.append([])
        return var

    def set_dom(self, vid: int, new: int) -> bool:
        old = self.dom[vid]
        if new == old:
            return False
        if new == 0:
            raise Inconsistent
        self.trail.append((self.dom, vid, old))
        self.dom[vid] = new
        queue = self.queue
        for p in self._on_change[vid]:
            if p.active and not p.queued:
                p.queued = True
                queue.append(p)
        if new & (new - 1) == 0:
            for p in self._on_fix[vid]:
                if p.active and not p.queued:
                    p.queued = True
                    queue.append(p)
        return True

    # -- propagators

    def watch(self, var: FiniteVar, p: Propagator, fix_only: bool = False) -> None:
        (self._on_fix if fix_only else self._on_change)[var.id].append(p)

    def watch_trailed(self, var: FiniteVar, p: Propagator, fix_only: bool = False) -> None:
        """Subscribe ``p`` until backtracking past this point."""
        lst = (self._on_fix if fix_only else self._on_change)[var.id]
        # undo runs lst[n:] = [], dropping what was appended since
        self.trail.append((lst, slice(len(lst), None), []))
        lst.append(p)

    def save(self, obj, attr: str, value) -> None:
        """Set ``obj.attr = value`` so that backtracking restores the old value."""
        d = obj.__dict__
        self.trail.append((d, attr, d.get(attr, getattr(type(obj), attr, None))))
        d[attr] = value

    def subsume(self, p: Propagator) -> None:
        # post() puts ``active`` in the instance dict, so no class fallback here
        d = p.__dict__
        if d["active"]:
            self.trail.append((d, "active", True))
            d["active"] = False

    def post(self, p: Propagator) -> Status:
        if self.failed:
            return Status.FAILED
        p.pid = len(self.propagators)
        self.propagators.append(p)
        p.active = True
        p.queued = True
        p.attach(self)
        self.queue.append(p)
        status = self.propagate()
        if status is Status.FAILED:
            self.failed = True
        return status

    def propagate(self) -> Status:
        """Run queued propagators until no domain changes."""
        if self.failed:
            self._clear_queue()
            return Status.FAILED
        queue = self.queue
        count = 0
        try:
            while queue:
                p = queue.popleft()
                p.queued = False
                if p.active:
                    count += 1
                    p.propagate(self)
        except Inconsistent:
            self._clear_queue()
            return Status.FAILED
        finally:
            self.propagations += count
        return Status.OK

    def _clear_queue(self):
        for p in self.queue:
            p.queued = False
        self.queue.clear()

    # -- state save/restore

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail = self.trail
        for container, key, old in reversed(trail[mark:]):
            container[key] = old
        del trail[mark:]

    def snapshot(self) -> list[int]:
        return list(self.dom)

    # -- search

    def add_brancher(self, b: Brancher) -> None:
        self.branchers.append(b)

    def apply(self, actions: Sequence[tuple[FiniteVar, int, int]]) -> Status:
        try:
            for var, op, v in actions:
                if op == EQ:
                    var.assign(v)
                else:
                    var.remove(v)
        except Inconsistent:
            self._clear_queue()
            return Status.FAILED
        return self.propagate()

    def search_all(
        self,
        on_solution: Optional[Callable[["Space"], None]] = None,
        node_hook: Optional[Callable[["Space", int], None]] = None,
    ) -> int:
        """Depth-first enumeration of all solutions under the installed branchers.

        ``on_solution`` sees the space at each solution; raising StopSearch
        ends the search.  ``node_hook(space, depth)`` is called at every node
        that reached a stable fixpoint.  The space is restored to its
        entry state when the search returns.
        """
        return self._dfs(self.branchers, on_solution, node_hook)

    def solve_first(self, branchers: Sequence[Brancher], read: Callable[["Space"], object]):
        """Search with ``branchers`` only; return ``read(space)`` at the first solution, else None."""
        found = []

        def grab(space):
            found.append(read(space))
            raise StopSearch

        self._dfs(branchers, grab, None)
        return found[0] if found else None

    def _choose(self, branchers):
        for b in branchers:
            choice = b.choose(self)
            if choice is not None:
                return choice
        return None

    def _dfs(self, branchers, on_solution, node_hook) -> int:
        entry = self.mark()
        solutions = 0
        stack: list[list] = []
        self.nodes += 1
        stable = self.propagate() is Status.OK
        try:
            while True:
                if stable:
                    if node_hook is not None:
                        node_hook(self, len(stack))
                    choice = self._choose(branchers)
                    if choice is None:
                        solutions += 1
                        if on_solution is not None:
                            on_solution(self)
                    else:
                        stack.append([choice.alternatives, 0, self.mark()])
                alt = None
                while stack:
                    top = stack[-1]
                    self.undo(top[2])
                    if top[1] < len(top[0]):
                        alt = top[0][top[1]]
                        top[1] += 1
                        break
                    stack.pop()
                if alt is None:
                    break
                self.nodes += 1
                if self.deadline is not None and self.nodes & 255 == 0:
                    if time.monotonic() > self.deadline:
                        raise SearchLimit
                stable = self.apply(alt) is Status.OK
        except StopSearch:
            pass
        finally:
            self._clear_queue()
            self.undo(entry)
        return solutions


# -- primitive constraints


class Less(Propagator):
    """x < y (or x <= y with ``strict=False``)."""

    def __init__(self, x: FiniteVar, y: FiniteVar, strict: bool = True):
        self.x, self.y, self.gap = x, y, 1 if strict else 0

    def attach(self, space):
        space.watch(self.x, self)
        space.watch(self.y, self)

    def propagate(self, space):
        x, y, g = self.x, self.y, self.gap
        y.remove_below(x.min() + g)
        x.remove_above(y.max() - g)
        if x.max() + g <= y.min():
            space.subsume(self)


class NotEqual(Propagator):
    def __init__(self, x: FiniteVar, y: FiniteVar):
        self.x, self.y = x, y

    def attach(self, space):
        space.watch(self.x, self, fix_only=True)
        space.watch(self.y, self, fix_only=True)

    def propagate(self, space):
        if self.x.assigned:
            self.y.remove(self.x.value)
            space.subsume(self)
        elif self.y.assigned:
            self.x.remove(self.y.value)
            space.subsume(self)


class Equal(Propagator):
    def __init__(self, x: FiniteVar, y: FiniteVar):
        self.x, self.y = x, y

    def attach(self, space):
        space.watch(self.x, self)
        space.watch(self.y, self)

    def propagate(self, space):
        common = self.x.mask & self.y.mask
        self.x.restrict(common)
        self.y.restrict(common)
        if self.x.assigned:
            space.subsume(self)


class ReifEq(Propagator):
    """b <-> (x == v)."""

    def __init__(self, b: BoolVar, x: FiniteVar, v: int):
        self.b, self.x, self.v = b, x, v

    def attach(self, space):
        space.watch(self.b, self, fix_only=True)
        space.watch(self.x, self)

    def propagate(self, space):
        b, x, v = self.b, self.x, self.v
        st = b.state
        if st is True:
            x.assign(v)
            space.subsume(self)
        elif st is False:
            x.remove(v)
            space.subsume(self)
        elif not x.contains(v):
            b.assign(0)
            space.subsume(self)
        elif x.assigned:
            b.assign(1)
            space.subsume(self)


class Implies(Propagator):
    """a -> b over booleans (equivalently a <= b)."""

    def __init__(self, a: BoolVar, b: BoolVar):
        self.a, self.b = a, b

    def attach(self, space):
        space.watch(self.a, self, fix_only=True)
        space.watch(self.b, self, fix_only=True)

    def propagate(self, space):
        a, b = self.a, self.b
        if a.is_true:
            b.assign(1)
            space.subsume(self)
        elif b.is_false:
            a.assign(0)
            space.subsume(self)
        elif a.is_false or b.is_true:
            space.subsume(self)


class BoolLinear(Propagator):
    """lo <= sum(c_i * b_i) <= hi over booleans with integer coefficients."""

    def __init__(self, coeffs: Sequence[int], bools: Sequence[BoolVar], lo=None, hi=None):
        if len(coeffs) != len(bools):
            raise ConstructionError("coefficient/variable length mismatch")
        self.terms = [(c, b) for c, b in zip(coeffs, bools) if c != 0]
        self.lo, self.hi = lo, hi

    def attach(self, space):
        for _, b in self.terms:
            space.watch(b, self, fix_only=True)

    def propagate(self, space):
        dom = space.dom
        fixed = 0
        free = []
        for c, b in self.terms:
            m = dom[b.id]
            if m == 3:
                free.append((c, b))
            elif m == 2:
                fixed += c
        low = fixed + sum(c for c, _ in free if c < 0)
        high = fixed + sum(c for c, _ in free if c > 0)
        lo, hi = self.lo, self.hi
        if (lo is not None and high < lo) or (hi is not None and low > hi):
            raise Inconsistent
        if (lo is None or low >= lo) and (hi is None or high <= hi):
            space.subsume(self)
            return
        for c, b in free:
            # value that would push the sum past a bound is excluded
            if lo is not None:
                if c > 0 and high - c < lo:
                    b.assign(1)
                    continue
                if c < 0 and high + c < lo:
                    b.assign(0)
                    continue
            if hi is not None:
                if c > 0 and low + c > hi:
                    b.assign(0)
                elif c < 0 and low - c > hi:
                    b.assign(1)
