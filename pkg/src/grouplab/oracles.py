"""Reproducible randomness and lazily sampled random oracles.

Every random draw in the package goes through ``randbelow`` on a
``RandomStream`` (or a drop-in with the same interface).  That single choke
point is what lets :func:`enumerate_outcomes` replace the stream with an
exhaustive chooser and turn any small randomized experiment into an exact
distribution with rational weights.
"""
from __future__ import annotations

import hashlib
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Hashable, Iterable

from .groups import DEFAULT_ENUMERATION_CAP, Element, Group


class RandomStream:
    """Counter-based generator: word ``c`` is a keyed BLAKE2b hash of ``c``.

    The key is derived from ``(seed, label)``; so word ``counter`` of a stream
    is a pure function of ``(seed, label, counter)``.  Each hash call yields
    eight 64-bit words which are buffered.  ``spawn`` derives a child stream
    whose label extends the parent's, giving independent substreams that do
    not depend on how much of the parent has been consumed.
    """

    def __init__(self, seed: int, label: str = ""):
        self.seed = int(seed)
        self.label = label
        self.counter = 0
        self._key = hashlib.blake2b(
            f"{self.seed}\x00{label}".encode(), digest_size=32, person=b"grouplab-rs"
        ).digest()
        self._block = -1
        self._words: list[int] = []

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, label={self.label!r}, counter={self.counter})"

    def spawn(self, label: str | int) -> RandomStream:
        return RandomStream(self.seed, f"{self.label}/{label}")

    def _word(self) -> int:
        block, offset = divmod(self.counter, 8)
        if block != self._block:
            digest = hashlib.blake2b(block.to_bytes(8, "big"), key=self._key, digest_size=64).digest()
            self._words = [int.from_bytes(digest[i : i + 8], "big") for i in range(0, 64, 8)]
            self._block = block
        self.counter += 1
        return self._words[offset]

    def getrandbits(self, k: int) -> int:
        if k <= 0:
            return 0
        out = 0
        got = 0
        while got < k:
            out = (out << 64) | self._word()
            got += 64
        return out >> (got - k)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection; exact for every n."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        k = n.bit_length()
        while True:
            r = self.getrandbits(k)
            if r < n:
                return r

    def randrange(self, start: int, stop: int) -> int:
        return start + self.randbelow(stop - start)

    def bit(self) -> int:
        return self.randbelow(2)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def random(self) -> float:
        return self.getrandbits(53) / 9007199254740992.0


# --- exact enumeration of randomized computations -----------------------------


class _Explorer:
    """Stand-in for a RandomStream that walks one branch of the choice tree."""

    def __init__(self, prefix: list[int], pending: list[list[int]]):
        self._prefix = prefix
        self._pending = pending
        self.taken: list[int] = []
        self.denominator = 1

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        pos = len(self.taken)
        if pos < len(self._prefix):
            v = self._prefix[pos]
        else:
            v = 0
            for alt in range(n - 1, 0, -1):
                self._pending.append(self.taken + [alt])
        self.taken.append(v)
        self.denominator *= n
        return v

    def randrange(self, start: int, stop: int) -> int:
        return start + self.randbelow(stop - start)

    def bit(self) -> int:
        return self.randbelow(2)

    def getrandbits(self, k: int) -> int:
        return self.randbelow(1 << k)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def spawn(self, label) -> _Explorer:
        return self

    def random(self) -> float:
        raise TypeError("float draws cannot be enumerated exactly")


def enumerate_outcomes(
    experiment: Callable[[object], Hashable], max_runs: int = 5_000_000
) -> dict[Hashable, Fraction]:
    """Exact output distribution of ``experiment(rng)`` over all random choices.

    ``experiment`` must draw randomness only through ``rng.randbelow`` (or
    the helpers built on it) and must terminate on every branch.
    """
    dist: dict[Hashable, Fraction] = defaultdict(Fraction)
    pending: list[list[int]] = [[]]
    runs = 0
    while pending:
        runs += 1
        if runs > max_runs:
            raise RuntimeError(f"enumeration exceeded {max_runs} runs")
        explorer = _Explorer(pending.pop(), pending)
        out = experiment(explorer)
        dist[out] += Fraction(1, explorer.denominator)
    return dict(dist)


# --- unused-element pools -------------------------------------------------------


class FreePool:
    """The unused indices of ``range(size)`` as a lazily materialised array.

    Positions ``[used, size)`` of a virtual array hold exactly the unused
    values; draws and removals swap the chosen value to position ``used``.
    Only touched positions are stored, so construction is O(1).
    """

    def __init__(self, size: int):
        self.size = size
        self.used = 0
        self._at: dict[int, int] = {}
        self._pos: dict[int, int] = {}

    @property
    def remaining(self) -> int:
        return self.size - self.used

    def _swap_to_front(self, p: int) -> int:
        u = self.used
        vp = self._at.get(p, p)
        vu = self._at.get(u, u)
        self._at[p], self._at[u] = vu, vp
        self._pos[vu], self._pos[vp] = p, u
        self.used += 1
        return vp

    def contains(self, v: int) -> bool:
        return self._pos.get(v, v) >= self.used

    def remove(self, v: int) -> None:
        p = self._pos.get(v, v)
        if p < self.used:
            raise KeyError(f"{v} already used")
        self._swap_to_front(p)

    def take(self, offset: int) -> int:
        """Remove and return the unused value at ``offset`` in the virtual tail."""
        if not 0 <= offset < self.remaining:
            raise IndexError("pool offset out of range")
        return self._swap_to_front(self.used + offset)

    def draw(self, rng) -> int:
        return self.take(rng.randbelow(self.remaining))

    def unused(self) -> list[int]:
        return [self._at.get(p, p) for p in range(self.used, self.size)]


def sample_excluding(group: Group, excluded: Iterable[Element], rng) -> Element:
    """Uniform over ``group`` minus ``excluded`` with a single ``randbelow`` draw."""
    skip = sorted({e.index() for e in excluded})
    r = rng.randbelow(group.order - len(skip))
    for s in skip:
        if s <= r:
            r += 1
        else:
            break
    return group.unindex(r)


def sample_distinct(group: Group, count: int, rng) -> list[Element]:
    """``count`` distinct uniform elements, in draw order."""
    if count > group.order:
        raise ValueError("cannot draw more distinct elements than the group has")
    pool = FreePool(group.order)
    return [group.unindex(pool.draw(rng)) for _ in range(count)]


# --- oracles ----------------------------------------------------------------------


class LazyPermutation:
    """A uniformly random permutation of ``group`` defined on demand.

    Fresh forward queries draw uniformly from the not-yet-used outputs and
    fresh inverse queries from the not-yet-used inputs, so the two partial
    maps stay mutually inverse.  Groups above ``cap`` use rejection sampling
    against the recorded tables instead of index pools.
    """

    def __init__(self, group: Group, rng, cap: int = DEFAULT_ENUMERATION_CAP):
        self.group = group
        self.rng = rng
        self.fwd: dict[Element, Element] = {}
        self.bwd: dict[Element, Element] = {}
        self._pooled = group.order <= cap
        if self._pooled:
            self._domain = FreePool(group.order)
            self._codomain = FreePool(group.order)

    def _fresh(self, pool: FreePool | None, taken: dict) -> Element:
        if pool is not None:
            return self.group.unindex(pool.draw(self.rng))
        while True:
            e = self.group.sample(self.rng)
            if e not in taken:
                return e

    def forward(self, x: Element) -> Element:
        y = self.fwd.get(x)
        if y is None:
            self.group.check_member(x)
            y = self._fresh(self._codomain if self._pooled else None, self.bwd)
            if self._pooled:
                self._domain.remove(x.index())
            self.fwd[x] = y
            self.bwd[y] = x
        return y

    def inverse(self, y: Element) -> Element:
        x = self.bwd.get(y)
        if x is None:
            self.group.check_member(y)
            x = self._fresh(self._domain if self._pooled else None, self.fwd)
            if self._pooled:
                self._codomain.remove(y.index())
            self.fwd[x] = y
            self.bwd[y] = x
        return x

    __call__ = forward

    def __len__(self) -> int:
        return len(self.fwd)


class FixedPermutation:
    """A permutation given explicitly by forward and inverse maps."""

    def __init__(self, group: Group, forward: Callable[[Element], Element], inverse: Callable[[Element], Element]):
        self.group = group
        self._f = forward
        self._i = inverse

    def forward(self, x: Element) -> Element:
        return self._f(x)

    def inverse(self, y: Element) -> Element:
        return self._i(y)

    __call__ = forward

    @classmethod
    def identity(cls, group: Group) -> FixedPermutation:
        return cls(group, lambda x: x, lambda y: y)

    @classmethod
    def from_table(cls, group: Group, table: dict[int, int]) -> FixedPermutation:
        """Build from an index -> index mapping, which must be a bijection."""
        if sorted(table) != list(range(group.order)) or sorted(table.values()) != list(range(group.order)):
            raise ValueError("table is not a permutation of the group indices")
        back = {v: k for k, v in table.items()}
        return cls(
            group,
            lambda x: group.unindex(table[x.index()]),
            lambda y: group.unindex(back[y.index()]),
        )


class LazyFunction:
    """A uniformly random function ``domain -> codomain`` sampled on demand."""

    def __init__(self, domain: Group, codomain: Group, rng):
        self.domain = domain
        self.codomain = codomain
        self.rng = rng
        self.table: dict[Element, Element] = {}

    def __call__(self, x: Element) -> Element:
        y = self.table.get(x)
        if y is None:
            self.domain.check_member(x)
            y = self.codomain.sample(self.rng)
            self.table[x] = y
        return y


class LazyBitFunction:
    """A uniformly random predicate on ``domain`` sampled on demand."""

    def __init__(self, domain: Group, rng):
        self.domain = domain
        self.rng = rng
        self.table: dict[Element, int] = {}

    def __call__(self, x: Element) -> int:
        b = self.table.get(x)
        if b is None:
            self.domain.check_member(x)
            b = self.rng.bit()
            self.table[x] = b
        return b
