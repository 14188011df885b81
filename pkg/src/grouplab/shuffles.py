"""Swap-or-Not and Scoot-or-Not shuffles, plus exact single-card mixing.

Round decisions are either recorded bits (``0``/``1``, used for exact
analysis) or bit-valued callables such as :class:`LazyBitFunction`.

Scoot-or-Not decides on ``x' * x^-1``, which always equals the round key,
so a whole run is a left translation by the ordered product of the
selected keys.  The inverse runs the rounds backwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

from .groups import (
    DEFAULT_ENUMERATION_CAP,
    BitStringGroup,
    CyclicGroup,
    Element,
    EnumerationCapError,
    Group,
    GroupMismatchError,
)
from .oracles import LazyBitFunction

Decision = Union[int, Callable[[Element], int]]


def _decide(d: Decision, x: Element) -> int:
    return d if isinstance(d, int) else d(x)


def canonical(a: Element, b: Element) -> Element:
    """Canonical representative of the unordered pair: the larger index."""
    return a if a.index() >= b.index() else b


@dataclass
class ShuffleParams:
    keys: Sequence[Element]
    decisions: Sequence[Decision]

    def __post_init__(self):
        if len(self.keys) != len(self.decisions):
            raise ValueError("need one decision per round key")

    @property
    def rounds(self) -> int:
        return len(self.keys)

    def __add__(self, other: ShuffleParams) -> ShuffleParams:
        return ShuffleParams(list(self.keys) + list(other.keys), list(self.decisions) + list(other.decisions))

    @classmethod
    def random(cls, group: Group, rounds: int, rng, recorded: bool = False) -> ShuffleParams:
        keys = [group.sample(rng) for _ in range(rounds)]
        if recorded:
            decisions: list[Decision] = [rng.bit() for _ in range(rounds)]
        else:
            decisions = [LazyBitFunction(group, rng.spawn(f"round{i}")) for i in range(rounds)]
        return cls(keys, decisions)


# --- Swap-or-Not ----------------------------------------------------------------


def sn_round_bits(n: int, key: Element, decision: Decision, x: Element) -> Element:
    """One Swap-or-Not round on ``{0,1}^n``: pair ``x`` with ``key ^ x``."""
    g = x.group
    if not isinstance(g, BitStringGroup) or g.dimension != n:
        raise GroupMismatchError(f"expected an element of bits:{n}, got {g.name}")
    partner = key * x
    return partner if _decide(decision, canonical(x, partner)) == 1 else x


def sn_shuffle(N: int, params: ShuffleParams, x: Element) -> Element:
    """r rounds over ``Z/N``: ``x -> K_i - x`` when the round fires on ``max(x, K_i - x)``."""
    g = x.group
    if not isinstance(g, CyclicGroup) or g.modulus != N:
        raise GroupMismatchError(f"expected an element of zmod:{N}, got {g.name}")
    for k, d in zip(params.keys, params.decisions):
        partner = k * x.inverse()
        if _decide(d, canonical(x, partner)) == 1:
            x = partner
    return x


# Swap-or-Not is an involution per round, so the inverse just reverses rounds.
def sn_inverse(N: int, params: ShuffleParams, y: Element) -> Element:
    rev = ShuffleParams(list(reversed(params.keys)), list(reversed(params.decisions)))
    return sn_shuffle(N, rev, y)


# --- Scoot-or-Not ---------------------------------------------------------------


def sc_shuffle(params: ShuffleParams, x: Element) -> Element:
    for k, d in zip(params.keys, params.decisions):
        moved = k * x
        probe = moved * x.inverse()
        if _decide(d, probe) == 1:
            x = moved
    return x


def sc_inverse(params: ShuffleParams, x: Element) -> Element:
    for k, d in zip(reversed(params.keys), reversed(params.decisions)):
        moved = k.inverse() * x
        probe = moved * x.inverse()
        if _decide(d, probe.inverse()) == 1:
            x = moved
    return x


def sc_translation(params: ShuffleParams, group: Group) -> Element:
    """The element ``K`` with ``sc_shuffle(x) == K * x`` for every ``x``."""
    acc = group.identity
    for k, d in zip(params.keys, params.decisions):
        if _decide(d, k) == 1:
            acc = k * acc
    return acc


# --- ciphers and composition ---------------------------------------------------------


@dataclass
class Cipher:
    group: Group
    encrypt: Callable[[Element], Element]
    decrypt: Callable[[Element], Element]

    # oracle-style aliases
    def forward(self, x: Element) -> Element:
        return self.encrypt(x)

    def inverse(self, y: Element) -> Element:
        return self.decrypt(y)


def sc_cipher(group: Group, params: ShuffleParams) -> Cipher:
    return Cipher(group, lambda x: sc_shuffle(params, x), lambda y: sc_inverse(params, y))


def sc_inverse_cipher(group: Group, params: ShuffleParams) -> Cipher:
    """The inverse shuffle used as a cipher in its own right."""
    return Cipher(group, lambda x: sc_inverse(params, x), lambda y: sc_shuffle(params, y))


def compose_cipher(L: Cipher, M: Cipher) -> Cipher:
    """``M^-1 o L``, with inverse ``L^-1 o M``."""
    if L.group != M.group:
        raise GroupMismatchError(f"cannot compose ciphers on {L.group.name} and {M.group.name}")
    return Cipher(L.group, lambda x: M.decrypt(L.encrypt(x)), lambda y: L.decrypt(M.encrypt(y)))


# --- distributions ---------------------------------------------------------------


@dataclass
class Distribution:
    """Probabilities indexed by canonical element index."""

    group: Group
    probs: list
    exact: bool = field(default=True)

    def __post_init__(self):
        if len(self.probs) != self.group.order:
            raise ValueError("need one probability per group element")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")
        total = sum(self.probs)
        if self.exact:
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(total - 1) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def uniform(cls, group: Group) -> Distribution:
        return cls(group, [Fraction(1, group.order)] * group.order)

    @classmethod
    def point(cls, group: Group, x: Element) -> Distribution:
        probs = [Fraction(0)] * group.order
        probs[x.index()] = Fraction(1)
        return cls(group, probs)

    def __getitem__(self, x: Element) -> Fraction:
        return self.probs[x.index()]

    def to_csv(self) -> str:
        lines = ["index,probability,rational"]
        for i, p in enumerate(self.probs):
            q = Fraction(p)
            lines.append(f"{i},{float(p):.6g},{q.numerator}/{q.denominator}")
        return "\n".join(lines) + "\n"


def tvd(mu: Distribution, nu: Distribution):
    """Total variation distance, exact when both inputs are."""
    if mu.group != nu.group:
        raise GroupMismatchError("distributions live on different groups")
    return sum(abs(a - b) for a, b in zip(mu.probs, nu.probs)) / 2


def _sc_step_counts(group: Group, cap: int) -> list[dict[int, int]]:
    """Integer one-round kernel: ``row[x][y]`` = number of (key, bit) choices sending x to y."""
    if group.order > cap:
        raise EnumerationCapError(f"{group.name} exceeds enumeration cap {cap}")
    elems = group.enumerate(cap)
    rows = []
    for x in elems:
        row: dict[int, int] = {}
        xi = x.index()
        for k in elems:
            row[xi] = row.get(xi, 0) + 1  # bit 0: stay
            yi = (k * x).index()
            row[yi] = row.get(yi, 0) + 1  # bit 1: scoot
        rows.append(row)
    return rows


def _sn_step_counts(N: int) -> list[dict[int, int]]:
    g = CyclicGroup(N)
    rows = []
    for x in g.enumerate():
        row: dict[int, int] = {}
        for k in g.enumerate():
            row[x.index()] = row.get(x.index(), 0) + 1
            yi = (k * x.inverse()).index()
            row[yi] = row.get(yi, 0) + 1
        rows.append(row)
    return rows


def _evolve(rows: list[dict[int, int]], start: int) -> Iterator[tuple[list[int], int]]:
    """Yield ``(counts, denominator)`` after 0, 1, 2, ... rounds."""
    per_round = sum(rows[0].values())
    counts = [0] * len(rows)
    counts[start] = 1
    denom = 1
    while True:
        yield counts, denom
        nxt = [0] * len(rows)
        for x, c in enumerate(counts):
            if c:
                for y, w in rows[x].items():
                    nxt[y] += c * w
        counts = nxt
        denom *= per_round


def _to_dist(group: Group, counts: list[int], denom: int) -> Distribution:
    return Distribution(group, [Fraction(c, denom) for c in counts])


def sc_single_card_distribution(group: Group, r: int, x0: Element, cap: int = DEFAULT_ENUMERATION_CAP) -> Distribution:
    """Exact law of one card's position after r Scoot-or-Not rounds."""
    for i, (counts, denom) in enumerate(_evolve(_sc_step_counts(group, cap), x0.index())):
        if i == r:
            return _to_dist(group, counts, denom)
    raise AssertionError("unreachable")


def sn_single_card_distribution(N: int, r: int, x0: int) -> Distribution:
    """Exact law of one card's position after r Swap-or-Not rounds on ``Z/N``."""
    g = CyclicGroup(N)
    for i, (counts, denom) in enumerate(_evolve(_sn_step_counts(N), x0)):
        if i == r:
            return _to_dist(g, counts, denom)
    raise AssertionError("unreachable")


def mixing_profile(group: Group, r_max: int, x0: Element, kind: str = "sc") -> list[Fraction]:
    """Exact distance to uniform after 0..r_max rounds, in one pass."""
    if kind == "sc":
        rows = _sc_step_counts(group, DEFAULT_ENUMERATION_CAP)
    elif kind == "sn":
        if not isinstance(group, CyclicGroup):
            raise GroupMismatchError("Swap-or-Not mixing is defined on zmod groups")
        rows = _sn_step_counts(group.modulus)
    else:
        raise ValueError(f"unknown shuffle kind {kind!r}")
    uni = Distribution.uniform(group)
    out = []
    for i, (counts, denom) in enumerate(_evolve(rows, x0.index())):
        if i > r_max:
            break
        out.append(tvd(_to_dist(group, counts, denom), uni))
    return out


# --- bound evaluators ----------------------------------------------------------------


def _check_domain(N: int, q: int, r: int) -> None:
    if N < 1 or not 1 <= q <= N or r < 1:
        raise ValueError(f"bound needs N >= 1, 1 <= q <= N, r >= 1; got N={N}, q={q}, r={r}")


def sc_ncpa_bound(N: int, q: int, r: int) -> float:
    """Rapid-mixing bound ``2 N^1.5/(r+2) * ((q+N)/(2N))^(r/2+1)`` for r rounds."""
    _check_domain(N, q, r)
    return 2 * N**1.5 / (r + 2) * ((q + N) / (2 * N)) ** (r / 2 + 1)


def sc_cca_bound(N: int, q: int, r: int) -> float:
    """CCA bound for the 2r-round shuffle: twice the rapid-mixing bound at r."""
    _check_domain(N, q, r)
    return 4 * N**1.5 / (r + 2) * ((q + N) / (2 * N)) ** (r / 2 + 1)


def sc_summary_bound(N: int, q: int, r: int) -> float:
    """The headline form ``8 N^1.5/(r+4) * ((q+N)/(2N))^(r/4+1)``."""
    _check_domain(N, q, r)
    return 8 * N**1.5 / (r + 4) * ((q + N) / (2 * N)) ** (r / 4 + 1)


def single_card_tvd_closed_form(N: int, r: int) -> Fraction:
    return Fraction(1, 2**r) * (1 - Fraction(1, N))
