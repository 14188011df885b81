"""Feistel networks on ``G x G`` and the Even-Mansour-over-Feistel cipher Psi.

States are elements of ``square(G)`` (a ``DirectProduct``); ``s.left`` and
``s.right`` give the halves.  Round functions are plain callables
``G -> G`` and need not be injective.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .groups import DirectProduct, Element, GroupError, GroupMismatchError

RoundFunction = Callable[[Element], Element]


def _halves(s: Element) -> tuple[Element, Element]:
    g = s.group
    if not isinstance(g, DirectProduct) or g.left != g.right:
        raise GroupMismatchError(f"Feistel state must live in G x G, got {g.name}")
    return s.left, s.right


def feistel_round(f: RoundFunction, s: Element) -> Element:
    """``(x, y) -> (y, x * f(y))``."""
    x, y = _halves(s)
    return s.group.pair(y, x * f(y))


def feistel_round_inv(f: RoundFunction, s: Element) -> Element:
    """Undo one round: ``R_prev = L``, ``L_prev = R * f(R_prev)^-1``."""
    left, right = _halves(s)
    prev_r = left
    return s.group.pair(right * f(prev_r).inverse(), prev_r)


@dataclass
class FeistelSpec:
    rounds: Sequence[RoundFunction]

    def __len__(self) -> int:
        return len(self.rounds)


def feistel_encrypt(spec: FeistelSpec | Sequence[RoundFunction], s: Element) -> Element:
    rounds = spec.rounds if isinstance(spec, FeistelSpec) else spec
    _halves(s)
    for f in rounds:
        s = feistel_round(f, s)
    return s


def feistel_decrypt(spec: FeistelSpec | Sequence[RoundFunction], s: Element) -> Element:
    rounds = spec.rounds if isinstance(spec, FeistelSpec) else spec
    _halves(s)
    for f in reversed(rounds):
        s = feistel_round_inv(f, s)
    return s


class Feistel:
    """An r-round Feistel permutation with ``forward``/``inverse``, usable as an oracle."""

    def __init__(self, group, rounds: Sequence[RoundFunction]):
        if not isinstance(group, DirectProduct) or group.left != group.right:
            raise GroupError("Feistel permutations act on a square G x G")
        self.group = group
        self.spec = FeistelSpec(list(rounds))

    def forward(self, s: Element) -> Element:
        self.group.check_member(s)
        return feistel_encrypt(self.spec, s)

    def inverse(self, s: Element) -> Element:
        self.group.check_member(s)
        return feistel_decrypt(self.spec, s)

    __call__ = forward


@dataclass(frozen=True)
class PsiKey:
    """Two independent subkeys; as an element of ``G x G`` it is ``(kL, kR)``."""

    kL: Element
    kR: Element

    def as_element(self, group: DirectProduct) -> Element:
        return group.pair(self.kL, self.kR)

    @classmethod
    def sample(cls, base, rng) -> PsiKey:
        return cls(base.sample(rng), base.sample(rng))


def psi_encrypt(f: RoundFunction, g: RoundFunction, key: PsiKey, x: Element) -> Element:
    """``F_{g,f,f,g}(x * k) * k`` with coordinate-wise products."""
    _halves(x)
    k = key.as_element(x.group)
    return feistel_encrypt((g, f, f, g), x * k) * k


def psi_decrypt(f: RoundFunction, g: RoundFunction, key: PsiKey, y: Element) -> Element:
    _halves(y)
    kinv = key.as_element(y.group).inverse()
    return feistel_decrypt((g, f, f, g), y * kinv) * kinv


class Psi:
    """Psi as a permutation oracle on ``G x G``."""

    def __init__(self, group: DirectProduct, f: RoundFunction, g: RoundFunction, key: PsiKey):
        self.group = group
        self.f = f
        self.g = g
        self.key = key

    def forward(self, x: Element) -> Element:
        return psi_encrypt(self.f, self.g, self.key, x)

    def inverse(self, y: Element) -> Element:
        return psi_decrypt(self.f, self.g, self.key, y)

    __call__ = forward
