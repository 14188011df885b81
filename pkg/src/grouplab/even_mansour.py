"""One-key Even-Mansour over an arbitrary finite group, and its multi-round form.

``E_k(m) = P(m * k) * k`` and ``D_k(c) = P^-1(c * k^-1) * k^-1`` where ``P``
is any object exposing ``forward``/``inverse`` (a lazy random permutation in
experiments, a fixed table in tests).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .groups import Element, Group, GroupMismatchError


def _same_group(perm, *elems: Element) -> None:
    g = perm.group
    for e in elems:
        g.check_member(e)


def em_encrypt(perm, key: Element, m: Element) -> Element:
    _same_group(perm, key, m)
    return perm.forward(m * key) * key


def em_decrypt(perm, key: Element, c: Element) -> Element:
    _same_group(perm, key, c)
    kinv = key.inverse()
    return perm.inverse(c * kinv) * kinv


def keygen(group: Group, rng) -> Element:
    return group.sample(rng)


class EvenMansour:
    """Keyed cipher object bundling a permutation and a key."""

    def __init__(self, perm, key: Element):
        _same_group(perm, key)
        self.perm = perm
        self.key = key
        self.group = perm.group

    def encrypt(self, m: Element) -> Element:
        return em_encrypt(self.perm, self.key, m)

    def decrypt(self, c: Element) -> Element:
        return em_decrypt(self.perm, self.key, c)


@dataclass
class EmMultiKey:
    """Round keys ``k_1..k_r`` with one independent permutation per round."""

    keys: Sequence[Element]
    perms: Sequence

    def __post_init__(self):
        if len(self.keys) < 1 or len(self.keys) != len(self.perms):
            raise ValueError("need r >= 1 keys and exactly one permutation per key")
        g = self.perms[0].group
        for p in self.perms:
            if p.group != g:
                raise GroupMismatchError("all round permutations must share a group")
        for k in self.keys:
            g.check_member(k)

    @property
    def rounds(self) -> int:
        return len(self.keys)


def em_multi_encrypt(mk: EmMultiKey, m: Element) -> Element:
    x = m
    for k, p in zip(mk.keys, mk.perms):
        x = em_encrypt(p, k, x)
    return x


def em_multi_decrypt(mk: EmMultiKey, c: Element) -> Element:
    x = c
    for k, p in zip(reversed(mk.keys), reversed(mk.perms)):
        x = em_decrypt(p, k, x)
    return x
