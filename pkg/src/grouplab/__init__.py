"""Symmetric-key constructions over finite groups, with attacks, games and bound checks."""
from .groups import (
    BitStringGroup,
    CyclicGroup,
    DirectProduct,
    Element,
    Group,
    GroupError,
    GroupMismatchError,
    SymmetricGroup,
    parse_group,
    square,
)
from .oracles import LazyBitFunction, LazyFunction, LazyPermutation, RandomStream, enumerate_outcomes

__version__ = "0.1.0"

__all__ = [
    "BitStringGroup",
    "CyclicGroup",
    "DirectProduct",
    "Element",
    "Group",
    "GroupError",
    "GroupMismatchError",
    "SymmetricGroup",
    "parse_group",
    "square",
    "LazyBitFunction",
    "LazyFunction",
    "LazyPermutation",
    "RandomStream",
    "enumerate_outcomes",
]
