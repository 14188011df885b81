"""Finite groups with a canonical index bijection onto ``range(order)``.

Four families are supported: integers mod N, bit strings under XOR,
symmetric groups, and direct products of any two of these.  Elements carry
a reference to their group so mixing groups is caught early.

Index conventions:

* ``CyclicGroup``: the residue itself.
* ``BitStringGroup``: big-endian reading of the bit vector.
* ``SymmetricGroup``: lexicographic (Lehmer code) rank of the one-line form.
* ``DirectProduct``: ``index(left) * |right| + index(right)``.

Permutations compose as ``(s * t)(i) = s(t(i))``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Iterator

DEFAULT_ENUMERATION_CAP = 2**20
MAX_SYMMETRIC_DEGREE = 10


class GroupError(ValueError):
    pass


class GroupMismatchError(GroupError):
    pass


class EnumerationCapError(GroupError):
    pass


class Element:
    """A group element: a group reference plus a canonical payload.

    Payloads are ints for cyclic and bit-string groups, tuples in one-line
    notation for symmetric groups and ``(left, right)`` payload pairs for
    direct products.
    """

    __slots__ = ("group", "value", "_hash")

    def __init__(self, group: Group, value: Any):
        self.group = group
        self.value = value
        self._hash = hash(value)

    def __mul__(self, other: Element) -> Element:
        g = self.group
        if other.group is not g and other.group != g:
            raise GroupMismatchError(f"cannot multiply {g} element by {other.group} element")
        return Element(g, g._op(self.value, other.value))

    def inverse(self) -> Element:
        return Element(self.group, self.group._inv(self.value))

    def index(self) -> int:
        return self.group._index(self.value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.value == other.value and (self.group is other.group or self.group == other.group)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"{self.group.name}[{self.group._format(self.value)}]"

    # direct-product conveniences
    @property
    def left(self) -> Element:
        return self.group.left_of(self)

    @property
    def right(self) -> Element:
        return self.group.right_of(self)


@dataclass(frozen=True)
class Group:
    """Base class for the group descriptors.  Subclasses are frozen dataclasses."""

    @property
    def order(self) -> int:
        raise NotImplementedError

    @property
    def abelian(self) -> bool:
        raise NotImplementedError

    @property
    def name(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.name

    # payload-level primitives, implemented by each family
    def _op(self, a, b):
        raise NotImplementedError

    def _inv(self, a):
        raise NotImplementedError

    def _index(self, a) -> int:
        raise NotImplementedError

    def _unindex(self, i: int):
        raise NotImplementedError

    def _check(self, value) -> bool:
        raise NotImplementedError

    def _format(self, value) -> str:
        return str(value)

    # public API
    def element(self, value) -> Element:
        """Wrap a payload, validating membership."""
        value = self._normalize(value)
        if not self._check(value):
            raise GroupError(f"{value!r} is not an element of {self.name}")
        return Element(self, value)

    def _normalize(self, value):
        return value

    @property
    def identity(self) -> Element:
        return Element(self, self._identity())

    def _identity(self):
        return self._unindex(0)

    def unindex(self, i: int) -> Element:
        if not 0 <= i < self.order:
            raise GroupError(f"index {i} out of range for {self.name} of order {self.order}")
        return Element(self, self._unindex(i))

    def index(self, a: Element) -> int:
        self.check_member(a)
        return self._index(a.value)

    def check_member(self, a: Element) -> None:
        if a.group is not self and a.group != self:
            raise GroupMismatchError(f"{a!r} does not belong to {self.name}")

    def sample(self, rng) -> Element:
        """Uniform element; consumes one ``randbelow(order)`` draw."""
        return Element(self, self._unindex(rng.randbelow(self.order)))

    def enumerate(self, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Element]:
        if self.order > cap:
            raise EnumerationCapError(f"{self.name} has order {self.order} > enumeration cap {cap}")
        return [Element(self, self._unindex(i)) for i in range(self.order)]

    def __iter__(self) -> Iterator[Element]:
        return iter(self.enumerate())

    def left_of(self, e: Element) -> Element:
        raise GroupError(f"{self.name} is not a direct product")

    def right_of(self, e: Element) -> Element:
        raise GroupError(f"{self.name} is not a direct product")

    def __len__(self) -> int:
        return self.order


@dataclass(frozen=True)
class CyclicGroup(Group):
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise GroupError("modulus must be >= 1")

    @property
    def order(self) -> int:
        return self.modulus

    @property
    def abelian(self) -> bool:
        return True

    @property
    def name(self) -> str:
        return f"zmod:{self.modulus}"

    def _op(self, a, b):
        return (a + b) % self.modulus

    def _inv(self, a):
        return -a % self.modulus

    def _index(self, a):
        return a

    def _unindex(self, i):
        return i

    def _check(self, value):
        return isinstance(value, int) and 0 <= value < self.modulus


@dataclass(frozen=True)
class BitStringGroup(Group):
    """``{0,1}^n`` under XOR.  Payloads are ints; bit 0 of the vector is the MSB."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 0:
            raise GroupError("dimension must be >= 0")

    @property
    def order(self) -> int:
        return 1 << self.dimension

    @property
    def abelian(self) -> bool:
        return True

    @property
    def name(self) -> str:
        return f"bits:{self.dimension}"

    def _op(self, a, b):
        return a ^ b

    def _inv(self, a):
        return a

    def _index(self, a):
        return a

    def _unindex(self, i):
        return i

    def _normalize(self, value):
        if isinstance(value, (list, tuple)):
            if len(value) != self.dimension or any(b not in (0, 1) for b in value):
                return -1
            return int("".join(map(str, value)) or "0", 2)
        return value

    def _check(self, value):
        return isinstance(value, int) and 0 <= value < self.order

    def _format(self, value):
        return format(value, f"0{self.dimension}b") if self.dimension else ""

    def bits(self, a: Element) -> tuple[int, ...]:
        self.check_member(a)
        return tuple(int(c) for c in self._format(a.value))


def _lehmer_rank(perm: tuple[int, ...]) -> int:
    n = len(perm)
    rank = 0
    remaining = list(range(n))
    for i, v in enumerate(perm):
        pos = remaining.index(v)
        rank += pos * math.factorial(n - 1 - i)
        remaining.pop(pos)
    return rank


def _lehmer_unrank(rank: int, n: int) -> tuple[int, ...]:
    remaining = list(range(n))
    out = []
    for i in range(n):
        f = math.factorial(n - 1 - i)
        pos, rank = divmod(rank, f)
        out.append(remaining.pop(pos))
    return tuple(out)


@dataclass(frozen=True)
class SymmetricGroup(Group):
    degree: int

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_SYMMETRIC_DEGREE:
            raise GroupError(f"symmetric degree must be in 1..{MAX_SYMMETRIC_DEGREE}, got {self.degree}")

    @property
    def order(self) -> int:
        return math.factorial(self.degree)

    @property
    def abelian(self) -> bool:
        return self.degree <= 2

    @property
    def name(self) -> str:
        return f"sym:{self.degree}"

    def _op(self, a, b):
        return tuple(a[i] for i in b)

    def _inv(self, a):
        out = [0] * len(a)
        for i, v in enumerate(a):
            out[v] = i
        return tuple(out)

    def _identity(self):
        return tuple(range(self.degree))

    def _index(self, a):
        return _lehmer_rank(a)

    def _unindex(self, i):
        return _lehmer_unrank(i, self.degree)

    def _normalize(self, value):
        return tuple(value)

    def _check(self, value):
        return len(value) == self.degree and sorted(value) == list(range(self.degree))

    def _format(self, value):
        return "[" + ",".join(map(str, value)) + "]"


@dataclass(frozen=True)
class DirectProduct(Group):
    left: Group
    right: Group
    _order: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_order", self.left.order * self.right.order)

    @property
    def order(self) -> int:
        return self._order

    @property
    def abelian(self) -> bool:
        return self.left.abelian and self.right.abelian

    @property
    def name(self) -> str:
        def wrap(g):
            return f"({g.name})" if isinstance(g, DirectProduct) else g.name

        return f"prod:{wrap(self.left)},{wrap(self.right)}"

    def _op(self, a, b):
        return (self.left._op(a[0], b[0]), self.right._op(a[1], b[1]))

    def _inv(self, a):
        return (self.left._inv(a[0]), self.right._inv(a[1]))

    def _index(self, a):
        return self.left._index(a[0]) * self.right.order + self.right._index(a[1])

    def _unindex(self, i):
        hi, lo = divmod(i, self.right.order)
        return (self.left._unindex(hi), self.right._unindex(lo))

    def _identity(self):
        return (self.left._identity(), self.right._identity())

    def _normalize(self, value):
        a, b = value
        return (self.left._normalize(a), self.right._normalize(b))

    def _check(self, value):
        return len(value) == 2 and self.left._check(value[0]) and self.right._check(value[1])

    def _format(self, value):
        return f"({self.left._format(value[0])}, {self.right._format(value[1])})"

    def pair(self, a: Element, b: Element) -> Element:
        self.left.check_member(a)
        self.right.check_member(b)
        return Element(self, (a.value, b.value))

    def left_of(self, e: Element) -> Element:
        return Element(self.left, e.value[0])

    def right_of(self, e: Element) -> Element:
        return Element(self.right, e.value[1])


def square(g: Group) -> DirectProduct:
    """``G x G``, the state space of Feistel ciphers."""
    return DirectProduct(g, g)


def is_square(g: Group) -> bool:
    return isinstance(g, DirectProduct) and g.left == g.right


# --- group spec grammar -----------------------------------------------------

_ATOM = re.compile(r"(zmod|bits|sym):(\d+)")


def parse_group(spec: str) -> Group:
    """Parse ``zmod:<N>``, ``bits:<n>``, ``sym:<n>`` or ``prod:<spec>,<spec>``.

    Nested products are parenthesised, e.g. ``prod:(prod:zmod:2,zmod:2),sym:3``.
    """
    text = spec.replace(" ", "")
    group, pos = _parse(text, 0)
    if pos != len(text):
        raise GroupError(f"trailing characters in group spec {spec!r} at column {pos}")
    return group


def _parse(text: str, pos: int) -> tuple[Group, int]:
    if text.startswith("(", pos):
        g, pos = _parse(text, pos + 1)
        if not text.startswith(")", pos):
            raise GroupError(f"expected ')' at column {pos} in {text!r}")
        return g, pos + 1
    if text.startswith("prod:", pos):
        a, pos = _parse(text, pos + 5)
        if not text.startswith(",", pos):
            raise GroupError(f"expected ',' at column {pos} in {text!r}")
        b, pos = _parse(text, pos + 1)
        return DirectProduct(a, b), pos
    m = _ATOM.match(text, pos)
    if not m:
        raise GroupError(f"cannot parse group at column {pos} in {text!r}")
    kind, n = m.group(1), int(m.group(2))
    if kind == "zmod":
        g: Group = CyclicGroup(n)
    elif kind == "bits":
        g = BitStringGroup(n)
    else:
        g = SymmetricGroup(n)
    return g, m.end()
