"""Security games, the concrete attacks against the group ciphers, and advantage estimation.

A *world* is a factory ``rng -> OracleBundle``; a *distinguisher* is a
callable ``(oracles, rng) -> 0 | 1``.  Every trial gets its own substream
labelled by world and trial index, so results do not depend on the order in
which trials are executed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .even_mansour import EvenMansour
from .feistel import Feistel, Psi, PsiKey
from .groups import DirectProduct, Element, Group, square
from .oracles import LazyFunction, LazyPermutation, sample_distinct, sample_excluding
from .shuffles import ShuffleParams, sc_inverse, sc_shuffle

CONFIDENCE = 0.95


class QueryBudgetExceeded(RuntimeError):
    def __init__(self, oracle: str, limit: int):
        super().__init__(f"query budget exceeded on oracle {oracle!r} (limit {limit})")
        self.oracle = oracle
        self.limit = limit


class OracleBundle:
    """Named oracles with per-oracle counters and optional pooled budgets.

    Budget keys are oracle names or ``+``-joined pools such as ``"E+D"``;
    a pool's limit caps the combined number of queries to its members.
    Oracles are reachable as ``bundle["P"]`` or ``bundle.P``.
    """

    def __init__(
        self,
        group: Group,
        oracles: dict[str, Callable],
        forward: str = "E",
        backward: Optional[str] = "D",
        budgets: Optional[dict[str, int]] = None,
    ):
        self.group = group
        self._raw = dict(oracles)
        self.forward_name = forward
        self.backward_name = backward if backward in self._raw else None
        self.counts = {name: 0 for name in self._raw}
        self.budgets: dict[str, int] = {}
        self._pools: dict[str, list[str]] = {name: [] for name in self._raw}
        self._wrapped = {name: self._wrap(name) for name in self._raw}
        if budgets:
            self.set_budgets(budgets)

    def set_budgets(self, budgets: dict[str, int]) -> None:
        for key, limit in budgets.items():
            members = key.split("+")
            unknown = [m for m in members if m not in self._raw]
            if unknown:
                raise KeyError(f"budget names unknown oracle(s) {unknown}")
            if limit < 0:
                raise ValueError("budgets must be nonnegative")
            self.budgets[key] = limit
            for m in members:
                if key not in self._pools[m]:
                    self._pools[m].append(key)

    def used(self, key: str) -> int:
        return sum(self.counts[m] for m in key.split("+"))

    def _wrap(self, name: str) -> Callable:
        fn = self._raw[name]

        def call(x):
            for pool in self._pools[name]:
                if self.used(pool) >= self.budgets[pool]:
                    raise QueryBudgetExceeded(pool, self.budgets[pool])
            self.counts[name] += 1
            return fn(x)

        return call

    def __getitem__(self, name: str) -> Callable:
        return self._wrapped[name]

    def __getattr__(self, name: str):
        try:
            return self.__dict__["_wrapped"][name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def forward(self) -> Callable:
        return self._wrapped[self.forward_name]

    @property
    def backward(self) -> Callable:
        if self.backward_name is None:
            raise AttributeError("this game has no inverse oracle")
        return self._wrapped[self.backward_name]


def hoeffding_halfwidth(trials: int, confidence: float = CONFIDENCE) -> float:
    """Two-sided Hoeffding half-width ``sqrt(ln(2/alpha) / (2 n))``."""
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * trials))


@dataclass
class AdvantageEstimate:
    p_real: float
    p_ideal: float
    trials: int
    ci_halfwidth: float
    bound_value: Optional[float] = None
    bound_name: str = ""
    max_counts: dict = field(default_factory=dict)

    @property
    def advantage(self) -> float:
        return abs(self.p_real - self.p_ideal)

    def within_bound(self) -> bool:
        if self.bound_value is None:
            raise ValueError("no bound attached")
        return self.advantage <= self.bound_value + self.ci_halfwidth


World = Callable[[object], OracleBundle]
Distinguisher = Callable[[OracleBundle, object], int]


def acceptance_rate(world: World, distinguisher: Distinguisher, trials: int, rng, label: str = "world",
                    budgets: Optional[dict[str, int]] = None, counts: Optional[dict] = None) -> float:
    hits = 0
    for t in range(trials):
        sub = rng.spawn(f"{label}/{t}")
        oracles = world(sub.spawn("oracles"))
        if budgets:
            oracles.set_budgets(budgets)
        hits += int(distinguisher(oracles, sub.spawn("adversary")))
        if counts is not None:
            for k, v in oracles.counts.items():
                counts[k] = max(counts.get(k, 0), v)
    return hits / trials


def run_distinguisher_game(
    real_world: World,
    ideal_world: World,
    distinguisher: Distinguisher,
    trials: int,
    rng,
    budgets: Optional[dict[str, int]] = None,
    bound: Optional[float] = None,
    bound_name: str = "",
) -> AdvantageEstimate:
    """Run ``trials`` independent trials in each world and report both acceptance rates."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts: dict = {}
    p_real = acceptance_rate(real_world, distinguisher, trials, rng, "real", budgets, counts)
    p_ideal = acceptance_rate(ideal_world, distinguisher, trials, rng, "ideal", budgets, counts)
    return AdvantageEstimate(p_real, p_ideal, trials, hoeffding_halfwidth(trials), bound, bound_name, counts)


# --- worlds ----------------------------------------------------------------------------


def em_real_world(group: Group) -> World:
    """Even-Mansour with a random key and lazy public permutation."""

    def make(rng) -> OracleBundle:
        P = LazyPermutation(group, rng.spawn("P"))
        cipher = EvenMansour(P, group.sample(rng.spawn("key")))
        return OracleBundle(group, {"E": cipher.encrypt, "D": cipher.decrypt, "P": P.forward, "Pinv": P.inverse})

    return make


def em_ideal_world(group: Group) -> World:
    def make(rng) -> OracleBundle:
        P = LazyPermutation(group, rng.spawn("P"))
        pi = LazyPermutation(group, rng.spawn("pi"))
        return OracleBundle(group, {"E": pi.forward, "D": pi.inverse, "P": P.forward, "Pinv": P.inverse})

    return make


def permutation_world(group: Group) -> World:
    """A bare lazy random permutation with its inverse."""

    def make(rng) -> OracleBundle:
        pi = LazyPermutation(group, rng)
        return OracleBundle(group, {"E": pi.forward, "D": pi.inverse})

    return make


def feistel_world(base: Group, rounds: int) -> World:
    """Feistel on ``base x base`` with independent lazy random round functions."""
    g2 = square(base)

    def make(rng) -> OracleBundle:
        fs = [LazyFunction(base, base, rng.spawn(f"f{i}")) for i in range(rounds)]
        F = Feistel(g2, fs)
        return OracleBundle(g2, {"E": F.forward, "D": F.inverse})

    return make


def psi_real_world(base: Group) -> World:
    g2 = square(base)

    def make(rng) -> OracleBundle:
        f = LazyFunction(base, base, rng.spawn("f"))
        g = LazyFunction(base, base, rng.spawn("g"))
        psi = Psi(g2, f, g, PsiKey.sample(base, rng.spawn("key")))
        return OracleBundle(g2, {"E": psi.forward, "D": psi.inverse, "f": f, "g": g})

    return make


def psi_ideal_world(base: Group) -> World:
    g2 = square(base)

    def make(rng) -> OracleBundle:
        f = LazyFunction(base, base, rng.spawn("f"))
        g = LazyFunction(base, base, rng.spawn("g"))
        R = LazyPermutation(g2, rng.spawn("R"))
        return OracleBundle(g2, {"E": R.forward, "D": R.inverse, "f": f, "g": g})

    return make


def sc_world(group: Group, rounds: int) -> World:
    """Scoot-or-Not with random keys and lazy random round predicates."""

    def make(rng) -> OracleBundle:
        params = ShuffleParams.random(group, rounds, rng)
        return OracleBundle(group, {"E": lambda x: sc_shuffle(params, x), "D": lambda y: sc_inverse(params, y)})

    return make


# --- distinguishers -----------------------------------------------------------------------


def constant_distinguisher(oracles: OracleBundle, rng) -> int:
    return 1


def coin_distinguisher(oracles: OracleBundle, rng) -> int:
    return rng.bit()


def feistel1_distinguisher(oracles: OracleBundle, rng) -> int:
    """One query; a single round leaks the input's right half as the output's left half."""
    s = oracles.group.sample(rng)
    return int(oracles.forward(s).left == s.right)


def feistel2_distinguisher(oracles: OracleBundle, rng) -> int:
    """Two queries sharing a right half; two rounds reveal the first left input."""
    g2: DirectProduct = oracles.group
    base = g2.left
    r0 = base.sample(rng)
    first = oracles.forward(g2.pair(base.identity, r0))
    l0 = sample_excluding(base, [base.identity], rng)
    second = oracles.forward(g2.pair(l0, r0))
    return int(second.left * first.left.inverse() == l0)


def feistel3_sprp_attack(enc: Callable, dec: Callable, group: DirectProduct, rng,
                         inputs: Optional[tuple[Element, Element, Element]] = None) -> int:
    """Two encryptions and one decryption; accept iff the recovered right half matches.

    ``inputs`` fixes ``(L0, L0', R0)``; otherwise they are drawn with ``L0 != L0'``.
    """
    base = group.left
    if inputs is None:
        l0, l0p = sample_distinct(base, 2, rng)
        r0 = base.sample(rng)
    else:
        l0, l0p, r0 = inputs
        if l0 == l0p:
            raise ValueError("the two left inputs must differ")
    y = enc(group.pair(l0, r0))
    yp = enc(group.pair(l0p, r0))
    z = dec(group.pair(yp.left, l0 * l0p.inverse() * yp.right))
    return int(z.right == yp.left * y.left.inverse() * r0)


def feistel3_distinguisher(oracles: OracleBundle, rng) -> int:
    return feistel3_sprp_attack(oracles.forward, oracles.backward, oracles.group, rng)


def sc_translation_distinguisher(oracles: OracleBundle, rng) -> int:
    """Accept iff ``c1 * m1^-1 == c2 * m2^-1`` for two distinct queries."""
    m1, m2 = sample_distinct(oracles.group, 2, rng)
    c1 = oracles.forward(m1)
    c2 = oracles.forward(m2)
    return int(c1 * m1.inverse() == c2 * m2.inverse())


# --- slide attack -------------------------------------------------------------------------------


def _fresh_point(group: Group, used, rng) -> Element:
    while True:
        v = group.sample(rng)
        if v not in used:
            return v


def slide_candidates(group: Group, xs, ex, ys, py, same_index: bool = False):
    """Index pairs ``(i, j)`` with ``E(x_i) * y_j^-1 == P(y_j) * x_i^-1``.

    Abelian groups use a hash join on ``E(x) * x`` against ``P(y) * y``
    (the same condition rearranged); other groups fall back to a pair scan.
    ``same_index`` restricts to ``i == j``.
    """
    if same_index:
        for i in range(len(xs)):
            if ex[i] * ys[i].inverse() == py[i] * xs[i].inverse():
                yield i, i
        return
    if group.abelian:
        table: dict[Element, list[int]] = {}
        for i, (x, e) in enumerate(zip(xs, ex)):
            table.setdefault(e * x, []).append(i)
        for j, (y, p) in enumerate(zip(ys, py)):
            for i in table.get(p * y, ()):
                yield i, j
        return
    xinv = [x.inverse() for x in xs]
    yinv = [y.inverse() for y in ys]
    for j in range(len(ys)):
        for i in range(len(xs)):
            if ex[i] * yinv[j] == py[j] * xinv[i]:
                yield i, j


def slide_attack(group: Group, E: Callable, P: Callable, d: int, rng,
                 same_index: bool = False, max_candidates: Optional[int] = None,
                 verify_points: int = 1) -> Optional[Element]:
    """Recover the Even-Mansour key from ``d`` E-queries and ``d`` P-queries, or return None.

    Each candidate ``k = x_i^-1 * y_j`` is checked on ``verify_points`` fresh
    points ``v`` (``E(v) == P(v * k) * k``) before it is returned.  A wrong
    candidate survives one check with probability about ``1/|G|``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if verify_points < 1:
        raise ValueError("verify_points must be >= 1")
    xs = sample_distinct(group, d, rng)
    ys = sample_distinct(group, d, rng)
    ex = [E(x) for x in xs]
    py = [P(y) for y in ys]
    tried = 0
    used = set(xs)
    for i, j in slide_candidates(group, xs, ex, ys, py, same_index):
        if max_candidates is not None and tried >= max_candidates:
            break
        tried += 1
        k = xs[i].inverse() * ys[j]
        for _ in range(verify_points):
            v = _fresh_point(group, used, rng)
            used.add(v)
            if E(v) != P(v * k) * k:
                break
        else:
            return k
    return None


def slide_distinguisher(d: int, same_index: bool = False) -> Distinguisher:
    """Accept iff the slide attack finds a verified key; one candidate is verified at most."""

    def run(oracles: OracleBundle, rng) -> int:
        return int(slide_attack(oracles.group, oracles.E, oracles.P, d, rng, same_index, max_candidates=1) is not None)

    return run


# --- forgery and cracking games -----------------------------------------------------------------

REFUSED = None  # what the decryption oracle returns on the challenge ciphertext


def run_efp_game(group: Group, adversary: Callable, rng, s: int, t: int) -> bool:
    """Existential forgery: succeed with a valid pair not seen in any E/D answer."""
    P = LazyPermutation(group, rng.spawn("P"))
    cipher = EvenMansour(P, group.sample(rng.spawn("key")))
    seen: set[tuple[Element, Element]] = set()

    def E(m):
        c = cipher.encrypt(m)
        seen.add((m, c))
        return c

    def D(c):
        m = cipher.decrypt(c)
        seen.add((m, c))
        return m

    oracles = OracleBundle(group, {"E": E, "D": D, "P": P.forward, "Pinv": P.inverse},
                           budgets={"E+D": s, "P+Pinv": t})
    m, c = adversary(oracles, rng.spawn("adversary"))
    return (m, c) not in seen and cipher.encrypt(m) == c


def run_cp_game(group: Group, adversary: Callable, rng, s: int, t: int) -> bool:
    """Cracking: given ``c0 = E(m0)`` for uniform ``m0``, output ``m0``; D refuses ``c0``."""
    P = LazyPermutation(group, rng.spawn("P"))
    cipher = EvenMansour(P, group.sample(rng.spawn("key")))
    m0 = group.sample(rng.spawn("challenge"))
    c0 = cipher.encrypt(m0)

    def D(c):
        return REFUSED if c == c0 else cipher.decrypt(c)

    oracles = OracleBundle(group, {"E": cipher.encrypt, "D": D, "P": P.forward, "Pinv": P.inverse},
                           budgets={"E+D": s, "P+Pinv": t})
    return adversary(oracles, c0, rng.spawn("adversary")) == m0


def random_forger(oracles: OracleBundle, rng):
    g = oracles.group
    return g.sample(rng), g.sample(rng)


def slide_forger(d: int) -> Callable:
    """Recover the key by sliding, then encrypt a fresh message with one P query."""

    def forge(oracles: OracleBundle, rng):
        g = oracles.group
        asked: set[Element] = set()

        def E(m):
            asked.add(m)
            return oracles.E(m)

        k = slide_attack(g, E, oracles.P, d, rng, max_candidates=1)
        if k is None or len(asked) >= g.order:
            return random_forger(oracles, rng)
        # an already-queried message would not count as a forgery
        m = _fresh_point(g, asked, rng)
        return m, oracles.P(m * k) * k

    return forge


def random_cracker(oracles: OracleBundle, c0: Element, rng) -> Element:
    return oracles.group.sample(rng)


def slide_cracker(d: int) -> Callable:
    """Recover the key by sliding, then decrypt the challenge with one inverse-P query."""

    def crack(oracles: OracleBundle, c0: Element, rng) -> Element:
        g = oracles.group
        k = slide_attack(g, oracles.E, oracles.P, d, rng, max_candidates=1)
        if k is None:
            return g.sample(rng)
        kinv = k.inverse()
        return oracles.Pinv(c0 * kinv) * kinv

    return crack
