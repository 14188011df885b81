"""Executable oracle games for the Even-Mansour security argument, bad-event
detectors for the Feistel-based cipher Psi, and helpers for exact checks.

Games R, X, X' and R' answer E/D/P/Pinv queries while tracking a single
bad flag.  Following the usual shorthand, "P(m*k) in T^2" means P is
already defined at m*k, i.e. ``m*k in T^1``; similarly for the other
membership tests.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .feistel import PsiKey, psi_encrypt
from .groups import DirectProduct, Element, Group, GroupError, square
from .oracles import enumerate_outcomes, sample_distinct, sample_excluding

GAMES = ("R", "X", "Xprime", "Rprime")
QUERY_KINDS = ("E", "D", "P", "Pinv")


class RepeatedQueryError(ValueError):
    """The adversary asked something whose answer it already knows."""


# --- transcripts ---------------------------------------------------------------


@dataclass
class TranscriptSets:
    S: list[tuple[Element, Element]] = field(default_factory=list)
    T: list[tuple[Element, Element]] = field(default_factory=list)

    @property
    def S1(self) -> set[Element]:
        return {m for m, _ in self.S}

    @property
    def S2(self) -> set[Element]:
        return {c for _, c in self.S}

    @property
    def T1(self) -> set[Element]:
        return {x for x, _ in self.T}

    @property
    def T2(self) -> set[Element]:
        return {y for _, y in self.T}

    def is_consistent(self) -> bool:
        return all(
            len({a for a, _ in pairs}) == len(pairs) and len({b for _, b in pairs}) == len(pairs)
            for pairs in (self.S, self.T)
        )


def is_bad_key(k: Element, sets: TranscriptSets) -> bool:
    """True iff ``m*k == x`` or ``c*k^-1 == y`` for some ``(m, c) in S``, ``(x, y) in T``."""
    kinv = k.inverse()
    return any(m * k == x or c * kinv == y for m, c in sets.S for x, y in sets.T)


def bad_keys(sets: TranscriptSets) -> set[Element]:
    """All bad keys, solved directly: ``k = m^-1 x`` or ``k = y^-1 c``."""
    out = set()
    for m, c in sets.S:
        for x, y in sets.T:
            out.add(m.inverse() * x)
            out.add(y.inverse() * c)
    return out


def count_bad_keys(group: Group, sets: TranscriptSets) -> int:
    """Count bad keys by testing every element of the group."""
    return sum(1 for k in group.enumerate() if is_bad_key(k, sets))


def random_transcript(group: Group, s: int, t: int, rng) -> TranscriptSets:
    """Consistent random transcripts: s cipher pairs and t permutation pairs."""
    ms, cs = sample_distinct(group, s, rng), sample_distinct(group, s, rng)
    xs, ys = sample_distinct(group, t, rng), sample_distinct(group, t, rng)
    return TranscriptSets(list(zip(ms, cs)), list(zip(xs, ys)))


# --- games ----------------------------------------------------------------------


@dataclass
class GameState:
    which: str
    group: Group
    sets: TranscriptSets = field(default_factory=TranscriptSets)
    key: Optional[Element] = None
    bad: bool = False
    finalized: bool = False
    # the single lazily defined permutation of Game X'
    p_fwd: dict = field(default_factory=dict)
    p_bwd: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.which not in GAMES:
            raise ValueError(f"unknown game {self.which!r}; expected one of {GAMES}")

    def set_bad(self) -> None:
        self.bad = True


def new_game(which: str, group: Group, rng) -> GameState:
    """Start a game; every game except R' draws its key up front."""
    state = GameState(which, group)
    if which != "Rprime":
        state.key = group.sample(rng)
    return state


def _check_fresh(state: GameState, kind: str, v: Element) -> None:
    if kind not in QUERY_KINDS:
        raise ValueError(f"unknown query kind {kind!r}")
    state.group.check_member(v)
    sets = state.sets
    seen = {"E": sets.S1, "D": sets.S2, "P": sets.T1, "Pinv": sets.T2}[kind]
    if v in seen:
        raise RepeatedQueryError(f"{kind} query on {v!r} repeats a known pair")


def _record(state: GameState, kind: str, v: Element, answer: Element) -> Element:
    if kind == "E":
        state.sets.S.append((v, answer))
    elif kind == "D":
        state.sets.S.append((answer, v))
    elif kind == "P":
        state.sets.T.append((v, answer))
    else:
        state.sets.T.append((answer, v))
    return answer


def _lookup(pairs, value: Element, side: int) -> Optional[Element]:
    for pair in pairs:
        if pair[side] == value:
            return pair[1 - side]
    return None


def _step_r(state: GameState, kind: str, v: Element, rng) -> Element:
    g, s, k = state.group, state.sets, state.key
    kinv = k.inverse()
    if kind == "E":
        c = sample_excluding(g, s.S2, rng)
        if v * k in s.T1 or c * kinv in s.T2:
            state.set_bad()
        return c
    if kind == "D":
        m = sample_excluding(g, s.S1, rng)
        if v * kinv in s.T2 or m * k in s.T1:
            state.set_bad()
        return m
    if kind == "P":
        y = sample_excluding(g, s.T2, rng)
        if v * kinv in s.S1 or y * k in s.S2:
            state.set_bad()
        return y
    x = sample_excluding(g, s.T1, rng)
    if v * k in s.S2 or x * kinv in s.S1:
        state.set_bad()
    return x


def _step_x(state: GameState, kind: str, v: Element, rng, exact: bool) -> Element:
    """Game X: like R, but answers stay consistent with the hidden key.

    A forced redefinition copies the value implied by the other table.
    Otherwise a draw landing on a value that would expose the key sets the
    flag and is redrawn (Monte Carlo) or replaced by one draw from the
    renormalised set of acceptable values (``exact=True``); both give the
    same distribution.
    """
    g, s, k = state.group, state.sets, state.key
    kinv = k.inverse()
    if kind == "E":
        excluded, forced = s.S2, _lookup(s.T, v * k, 0)
        fix = (lambda y: y * k) if forced is not None else None
        hits = lambda c: c * kinv in s.T2
    elif kind == "D":
        excluded, forced = s.S1, _lookup(s.T, v * kinv, 1)
        fix = (lambda x: x * kinv) if forced is not None else None
        hits = lambda m: m * k in s.T1
    elif kind == "P":
        excluded, forced = s.T2, _lookup(s.S, v * kinv, 0)
        fix = (lambda c: c * kinv) if forced is not None else None
        hits = lambda y: y * k in s.S2
    else:
        excluded, forced = s.T1, _lookup(s.S, v * k, 1)
        fix = (lambda m: m * k) if forced is not None else None
        hits = lambda x: x * kinv in s.S1

    ans = sample_excluding(g, excluded, rng)
    if fix is not None:
        state.set_bad()
        return fix(forced)
    if not hits(ans):
        return ans
    state.set_bad()
    if exact:
        blocked = set(excluded) | {a for a in g.enumerate() if hits(a)}
        return sample_excluding(g, blocked, rng)
    while hits(ans):
        ans = sample_excluding(g, excluded, rng)
    return ans


def _step_xprime(state: GameState, kind: str, v: Element, rng) -> Element:
    g, k = state.group, state.key
    kinv = k.inverse()
    fwd, bwd = state.p_fwd, state.p_bwd

    def p(x):
        if x not in fwd:
            y = sample_excluding(g, bwd.keys(), rng)
            fwd[x], bwd[y] = y, x
        return fwd[x]

    def pinv(y):
        if y not in bwd:
            x = sample_excluding(g, fwd.keys(), rng)
            fwd[x], bwd[y] = y, x
        return bwd[y]

    if kind == "E":
        return p(v * k) * k
    if kind == "D":
        return pinv(v * kinv) * kinv
    if kind == "P":
        return p(v)
    return pinv(v)


def game_step(state: GameState, kind: str, v: Element, rng, exact: bool = False) -> Element:
    """Answer one fresh query ``kind(v)`` in the state's game and record the pair."""
    if state.finalized:
        raise RuntimeError("game already finalized")
    _check_fresh(state, kind, v)
    if state.which == "R":
        ans = _step_r(state, kind, v, rng)
    elif state.which == "X":
        ans = _step_x(state, kind, v, rng, exact)
    elif state.which == "Xprime":
        ans = _step_xprime(state, kind, v, rng)
    else:
        excluded = {"E": state.sets.S2, "D": state.sets.S1, "P": state.sets.T2, "Pinv": state.sets.T1}[kind]
        ans = sample_excluding(state.group, excluded, rng)
    return _record(state, kind, v, ans)


def finalize(state: GameState, rng) -> GameState:
    """End of game; R' draws its key here and sets the flag iff that key is bad."""
    if state.which == "Rprime" and not state.finalized:
        state.key = state.group.sample(rng)
        if is_bad_key(state.key, state.sets):
            state.set_bad()
    state.finalized = True
    return state


# --- scripted adversaries ---------------------------------------------------------------


@dataclass(frozen=True)
class Script:
    """A deterministic two-query adversary.

    ``second`` maps the first answer to the next query.  Scripts never
    repeat a query whose answer they already know.
    """

    name: str
    first: tuple[str, int]
    second: Callable[[Element, Group], tuple[str, Element]]


def _shift(a: Element, g: Group) -> Element:
    return g.unindex((a.index() + 1) % g.order)


SCRIPT_CATALOG: tuple[Script, ...] = (
    Script("E-E", ("E", 0), lambda a, g: ("E", g.unindex(1))),
    Script("E-D", ("E", 0), lambda a, g: ("D", _shift(a, g))),
    Script("E-P", ("E", 0), lambda a, g: ("P", a)),
    Script("E-Pinv", ("E", 0), lambda a, g: ("Pinv", a)),
    Script("D-E", ("D", 0), lambda a, g: ("E", _shift(a, g))),
    Script("P-Pinv", ("P", 0), lambda a, g: ("Pinv", _shift(a, g))),
    Script("P-E", ("P", 1), lambda a, g: ("E", a)),
    Script("Pinv-D", ("Pinv", 0), lambda a, g: ("D", a)),
    Script("D-Pinv", ("D", 1), lambda a, g: ("Pinv", a)),
)


def run_script(which: str, script: Script, group: Group, rng, exact: bool = False) -> GameState:
    state = new_game(which, group, rng)
    kind, idx = script.first
    a = game_step(state, kind, group.unindex(idx), rng, exact)
    kind2, v2 = script.second(a, group)
    game_step(state, kind2, v2, rng, exact)
    return finalize(state, rng)


def transcript_distribution(which: str, script: Script, group: Group, include_key: bool = False,
                            max_order: int = 5) -> dict[tuple, Fraction]:
    """Exact law of the adversary's view (the two answers) under a game.

    With ``include_key`` the hidden key is added to the outcome, which
    gives the stronger per-key comparison.
    """
    if group.order > max_order:
        raise GroupError(f"exact transcript enumeration is limited to |G| <= {max_order}")

    def experiment(rng):
        state = new_game(which, group, rng)
        kind, idx = script.first
        a1 = game_step(state, kind, group.unindex(idx), rng, exact=True)
        kind2, v2 = script.second(a1, group)
        a2 = game_step(state, kind2, v2, rng, exact=True)
        finalize(state, rng)
        view = (a1.index(), a2.index())
        return view + (state.key.index(),) if include_key else view

    return enumerate_outcomes(experiment)


def bad_probability(which: str, script: Script, group: Group, max_order: int = 5) -> Fraction:
    """Exact probability that the game ends with the flag set."""
    if group.order > max_order:
        raise GroupError(f"exact enumeration is limited to |G| <= {max_order}")
    dist = enumerate_outcomes(lambda rng: run_script(which, script, group, rng, exact=True).bad)
    return dist.get(True, Fraction(0))


# --- Psi transcripts and bad events ----------------------------------------------------------


@dataclass
class PsiTranscript:
    """Cipher pairs over ``G x G`` plus the f- and g-oracle pairs over G."""

    group: DirectProduct
    cipher: list[tuple[Element, Element]] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)
    f_pairs: list[tuple[Element, Element]] = field(default_factory=list)
    g_pairs: list[tuple[Element, Element]] = field(default_factory=list)

    @property
    def base(self) -> Group:
        return self.group.left

    @property
    def qc(self) -> int:
        return len(self.cipher)

    def is_consistent(self) -> bool:
        xs = [x for x, _ in self.cipher]
        ys = [y for _, y in self.cipher]
        fx = [x for x, _ in self.f_pairs]
        gx = [x for x, _ in self.g_pairs]
        return all(len(set(v)) == len(v) for v in (xs, ys, fx, gx))


def random_psi_transcript(base: Group, qc: int, qf: int, qg: int, rng) -> PsiTranscript:
    g2 = square(base)
    xs, ys = sample_distinct(g2, qc, rng), sample_distinct(g2, qc, rng)
    tags = ["+" if rng.bit() else "-" for _ in range(qc)]
    fx = sample_distinct(base, qf, rng)
    gx = sample_distinct(base, qg, rng)
    return PsiTranscript(
        g2,
        list(zip(xs, ys)),
        tags,
        [(x, base.sample(rng)) for x in fx],
        [(x, base.sample(rng)) for x in gx],
    )


def badg_events(sigma: PsiTranscript, k: PsiKey) -> tuple[bool, bool]:
    """(first-round g input hits a g query, last-round g input hits a g query)."""
    g_inputs = {x for x, _ in sigma.g_pairs}
    kl_inv = k.kL.inverse()
    bg1 = any(x.right * k.kR in g_inputs for x, _ in sigma.cipher)
    bg2 = any(y.left * kl_inv in g_inputs for _, y in sigma.cipher)
    return bg1, bg2


def badg_detect(sigma: PsiTranscript, k: PsiKey) -> bool:
    return any(badg_events(sigma, k))


def f_inputs(sigma: PsiTranscript, k: PsiKey, g: Callable) -> tuple[list[Element], list[Element]]:
    """The inputs to f in rounds two and three implied by each cipher pair.

    ``X = x^L k^L g(x^R k^R)`` from the input side and
    ``Y = y^R (k^R)^-1 g(y^L (k^L)^-1)^-1`` from the output side.
    """
    kl_inv, kr_inv = k.kL.inverse(), k.kR.inverse()
    X = [x.left * k.kL * g(x.right * k.kR) for x, _ in sigma.cipher]
    Y = [y.right * kr_inv * g(y.left * kl_inv).inverse() for _, y in sigma.cipher]
    return X, Y


def bad_events(sigma: PsiTranscript, k: PsiKey, g: Callable) -> tuple[bool, bool, bool, bool, bool]:
    X, Y = f_inputs(sigma, k, g)
    f_in = {x for x, _ in sigma.f_pairs}
    b1 = len(set(X)) < len(X)
    b2 = len(set(Y)) < len(Y)
    b3 = bool(set(X) & set(Y))
    b4 = any(x in f_in for x in X)
    b5 = any(y in f_in for y in Y)
    return b1, b2, b3, b4, b5


def bad_detect(sigma: PsiTranscript, k: PsiKey, g: Callable) -> bool:
    return any(bad_events(sigma, k, g))


class ForcingConflict(ValueError):
    pass


def force_round_function(sigma: PsiTranscript, k: PsiKey, g: Callable) -> dict[Element, Element]:
    """Build the partial f that makes Psi_k^{f,g} reproduce every cipher pair.

    Each pair pins two values: ``f(X) = (x^R k^R)^-1 Y`` and
    ``f(Y) = X^-1 y^L (k^L)^-1``.  The f-oracle pairs are included as well.
    Raises :class:`ForcingConflict` if two constraints disagree, which can
    only happen when one of the bad events holds.
    """
    X, Y = f_inputs(sigma, k, g)
    table: dict[Element, Element] = {}

    def pin(a, b):
        if a in table and table[a] != b:
            raise ForcingConflict(f"f is pinned twice at {a!r}")
        table[a] = b

    for x, y in sigma.f_pairs:
        pin(x, y)
    kl_inv = k.kL.inverse()
    for (x, y), xi, yi in zip(sigma.cipher, X, Y):
        pin(xi, (x.right * k.kR).inverse() * yi)
        pin(yi, xi.inverse() * y.left * kl_inv)
    return table


def replays_transcript(sigma: PsiTranscript, k: PsiKey, g: Callable, f_table: dict) -> bool:
    f = f_table.__getitem__
    return all(psi_encrypt(f, g, k, x) == y for x, y in sigma.cipher)


# --- the idealised cipher oracle with lazy repeats ---------------------------------------------


class RTilde:
    """Cipher oracle answering fresh queries uniformly on ``G x G``.

    Repeated inputs (or outputs, for inverse queries) replay the earlier
    answer; nothing else is remembered, so outputs may collide.
    """

    def __init__(self, group: Group, rng):
        self.group = group
        self.rng = rng
        self.pairs: list[tuple[Element, Element]] = []

    def forward(self, x: Element) -> Element:
        y = _lookup(self.pairs, x, 0)
        if y is None:
            y = self.group.sample(self.rng)
        self.pairs.append((x, y))
        return y

    def inverse(self, y: Element) -> Element:
        x = _lookup(self.pairs, y, 1)
        if x is None:
            x = self.group.sample(self.rng)
        self.pairs.append((x, y))
        return x

    def inconsistent(self) -> bool:
        for i, (xi, yi) in enumerate(self.pairs):
            for xj, yj in self.pairs[i + 1 :]:
                if (xi == xj) != (yi == yj):
                    return True
        return False


def rtilde_trial(group: Group, qc: int, rng) -> bool:
    """One run of a fresh-query adversary against RTilde; True if it saw inconsistency."""
    oracle = RTilde(group, rng.spawn("oracle"))
    adv = rng.spawn("adversary")
    for _ in range(qc):
        if adv.bit():
            used = {x for x, _ in oracle.pairs}
            oracle.forward(sample_excluding(group, used, adv))
        else:
            used = {y for _, y in oracle.pairs}
            oracle.inverse(sample_excluding(group, used, adv))
    return oracle.inconsistent()


# --- bound evaluators ------------------------------------------------------------------------


def _tail(qc: int, n: int) -> float:
    return 2 * math.comb(qc, 2) * (2 / n + 1 / n**2)


def psi_bound_stated(qc: int, qf: int, qg: int, n: int) -> float:
    """Distinguishing bound in its headline form."""
    return (2 * qc**2 + 4 * qf * qc + 4 * qg * qc + qc**2 - qc) / n + _tail(qc, n)


def psi_bound_proof_final(qc: int, qf: int, qg: int, n: int) -> float:
    """The same bound as it comes out at the end of the proof (larger by ``qc^2 - qc``)."""
    return (2 * qc**2 + 4 * qg * qc + 4 * qf * qc + 2 * qc**2 - 2 * qc) / n + _tail(qc, n)


def psi_bound_total(q: int, n: int) -> float:
    """Total-query form ``2(3q^2 - 2q)/n + (q^2 - q)/n^2``."""
    return 2 * (3 * q**2 - 2 * q) / n + (q**2 - q) / n**2


def psi_bound_total_informal(q: int, n: int) -> float:
    """Total-query form ``2(3q^2 - q)/n + (q^2 - q)/n^2`` from the informal summary."""
    return 2 * (3 * q**2 - q) / n + (q**2 - q) / n**2


def badg_bound(qc: int, qg: int, n: int) -> float:
    return 2 * qg * qc / n


def bad_bound(qc: int, qf: int, n: int) -> float:
    return (qc**2 + 2 * qf * qc + 2 * math.comb(qc, 2)) / n


def rtilde_bound(qc: int, n2: int) -> float:
    """``C(qc, 2) / |G x G|``."""
    return math.comb(qc, 2) / n2


def bad_key_fraction_bound(s: int, t: int, n: int) -> float:
    return 2 * s * t / n


# --- lemma-check records --------------------------------------------------------------------


@dataclass
class LemmaCheck:
    lemma: str
    instance: str
    lhs: object
    rhs: object
    bound: object
    verdict: str

    def to_json(self) -> str:
        return json.dumps({k: _jsonable(v) for k, v in asdict(self).items()}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> LemmaCheck:
        return cls(**json.loads(text))


def _jsonable(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def check_game_equivalence(group: Group, scripts: Iterable[Script] = SCRIPT_CATALOG) -> list[LemmaCheck]:
    """Exact comparisons: X vs X' transcript laws and R vs R' bad probabilities."""
    out = []
    for sc in scripts:
        dx = transcript_distribution("X", sc, group)
        dxp = transcript_distribution("Xprime", sc, group)
        out.append(LemmaCheck("game-x-equals-xprime", f"{group.name}/{sc.name}",
                              len(dx), len(dxp), None, "PASS" if dx == dxp else "FAIL"))
        pr, prp = bad_probability("R", sc, group), bad_probability("Rprime", sc, group)
        out.append(LemmaCheck("bad-r-equals-rprime", f"{group.name}/{sc.name}",
                              pr, prp, None, "PASS" if pr == prp else "FAIL"))
    return out
