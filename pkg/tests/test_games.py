from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from grouplab.feistel import PsiKey, psi_encrypt
from grouplab.games import (
    SCRIPT_CATALOG,
    ForcingConflict,
    LemmaCheck,
    PsiTranscript,
    RepeatedQueryError,
    RTilde,
    TranscriptSets,
    bad_bound,
    bad_detect,
    bad_events,
    bad_key_fraction_bound,
    bad_keys,
    bad_probability,
    badg_bound,
    badg_detect,
    badg_events,
    check_game_equivalence,
    count_bad_keys,
    f_inputs,
    finalize,
    force_round_function,
    game_step,
    is_bad_key,
    new_game,
    psi_bound_proof_final,
    psi_bound_stated,
    psi_bound_total,
    psi_bound_total_informal,
    random_psi_transcript,
    random_transcript,
    replays_transcript,
    rtilde_bound,
    rtilde_trial,
    run_script,
    transcript_distribution,
)
from grouplab.groups import BitStringGroup, CyclicGroup, GroupError, SymmetricGroup, square
from grouplab.oracles import LazyFunction, RandomStream, enumerate_outcomes

from reference import bad_key_set_cyclic


class ScriptedRandomness:
    """Feeds a fixed list of ``randbelow`` results and checks the requested ranges."""

    def __init__(self, draws):
        self.draws = list(draws)

    def randbelow(self, n):
        v, expected_n = self.draws.pop(0)
        assert n == expected_n
        return v

    def spawn(self, label):
        return self


SCRIPTS = {s.name: s for s in SCRIPT_CATALOG}


# --- games ----------------------------------------------------------------------


def test_game_r_first_query_uniform():
    g = CyclicGroup(5)

    def first_answer(rng):
        state = new_game("R", g, rng)
        return game_step(state, "E", g.element(2), rng).value

    dist = enumerate_outcomes(first_answer)
    assert dist == {v: Fraction(1, 5) for v in range(5)}


def test_game_r_one_query_script_uniform():
    g = CyclicGroup(4)
    script = SCRIPTS["E-E"]
    dist = transcript_distribution("R", script, g)
    firsts = {}
    for (a1, _), p in dist.items():
        firsts[a1] = firsts.get(a1, 0) + p
    assert firsts == {v: Fraction(1, 4) for v in range(4)}


def test_rprime_flag_only_at_finalize():
    g = CyclicGroup(3)
    rng = RandomStream(1)
    for i in range(50):
        state = new_game("Rprime", g, rng.spawn(str(i)))
        assert state.key is None
        a = game_step(state, "E", g.element(0), rng)
        game_step(state, "P", a, rng)
        assert not state.bad
        finalize(state, rng)
        assert state.key is not None


def test_game_x_retry_walkthrough():
    g = CyclicGroup(3)
    rng = ScriptedRandomness([(1, 3), (2, 3), (0, 3), (0, 3), (1, 3)])
    state = new_game("X", g, rng)
    assert state.key == g.element(1)
    assert game_step(state, "P", g.element(0), rng) == g.element(2)
    assert not state.bad
    # c = 0 would give P(c k^-1) = P(2), which is already answered: flag and redraw
    assert game_step(state, "E", g.element(1), rng) == g.element(1)
    assert state.bad
    assert rng.draws == []


def test_game_x_exact_mode_single_draw():
    g = CyclicGroup(3)
    rng = ScriptedRandomness([(1, 3), (2, 3), (0, 3), (0, 2)])
    state = new_game("X", g, rng)
    game_step(state, "P", g.element(0), rng, exact=True)
    assert game_step(state, "E", g.element(1), rng, exact=True) == g.element(1)
    assert state.bad


def test_game_x_forced_answer_matches_key():
    g = CyclicGroup(7)
    rng = RandomStream(2)
    for i in range(50):
        sub = rng.spawn(str(i))
        state = new_game("X", g, sub)
        k = state.key
        y = game_step(state, "P", g.element(3), sub)
        c = game_step(state, "E", g.element(3) * k.inverse(), sub)
        assert c == y * k
        assert state.bad


def test_repeated_query_rejected():
    g = CyclicGroup(5)
    rng = RandomStream(3)
    for which in ("R", "X", "Xprime", "Rprime"):
        state = new_game(which, g, rng)
        c = game_step(state, "E", g.element(1), rng)
        with pytest.raises(RepeatedQueryError):
            game_step(state, "E", g.element(1), rng)
        with pytest.raises(RepeatedQueryError):
            game_step(state, "D", c, rng)


def test_game_validation():
    g = CyclicGroup(5)
    with pytest.raises(ValueError):
        new_game("Z", g, RandomStream(0))
    state = new_game("R", g, RandomStream(0))
    with pytest.raises(ValueError):
        game_step(state, "Q", g.identity, RandomStream(0))
    finalize(state, RandomStream(0))
    with pytest.raises(RuntimeError):
        game_step(state, "E", g.identity, RandomStream(0))


@given(st.sampled_from(["R", "X", "Xprime", "Rprime"]), st.integers(0, 10**6), st.lists(st.sampled_from(["E", "D", "P", "Pinv"]), min_size=1, max_size=8))
@settings(max_examples=150, deadline=None)
def test_flag_never_cleared(which, seed, kinds):
    g = CyclicGroup(11)
    rng = RandomStream(seed)
    state = new_game(which, g, rng)
    seen_bad = False
    for kind in kinds:
        sets = state.sets
        known = {"E": sets.S1, "D": sets.S2, "P": sets.T1, "Pinv": sets.T2}[kind]
        v = next(x for x in g if x not in known)
        game_step(state, kind, v, rng)
        assert state.bad or not seen_bad
        seen_bad = state.bad
    finalize(state, rng)
    assert state.bad or not seen_bad
    assert state.sets.is_consistent()


# --- bad keys --------------------------------------------------------------------


def test_no_bad_keys_for_empty_transcript():
    g = CyclicGroup(12)
    assert count_bad_keys(g, TranscriptSets()) == 0
    assert bad_keys(TranscriptSets()) == set()


def test_bad_keys_single_pair_example():
    g = CyclicGroup(12)
    m, c, x, y = (g.element(v) for v in (2, 9, 7, 4))
    sets = TranscriptSets([(m, c)], [(x, y)])
    expected = {g.element((7 - 2) % 12), g.element((9 - 4) % 12)}
    assert {k for k in g if is_bad_key(k, sets)} == expected
    assert bad_keys(sets) == expected


@pytest.mark.parametrize("n", [5, 16, 37, 64])
def test_bad_key_count_within_two_st(n):
    g = CyclicGroup(n)
    rng = RandomStream(4, str(n))
    for s in (1, 2, 4):
        for t in (1, 2, 4):
            for i in range(20):
                sets = random_transcript(g, s, t, rng.spawn(f"{s}/{t}/{i}"))
                count = count_bad_keys(g, sets)
                assert count <= 2 * s * t
                assert count / n <= bad_key_fraction_bound(s, t, n)
                ref = bad_key_set_cyclic(n, [(a.value, b.value) for a, b in sets.S], [(a.value, b.value) for a, b in sets.T])
                assert {k.value for k in bad_keys(sets)} == ref


def test_bad_keys_nonabelian_solution_matches_scan():
    g = SymmetricGroup(4)
    rng = RandomStream(5)
    for i in range(20):
        sets = random_transcript(g, 3, 3, rng.spawn(str(i)))
        assert bad_keys(sets) == {k for k in g if is_bad_key(k, sets)}


# --- exact game equivalence ---------------------------------------------------------


@pytest.mark.parametrize("g", [CyclicGroup(3), CyclicGroup(4), BitStringGroup(2), CyclicGroup(5)], ids=lambda g: g.name)
def test_x_and_xprime_views_identical(g):
    for script in SCRIPT_CATALOG:
        assert transcript_distribution("X", script, g) == transcript_distribution("Xprime", script, g)


@pytest.mark.parametrize("g", [CyclicGroup(3), CyclicGroup(4)], ids=lambda g: g.name)
def test_x_and_xprime_identical_per_key(g):
    for script in SCRIPT_CATALOG:
        a = transcript_distribution("X", script, g, include_key=True)
        b = transcript_distribution("Xprime", script, g, include_key=True)
        assert a == b


@pytest.mark.parametrize("g", [CyclicGroup(3), CyclicGroup(4), BitStringGroup(2), CyclicGroup(5)], ids=lambda g: g.name)
def test_r_and_rprime_bad_probability_identical(g):
    for script in SCRIPT_CATALOG:
        assert bad_probability("R", script, g) == bad_probability("Rprime", script, g)
        assert transcript_distribution("R", script, g) == transcript_distribution("Rprime", script, g)


def test_bad_probability_example():
    assert bad_probability("R", SCRIPTS["E-P"], CyclicGroup(3)) == Fraction(5, 9)


def test_exact_enumeration_limited_to_tiny_groups():
    with pytest.raises(GroupError):
        transcript_distribution("X", SCRIPT_CATALOG[0], CyclicGroup(6))
    with pytest.raises(GroupError):
        bad_probability("R", SCRIPT_CATALOG[0], CyclicGroup(6))


def test_check_game_equivalence_records():
    checks = check_game_equivalence(CyclicGroup(3), SCRIPT_CATALOG[:3])
    assert len(checks) == 6
    assert all(c.verdict == "PASS" for c in checks)


def test_run_script_monte_carlo_matches_exact():
    g = CyclicGroup(3)
    script = SCRIPTS["E-P"]
    rng = RandomStream(6)
    hits = sum(run_script("X", script, g, rng.spawn(str(i))).bad for i in range(3000))
    exact = bad_probability("X", script, g)
    assert abs(hits / 3000 - float(exact)) < 0.04


def test_lemma_check_json_roundtrip():
    c = LemmaCheck("bad-r-equals-rprime", "zmod:3/E-P", Fraction(5, 9), Fraction(5, 9), None, "PASS")
    back = LemmaCheck.from_json(c.to_json())
    assert back.lhs == "5/9" and back.verdict == "PASS" and back.bound is None
    assert LemmaCheck.from_json(back.to_json()) == back


# --- Psi bad events --------------------------------------------------------------------


def test_no_g_queries_never_badg():
    base = CyclicGroup(16)
    rng = RandomStream(7)
    for i in range(100):
        sigma = random_psi_transcript(base, 4, 2, 0, rng)
        assert not badg_detect(sigma, PsiKey.sample(base, rng))


def test_no_cipher_queries_never_bad():
    base = CyclicGroup(16)
    rng = RandomStream(8)
    for i in range(100):
        sigma = random_psi_transcript(base, 0, 4, 4, rng)
        g = LazyFunction(base, base, rng.spawn(str(i)))
        assert not bad_detect(sigma, PsiKey.sample(base, rng), g)


def test_planted_first_round_g_collision():
    base = SymmetricGroup(3)
    rng = RandomStream(9)
    sigma = random_psi_transcript(base, 3, 1, 1, rng)
    k = PsiKey.sample(base, rng)
    x = sigma.cipher[1][0]
    sigma.g_pairs.append((x.right * k.kR, base.sample(rng)))
    assert badg_events(sigma, k)[0]


def test_planted_f_input_collision():
    base = CyclicGroup(16)
    rng = RandomStream(10)
    sigma = random_psi_transcript(base, 3, 0, 0, rng)
    k = PsiKey.sample(base, rng)
    g = LazyFunction(base, base, rng.spawn("g"))
    X, _ = f_inputs(sigma, k, g)
    sigma.f_pairs.append((X[2], base.sample(rng)))
    assert bad_events(sigma, k, g)[3]


def test_f_inputs_match_cipher_internals():
    base = SymmetricGroup(3)
    g2 = square(base)
    rng = RandomStream(11)
    f = LazyFunction(base, base, rng.spawn("f"))
    g = LazyFunction(base, base, rng.spawn("g"))
    k = PsiKey.sample(base, rng)
    xs = [g2.sample(rng) for _ in range(5)]
    sigma = PsiTranscript(g2, [(x, psi_encrypt(f, g, k, x)) for x in xs], ["+"] * 5)
    X, Y = f_inputs(sigma, k, g)
    for (x, y), xi, yi in zip(sigma.cipher, X, Y):
        kx = x * g2.pair(k.kL, k.kR)
        s1 = g2.pair(kx.right, kx.left * g(kx.right))
        assert s1.right == xi
        s2 = g2.pair(s1.right, s1.left * f(s1.right))
        assert s2.right == yi


@pytest.mark.parametrize("base", [CyclicGroup(64), SymmetricGroup(4)], ids=lambda g: g.name)
def test_forced_round_function_replays_when_not_bad(base):
    rng = RandomStream(12, base.name)
    replayed = 0
    for i in range(200):
        sub = rng.spawn(str(i))
        sigma = random_psi_transcript(base, 3, 2, 2, sub)
        k = PsiKey.sample(base, sub)
        gt = {x: y for x, y in sigma.g_pairs}
        lazy = LazyFunction(base, base, sub.spawn("g"))
        g = lambda v: gt[v] if v in gt else lazy(v)
        if bad_detect(sigma, k, g) or badg_detect(sigma, k):
            continue
        table = force_round_function(sigma, k, g)
        assert replays_transcript(sigma, k, g, table)
        X, Y = f_inputs(sigma, k, g)
        assert len(set(X) | set(Y)) == 2 * len(X)
        replayed += 1
    assert replayed > 20


def test_forcing_conflict_detected():
    base = CyclicGroup(8)
    g2 = square(base)
    k = PsiKey(base.identity, base.identity)
    g = lambda v: base.identity
    x = g2.pair(base.element(1), base.element(2))
    sigma = PsiTranscript(g2, [(x, g2.pair(base.element(0), base.element(0)))], ["+"],
                          f_pairs=[(base.element(1), base.element(5))])
    with pytest.raises(ForcingConflict):
        force_round_function(sigma, k, g)


# --- RTilde ---------------------------------------------------------------------


def test_rtilde_replays_repeats():
    g = square(CyclicGroup(5))
    o = RTilde(g, RandomStream(13))
    x = g.sample(RandomStream(14))
    y = o.forward(x)
    assert o.forward(x) == y
    assert o.inverse(y) == x
    assert not o.inconsistent()


def test_rtilde_collisions_flagged():
    g = CyclicGroup(2)
    o = RTilde(g, ScriptedRandomness([(1, 2), (1, 2)]))
    o.forward(g.element(0))
    o.forward(g.element(1))
    assert o.inconsistent()


def test_rtilde_inconsistency_rate():
    g = square(CyclicGroup(8))
    rng = RandomStream(15)
    hits = sum(rtilde_trial(g, 4, rng.spawn(str(i))) for i in range(4000))
    assert hits / 4000 <= rtilde_bound(4, 64) + 0.03


# --- bounds ---------------------------------------------------------------------


def test_bound_formulas():
    assert badg_bound(2, 3, 16) == pytest.approx(12 / 16)
    assert bad_bound(2, 1, 16) == pytest.approx((4 + 4 + 2) / 16)
    assert rtilde_bound(4, 64) == pytest.approx(6 / 64)
    assert bad_key_fraction_bound(2, 4, 64) == pytest.approx(16 / 64)
    assert psi_bound_proof_final(3, 2, 1, 256) - psi_bound_stated(3, 2, 1, 256) == pytest.approx((9 - 3) / 256)
    assert psi_bound_total(1, 256) == pytest.approx(2 / 256)
    assert psi_bound_total_informal(2, 256) - psi_bound_total(2, 256) == pytest.approx(4 / 256)


def test_consistent_transcripts():
    g = CyclicGroup(9)
    sets = random_transcript(g, 4, 4, RandomStream(16))
    assert sets.is_consistent()
    sets.S.append((sets.S[0][0], g.identity))
    assert not sets.is_consistent()
