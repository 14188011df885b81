from fractions import Fraction

import pytest

from grouplab.attacks import (
    REFUSED,
    OracleBundle,
    QueryBudgetExceeded,
    coin_distinguisher,
    constant_distinguisher,
    em_ideal_world,
    em_real_world,
    feistel1_distinguisher,
    feistel2_distinguisher,
    feistel3_distinguisher,
    feistel3_sprp_attack,
    feistel_world,
    hoeffding_halfwidth,
    permutation_world,
    random_cracker,
    random_forger,
    run_cp_game,
    run_distinguisher_game,
    run_efp_game,
    sc_translation_distinguisher,
    sc_world,
    slide_attack,
    slide_candidates,
    slide_cracker,
    slide_distinguisher,
    slide_forger,
)
from grouplab.even_mansour import em_encrypt
from grouplab.groups import CyclicGroup, SymmetricGroup, square
from grouplab.oracles import LazyPermutation, RandomStream, enumerate_outcomes

from reference import birthday_rate, feistel3_attack_vs_random_exact, translation_vs_random_exact


def test_hoeffding_halfwidth():
    assert hoeffding_halfwidth(10**4) == pytest.approx(0.01358, abs=1e-5)
    assert hoeffding_halfwidth(100) > hoeffding_halfwidth(1000)


def test_constant_distinguisher_has_zero_advantage():
    g = CyclicGroup(16)
    est = run_distinguisher_game(em_real_world(g), em_ideal_world(g), constant_distinguisher, 200, RandomStream(1))
    assert est.p_real == est.p_ideal == 1
    assert est.advantage == 0


def test_coin_distinguisher_within_ci():
    g = CyclicGroup(16)
    est = run_distinguisher_game(em_real_world(g), em_ideal_world(g), coin_distinguisher, 4000, RandomStream(2),
                                 bound=0.0, bound_name="zero")
    assert est.within_bound()
    assert abs(est.p_real - 0.5) <= est.ci_halfwidth


def test_perfect_distinguisher_calibration():
    g = square(CyclicGroup(11))
    est = run_distinguisher_game(feistel_world(CyclicGroup(11), 1), permutation_world(g), feistel1_distinguisher,
                                 2000, RandomStream(3))
    assert est.p_real == 1
    assert est.advantage == pytest.approx(1 - 1 / 11, abs=est.ci_halfwidth)


def test_trials_validation_and_missing_bound():
    g = CyclicGroup(4)
    with pytest.raises(ValueError):
        run_distinguisher_game(em_real_world(g), em_ideal_world(g), constant_distinguisher, 0, RandomStream(0))
    est = run_distinguisher_game(em_real_world(g), em_ideal_world(g), constant_distinguisher, 1, RandomStream(0))
    with pytest.raises(ValueError):
        est.within_bound()


def test_budget_exceeded_names_oracle():
    g = CyclicGroup(8)
    bundle = em_real_world(g)(RandomStream(4))
    bundle.set_budgets({"E+D": 2, "P": 1})
    bundle.E(g.element(1))
    bundle.D(g.element(1))
    with pytest.raises(QueryBudgetExceeded) as info:
        bundle.E(g.element(2))
    assert info.value.oracle == "E+D"
    bundle.P(g.element(0))
    with pytest.raises(QueryBudgetExceeded) as info:
        bundle["P"](g.element(1))
    assert info.value.oracle == "P"
    assert bundle.counts == {"E": 1, "D": 1, "P": 1, "Pinv": 0}


def test_bundle_rejects_unknown_budget():
    bundle = OracleBundle(CyclicGroup(3), {"E": lambda x: x}, backward=None)
    with pytest.raises(KeyError):
        bundle.set_budgets({"Q": 1})
    with pytest.raises(AttributeError):
        bundle.backward


def test_budget_counts_are_reported():
    g = CyclicGroup(64)
    est = run_distinguisher_game(em_real_world(g), em_ideal_world(g), slide_distinguisher(4), 50, RandomStream(5),
                                 budgets={"E": 5, "P": 5})
    assert est.max_counts["E"] <= 5 and est.max_counts["P"] <= 5


# --- exact acceptance against a random permutation ------------------------------------


def test_feistel1_vs_random_exact():
    for n in (2, 3):
        world = permutation_world(square(CyclicGroup(n)))
        dist = enumerate_outcomes(lambda rng: feistel1_distinguisher(world(rng), rng))
        assert dist[1] == Fraction(1, n)


def test_feistel2_vs_random_exact():
    n = 3
    world = permutation_world(square(CyclicGroup(n)))
    dist = enumerate_outcomes(lambda rng: feistel2_distinguisher(world(rng), rng))
    assert dist[1] == Fraction(n, n * n - 1)


@pytest.mark.parametrize("n", [4, 5])
def test_feistel3_vs_random_matches_reference(n):
    base = CyclicGroup(n)
    g2 = square(base)
    world = permutation_world(g2)
    inputs = (base.element(1), base.element(3), base.element(2))
    dist = enumerate_outcomes(lambda rng: (lambda o: feistel3_sprp_attack(o.forward, o.backward, g2, rng, inputs))(world(rng)))
    assert dist[1] == feistel3_attack_vs_random_exact(n, 1, 3, 2)
    assert dist[1] <= Fraction(3, n)


def test_feistel3_attack_rejects_equal_inputs():
    base = CyclicGroup(3)
    g2 = square(base)
    o = permutation_world(g2)(RandomStream(0))
    with pytest.raises(ValueError):
        feistel3_sprp_attack(o.forward, o.backward, g2, RandomStream(0), (base.identity, base.identity, base.identity))


def test_translation_vs_random_exact():
    n = 5
    world = permutation_world(CyclicGroup(n))
    dist = enumerate_outcomes(lambda rng: sc_translation_distinguisher(world(rng), rng))
    assert dist[1] == translation_vs_random_exact(n)


# --- distinguishers against their targets ----------------------------------------------


@pytest.mark.parametrize("base", [CyclicGroup(13), SymmetricGroup(3)], ids=lambda g: g.name)
def test_feistel_attacks_always_accept_real(base):
    rng = RandomStream(6, base.name)
    for rounds, dist in ((1, feistel1_distinguisher), (2, feistel2_distinguisher), (3, feistel3_distinguisher)):
        world = feistel_world(base, rounds)
        for t in range(200):
            sub = rng.spawn(f"{rounds}/{t}")
            assert dist(world(sub.spawn("o")), sub.spawn("a")) == 1


def test_translation_always_accepts_scoot_or_not():
    for g in (CyclicGroup(12), SymmetricGroup(4)):
        world = sc_world(g, 16)
        rng = RandomStream(7, g.name)
        for t in range(200):
            assert sc_translation_distinguisher(world(rng.spawn(f"o{t}")), rng.spawn(f"a{t}")) == 1


# --- slide attack --------------------------------------------------------------------


@pytest.mark.parametrize("g", [CyclicGroup(101), SymmetricGroup(4)], ids=lambda g: g.name)
def test_slide_candidate_for_planted_pair(g):
    rng = RandomStream(8, g.name)
    P = LazyPermutation(g, rng.spawn("P"))
    k = g.sample(rng)
    a = g.sample(rng)
    xs, ys = [a], [a * k]
    ex = [em_encrypt(P, k, a)]
    py = [P.forward(a * k)]
    assert (0, 0) in set(slide_candidates(g, xs, ex, ys, py))
    assert (0, 0) in set(slide_candidates(g, xs, ex, ys, py, same_index=True))


@pytest.mark.parametrize("g", [CyclicGroup(4099), SymmetricGroup(7)], ids=lambda g: g.name)
def test_slide_recovers_true_key(g):
    rng = RandomStream(9, g.name)
    found = 0
    for t in range(100):
        sub = rng.spawn(str(t))
        P = LazyPermutation(g, sub.spawn("P"))
        k = g.sample(sub)
        E = lambda m, P=P, k=k: em_encrypt(P, k, m)
        got = slide_attack(g, E, P.forward, 72, sub.spawn("adv"))
        if got is not None:
            found += 1
            # the returned key agrees with the cipher on five fresh points
            for _ in range(5):
                v = g.sample(sub)
                assert E(v) == P.forward(v * got) * got
    assert found > 50


def test_slide_rate_matches_birthday_estimate():
    g = CyclicGroup(1024)
    d = 32
    rng = RandomStream(10)
    hits = 0
    for t in range(600):
        sub = rng.spawn(str(t))
        P = LazyPermutation(g, sub.spawn("P"))
        k = g.sample(sub)
        hits += slide_attack(g, lambda m: em_encrypt(P, k, m), P.forward, d, sub.spawn("adv")) is not None
    assert abs(hits / 600 - birthday_rate(g.order, d)) < 0.07


def test_single_candidate_distinguisher_accepts_real_more_often():
    g = CyclicGroup(4096)
    est = run_distinguisher_game(em_real_world(g), em_ideal_world(g), slide_distinguisher(32), 400, RandomStream(18))
    assert est.p_real > est.p_ideal + 0.1


def test_slide_requires_positive_d():
    g = CyclicGroup(5)
    with pytest.raises(ValueError):
        slide_attack(g, lambda x: x, lambda x: x, 0, RandomStream(0))


# --- forgery and cracking ---------------------------------------------------------------


def test_efp_rejects_replayed_pair():
    g = CyclicGroup(16)

    def replay(oracles, rng):
        m = g.element(3)
        return m, oracles.E(m)

    assert not any(run_efp_game(g, replay, RandomStream(11, str(i)), 4, 4) for i in range(50))


def test_efp_accepts_honest_fresh_pair_with_key():
    g = CyclicGroup(64)
    wins = sum(run_efp_game(g, slide_forger(15), RandomStream(12, str(i)), 16, 17) for i in range(200))
    assert wins > 100


def test_random_forger_rate():
    g = CyclicGroup(8)
    wins = sum(run_efp_game(g, random_forger, RandomStream(13, str(i)), 1, 1) for i in range(4000))
    assert abs(wins / 4000 - 1 / 8) < 0.03


def test_cp_refuses_challenge():
    g = CyclicGroup(16)
    seen = []

    def probe(oracles, c0, rng):
        seen.append(oracles.D(c0))
        return g.identity

    run_cp_game(g, probe, RandomStream(14), 2, 2)
    assert seen == [REFUSED]


def test_cp_random_and_slide_crackers():
    g = CyclicGroup(32)
    rand = sum(run_cp_game(g, random_cracker, RandomStream(15, str(i)), 1, 1) for i in range(3000))
    assert abs(rand / 3000 - 1 / 32) < 0.02
    slid = sum(run_cp_game(g, slide_cracker(31), RandomStream(16, str(i)), 32, 33) for i in range(200))
    assert slid > 100


def test_slide_forger_respects_budget():
    g = CyclicGroup(64)
    with pytest.raises(QueryBudgetExceeded):
        run_efp_game(g, slide_forger(8), RandomStream(17), 4, 4)
