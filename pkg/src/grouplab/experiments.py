"""Named experiments: each turns a config into result rows with verdicts.

Every experiment draws all randomness from one ``RandomStream`` seeded by
the config and labelled with the experiment name, and each trial uses its
own labelled substream, so output depends only on (config, seed).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import attacks as atk
from . import games as gm
from .config import ConfigError, ExperimentConfig
from .even_mansour import EvenMansour
from .feistel import PsiKey
from .groups import Group, is_square, parse_group
from .oracles import LazyFunction, LazyPermutation, RandomStream
from .results import (
    ResultRow,
    bound_row,
    equality_row,
    floor_row,
    info_row,
    near_row,
)
from .shuffles import (
    ShuffleParams,
    mixing_profile,
    sc_cca_bound,
    sc_ncpa_bound,
    sc_shuffle,
    sc_summary_bound,
    sc_translation,
    single_card_tvd_closed_form,
)


@dataclass
class Experiment:
    name: str
    summary: str
    run: Callable[["Context"], list[ResultRow]]
    group: str
    trials: int
    budgets: dict = field(default_factory=dict)


@dataclass
class Context:
    """A config with the experiment's defaults filled in."""

    cfg: ExperimentConfig
    exp: Experiment
    rng: RandomStream

    @property
    def group_spec(self) -> str:
        return self.cfg.group or self.exp.group

    @property
    def group(self) -> Group:
        return parse_group(self.group_spec)

    @property
    def trials(self) -> int:
        return self.cfg.trials or self.exp.trials

    def budget(self, key: str) -> int:
        if key in self.cfg.budgets:
            return self.cfg.budgets[key]
        if key in self.exp.budgets:
            return self.exp.budgets[key]
        raise ConfigError(f"experiment {self.exp.name} needs --{key}")

    def params(self, *keys: str, **extra) -> dict:
        out = {"trials": self.trials} if "trials" not in extra else {}
        for k in keys:
            out[k] = self.budget(k)
        out.update(extra)
        return out

    def square_base(self) -> Group:
        g = self.group
        if not is_square(g):
            raise ConfigError(f"{self.exp.name} runs on a square product prod:G,G, got {g.name}")
        return g.left


# --- shuffles -------------------------------------------------------------------------


def _mixing(ctx: Context, kind: str) -> list[ResultRow]:
    g, r = ctx.group, ctx.budget("r")
    name, spec = ctx.exp.name, ctx.group_spec
    profile = mixing_profile(g, r, g.identity, kind)
    rows = []
    for i in range(1, r + 1):
        p = {"r": i, "q": 1}
        rows.append(bound_row(name, spec, p, float(profile[i]), 0.0, "sc_ncpa_bound", sc_ncpa_bound(g.order, 1, i)))
    if kind == "sc":
        rows.append(equality_row(name, spec, {"r": r, "q": 1}, profile[r],
                                 single_card_tvd_closed_form(g.order, r), "closed-form"))
    else:
        rows.append(info_row(name, spec, {"r": r, "q": 1}, profile[r], "exact-tvd"))
    return rows


def exp_sc_mixing(ctx: Context) -> list[ResultRow]:
    return _mixing(ctx, "sc")


def exp_sn_mixing(ctx: Context) -> list[ResultRow]:
    return _mixing(ctx, "sn")


def exp_sc_translation(ctx: Context) -> list[ResultRow]:
    g, spec, name = ctx.group, ctx.group_spec, ctx.exp.name
    rounds = [ctx.cfg.budgets["r"]] if "r" in ctx.cfg.budgets else [4, 16, 64]
    elems = g.enumerate()
    rows = []
    for r in rounds:
        broken = 0
        for t in range(ctx.trials):
            params = ShuffleParams.random(g, r, ctx.rng.spawn(f"structure/{r}/{t}"))
            K = sc_translation(params, g)
            broken += any(sc_shuffle(params, x) != K * x for x in elems)
        rows.append(equality_row(name, spec, ctx.params(r=r), broken, 0, "non-translation-draws"))
        est = atk.run_distinguisher_game(atk.sc_world(g, r), atk.permutation_world(g),
                                         atk.sc_translation_distinguisher, ctx.trials, ctx.rng.spawn(f"dist/{r}"))
        rows.append(equality_row(name, spec, ctx.params(r=r, world="sc"), est.p_real, 1.0, "accept-rate"))
        rows.append(bound_row(name, spec, ctx.params(r=r, world="random"), est.p_ideal, est.ci_halfwidth,
                              "2/|G|", 2 / g.order))
        q2 = min(2, g.order)
        rows.append(info_row(name, spec, ctx.params(r=r, q=q2), est.advantage, "sc_ncpa_bound(q=2)",
                             sc_ncpa_bound(g.order, q2, r)))
    return rows


# --- Even-Mansour ----------------------------------------------------------------------


# no query budget here, so a second check costs nothing and makes a false key
# (about one per |G| wrong candidates with a single check) vanishingly rare
SLIDE_VERIFY_POINTS = 2


def _slide_rates(ctx: Context, same_index: bool):
    g, d = ctx.group, ctx.budget("d")
    wins = false_keys = 0
    for t in range(ctx.trials):
        sub = ctx.rng.spawn(f"trial/{t}")
        P = LazyPermutation(g, sub.spawn("P"))
        key = g.sample(sub.spawn("key"))
        cipher = EvenMansour(P, key)
        k = atk.slide_attack(g, cipher.encrypt, P.forward, d, sub.spawn("adversary"), same_index=same_index,
                             verify_points=SLIDE_VERIFY_POINTS)
        if k is not None:
            wins += 1
            check = sub.spawn("check")
            if any(cipher.encrypt(v) != P.forward(v * k) * k for v in (g.sample(check) for _ in range(5))):
                false_keys += 1
    return wins / ctx.trials, false_keys


def exp_slide_attack(ctx: Context) -> list[ResultRow]:
    g, d = ctx.group, ctx.budget("d")
    rate, false_keys = _slide_rates(ctx, same_index=False)
    target = 1 - (1 - 1 / g.order) ** (d * d)
    p = ctx.params("d")
    return [
        near_row(ctx.exp.name, ctx.group_spec, p, rate, 0.07, "birthday-rate", target),
        equality_row(ctx.exp.name, ctx.group_spec, p, false_keys, 0, "false-keys"),
    ]


def exp_slide_literal(ctx: Context) -> list[ResultRow]:
    g, d = ctx.group, ctx.budget("d")
    rate, false_keys = _slide_rates(ctx, same_index=True)
    p = ctx.params("d")
    ci = atk.hoeffding_halfwidth(ctx.trials)
    return [
        near_row(ctx.exp.name, ctx.group_spec, p, rate, ci, "d/|G|", d / g.order),
        equality_row(ctx.exp.name, ctx.group_spec, p, false_keys, 0, "false-keys"),
    ]


EM_DISTINGUISHERS = {
    "slide": None,  # built per config from the budgets
    "translation": atk.sc_translation_distinguisher,
    "constant": atk.constant_distinguisher,
    "coin": atk.coin_distinguisher,
}


def exp_em_sprp(ctx: Context) -> list[ResultRow]:
    g, s, t = ctx.group, ctx.budget("s"), ctx.budget("t")
    bound = 2 * s * t / g.order
    rows = []
    for label, dist in EM_DISTINGUISHERS.items():
        if dist is None:
            # one verification query on each side must fit the budget
            dist = atk.slide_distinguisher(max(1, min(s, t) - 1))
        est = atk.run_distinguisher_game(atk.em_real_world(g), atk.em_ideal_world(g), dist, ctx.trials,
                                         ctx.rng.spawn(label), budgets={"E+D": s, "P+Pinv": t},
                                         bound=bound, bound_name="2st/|G|")
        rows.append(bound_row(ctx.exp.name, ctx.group_spec, ctx.params("s", "t", distinguisher=label),
                              est.advantage, est.ci_halfwidth, "2st/|G|", bound))
    return rows


def exp_efp(ctx: Context) -> list[ResultRow]:
    g, s, t = ctx.group, ctx.budget("s"), ctx.budget("t")
    n = ctx.trials
    ci = atk.hoeffding_halfwidth(n)
    rows = []
    d = max(1, min(s - 1, t - 2))
    for label, adv, bound_name, bound in (
        ("random", atk.random_forger, "1/|G|", 1 / g.order),
        ("slide", atk.slide_forger(d), "2st/|G|", 2 * s * t / g.order),
    ):
        wins = sum(atk.run_efp_game(g, adv, ctx.rng.spawn(f"{label}/{i}"), s, t) for i in range(n))
        rows.append(bound_row(ctx.exp.name, ctx.group_spec, ctx.params("s", "t", adversary=label),
                              wins / n, ci, bound_name, bound))
    return rows


def exp_cp(ctx: Context) -> list[ResultRow]:
    g, s, t = ctx.group, ctx.budget("s"), ctx.budget("t")
    n = ctx.trials
    ci = atk.hoeffding_halfwidth(n)
    d = max(1, min(s - 1, t - 2))
    rnd = sum(atk.run_cp_game(g, atk.random_cracker, ctx.rng.spawn(f"random/{i}"), s, t) for i in range(n)) / n
    crack = sum(atk.run_cp_game(g, atk.slide_cracker(d), ctx.rng.spawn(f"slide/{i}"), s, t) for i in range(n)) / n
    # independent estimate of the slide attack's own key-recovery rate with the same d
    slide_hits = 0
    for i in range(n):
        w = atk.em_real_world(g)(ctx.rng.spawn(f"rate/{i}"))
        slide_hits += atk.slide_distinguisher(d)(w, ctx.rng.spawn(f"rate-adv/{i}"))
    slide_rate = slide_hits / n
    return [
        bound_row(ctx.exp.name, ctx.group_spec, ctx.params("s", "t", adversary="random"), rnd, ci, "1/|G|",
                  1 / g.order),
        near_row(ctx.exp.name, ctx.group_spec, ctx.params("s", "t", adversary="slide"), crack, 2 * ci,
                 "slide-success-rate", slide_rate),
        bound_row(ctx.exp.name, ctx.group_spec, ctx.params("s", "t", adversary="slide"), crack, ci, "2st/|G|",
                  2 * s * t / g.order),
    ]


def exp_bad_keys(ctx: Context) -> list[ResultRow]:
    g, s, t = ctx.group, ctx.budget("s"), ctx.budget("t")
    if g.order > 64:
        raise ConfigError("bad-keys enumerates every key; use a group of order <= 64")
    worst = 0
    mismatches = 0
    for i in range(ctx.trials):
        sets = gm.random_transcript(g, s, t, ctx.rng.spawn(f"transcript/{i}"))
        c = gm.count_bad_keys(g, sets)
        mismatches += c != len(gm.bad_keys(sets))
        worst = max(worst, c)
    p = ctx.params("s", "t")
    return [
        bound_row(ctx.exp.name, ctx.group_spec, p, worst, 0, "2st", 2 * s * t),
        bound_row(ctx.exp.name, ctx.group_spec, p, Fraction(worst, g.order), 0, "2st/|G|",
                  Fraction(2 * s * t, g.order)),
        equality_row(ctx.exp.name, ctx.group_spec, p, mismatches, 0, "solved-vs-enumerated"),
    ]


def exp_game_equivalence(ctx: Context) -> list[ResultRow]:
    g = ctx.group
    rows = []
    for sc in gm.SCRIPT_CATALOG:
        dx = gm.transcript_distribution("X", sc, g)
        dxp = gm.transcript_distribution("Xprime", sc, g)
        keys = set(dx) | set(dxp)
        dist = sum(abs(dx.get(k, 0) - dxp.get(k, 0)) for k in keys) / 2
        rows.append(equality_row(ctx.exp.name, ctx.group_spec, {"script": sc.name, "games": "X|Xprime"},
                                 Fraction(dist), Fraction(0), "transcript-tvd"))
        pr, prp = gm.bad_probability("R", sc, g), gm.bad_probability("Rprime", sc, g)
        rows.append(equality_row(ctx.exp.name, ctx.group_spec, {"script": sc.name, "games": "R|Rprime"},
                                 pr, prp, "Pr[BAD] in R'"))
    return rows


# --- Feistel ----------------------------------------------------------------------------


def _feistel_leak(ctx: Context, rounds: int, dist, ideal_rate: float) -> list[ResultRow]:
    base = ctx.square_base()
    est = atk.run_distinguisher_game(atk.feistel_world(base, rounds), atk.permutation_world(ctx.group), dist,
                                     ctx.trials, ctx.rng)
    return [
        floor_row(ctx.exp.name, ctx.group_spec, ctx.params(), est.advantage, est.ci_halfwidth, "advantage-floor",
                  0.95),
        equality_row(ctx.exp.name, ctx.group_spec, ctx.params(world="feistel"), est.p_real, 1.0, "accept-rate"),
        bound_row(ctx.exp.name, ctx.group_spec, ctx.params(world="random"), est.p_ideal, est.ci_halfwidth,
                  "ideal-accept-rate", ideal_rate),
    ]


def exp_feistel1(ctx: Context) -> list[ResultRow]:
    n = ctx.square_base().order
    return _feistel_leak(ctx, 1, atk.feistel1_distinguisher, 1 / n)


def exp_feistel2(ctx: Context) -> list[ResultRow]:
    n = ctx.square_base().order
    return _feistel_leak(ctx, 2, atk.feistel2_distinguisher, n / (n * n - 1))


def exp_feistel3(ctx: Context) -> list[ResultRow]:
    base = ctx.square_base()
    real = atk.acceptance_rate(atk.feistel_world(base, 3), atk.feistel3_distinguisher, ctx.trials,
                               ctx.rng, "real")
    ideal = atk.acceptance_rate(atk.permutation_world(ctx.group), atk.feistel3_distinguisher, ctx.trials,
                                ctx.rng, "ideal")
    return [
        equality_row(ctx.exp.name, ctx.group_spec, ctx.params(world="feistel3"), real, 1.0, "accept-rate"),
        bound_row(ctx.exp.name, ctx.group_spec, ctx.params(world="random"), ideal,
                  atk.hoeffding_halfwidth(ctx.trials), "3/|G|", 3 / base.order),
    ]


def exp_psi_bound(ctx: Context) -> list[ResultRow]:
    base = ctx.square_base()
    qc, qf, qg = ctx.budget("q_c"), ctx.budget("q_f"), ctx.budget("q_g")
    n = base.order
    stated = gm.psi_bound_stated(qc, qf, qg, n)
    final = gm.psi_bound_proof_final(qc, qf, qg, n)
    q = qc + qf + qg
    rows = [
        info_row(ctx.exp.name, ctx.group_spec, ctx.params("q_c", "q_f", "q_g"), stated, "psi_bound_stated"),
        info_row(ctx.exp.name, ctx.group_spec, ctx.params("q_c", "q_f", "q_g"), final, "psi_bound_proof_final"),
        info_row(ctx.exp.name, ctx.group_spec, ctx.params(q=q), gm.psi_bound_total(q, n), "psi_bound_total"),
        info_row(ctx.exp.name, ctx.group_spec, ctx.params(q=q), gm.psi_bound_total_informal(q, n),
                 "psi_bound_total_informal"),
    ]
    bound = max(stated, final)
    budgets = {"E+D": qc, "f": qf, "g": qg}
    for label, dist in (("feistel3", atk.feistel3_distinguisher), ("translation", atk.sc_translation_distinguisher)):
        est = atk.run_distinguisher_game(atk.psi_real_world(base), atk.psi_ideal_world(base), dist, ctx.trials,
                                         ctx.rng.spawn(label), budgets=budgets)
        rows.append(bound_row(ctx.exp.name, ctx.group_spec, ctx.params("q_c", "q_f", "q_g", distinguisher=label),
                              est.advantage, est.ci_halfwidth, "max(stated,proof-final)", bound))
    return rows


def _psi_event_frequency(ctx: Context, detect, bound: float, bound_name: str, transcripts: int = 20):
    base = ctx.square_base()
    qc, qf, qg = ctx.budget("q_c"), ctx.budget("q_f"), ctx.budget("q_g")
    ci = atk.hoeffding_halfwidth(ctx.trials)
    rows = []
    for i in range(transcripts):
        sigma = gm.random_psi_transcript(base, qc, qf, qg, ctx.rng.spawn(f"transcript/{i}"))
        draws = ctx.rng.spawn(f"draws/{i}")
        hits = 0
        for _ in range(ctx.trials):
            k = PsiKey.sample(base, draws)
            hits += detect(sigma, k, LazyFunction(base, base, draws))
        rows.append(bound_row(ctx.exp.name, ctx.group_spec, ctx.params("q_c", "q_f", "q_g", transcript=i),
                              hits / ctx.trials, ci, bound_name, bound))
    return rows


def exp_badg_frequency(ctx: Context) -> list[ResultRow]:
    n = ctx.square_base().order
    bound = gm.badg_bound(ctx.budget("q_c"), ctx.budget("q_g"), n)
    return _psi_event_frequency(ctx, lambda s, k, g: gm.badg_detect(s, k), bound, "2*q_g*q_c/|G|")


def exp_bad_frequency(ctx: Context) -> list[ResultRow]:
    n = ctx.square_base().order
    bound = gm.bad_bound(ctx.budget("q_c"), ctx.budget("q_f"), n)
    return _psi_event_frequency(ctx, gm.bad_detect, bound, "(q_c^2+2q_f*q_c+2C(q_c,2))/|G|")


def exp_rtilde(ctx: Context) -> list[ResultRow]:
    g, qc = ctx.group, ctx.budget("q_c")
    hits = sum(gm.rtilde_trial(g, qc, ctx.rng.spawn(f"trial/{i}")) for i in range(ctx.trials))
    return [bound_row(ctx.exp.name, ctx.group_spec, ctx.params("q_c"), hits / ctx.trials,
                      atk.hoeffding_halfwidth(ctx.trials), "C(q_c,2)/|G|^2", gm.rtilde_bound(qc, g.order))]


def exp_bounds_table(ctx: Context) -> list[ResultRow]:
    N, q, r = ctx.group.order, ctx.budget("q"), ctx.budget("r")
    spec, name = ctx.group_spec, ctx.exp.name
    return [
        info_row(name, spec, {"N": N, "q": q, "r": r}, sc_ncpa_bound(N, q, r), "sc_ncpa_bound"),
        info_row(name, spec, {"N": N, "q": q, "r": r}, sc_cca_bound(N, q, r), "sc_cca_bound"),
        info_row(name, spec, {"N": N, "q": q, "r": 2 * r}, sc_summary_bound(N, q, 2 * r), "sc_summary_bound"),
        info_row(name, spec, {"N": N, "q": q, "r": r}, sc_summary_bound(N, q, r), "sc_summary_bound"),
    ]


REGISTRY: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment("sc-mixing", "exact single-card distance to uniform for Scoot-or-Not", exp_sc_mixing,
                   "zmod:8", 1, {"r": 10}),
        Experiment("sn-mixing", "exact single-card distance to uniform for Swap-or-Not", exp_sn_mixing,
                   "zmod:10", 1, {"r": 10}),
        Experiment("sc-translation", "Scoot-or-Not is a left translation; distinguisher rates", exp_sc_translation,
                   "zmod:8", 500),
        Experiment("slide-attack", "cross-index slide attack key recovery rate", exp_slide_attack,
                   "zmod:1024", 2000, {"d": 32}),
        Experiment("slide-attack-literal", "same-index slide attack key recovery rate", exp_slide_literal,
                   "zmod:1024", 2000, {"d": 32}),
        Experiment("em-sprp", "Even-Mansour distinguishers against the 2st/|G| bound", exp_em_sprp,
                   "zmod:65536", 2000, {"s": 16, "t": 16}),
        Experiment("efp", "existential forgery success rates", exp_efp, "zmod:1024", 2000, {"s": 33, "t": 34}),
        Experiment("cp", "cracking success rates", exp_cp, "zmod:1024", 1000, {"s": 33, "t": 34}),
        Experiment("bad-keys", "bad-key counts for random transcripts", exp_bad_keys, "zmod:64", 100,
                   {"s": 2, "t": 2}),
        Experiment("game-equivalence", "exact game X = X' and R/R' bad-probability identities",
                   exp_game_equivalence, "zmod:3", 1),
        Experiment("feistel1", "one-round Feistel leak distinguisher", exp_feistel1, "prod:zmod:101,zmod:101", 1000),
        Experiment("feistel2", "two-round Feistel leak distinguisher", exp_feistel2, "prod:zmod:101,zmod:101", 1000),
        Experiment("feistel3-sprp", "three-round Feistel inverse-query attack", exp_feistel3,
                   "prod:zmod:101,zmod:101", 1000),
        Experiment("psi-bound", "distinguishers against Psi versus the distinguishing bound", exp_psi_bound,
                   "prod:zmod:256,zmod:256", 2000, {"q_c": 4, "q_f": 2, "q_g": 2}),
        Experiment("badg-frequency", "g-collision event frequency over random keys", exp_badg_frequency,
                   "prod:zmod:16,zmod:16", 1000, {"q_c": 2, "q_f": 2, "q_g": 2}),
        Experiment("bad-frequency", "f-input collision event frequency over random keys and g", exp_bad_frequency,
                   "prod:zmod:16,zmod:16", 1000, {"q_c": 2, "q_f": 2, "q_g": 2}),
        Experiment("rtilde-inconsistency", "inconsistency rate of the lazy-repeat cipher oracle", exp_rtilde,
                   "prod:zmod:16,zmod:16", 10000, {"q_c": 4}),
        Experiment("bounds-table", "shuffle bound forms side by side", exp_bounds_table, "zmod:16", 1,
                   {"q": 4, "r": 20}),
    )
}


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    exp = REGISTRY.get(cfg.experiment)
    if exp is None:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; try `grouplab list`")
    ctx = Context(cfg, exp, RandomStream(cfg.seed, cfg.experiment))
    try:
        return exp.run(ctx)
    except ConfigError:
        raise
    except Exception as e:
        raise RuntimeError(f"experiment {exp.name} on {ctx.group_spec} failed: {e}") from e
