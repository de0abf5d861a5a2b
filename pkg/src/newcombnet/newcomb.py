"""Newcomb's problem as two Bayes net games over (g, y).

g is the predictor's call, y is your choice, both over {AB, B}.  In the
"fearful" net y is the parent and the predictor sets P(g | y); in the
"realist" net g is the parent and you set a g-independent P(y | g) = h.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .consistency import FeasibleSet, Table2Param, feasible_g_independent
from .errors import InvalidProfile, ProfileMismatch, SchemaError
from .netgame import (
    BayesNet,
    Game,
    NetNode,
    PayoffTable,
    Strategy,
    Variable,
    best_response,
    expected_payoff,
    joint_from_net,
)
from .prob import (
    Cpd,
    Dist,
    OutcomeSpace,
    RationalLike,
    alpha_accurate_cpd,
    constant_cpd,
    delta,
    fmt_rational,
    make_dist,
    prob,
    to_rational,
    uniform,
)

CHOICES = OutcomeSpace(("AB", "B"))
EVENTS = ("predict", "choose")
YOU, PREDICTOR = "you", "W"
GENERATOR_ID = "numpy.random.PCG64"

# (g, y) row-major: predict AB -> (1000, 0), predict B -> (1001000, 1000000)
CANONICAL_PAYOFF = (1000, 0, 1_001_000, 1_000_000)


class GameKind(str, Enum):
    FEARFUL = "FEARFUL"
    REALIST = "REALIST"
    COMBINED = "COMBINED"
    VARIANT = "VARIANT"


@dataclass(frozen=True)
class Scenario:
    y_space: OutcomeSpace
    g_space: OutcomeSpace
    payoff: PayoffTable
    alpha: Fraction
    pg: Dist
    timeline: tuple[str, ...] = EVENTS

    def __post_init__(self):
        object.__setattr__(self, "alpha", prob(self.alpha))
        if self.y_space != CHOICES or self.g_space != CHOICES:
            raise SchemaError(f"choice and prediction spaces must both be {list(CHOICES)}")
        if self.pg.space != self.g_space:
            raise SchemaError("pg must be a distribution over g_space")
        want = (Variable("g", self.g_space), Variable("y", self.y_space))
        if self.payoff.variables != want:
            raise SchemaError("payoff must be indexed by (g, y)")
        if sorted(self.timeline) != sorted(EVENTS):
            raise SchemaError(f"timeline must be a permutation of {list(EVENTS)}")

    def to_json(self) -> dict:
        return {
            "y_space": self.y_space.to_json(),
            "g_space": self.g_space.to_json(),
            "payoff": list(self.payoff.values),
            "alpha": fmt_rational(self.alpha),
            "pg": [fmt_rational(m) for m in self.pg.mass],
            "timeline": list(self.timeline),
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "Scenario":
        try:
            y_space = OutcomeSpace(doc.get("y_space", CHOICES.labels))
            g_space = OutcomeSpace(doc.get("g_space", CHOICES.labels))
            raw = doc.get("payoff", list(CANONICAL_PAYOFF))
            if raw and isinstance(raw[0], list):
                raw = [x for row in raw for x in row]
            payoff = payoff_table(raw, g_space, y_space)
            alpha = to_rational(doc.get("alpha", "1/1"))
            pg_raw = doc.get("pg")
            pg = uniform(g_space) if pg_raw is None else make_dist(g_space, [to_rational(x) for x in pg_raw])
            timeline = tuple(doc.get("timeline", EVENTS))
            return cls(y_space, g_space, payoff, alpha, pg, timeline)
        except (KeyError, TypeError, AttributeError, IndexError) as exc:
            raise SchemaError(f"bad scenario document: {exc!r}") from None


def payoff_table(values: Sequence[int], g_space: OutcomeSpace = CHOICES, y_space: OutcomeSpace = CHOICES) -> PayoffTable:
    return PayoffTable((Variable("g", g_space), Variable("y", y_space)), tuple(values))


def canonical_scenario(alpha: RationalLike = 1, pg: Dist | None = None) -> Scenario:
    return Scenario(
        y_space=CHOICES,
        g_space=CHOICES,
        payoff=payoff_table(CANONICAL_PAYOFF),
        alpha=prob(alpha),
        pg=pg if pg is not None else uniform(CHOICES),
    )


def time_reverse(scenario: Scenario) -> Scenario:
    return dataclasses.replace(scenario, timeline=tuple(reversed(scenario.timeline)))


def fearful_net(y_space: OutcomeSpace = CHOICES, g_space: OutcomeSpace = CHOICES) -> BayesNet:
    return BayesNet((
        NetNode("y", y_space, (), YOU),
        NetNode("g", g_space, ("y",), PREDICTOR),
    ))


def realist_net(y_space: OutcomeSpace = CHOICES, g_space: OutcomeSpace = CHOICES) -> BayesNet:
    return BayesNet((
        NetNode("g", g_space, (), PREDICTOR),
        NetNode("y", y_space, ("g",), YOU, parent_independent=True),
    ))


def fearful_profile(py: Dist, w_cpd: Cpd) -> dict[str, Strategy]:
    return {"y": py, "g": w_cpd}


def realist_profile(pg: Dist, h: Dist) -> dict[str, Strategy]:
    return {"g": pg, "y": constant_cpd(pg.space, h)}


@dataclass(frozen=True)
class Recommendation:
    game: GameKind
    strategy: Dist
    expected_value: Fraction
    tie_set: tuple[Dist, ...]
    # Regime not covered by the classical argument (e.g. an imperfect
    # predictor in the fearful game); the result is computed, not quoted.
    derived: bool = False

    def to_json(self) -> dict:
        return {
            "game": self.game.value,
            "strategy": self.strategy.to_json(),
            "choice": self.strategy.support()[0] if self.strategy.is_delta() else None,
            "expected_value": fmt_rational(self.expected_value),
            "tie_set": [d.to_json() for d in self.tie_set],
            "derived": self.derived,
        }


def _strategy_of(s: Strategy) -> Dist:
    return s if isinstance(s, Dist) else s.rows[0]


def solve_fearful(scenario: Scenario, alpha: RationalLike | None = None) -> Recommendation:
    a = scenario.alpha if alpha is None else prob(alpha)
    game = Game(fearful_net(scenario.y_space, scenario.g_space), scenario.payoff, YOU)
    br = best_response(game, YOU, {"g": alpha_accurate_cpd(a, scenario.y_space)})
    return Recommendation(
        GameKind.FEARFUL,
        _strategy_of(br.assignment["y"]),
        br.value,
        tuple(_strategy_of(t["y"]) for t in br.ties),
        derived=a != 1,
    )


def solve_realist(scenario: Scenario, pg: Dist | None = None) -> Recommendation:
    pg = scenario.pg if pg is None else pg
    game = Game(realist_net(scenario.y_space, scenario.g_space), scenario.payoff, YOU)
    br = best_response(game, YOU, {"g": pg})
    return Recommendation(
        GameKind.REALIST,
        _strategy_of(br.assignment["y"]),
        br.value,
        tuple(_strategy_of(t["y"]) for t in br.ties),
    )


def combined_candidates(feasible: FeasibleSet, space: OutcomeSpace) -> tuple[Dist, ...]:
    """Strategies worth evaluating: the explicit members, or, when every h is
    feasible, the deltas (the objective is linear in h)."""
    if feasible.kind == "all":
        return tuple(delta(space, lab) for lab in space)
    return feasible.members


def solve_combined_constrained(scenario: Scenario, alpha: RationalLike | None = None) -> Recommendation:
    """Best g-independent h among those the alpha-accurate predictor allows.

    Each candidate h is scored under the joint the predictor's CPD induces
    with P(y) = h.
    """
    a = scenario.alpha if alpha is None else prob(alpha)
    feasible = feasible_g_independent(a, space=scenario.y_space)
    best_value: Fraction | None = None
    best: list[Dist] = []
    for h in combined_candidates(feasible, scenario.y_space):
        joint = Table2Param(a, h.mass[0], h.mass[1]).joint(scenario.y_space)
        value = expected_payoff(joint, scenario.payoff)
        if best_value is None or value > best_value:
            best_value, best = value, [h]
        elif value == best_value:
            best.append(h)
    return Recommendation(GameKind.COMBINED, best[0], best_value, tuple(best), derived=feasible.derived)


@dataclass(frozen=True)
class VariantOutcome:
    chosen: GameKind
    recommendation: Recommendation
    tie: bool
    fearful: Recommendation
    realist: Recommendation

    def to_json(self) -> dict:
        return {
            "game": GameKind.VARIANT.value,
            "chosen": self.chosen.value,
            "tie": self.tie,
            "recommendation": self.recommendation.to_json(),
            "fearful": self.fearful.to_json(),
            "realist": self.realist.to_json(),
        }


def solve_variant_choose_game(scenario: Scenario, pg: Dist | None = None) -> VariantOutcome:
    """Pick a game first, then play it.  The fearful branch always faces the
    perfect predictor; the realist branch faces *pg*.  Strictly better wins;
    an exact tie goes to the fearful branch."""
    fearful = solve_fearful(scenario, alpha=1)
    realist = solve_realist(scenario, pg)
    if realist.expected_value > fearful.expected_value:
        chosen, rec = GameKind.REALIST, realist
    else:
        chosen, rec = GameKind.FEARFUL, fearful
    return VariantOutcome(chosen, rec, realist.expected_value == fearful.expected_value, fearful, realist)


@dataclass(frozen=True)
class EmpiricalStats:
    net: GameKind
    n: int
    seed: int
    generator: str
    mean_payoff: float
    payoff_stderr: float
    accuracy: float
    accuracy_stderr: float
    counts: dict[str, int]
    analytic_mean: Fraction
    analytic_accuracy: Fraction

    def to_json(self) -> dict:
        return {
            "net": self.net.value,
            "n": self.n,
            "seed": self.seed,
            "generator": self.generator,
            "mean_payoff": self.mean_payoff,
            "payoff_stderr": self.payoff_stderr,
            "accuracy": self.accuracy,
            "accuracy_stderr": self.accuracy_stderr,
            "counts": self.counts,
            "analytic_mean": fmt_rational(self.analytic_mean),
            "analytic_accuracy": fmt_rational(self.analytic_accuracy),
        }


def simulate(
    scenario: Scenario,
    net: GameKind | str,
    profile: Mapping[str, Strategy],
    n: int,
    seed: int,
) -> EmpiricalStats:
    """Draw n i.i.d. (g, y) pairs by inverse CDF over the canonical cell order."""
    kind = GameKind(net)
    if kind is GameKind.FEARFUL:
        bn = fearful_net(scenario.y_space, scenario.g_space)
    elif kind is GameKind.REALIST:
        bn = realist_net(scenario.y_space, scenario.g_space)
    else:
        raise InvalidProfile(f"can only sample the FEARFUL or REALIST net, not {kind.value}")
    if isinstance(n, bool) or not isinstance(n, int) or n <= 0:
        raise InvalidProfile(f"n must be a positive integer, got {n!r}")
    try:
        joint = joint_from_net(bn, profile).reorder(("g", "y"))
    except ProfileMismatch as exc:
        raise InvalidProfile(str(exc)) from None

    cells = list(joint.assignments())
    cum, acc = [], Fraction(0)
    for p in joint.table:
        acc += p
        cum.append(float(acc))
    cum[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = np.searchsorted(np.asarray(cum), rng.random(n), side="right")
    counts = np.bincount(idx, minlength=len(cells))

    pay = np.asarray(scenario.payoff.values, dtype=np.float64)
    hit = np.asarray([float(g == y) for g, y in cells])
    draws = pay[idx]
    mean = float(draws.mean())
    sd = float(draws.std(ddof=1)) if n > 1 else 0.0
    accuracy = float(hit[idx].mean())
    return EmpiricalStats(
        net=kind,
        n=n,
        seed=seed,
        generator=GENERATOR_ID,
        mean_payoff=mean,
        payoff_stderr=sd / math.sqrt(n),
        accuracy=accuracy,
        accuracy_stderr=math.sqrt(accuracy * (1 - accuracy) / n),
        counts={f"{g},{y}": int(c) for (g, y), c in zip(cells, counts)},
        analytic_mean=expected_payoff(joint, scenario.payoff),
        analytic_accuracy=sum((p for (g, y), p in joint.cells() if g == y), Fraction(0)),
    )
