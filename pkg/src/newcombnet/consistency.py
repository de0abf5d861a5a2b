"""Cross-net consistency: can strategy choices in several Bayes nets over the
same variables describe one joint distribution?

Also the feasibility question for the two-variable Newcomb setting: with the
predictor's CPD P(g | y) pinned down, which conditionals P(y | g) can be
independent of g?  Answered twice, once in closed form and once by an exact
grid sweep that shares no code with the closed form.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import OutOfRange, SpaceMismatch, VariableMismatch
from .netgame import (
    Assignment,
    BayesNet,
    Joint,
    NetNode,
    PartialCpd,
    Strategy,
    Variable,
    extract_conditional,
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
)


@dataclass(frozen=True)
class ExtendedGame:
    nets: tuple[BayesNet, ...]

    def __post_init__(self):
        if not self.nets:
            raise VariableMismatch("an extended game needs at least one net")
        ref = {v.name: v.space for v in self.nets[0].variables()}
        for net in self.nets[1:]:
            if {v.name: v.space for v in net.variables()} != ref:
                raise VariableMismatch("nets disagree on variables or outcome spaces")

    def ownership(self) -> list[dict[str, str]]:
        return [{n.name: n.owner for n in net.nodes} for net in self.nets]


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    discrepancy: Fraction
    witness: dict[str, str] | None
    # Signed joints[0] - joints[1] at the witness cell.
    witness_difference: Fraction | None
    joints: tuple[Joint, ...]

    def to_json(self) -> dict:
        return {
            "consistent": self.consistent,
            "discrepancy": fmt_rational(self.discrepancy),
            "witness": self.witness,
            "witness_difference": (
                None if self.witness_difference is None else fmt_rational(self.witness_difference)
            ),
            "joints": [j.to_json() for j in self.joints],
        }


def check_profile(xgame: ExtendedGame, profiles: Sequence[Mapping[str, Strategy]]) -> ConsistencyReport:
    """Build each net's joint and compare them cell by cell, exactly.

    With more than two nets the discrepancy is the largest pairwise one; the
    witness is the lexicographically first cell attaining it, with variables
    sorted by name.
    """
    if len(profiles) != len(xgame.nets):
        raise VariableMismatch(f"{len(profiles)} profiles for {len(xgame.nets)} nets")
    joints = tuple(joint_from_net(n, p).canonical() for n, p in zip(xgame.nets, profiles))
    names = joints[0].names
    best = Fraction(0)
    witness: Assignment | None = None
    signed: Fraction | None = None
    cells = list(joints[0].assignments())
    for k, cell in enumerate(cells):
        for i, j in itertools.combinations(range(len(joints)), 2):
            diff = joints[i].table[k] - joints[j].table[k]
            if abs(diff) > best:
                best, witness = abs(diff), cell
                signed = joints[0].table[k] - joints[1].table[k]
    return ConsistencyReport(
        consistent=best == 0,
        discrepancy=best,
        witness=None if witness is None else dict(zip(names, witness)),
        witness_difference=signed,
        joints=joints,
    )


@dataclass(frozen=True)
class Table2Param:
    """The 2x2 joint P(g, y) = [alpha if g == y else 1 - alpha] * z_y."""

    alpha: Fraction
    z_ab: Fraction
    z_b: Fraction

    def __post_init__(self):
        for name in ("alpha", "z_ab", "z_b"):
            object.__setattr__(self, name, prob(getattr(self, name)))
        if self.z_ab + self.z_b != 1:
            raise OutOfRange(f"z_AB + z_B = {self.z_ab + self.z_b}, must be 1")

    def joint(self, space: OutcomeSpace | None = None) -> Joint:
        """Joint over (g, y); *space* labels are (AB, B) in that order."""
        space = space or OutcomeSpace(("AB", "B"))
        z = dict(zip(space.labels, (self.z_ab, self.z_b)))
        table = tuple(
            (self.alpha if g == y else 1 - self.alpha) * z[y]
            for g in space.labels
            for y in space.labels
        )
        return Joint((Variable("g", space), Variable("y", space)), table)


@dataclass(frozen=True)
class FeasibleSet:
    """Either an explicit finite set of distributions or every distribution."""

    kind: str  # "finite" | "all"
    members: tuple[Dist, ...] = ()
    # True when the regime is obtained by extension (alpha outside (1/2, 1]
    # or a general predictor CPD) rather than the classical statement.
    derived: bool = False

    @classmethod
    def all(cls, *, derived: bool = False) -> "FeasibleSet":
        return cls("all", (), derived)

    @classmethod
    def finite(cls, members, *, derived: bool = False) -> "FeasibleSet":
        uniq: list[Dist] = []
        for m in members:
            if m not in uniq:
                uniq.append(m)
        return cls("finite", tuple(uniq), derived)

    def __contains__(self, h: Dist) -> bool:
        return self.kind == "all" or h in self.members

    def label(self) -> str:
        return "all" if self.kind == "all" else f"finite:{len(self.members)}"

    def restrict_to_grid(self, space: OutcomeSpace, grid: int) -> "FeasibleSet":
        return FeasibleSet.finite(
            (h for h in grid_dists(space, grid) if h in self), derived=self.derived
        )

    def same_members(self, other: "FeasibleSet") -> bool:
        if self.kind != other.kind:
            return False
        return set(self.members) == set(other.members)

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.kind == "finite":
            doc["members"] = [m.to_json() for m in self.members]
        doc["derived"] = self.derived
        return doc


def grid_dists(space: OutcomeSpace, grid: int) -> list[Dist]:
    """Two-outcome distributions with first mass k/grid, k = 0..grid."""
    if len(space) != 2:
        raise SpaceMismatch("grid sweeps are over two-outcome spaces")
    return [make_dist(space, [Fraction(k, grid), 1 - Fraction(k, grid)]) for k in range(grid + 1)]


def independence_cross_terms(alpha: RationalLike, z_ab: RationalLike, z_b: RationalLike) -> tuple[Fraction, Fraction]:
    """Both sides of the cross-multiplied g-independence condition.

    Equal sides mean the two rows of P(y | g) coincide.
    """
    a, za, zb = prob(alpha), prob(z_ab), prob(z_b)
    return a * za * a * zb, (1 - a) * za * (1 - a) * zb


def _two_outcome_space(w_cpd: Cpd) -> OutcomeSpace:
    if len(w_cpd.given) != 2 or len(w_cpd.target) != 2:
        raise SpaceMismatch("feasibility analysis covers 2x2 predictor CPDs")
    return w_cpd.given


def feasible_g_independent(
    alpha: RationalLike | None = None,
    *,
    space: OutcomeSpace | None = None,
    w_cpd: Cpd | None = None,
) -> FeasibleSet:
    """Closed-form set of g-independent P(y | g) = h compatible with P(g | y).

    Pass *alpha* for the alpha-accurate predictor, or *w_cpd* for an
    arbitrary 2x2 predictor CPD.  Interior h (both masses nonzero) survive
    only when the cross-multiplied condition holds, which for the
    alpha-accurate CPD reads alpha**2 == (1 - alpha)**2, i.e. alpha == 1/2,
    and in general means the two CPD rows are identical.  The deltas always
    survive: a delta h leaves a single y in the support, so every defined
    row of P(y | g) is that same delta.
    """
    if (alpha is None) == (w_cpd is None):
        raise ValueError("give exactly one of alpha or w_cpd")
    if w_cpd is None:
        a = prob(alpha)
        space = space or OutcomeSpace(("AB", "B"))
        w_cpd = alpha_accurate_cpd(a, space)
        derived = not (Fraction(1, 2) < a <= 1)
    else:
        space = _two_outcome_space(w_cpd)
        derived = True
    y0, y1 = space.labels
    g0, g1 = w_cpd.target.labels
    # Cross-multiplied with z_AB = z_B factored out (nonzero in the interior):
    #   P(g0|y0) P(g1|y1) == P(g0|y1) P(g1|y0)
    lhs = w_cpd.row(y0)[g0] * w_cpd.row(y1)[g1]
    rhs = w_cpd.row(y1)[g0] * w_cpd.row(y0)[g1]
    if lhs == rhs:
        return FeasibleSet.all(derived=derived)
    return FeasibleSet.finite([delta(space, y0), delta(space, y1)], derived=derived)


def feasible_g_independent_oracle(
    alpha: RationalLike, grid: int, *, space: OutcomeSpace | None = None
) -> FeasibleSet:
    """Brute-force sweep: for z_AB = k/grid build the 2x2 joint directly,
    condition on g, and keep h when every defined row agrees."""
    a = prob(alpha)
    if not isinstance(grid, int) or grid < 2:
        raise OutOfRange(f"grid must be an integer >= 2, got {grid!r}")
    space = space or OutcomeSpace(("AB", "B"))
    ys = space.labels
    found: list[Dist] = []
    for k in range(grid + 1):
        z = {ys[0]: Fraction(k, grid), ys[1]: 1 - Fraction(k, grid)}
        cell = {(g, y): (a if g == y else 1 - a) * z[y] for g in ys for y in ys}
        rows = []
        for g in ys:
            pg = cell[g, ys[0]] + cell[g, ys[1]]
            if pg != 0:
                rows.append(tuple(cell[g, y] / pg for y in ys))
        if all(r == rows[0] for r in rows):
            found.append(make_dist(space, list(rows[0])))
    return FeasibleSet.finite(found, derived=not (Fraction(1, 2) < a <= 1))


@dataclass(frozen=True)
class NoSolution:
    """No P(g) makes the product joint h(y) P(g) match the predictor's joint."""

    reason: str
    discrepancy: Fraction

    def to_json(self) -> dict:
        return {"solution": None, "reason": self.reason, "discrepancy": fmt_rational(self.discrepancy)}


def induced_prediction_marginal(h: Dist, w_cpd: Cpd) -> Dist | NoSolution:
    """Find the P(g) forced on the predictor when P(y | g) = h and P(g | y) = w_cpd.

    Matching the y-marginals of h(y) P(g) and P(g | y) P(y) forces P(y) = h;
    matching g-marginals then forces P(g)(g) = sum_y w(g | y) h(y).  The
    candidate is unique, so either it reproduces the whole joint or nothing does.
    """
    if w_cpd.given != h.space:
        raise SpaceMismatch("w_cpd must be conditioned on h's space")
    ys, gs = h.space.labels, w_cpd.target.labels
    pg = make_dist(w_cpd.target, [sum((w_cpd.row(y)[g] * h[y] for y in ys), Fraction(0)) for g in gs])
    worst = Fraction(0)
    for g in gs:
        for y in ys:
            worst = max(worst, abs(h[y] * pg[g] - w_cpd.row(y)[g] * h[y]))
    if worst != 0:
        return NoSolution("product joint h(y)P(g) cannot equal P(g|y)P(y)", worst)
    return pg


@dataclass(frozen=True)
class AccuracyCheck:
    p_g_given_y: PartialCpd
    matches_perfect_predictor: bool

    def to_json(self) -> dict:
        return {
            "p_g_given_y": self.p_g_given_y.to_json(),
            "matches_perfect_predictor": self.matches_perfect_predictor,
        }


def accuracy_violation_witness(h: Dist, pg: Dist) -> AccuracyCheck:
    """Build h(y) P(g), recover P(g | y) and test it against delta_{g,y}."""
    net = BayesNet((
        NetNode("g", pg.space, (), "W"),
        NetNode("y", h.space, ("g",), "you", parent_independent=True),
    ))
    joint = joint_from_net(net, {"g": pg, "y": constant_cpd(pg.space, h)})
    pgy = extract_conditional(joint, target="g", given="y")
    perfect = alpha_accurate_cpd(1, h.space) if pg.space == h.space else None
    ok = perfect is not None and pgy.agrees_with(perfect)
    return AccuracyCheck(pgy, ok)
