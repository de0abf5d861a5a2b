"""Bayes nets whose node distributions are set by players.

A joint distribution is synthesized from a net plus a strategy profile by the
chain rule.  The focal player's best response is found by enumerating
deterministic CPDs: with every other node fixed, expected payoff is linear in
each row of the player's CPDs, so some vertex of the product of simplices is
optimal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

from .errors import (
    IncompleteFixed,
    InvalidNet,
    ProfileMismatch,
    SchemaError,
    ShapeMismatch,
    SpaceMismatch,
    UnknownVariable,
)
from .prob import (
    Cpd,
    Dist,
    OutcomeSpace,
    delta,
    fmt_rational,
    make_dist,
    to_rational,
)

Strategy = Union[Dist, Cpd]
Assignment = tuple[str, ...]


@dataclass(frozen=True)
class Variable:
    name: str
    space: OutcomeSpace


@dataclass(frozen=True)
class NetNode:
    name: str
    space: OutcomeSpace
    parents: tuple[str, ...] = ()
    owner: str = "nature"
    # Strategy space restricted to CPDs that ignore the parents (one row repeated).
    parent_independent: bool = False

    @property
    def variable(self) -> Variable:
        return Variable(self.name, self.space)


@dataclass(frozen=True)
class BayesNet:
    nodes: tuple[NetNode, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for node in self.nodes:
            if node.name in seen:
                raise InvalidNet(f"duplicate node name {node.name!r}")
            for p in node.parents:
                if p not in seen:
                    # Either unknown, a self loop, or out of topological order.
                    raise InvalidNet(
                        f"parent {p!r} of {node.name!r} is not an earlier node"
                    )
            if len(set(node.parents)) != len(node.parents):
                raise InvalidNet(f"repeated parent for {node.name!r}")
            seen.add(node.name)

    @classmethod
    def from_unordered(cls, nodes: Sequence[NetNode]) -> "BayesNet":
        """Topologically sort *nodes* (stable w.r.t. the given order)."""
        remaining = list(nodes)
        names = {n.name for n in remaining}
        for n in remaining:
            missing = set(n.parents) - names
            if missing:
                raise InvalidNet(f"{n.name!r} has unknown parents {sorted(missing)}")
        ordered: list[NetNode] = []
        placed: set[str] = set()
        while remaining:
            for i, n in enumerate(remaining):
                if set(n.parents) <= placed:
                    ordered.append(remaining.pop(i))
                    placed.add(n.name)
                    break
            else:
                raise InvalidNet("cycle in Bayes net")
        return cls(tuple(ordered))

    def node(self, name: str) -> NetNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise UnknownVariable(f"no node named {name!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    def variables(self) -> tuple[Variable, ...]:
        return tuple(n.variable for n in self.nodes)

    def parent_space(self, node: NetNode) -> OutcomeSpace | None:
        if not node.parents:
            return None
        return OutcomeSpace.product([self.node(p).space for p in node.parents])

    def owned_by(self, player: str) -> tuple[NetNode, ...]:
        return tuple(n for n in self.nodes if n.owner == player)


class StrategyProfile(dict):
    """Mapping node name -> Dist (parentless node) or Cpd (given its parents)."""

    def validate(self, net: BayesNet) -> None:
        extra = set(self) - set(net.names)
        if extra:
            raise ProfileMismatch(f"profile names unknown nodes {sorted(extra)}")
        for node in net.nodes:
            if node.name not in self:
                raise ProfileMismatch(f"profile does not cover node {node.name!r}")
            _check_strategy(net, node, self[node.name])


def _check_strategy(net: BayesNet, node: NetNode, strat: Strategy) -> None:
    pspace = net.parent_space(node)
    if pspace is None:
        if not isinstance(strat, Dist) or strat.space != node.space:
            raise ProfileMismatch(f"{node.name!r} needs a Dist over {list(node.space)}")
        return
    if not isinstance(strat, Cpd):
        raise ProfileMismatch(f"{node.name!r} has parents and needs a Cpd")
    if strat.given != pspace or strat.target != node.space:
        raise ProfileMismatch(f"Cpd shape for {node.name!r} does not match its parents")
    if node.parent_independent and not strat.is_row_independent():
        raise ProfileMismatch(f"{node.name!r} must use the same row for every parent value")


def _factor(net: BayesNet, node: NetNode, strat: Strategy, values: Mapping[str, str]) -> Fraction:
    if isinstance(strat, Dist):
        return strat[values[node.name]]
    key = ",".join(values[p] for p in node.parents)
    return strat.row(key)[values[node.name]]


@dataclass(frozen=True)
class Joint:
    """Exact joint table over named variables, cells in row-major order."""

    variables: tuple[Variable, ...]
    table: tuple[Fraction, ...]

    def __post_init__(self):
        expected = 1
        for v in self.variables:
            expected *= len(v.space)
        if len(self.table) != expected:
            raise ShapeMismatch(f"joint has {len(self.table)} cells, expected {expected}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def assignments(self) -> Iterator[Assignment]:
        return itertools.product(*(v.space.labels for v in self.variables))

    def cells(self) -> Iterator[tuple[Assignment, Fraction]]:
        return zip(self.assignments(), self.table)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(f"joint has no variable {name!r}") from None

    def __getitem__(self, values: Mapping[str, str]) -> Fraction:
        lookup = dict(self.cells())
        return lookup[tuple(values[n] for n in self.names)]

    def reorder(self, names: Sequence[str]) -> "Joint":
        if sorted(names) != sorted(self.names):
            raise UnknownVariable(f"cannot reorder {self.names} as {tuple(names)}")
        lookup = dict(self.cells())
        pos = [self.index_of(n) for n in names]
        variables = tuple(self.variables[i] for i in pos)
        table = []
        for a in itertools.product(*(v.space.labels for v in variables)):
            orig = [None] * len(a)
            for k, i in enumerate(pos):
                orig[i] = a[k]
            table.append(lookup[tuple(orig)])
        return Joint(variables, tuple(table))

    def canonical(self) -> "Joint":
        """Variables sorted by name; the order used for comparisons and reports."""
        return self.reorder(sorted(self.names))

    def total(self) -> Fraction:
        return sum(self.table, Fraction(0))

    def to_json(self) -> dict:
        return {
            "variables": [{"name": v.name, "space": v.space.to_json()} for v in self.variables],
            "table": [fmt_rational(p) for p in self.table],
        }


def joint_from_net(net: BayesNet, profile: Mapping[str, Strategy]) -> Joint:
    profile = StrategyProfile(profile)
    profile.validate(net)
    variables = net.variables()
    table = []
    for a in itertools.product(*(v.space.labels for v in variables)):
        values = dict(zip(net.names, a))
        p = Fraction(1)
        for node in net.nodes:
            # Upstream mass zero: the cell is 0 whatever the remaining rows say.
            if p == 0:
                break
            p *= _factor(net, node, profile[node.name], values)
        table.append(p)
    return Joint(variables, tuple(table))


def marginal(joint: Joint, variable: str) -> Dist:
    i = joint.index_of(variable)
    space = joint.variables[i].space
    acc = {lab: Fraction(0) for lab in space}
    for a, p in joint.cells():
        acc[a[i]] += p
    return make_dist(space, [acc[lab] for lab in space])


@dataclass(frozen=True)
class PartialCpd:
    """Conditional extracted from a joint; ``None`` rows are UNDEFINED
    (zero conditioning mass)."""

    given: OutcomeSpace
    target: OutcomeSpace
    rows: tuple[Dist | None, ...]

    def row(self, given_label: str) -> Dist | None:
        return self.rows[self.given.index(given_label)]

    def defined(self) -> tuple[tuple[str, Dist], ...]:
        return tuple((g, r) for g, r in zip(self.given.labels, self.rows) if r is not None)

    def is_parent_independent(self) -> bool:
        rows = [r for _, r in self.defined()]
        return all(r == rows[0] for r in rows)

    def agrees_with(self, cpd: Cpd) -> bool:
        """True when every defined row equals the corresponding row of *cpd*."""
        if cpd.given != self.given or cpd.target != self.target:
            raise SpaceMismatch("CPD shapes differ")
        return all(cpd.row(g) == r for g, r in self.defined())

    def to_json(self) -> dict:
        return {
            "given": self.given.to_json(),
            "target": self.target.to_json(),
            "rows": [
                "undefined" if r is None else [fmt_rational(m) for m in r.mass]
                for r in self.rows
            ],
        }


def extract_conditional(joint: Joint, target: str, given: str) -> PartialCpd:
    ti, gi = joint.index_of(target), joint.index_of(given)
    if ti == gi:
        raise UnknownVariable("target and given must differ")
    tspace, gspace = joint.variables[ti].space, joint.variables[gi].space
    acc = {(g, t): Fraction(0) for g in gspace for t in tspace}
    for a, p in joint.cells():
        acc[a[gi], a[ti]] += p
    rows: list[Dist | None] = []
    for g in gspace:
        mass = sum((acc[g, t] for t in tspace), Fraction(0))
        if mass == 0:
            rows.append(None)
        else:
            rows.append(make_dist(tspace, [acc[g, t] / mass for t in tspace]))
    return PartialCpd(gspace, tspace, tuple(rows))


@dataclass(frozen=True)
class PayoffTable:
    """Integer payoff (dollars) per full assignment, row-major over *variables*."""

    variables: tuple[Variable, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        n = 1
        for v in self.variables:
            n *= len(v.space)
        if len(self.values) != n:
            raise ShapeMismatch(f"payoff table has {len(self.values)} cells, expected {n}")
        for x in self.values:
            if isinstance(x, bool) or not isinstance(x, int):
                raise SchemaError(f"payoffs must be integers, got {x!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def lookup(self) -> dict[Assignment, int]:
        return dict(zip(itertools.product(*(v.space.labels for v in self.variables)), self.values))

    def __getitem__(self, values: Mapping[str, str]) -> int:
        return self.lookup()[tuple(values[n] for n in self.names)]

    def to_json(self) -> dict:
        return {
            "variables": [{"name": v.name, "space": v.space.to_json()} for v in self.variables],
            "values": list(self.values),
        }


def expected_payoff(joint: Joint, payoff: PayoffTable) -> Fraction:
    if sorted(joint.names) != sorted(payoff.names):
        raise ShapeMismatch(f"joint over {joint.names}, payoff over {payoff.names}")
    for v in payoff.variables:
        if joint.variables[joint.index_of(v.name)].space != v.space:
            raise ShapeMismatch(f"outcome space of {v.name!r} differs")
    aligned = joint.reorder(payoff.names)
    return sum((p * u for p, u in zip(aligned.table, payoff.values)), Fraction(0))


@dataclass(frozen=True)
class Game:
    net: BayesNet
    payoff: PayoffTable
    focal: str = "you"

    def __post_init__(self):
        net_vars = {v.name: v.space for v in self.net.variables()}
        pay_vars = {v.name: v.space for v in self.payoff.variables}
        if net_vars != pay_vars:
            raise ShapeMismatch("payoff variables do not match the net")


@dataclass(frozen=True)
class BestResponse:
    assignment: dict[str, Strategy]
    value: Fraction
    ties: tuple[dict[str, Strategy], ...] = field(default=())


def deterministic_strategies(net: BayesNet, node: NetNode) -> list[Strategy]:
    """All vertex strategies for *node*, in canonical outcome order."""
    pspace = net.parent_space(node)
    deltas = [delta(node.space, lab) for lab in node.space]
    if pspace is None:
        return deltas
    if node.parent_independent:
        return [Cpd(pspace, node.space, (d,) * len(pspace)) for d in deltas]
    return [
        Cpd(pspace, node.space, rows)
        for rows in itertools.product(deltas, repeat=len(pspace))
    ]


def best_response(
    game: Game, player: str, fixed: Mapping[str, Strategy]
) -> BestResponse:
    net = game.net
    mine = net.owned_by(player)
    for node in net.nodes:
        if node.owner != player and node.name not in fixed:
            raise IncompleteFixed(f"node {node.name!r} is not fixed")
    if not mine:
        raise IncompleteFixed(f"player {player!r} owns no nodes")
    others = {k: v for k, v in fixed.items() if net.node(k).owner != player}

    best_value: Fraction | None = None
    best: list[dict[str, Strategy]] = []
    for combo in itertools.product(*(deterministic_strategies(net, n) for n in mine)):
        choice = {n.name: s for n, s in zip(mine, combo)}
        value = expected_payoff(joint_from_net(net, {**others, **choice}), game.payoff)
        if best_value is None or value > best_value:
            best_value, best = value, [choice]
        elif value == best_value:
            best.append(choice)
    return BestResponse(best[0], best_value, tuple(best))


def strategy_to_json(strat: Strategy) -> object:
    if isinstance(strat, Dist):
        return [fmt_rational(m) for m in strat.mass]
    return [[fmt_rational(m) for m in r.mass] for r in strat.rows]


def net_to_json(net: BayesNet, profile: Mapping[str, Strategy] | None = None) -> dict:
    nodes = []
    for n in net.nodes:
        doc = {"name": n.name, "space": n.space.to_json(), "parents": list(n.parents), "owner": n.owner}
        if n.parent_independent:
            doc["parent_independent"] = True
        if profile is not None and n.name in profile:
            doc["cpd"] = strategy_to_json(profile[n.name])
        nodes.append(doc)
    return {"nodes": nodes}


def net_from_json(doc: Mapping) -> tuple[BayesNet, StrategyProfile]:
    """Parse the net/profile schema; the profile holds every node with a ``cpd``."""
    try:
        raw = doc["nodes"]
        nodes = [
            NetNode(
                name=str(d["name"]),
                space=OutcomeSpace(d["space"]),
                parents=tuple(d.get("parents", ())),
                owner=str(d.get("owner", "nature")),
                parent_independent=bool(d.get("parent_independent", False)),
            )
            for d in raw
        ]
        net = BayesNet(tuple(nodes))
        profile = StrategyProfile()
        for d, node in zip(raw, nodes):
            if "cpd" not in d:
                continue
            pspace = net.parent_space(node)
            if pspace is None:
                profile[node.name] = make_dist(node.space, [to_rational(x) for x in d["cpd"]])
            else:
                rows = d["cpd"]
                if len(rows) != len(pspace):
                    raise SchemaError(f"{node.name!r}: {len(rows)} rows, expected {len(pspace)}")
                profile[node.name] = Cpd(
                    pspace, node.space,
                    tuple(make_dist(node.space, [to_rational(x) for x in r]) for r in rows),
                )
        return net, profile
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad net document: {exc!r}") from None
