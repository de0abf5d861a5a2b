"""Exact probability primitives: rationals, outcome spaces, distributions, CPDs.

All mass is held as :class:`fractions.Fraction`.  Nothing in here ever
compares probabilities with a tolerance.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

from .errors import (
    NegativeMass,
    NotNormalized,
    OutOfRange,
    RationalParseError,
    SchemaError,
    SpaceMismatch,
    UnknownOutcome,
    UnsupportedArity,
)

RationalLike = Union[Fraction, int, str]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?\s*$")


def parse_rational(text: str, *, allow_decimal: bool = False) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer) into an exact Fraction.

    Decimal notation such as ``"0.75"`` is rejected unless *allow_decimal*
    is set; the decimal string is then read exactly, not via a binary float.
    """
    m = _RATIONAL_RE.match(text)
    if m:
        num, den = m.group(1), m.group(2)
        if den is not None and int(den) == 0:
            raise RationalParseError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den) if den is not None else 1)
    if _DECIMAL_RE.match(text):
        if not allow_decimal:
            raise RationalParseError(
                f"decimal value {text!r} is lossy in exact mode; write it as num/den"
            )
        return Fraction(text.strip())
    raise RationalParseError(f"cannot parse rational from {text!r}")


def to_rational(value: RationalLike, *, allow_decimal: bool = False) -> Fraction:
    if isinstance(value, bool):
        raise RationalParseError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value, allow_decimal=allow_decimal)
    raise RationalParseError(f"not a rational: {value!r} (floats are not accepted)")


def fmt_rational(value: Fraction) -> str:
    """Canonical ``"num/den"`` string, always with an explicit denominator."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def prob(value: RationalLike) -> Fraction:
    """Coerce to a Fraction and check it lies in [0, 1]."""
    p = to_rational(value)
    if p < 0:
        raise NegativeMass(f"negative probability {p}")
    if p > 1:
        raise OutOfRange(f"probability {p} exceeds 1")
    return p


@dataclass(frozen=True)
class OutcomeSpace:
    labels: tuple[str, ...]

    def __init__(self, labels: Iterable[str]):
        labels = tuple(labels)
        if len(labels) < 2:
            raise SchemaError(f"outcome space needs at least 2 labels, got {labels!r}")
        if len(set(labels)) != len(labels):
            raise SchemaError(f"duplicate outcome labels in {labels!r}")
        for lab in labels:
            if not isinstance(lab, str) or not lab:
                raise SchemaError(f"outcome labels must be non-empty strings: {lab!r}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownOutcome(f"{label!r} not in {list(self.labels)}") from None

    @classmethod
    def product(cls, spaces: Sequence["OutcomeSpace"]) -> "OutcomeSpace":
        """Joint space of several parents; labels are comma-joined."""
        if len(spaces) == 1:
            return spaces[0]
        labels: list[tuple[str, ...]] = [()]
        for s in spaces:
            labels = [prefix + (lab,) for prefix in labels for lab in s.labels]
        return cls(",".join(t) for t in labels)

    def to_json(self) -> list[str]:
        return list(self.labels)


@dataclass(frozen=True)
class Dist:
    space: OutcomeSpace
    mass: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.mass) != len(self.space):
            raise SpaceMismatch(
                f"{len(self.mass)} masses for {len(self.space)} outcomes"
            )
        for m in self.mass:
            if not isinstance(m, Fraction):
                raise TypeError(f"mass must be Fraction, got {type(m).__name__}")
            if m < 0:
                raise NegativeMass(f"negative mass {m}")
        total = sum(self.mass, Fraction(0))
        if total != 1:
            raise NotNormalized(f"masses sum to {total}, not 1")

    def __getitem__(self, label: str) -> Fraction:
        return self.mass[self.space.index(label)]

    def items(self) -> Iterator[tuple[str, Fraction]]:
        return zip(self.space.labels, self.mass)

    def support(self) -> tuple[str, ...]:
        return tuple(lab for lab, m in self.items() if m != 0)

    def is_delta(self) -> bool:
        return len(self.support()) == 1

    def to_json(self) -> dict:
        return {"space": self.space.to_json(), "mass": [fmt_rational(m) for m in self.mass]}

    @classmethod
    def from_json(cls, doc: dict) -> "Dist":
        try:
            space = OutcomeSpace(doc["space"])
            return make_dist(space, [to_rational(m) for m in doc["mass"]])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad distribution document: {exc}") from None

    def __str__(self) -> str:
        inner = ", ".join(f"{lab}: {m}" for lab, m in self.items())
        return "{" + inner + "}"


@dataclass(frozen=True)
class Cpd:
    """P(target | given): one normalized row per conditioning outcome."""

    given: OutcomeSpace
    target: OutcomeSpace
    rows: tuple[Dist, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.given):
            raise SpaceMismatch(
                f"{len(self.rows)} rows for {len(self.given)} conditioning outcomes"
            )
        for r in self.rows:
            if r.space != self.target:
                raise SpaceMismatch("row space differs from the CPD target space")

    def row(self, given_label: str) -> Dist:
        return self.rows[self.given.index(given_label)]

    def is_row_independent(self) -> bool:
        return all(r == self.rows[0] for r in self.rows)

    def to_json(self) -> dict:
        return {
            "given": self.given.to_json(),
            "target": self.target.to_json(),
            "rows": [[fmt_rational(m) for m in r.mass] for r in self.rows],
        }


def make_dist(space: OutcomeSpace, weights: Sequence[RationalLike]) -> Dist:
    if len(weights) != len(space):
        raise SpaceMismatch(f"{len(weights)} weights for {len(space)} outcomes")
    return Dist(space, tuple(to_rational(w) for w in weights))


def delta(space: OutcomeSpace, outcome: str) -> Dist:
    i = space.index(outcome)
    return Dist(space, tuple(Fraction(int(j == i)) for j in range(len(space))))


def uniform(space: OutcomeSpace) -> Dist:
    n = len(space)
    return Dist(space, (Fraction(1, n),) * n)


def constant_cpd(given: OutcomeSpace, row: Dist) -> Cpd:
    """A CPD whose every row is *row* (the child ignores its parent)."""
    return Cpd(given, row.space, (row,) * len(given))


def alpha_accurate_cpd(
    alpha: RationalLike, space: OutcomeSpace, *, allow_nary: bool = False
) -> Cpd:
    """P(g | y) = alpha on g == y, the remainder 1 - alpha on g != y.

    With more than two outcomes the remainder is split evenly over the
    wrong outcomes, which only happens when *allow_nary* is set.
    """
    a = prob(alpha)
    n = len(space)
    if n != 2 and not allow_nary:
        raise UnsupportedArity(
            f"alpha-accurate CPD is defined for 2 outcomes; got {n} (pass allow_nary=True)"
        )
    wrong = (1 - a) / (n - 1)
    rows = tuple(
        Dist(space, tuple(a if j == i else wrong for j in range(n))) for i in range(n)
    )
    return Cpd(space, space, rows)


def total_variation(a: Dist, b: Dist) -> Fraction:
    if a.space != b.space:
        raise SpaceMismatch("total variation needs distributions on the same space")
    return sum((abs(x - y) for x, y in zip(a.mass, b.mass)), Fraction(0)) / 2
