"""Perturbed semi-Markov models on a finite state set.

A model assigns each present transition (i, j) a pair of expansions: the
transition probability ``p`` of the embedded chain (Taylor, h >= 0) and the
sojourn-time expectation ``e`` (Laurent).  The transition set of a state is
simply the set of targets with data present; an absent pair means the
transition has probability identically zero.

Validation covers the structural assumptions the expansion pipeline relies
on: nonempty transition sets and full reachability (condition A), positive
pivotal probability expansions with nonnegative orders (condition D),
positive pivotal expectation expansions (condition E), and coefficient-level
stochasticity of each row (condition F).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Optional

from .laurent import LaurentExpansion, _as_fraction


class ModelFormatError(Exception):
    """Base class for malformed model input."""


class ParseError(ModelFormatError):
    pass


class DuplicateTransition(ModelFormatError):
    pass


class UnknownState(ModelFormatError):
    pass


@dataclass(frozen=True)
class TransitionData:
    """Expansion pair for one present transition."""

    p: LaurentExpansion
    e: LaurentExpansion


@dataclass(frozen=True)
class PerturbedSMP:
    """Immutable model: ordered states plus per-pair transition data."""

    states: tuple[str, ...]
    transitions: Mapping[tuple[str, str], TransitionData]
    epsilon0: Optional[Fraction] = None

    def __post_init__(self) -> None:
        states = tuple(self.states)
        if len(set(states)) != len(states):
            raise ParseError("duplicate state identifiers")
        known = set(states)
        transitions = dict(self.transitions)
        for (i, j) in transitions:
            if i not in known or j not in known:
                raise UnknownState(f"transition ({i!r}, {j!r}) references an unknown state")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transitions", MappingProxyType(transitions))

    @property
    def n_states(self) -> int:
        return len(self.states)

    def transition_set(self, i: str) -> tuple[str, ...]:
        """Targets j with data present for source i, in state order."""
        return tuple(j for j in self.states if (i, j) in self.transitions)

    def p(self, i: str, j: str) -> LaurentExpansion:
        return self.transitions[(i, j)].p

    def e(self, i: str, j: str) -> LaurentExpansion:
        return self.transitions[(i, j)].e


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    description: str
    passed: bool
    failures: tuple[str, ...]


@dataclass(frozen=True)
class ValidationReport:
    results: tuple[ConditionResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {
            "conditions": [
                {
                    "condition": r.condition,
                    "description": r.description,
                    "passed": r.passed,
                    "failures": list(r.failures),
                }
                for r in self.results
            ],
            "all_passed": self.all_passed,
        }


def _reachable(m: PerturbedSMP, start: str) -> set[str]:
    # States reachable from `start` in one or more steps along present pairs.
    seen: set[str] = set()
    frontier = list(m.transition_set(start))
    while frontier:
        s = frontier.pop()
        if s in seen:
            continue
        seen.add(s)
        frontier.extend(m.transition_set(s))
    return seen


def coefficient_stochasticity_failures(m: PerturbedSMP) -> list[str]:
    """Condition F: per row, coefficient sums up to the common order.

    For each state i the sums of the p-coefficients over the transition set,
    taken at every order from 0 up to the least upper order among the row's
    windows, must equal 1 at order 0 and 0 elsewhere.
    """
    failures = []
    for i in m.states:
        targets = m.transition_set(i)
        if not targets:
            failures.append(f"state {i!r} has no transitions")
            continue
        k_common = min(m.p(i, j).k for j in targets)
        for level in range(0, k_common + 1):
            total = sum((m.p(i, j).coefficient(level) for j in targets), Fraction(0))
            expected = Fraction(1) if level == 0 else Fraction(0)
            if total != expected:
                failures.append(
                    f"row {i!r}: coefficient sum at order {level} is {total}, "
                    f"expected {expected}"
                )
    return failures


def validate(m: PerturbedSMP) -> ValidationReport:
    """Check conditions A, D, E, F; failures are reported, never raised."""
    a_failures = []
    for i in m.states:
        if not m.transition_set(i):
            a_failures.append(f"state {i!r} has an empty transition set")
    for i in m.states:
        missing = [j for j in m.states if j not in _reachable(m, i)]
        if missing:
            a_failures.append(f"state {i!r} cannot reach {missing}")

    d_failures = []
    e_failures = []
    for (i, j), data in m.transitions.items():
        if data.p.h < 0:
            d_failures.append(f"p[{i!r}->{j!r}] has negative order {data.p.h}")
        if data.p.coeffs[0] <= 0:
            d_failures.append(
                f"p[{i!r}->{j!r}] leading coefficient {data.p.coeffs[0]} is not positive"
            )
        if data.e.coeffs[0] <= 0:
            e_failures.append(
                f"e[{i!r}->{j!r}] leading coefficient {data.e.coeffs[0]} is not positive"
            )

    f_failures = coefficient_stochasticity_failures(m)

    results = (
        ConditionResult("A", "nonempty transition sets and reachability of every pair",
                        not a_failures, tuple(sorted(a_failures))),
        ConditionResult("D", "transition probabilities: positive pivotal Taylor expansions",
                        not d_failures, tuple(sorted(d_failures))),
        ConditionResult("E", "sojourn expectations: positive pivotal Laurent expansions",
                        not e_failures, tuple(sorted(e_failures))),
        ConditionResult("F", "coefficient-level stochasticity of every row",
                        not f_failures, tuple(f_failures)),
    )
    return ValidationReport(results)


def _poly(x: LaurentExpansion) -> dict[int, Fraction]:
    return {x.h + j: c for j, c in enumerate(x.coeffs) if c != 0}


def embedded_chain_special_case(m: PerturbedSMP) -> bool:
    """True when e equals p for every pair, i.e. the model is a discrete-time
    Markov chain observed at unit jumps.  Comparison ignores zero padding."""
    return all(_poly(t.p) == _poly(t.e) for t in m.transitions.values())


def is_exactly_stochastic(m: PerturbedSMP) -> bool:
    """Row sums of the p polynomials equal 1 identically (all orders).

    Models failing this are window-limited: their remainders hide nonzero
    mass, so the exact numeric oracle does not apply to them.
    """
    for i in m.states:
        total: dict[int, Fraction] = {}
        for j in m.transition_set(i):
            for power, c in _poly(m.p(i, j)).items():
                total[power] = total.get(power, Fraction(0)) + c
        total = {p: c for p, c in total.items() if c != 0}
        if total != {0: Fraction(1)}:
            return False
    return True


# -- model file format -------------------------------------------------------


def _expansion_from_json(obj, where: str) -> LaurentExpansion:
    try:
        return LaurentExpansion.from_json(obj)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from None


def parse_model(text) -> PerturbedSMP:
    """Parse the JSON model format; no condition validation is performed."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")

    states = doc.get("states")
    if not isinstance(states, list) or not states:
        raise ParseError("'states' must be a nonempty array of identifiers")
    if not all(isinstance(s, str) for s in states):
        raise ParseError("state identifiers must be strings")
    if len(set(states)) != len(states):
        raise ParseError("duplicate state identifiers in 'states'")

    epsilon0 = None
    if doc.get("epsilon0") is not None:
        try:
            epsilon0 = _as_fraction(doc["epsilon0"])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"'epsilon0': {exc}") from None
        if not (0 < epsilon0 <= 1):
            raise ParseError(f"'epsilon0' must lie in (0, 1], got {epsilon0}")

    raw = doc.get("transitions")
    if not isinstance(raw, list):
        raise ParseError("'transitions' must be an array")
    known = set(states)
    transitions: dict[tuple[str, str], TransitionData] = {}
    for n, entry in enumerate(raw):
        where = f"transitions[{n}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: must be an object")
        try:
            i, j = entry["from"], entry["to"]
        except KeyError as exc:
            raise ParseError(f"{where}: missing key {exc}") from None
        if i not in known:
            raise UnknownState(f"{where}: unknown source state {i!r}")
        if j not in known:
            raise UnknownState(f"{where}: unknown target state {j!r}")
        if (i, j) in transitions:
            raise DuplicateTransition(f"{where}: transition ({i!r}, {j!r}) listed twice")
        if "p" not in entry or "e" not in entry:
            raise ParseError(f"{where}: needs both 'p' and 'e' expansions")
        p = _expansion_from_json(entry["p"], f"{where}.p")
        e = _expansion_from_json(entry["e"], f"{where}.e")
        transitions[(i, j)] = TransitionData(p, e)

    return PerturbedSMP(tuple(states), transitions, epsilon0)


def model_to_json(m: PerturbedSMP) -> dict:
    index = {s: n for n, s in enumerate(m.states)}
    doc: dict = {"states": list(m.states)}
    if m.epsilon0 is not None:
        doc["epsilon0"] = str(m.epsilon0)
    doc["transitions"] = [
        {
            "from": i,
            "to": j,
            "p": m.p(i, j).to_json(),
            "e": m.e(i, j).to_json(),
        }
        for (i, j) in sorted(m.transitions, key=lambda ij: (index[ij[0]], index[ij[1]]))
    ]
    return doc


def serialize_model(m: PerturbedSMP) -> str:
    return json.dumps(model_to_json(m), indent=2) + "\n"
