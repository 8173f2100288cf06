"""One-step phase-space reduction of a perturbed semi-Markov model.

Excluding a state r replaces the process by its trace on the remaining
states: jumps of the reduced process are visits to states other than r, and
sojourn times accumulate the excursions through r.  On the expansion level
this is stochastic Gaussian elimination:

    reduced p[i,j] = p[i,j] + p[i,r] * p[r,j] / (1 - p[r,r])
    reduced e[i,j] = e[i,j] + e[i,r] * q[r,j] + e[r,r] * q[i,r] * q[r,j]
                     + e[r,j] * q[i,r],     q[x,y] = p[x,y] / (1 - p[r,r])

computed with the window-tracking operations.  Absent transitions are handled
by omitting their terms rather than by multiplying with all-zero expansions,
which would needlessly collapse the tracked windows; likewise, when r has no
self-loop the divisor 1 - p[r,r] is identically 1 and division is skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .laurent import (
    LaurentExpansion,
    add,
    div,
    mul,
    multi_add,
    multi_mul,
    one,
    refine,
    scale,
)
from .model import (
    PerturbedSMP,
    TransitionData,
    UnknownState,
    coefficient_stochasticity_failures,
)


class ReductionError(Exception):
    """Base class for reduction failures."""


class NotInReducedSet(ReductionError):
    """The requested pair is not a transition of the reduced model."""


class LastState(ReductionError):
    """A single-state model cannot be reduced further."""


class NonPivotalResult(ReductionError):
    """A computed leading coefficient cancelled to zero.

    Cannot happen for a valid model; raised instead of silently stripping.
    """


class StochasticityViolation(ReductionError):
    """The reduced model failed the coefficient stochasticity check."""


@dataclass(frozen=True)
class ReductionStep:
    """Reduced model together with provenance."""

    excluded: str
    before: PerturbedSMP
    after: PerturbedSMP
    non_absorption: LaurentExpansion


def reduced_transition_set(m: PerturbedSMP, r: str, i: str) -> tuple[str, ...]:
    """Transition set of i after excluding r: direct targets, plus r's
    targets when i can enter r.  Structural, independent of coefficients."""
    targets = {j for j in m.states if j != r and (i, j) in m.transitions}
    if (i, r) in m.transitions:
        targets |= {j for j in m.states if j != r and (r, j) in m.transitions}
    return tuple(j for j in m.states if j in targets)


def non_absorption_expansion(m: PerturbedSMP, r: str) -> LaurentExpansion:
    """Pivotal expansion of 1 - p[r,r], refined from its two representations.

    The direct form 1 - p[r,r] and the row form sum(p[r,j], j != r) describe
    the same function; merging them yields the most informative window and a
    guaranteed nonzero leading coefficient.  Without a self-loop the
    probability of leaving r is identically 1.
    """
    if r not in m.states:
        raise UnknownState(f"unknown state {r!r}")
    if (r, r) not in m.transitions:
        return one(0)
    p_rr = m.p(r, r)
    direct = add(one(p_rr.k), scale(-1, p_rr))
    others = [m.p(r, j) for j in m.states if j != r and (r, j) in m.transitions]
    if not others:
        raise ReductionError(
            f"state {r!r} has no transitions to other states; it cannot be excluded"
        )
    refined = refine(direct, multi_add(others))
    if not refined.pivotal:
        raise NonPivotalResult(
            f"non-absorption probability of {r!r} lost its leading coefficient"
        )
    return refined


def _quotient(numerator: LaurentExpansion,
              pbar: Optional[LaurentExpansion]) -> LaurentExpansion:
    # pbar is None when r has no self-loop: dividing by the exact 1 is a no-op.
    return numerator if pbar is None else div(numerator, pbar)


def _check_pair(m: PerturbedSMP, r: str, i: str, j: str) -> None:
    for s in (r, i, j):
        if s not in m.states:
            raise UnknownState(f"unknown state {s!r}")
    if i == r or j == r:
        raise NotInReducedSet(f"state {r!r} is excluded from the reduced model")
    if j not in reduced_transition_set(m, r, i):
        raise NotInReducedSet(
            f"({i!r}, {j!r}) is not a transition after excluding {r!r}"
        )


def _reduced_p(m: PerturbedSMP, r: str, i: str, j: str,
               pbar: Optional[LaurentExpansion]) -> LaurentExpansion:
    terms = []
    if (i, j) in m.transitions:
        terms.append(m.p(i, j))
    if (i, r) in m.transitions and (r, j) in m.transitions:
        terms.append(mul(m.p(i, r), _quotient(m.p(r, j), pbar)))
    out = terms[0] if len(terms) == 1 else add(terms[0], terms[1])
    if not out.pivotal:
        raise NonPivotalResult(
            f"reduced p[{i!r}->{j!r}] (excluding {r!r}) lost its leading coefficient"
        )
    return out


def _reduced_e(m: PerturbedSMP, r: str, i: str, j: str,
               pbar: Optional[LaurentExpansion]) -> LaurentExpansion:
    terms = []
    if (i, j) in m.transitions:
        terms.append(m.e(i, j))
    if (i, r) in m.transitions and (r, j) in m.transitions:
        q_rj = _quotient(m.p(r, j), pbar)
        q_ir = _quotient(m.p(i, r), pbar)
        terms.append(mul(m.e(i, r), q_rj))
        if (r, r) in m.transitions:
            terms.append(multi_mul((m.e(r, r), q_ir, q_rj)))
        terms.append(mul(m.e(r, j), q_ir))
    out = multi_add(terms)
    if not out.pivotal:
        raise NonPivotalResult(
            f"reduced e[{i!r}->{j!r}] (excluding {r!r}) lost its leading coefficient"
        )
    return out


def reduced_transition(m: PerturbedSMP, r: str, i: str, j: str) -> LaurentExpansion:
    """Expansion of the reduced transition probability for the pair (i, j)."""
    _check_pair(m, r, i, j)
    pbar = non_absorption_expansion(m, r) if (r, r) in m.transitions else None
    return _reduced_p(m, r, i, j, pbar)


def reduced_expectation(m: PerturbedSMP, r: str, i: str, j: str) -> LaurentExpansion:
    """Expansion of the reduced sojourn expectation for the pair (i, j)."""
    _check_pair(m, r, i, j)
    pbar = non_absorption_expansion(m, r) if (r, r) in m.transitions else None
    return _reduced_e(m, r, i, j, pbar)


def reduce_state(m: PerturbedSMP, r: str) -> ReductionStep:
    """Exclude state r, recomputing every surviving pair's expansions.

    The reduced model is checked against the coefficient stochasticity
    property, which excluding a state must preserve.
    """
    if r not in m.states:
        raise UnknownState(f"unknown state {r!r}")
    if m.n_states < 2:
        raise LastState("cannot reduce a single-state model")
    has_loop = (r, r) in m.transitions
    pbar = non_absorption_expansion(m, r) if has_loop else None
    keep = tuple(s for s in m.states if s != r)
    transitions = {}
    for i in keep:
        for j in reduced_transition_set(m, r, i):
            transitions[(i, j)] = TransitionData(
                _reduced_p(m, r, i, j, pbar),
                _reduced_e(m, r, i, j, pbar),
            )
    after = PerturbedSMP(keep, transitions, m.epsilon0)
    failures = coefficient_stochasticity_failures(after)
    if failures:
        raise StochasticityViolation(
            f"reduction at {r!r} broke row stochasticity: " + "; ".join(failures)
        )
    return ReductionStep(
        excluded=r,
        before=m,
        after=after,
        non_absorption=pbar if pbar is not None else one(0),
    )
