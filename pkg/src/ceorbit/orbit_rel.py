"""Finite-stage approximations of equivalence relations on c.e. indices.

Every answer is a :class:`TriState` tied to a window ``[0, window)`` and a
stage ``s``.  A refutation is reported as final only when every set involved
has a declared settling stage at or below ``s``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional

from .ce_core import Registry
from .coding import tuple_decode
from .perm_group import PermGroup, format_word, state_search

CONSISTENT = "ConsistentSoFar"
REFUTED = "RefutedSoFar"
EQUIVALENT_SETTLED = "EquivalentOnSettled"


class MalformedTuple(ValueError):
    pass


@dataclass(frozen=True)
class TriState:
    verdict: str
    window: int
    stage: int
    witness: object = None
    final: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict != REFUTED

    def to_json(self, relation: str, i, j) -> str:
        obj = {
            "relation": relation,
            "i": i,
            "j": j,
            "verdict": self.verdict,
            "window": self.window,
            "stage": self.stage,
            "witness": self.witness,
        }
        return json.dumps(obj, sort_keys=True)


def _clip(xs, window):
    return frozenset(x for x in xs if x < window)


def agreement_length(a, b, window: int) -> int:
    """Largest ``t <= window`` with ``a`` and ``b`` equal on ``[0, t)``."""
    diff = (a ^ b)
    below = [x for x in diff if x < window]
    return min(below) if below else window


def eqce_approx(reg: Registry, i: int, j: int, window: int, s: int) -> TriState:
    a, b = reg.W(i, s), reg.W(j, s)
    ell = agreement_length(a, b, window)
    settled = reg.settled(i, s) and reg.settled(j, s)
    if ell < window:
        return TriState(REFUTED, window, s, witness=ell, final=settled, extra={"agreement": ell})
    verdict = EQUIVALENT_SETTLED if settled else CONSISTENT
    return TriState(verdict, window, s, final=settled, extra={"agreement": ell})


def e0ce_approx(reg: Registry, i: int, j: int, window: int, s: int,
                threshold: Optional[int] = None) -> TriState:
    """Almost-equality: consistent while the difference on the window stays
    below ``threshold`` (default: a tenth of the window, at least 1)."""
    if threshold is None:
        threshold = max(1, window // 10)
    diff = sorted(_clip(reg.W(i, s) ^ reg.W(j, s), window))
    settled = reg.settled(i, s) and reg.settled(j, s)
    extra = {"difference": diff, "threshold": threshold, "growing": len(diff) >= threshold}
    if len(diff) >= threshold:
        return TriState(REFUTED, window, s, witness=diff[:8], final=False, extra=extra)
    verdict = EQUIVALENT_SETTLED if settled else CONSISTENT
    return TriState(verdict, window, s, witness=diff or None, final=settled, extra=extra)


def decode_components(reg: Registry, n: int, code: int) -> tuple:
    try:
        comps = tuple_decode(code, n)
    except ValueError as exc:
        raise MalformedTuple(str(exc)) from None
    bad = [c for c in comps if c >= len(reg)]
    if bad:
        raise MalformedTuple(f"tuple {code} decodes to unregistered indices {bad}")
    return comps


def esetn_approx(reg: Registry, n: int, i: int, j: int, window: int, s: int) -> TriState:
    """Compare the families coded by tuple codes ``i`` and ``j`` up to a
    rearrangement; the witness is the first matching rearrangement."""
    ci, cj = decode_components(reg, n, i), decode_components(reg, n, j)
    A = [_clip(reg.W(c, s), window) for c in ci]
    B = [_clip(reg.W(c, s), window) for c in cj]
    settled = all(reg.settled(c, s) for c in ci + cj)
    for pi in permutations(range(n)):
        if all(A[t] == B[pi[t]] for t in range(n)):
            verdict = EQUIVALENT_SETTLED if settled else CONSISTENT
            return TriState(verdict, window, s, witness=list(pi), final=settled)
    return TriState(REFUTED, window, s, final=settled)


def rceg_witness(G: PermGroup, reg: Registry, i: int, j: int, window: int, s: int,
                 budget: int = 8, max_states: int = 200_000):
    """First word ``g`` (search order) with ``g.W_j = W_i`` on ``[0, window)``."""
    target = _clip(reg.W(i, s), window)
    source = tuple(sorted(reg.W(j, s)))
    if not source:
        return () if not target else None

    def accept(img):
        return _clip(img, window) == target

    word, _ = state_search(G, source, accept, budget, max_states=max_states)
    return word


def rceg_approx(G: PermGroup, reg: Registry, i: int, j: int, window: int, s: int,
                budget: int = 8) -> TriState:
    w = rceg_witness(G, reg, i, j, window, s, budget)
    if w is None:
        return TriState(REFUTED, window, s, final=False, extra={"budget": budget})
    return TriState(CONSISTENT, window, s, witness=format_word(w))
