"""Sigma^0_3 relations ``exists n X(i, j, n)`` given by stage flags.

``X(i, j, n)`` is read as true when its flag is raised at infinitely many
stages.  A :class:`Sigma3Spec` stores a flag schedule per ``(i, j, n)``:
``"always"``, ``"never"``, ``{"every": p}`` (stages divisible by ``p``) or
``{"until": t}`` (stages below ``t`` only).  The first three kinds are
cofinal exactly when declared true, which is what oracle checks rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def _flag(rule, s: int) -> bool:
    if rule == "always":
        return True
    if rule == "never" or rule is None:
        return False
    if "every" in rule:
        return s % int(rule["every"]) == 0
    if "until" in rule:
        return s < int(rule["until"])
    raise ValueError(f"unknown flag rule {rule!r}")


def _cofinal(rule) -> bool:
    if rule == "always":
        return True
    if rule == "never" or rule is None:
        return False
    if "every" in rule:
        return True
    return False


@dataclass
class Sigma3Spec:
    size: int
    witnesses: int = 1
    rules: dict = field(default_factory=dict)  # (i, j, n) -> rule, with i < j

    def rule(self, i: int, j: int, n: int):
        if i > j:
            i, j = j, i
        return self.rules.get((i, j, n))

    def flag(self, i: int, j: int, n: int, s: int) -> bool:
        return _flag(self.rule(i, j, n), s)

    def declared(self, i: int, j: int) -> bool:
        """Declared truth of ``exists n X(i, j, n)``."""
        if i == j:
            return True
        return any(_cofinal(self.rule(i, j, n)) for n in range(self.witnesses))

    @classmethod
    def from_partition(cls, classes, witnesses: int = 1, flag="always"):
        """Relate exactly the pairs inside a class, through witness ``n = 0``."""
        size = 1 + max((x for c in classes for x in c), default=-1)
        rules = {}
        for c in classes:
            c = sorted(c)
            for a in range(len(c)):
                for b in range(a + 1, len(c)):
                    rules[(c[a], c[b], 0)] = flag
        return cls(size, witnesses, rules)

    @classmethod
    def from_json(cls, obj):
        if "partition" in obj:
            return cls.from_partition(obj["partition"], int(obj.get("witnesses", 1)),
                                      obj.get("flag", "always"))
        rules = {}
        for r in obj.get("rules", []):
            i, j = sorted((int(r["i"]), int(r["j"])))
            rules[(i, j, int(r.get("n", 0)))] = r["flag"]
        return cls(int(obj["size"]), int(obj.get("witnesses", 1)), rules)

    def pairs(self):
        return [(i, j) for j in range(self.size) for i in range(j)]

    def validate(self, horizon: int) -> list:
        """Flags of declared-true triples must recur in the last half of the
        horizon; those of declared-false triples must not."""
        bad = []
        for (i, j, n), rule in sorted(self.rules.items(), key=lambda kv: kv[0]):
            late = any(_flag(rule, s) for s in range(horizon // 2, horizon))
            if late != _cofinal(rule):
                bad.append((i, j, n))
        return bad
