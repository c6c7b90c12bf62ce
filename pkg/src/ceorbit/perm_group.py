"""Computable permutations of the naturals and groups generated by them.

Permutations are small syntax trees over a closed catalog (finite cycle
lists, finite tables, the zigzag-coded shift on Z, xor masks, compositions
and inverses), each carrying its inverse rule.  Group elements are *words*:
tuples of ``(generator, sign)`` letters read as function composition, so
``(a, b)`` denotes ``g_a o g_b`` and ``g_b`` is applied first.

Searches over words are breadth-first by length.  Within a length, words are
produced by prefixing letters to the previous level in order, letter order
being ``+0, -0, +1, -1, ...`` (the ``-i`` letter is skipped for involutions).
All witnesses are therefore deterministic.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .ce_core import Registry, finite, image_of
from .coding import unzigzag, zigzag


class IndexOutOfRange(IndexError):
    pass


class NoWitnessInBudget(LookupError):
    pass


class WitnessSearchFailed(LookupError):
    pass


class PreconditionError(ValueError):
    pass


class Timeout(TimeoutError):
    pass


# -- permutations ------------------------------------------------------------

class Permutation:
    def __call__(self, n: int) -> int:
        raise NotImplementedError

    def inv(self, n: int) -> int:
        raise NotImplementedError

    def support(self) -> Optional[frozenset]:
        """Finite set of moved points, or None when the support is infinite."""
        return None

    @property
    def is_involution(self) -> bool:
        return False

    def inverse(self) -> "Permutation":
        return Inverse(self)

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Compose(self, other)

    def image(self, xs: Iterable[int]) -> set:
        return {self(x) for x in xs}

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(Permutation):
    def __call__(self, n):
        return n

    def inv(self, n):
        return n

    def support(self):
        return frozenset()

    @property
    def is_involution(self):
        return True

    def to_json(self):
        return {"identity": True}

    def __repr__(self):
        return "id"


IDENTITY = Identity()


@dataclass(frozen=True)
class Cycles(Permutation):
    cycles: tuple

    def __post_init__(self):
        seen = set()
        for cyc in self.cycles:
            for x in cyc:
                if x in seen or x < 0:
                    raise ValueError(f"bad cycle list {self.cycles}")
                seen.add(x)

    @cached_property
    def _fwd(self):
        f = {}
        for cyc in self.cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                if a != b:
                    f[a] = b
        return f

    @cached_property
    def _bwd(self):
        return {b: a for a, b in self._fwd.items()}

    def __call__(self, n):
        return self._fwd.get(n, n)

    def inv(self, n):
        return self._bwd.get(n, n)

    def support(self):
        return frozenset(self._fwd)

    @property
    def is_involution(self):
        return all(len(c) <= 2 for c in self.cycles)

    def to_json(self):
        return {"cycles": [list(c) for c in self.cycles]}

    def __repr__(self):
        return "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles) or "id"


def cycles(*cs) -> Cycles:
    return Cycles(tuple(tuple(c) for c in cs))


@dataclass(frozen=True)
class Table(Permutation):
    """Finite-support permutation given by explicit forward and declared
    backward tables.  The backward table is trusted, not derived."""

    forward: tuple
    backward: tuple

    @cached_property
    def _f(self):
        return dict(self.forward)

    @cached_property
    def _b(self):
        return dict(self.backward)

    def __call__(self, n):
        return self._f.get(n, n)

    def inv(self, n):
        return self._b.get(n, n)

    def support(self):
        return frozenset(a for a, b in self.forward if a != b)

    def to_json(self):
        return {
            "table": {
                "forward": {str(a): b for a, b in self.forward},
                "backward": {str(a): b for a, b in self.backward},
            }
        }


@dataclass(frozen=True)
class ZShift(Permutation):
    """Shift by ``k`` on Z, transported to the naturals by zigzag coding."""

    k: int

    def __call__(self, n):
        return zigzag(unzigzag(n) + self.k)

    def inv(self, n):
        return zigzag(unzigzag(n) - self.k)

    def support(self):
        return frozenset() if self.k == 0 else None

    def to_json(self):
        return {"zshift": self.k}

    def __repr__(self):
        return f"shift({self.k})"


@dataclass(frozen=True)
class XorMask(Permutation):
    """n -> n xor mask; for mask 1 this swaps every block 2n <-> 2n+1."""

    mask: int

    def __call__(self, n):
        return n ^ self.mask

    def inv(self, n):
        return n ^ self.mask

    def support(self):
        return frozenset() if self.mask == 0 else None

    @property
    def is_involution(self):
        return True

    def to_json(self):
        return {"xor": self.mask}


@dataclass(frozen=True)
class Compose(Permutation):
    outer: Permutation
    inner: Permutation

    def __call__(self, n):
        return self.outer(self.inner(n))

    def inv(self, n):
        return self.inner.inv(self.outer.inv(n))

    def support(self):
        a, b = self.outer.support(), self.inner.support()
        if a is None or b is None:
            return None
        return frozenset(x for x in a | b if self(x) != x)

    def to_json(self):
        return {"compose": [self.outer.to_json(), self.inner.to_json()]}

    def __repr__(self):
        return f"{self.outer!r}*{self.inner!r}"


@dataclass(frozen=True)
class Inverse(Permutation):
    base: Permutation

    def __call__(self, n):
        return self.base.inv(n)

    def inv(self, n):
        return self.base(n)

    def support(self):
        return self.base.support()

    @property
    def is_involution(self):
        return self.base.is_involution

    def inverse(self):
        return self.base

    def to_json(self):
        return {"inverse": self.base.to_json()}

    def __repr__(self):
        return f"{self.base!r}^-1"


def perm_from_json(obj) -> Permutation:
    if "identity" in obj:
        return IDENTITY
    if "cycles" in obj:
        return Cycles(tuple(tuple(int(x) for x in c) for c in obj["cycles"]))
    if "table" in obj:
        t = obj["table"]
        fwd = tuple(sorted((int(a), int(b)) for a, b in t["forward"].items()))
        bwd = tuple(sorted((int(a), int(b)) for a, b in t.get("backward", {}).items()))
        if "backward" not in t:
            bwd = tuple(sorted((b, a) for a, b in fwd))
        return Table(fwd, bwd)
    if "zshift" in obj:
        return ZShift(int(obj["zshift"]))
    if "xor" in obj:
        return XorMask(int(obj["xor"]))
    if "compose" in obj:
        p, q = obj["compose"]
        return Compose(perm_from_json(p), perm_from_json(q))
    if "inverse" in obj:
        return Inverse(perm_from_json(obj["inverse"]))
    raise ValueError(f"unknown permutation syntax: {obj!r}")


def apply(p: Permutation, n: int) -> int:
    return p(n)


def inverse_violations(p: Permutation, bound: int = 1 << 10) -> list[int]:
    """Points below ``bound`` where the declared inverse fails."""
    return [n for n in range(bound) if p.inv(p(n)) != n or p(p.inv(n)) != n]


# -- words -------------------------------------------------------------------

def format_word(word) -> list[str]:
    return [("+" if s > 0 else "-") + str(i) for i, s in word]


def parse_word(tokens) -> tuple:
    out = []
    for tok in tokens:
        tok = str(tok).strip()
        sign = -1 if tok.startswith("-") else 1
        out.append((int(tok.lstrip("+-")), sign))
    return tuple(out)


def invert_word(word) -> tuple:
    return tuple((i, -s) for i, s in reversed(word))


# -- groups ------------------------------------------------------------------

@dataclass(frozen=True)
class BlockFamily:
    """Countably many generators with disjoint block supports.

    Generator ``b * len(patterns) + p`` is ``patterns[p]`` shifted onto block
    ``b = {block*b, ..., block*b + block - 1}``.
    """

    block: int
    patterns: tuple

    def __getitem__(self, i: int) -> Permutation:
        b, p = divmod(i, len(self.patterns))
        off = self.block * b
        return Cycles(tuple(tuple(off + x for x in c) for c in self.patterns[p]))

    def touching(self, points) -> list[int]:
        blocks = sorted({x // self.block for x in points})
        m = len(self.patterns)
        return [b * m + p for b in blocks for p in range(m)]

    def to_json(self):
        return {"block": self.block, "patterns": [[list(c) for c in pat] for pat in self.patterns]}


IDENTITY_ORACLES: dict[str, Callable] = {}
ORBIT_ORACLES: dict[str, Callable] = {}


def _oracle(table, name):
    def deco(fn):
        table[name] = fn
        return fn

    return deco


@_oracle(IDENTITY_ORACLES, "finite-support")
def _identity_by_support(G: "PermGroup", word) -> Optional[bool]:
    pts = set()
    for i, _ in word:
        sup = G.gen(i).support()
        if sup is None:
            return None
        pts |= sup
    return all(G.apply_word(word, x) == x for x in pts)


@_oracle(IDENTITY_ORACLES, "exponent-sum")
def _identity_by_exponents(G: "PermGroup", word) -> Optional[bool]:
    total: dict[int, int] = {}
    for i, s in word:
        total[i] = total.get(i, 0) + s
    return all(v == 0 for v in total.values())


@_oracle(ORBIT_ORACLES, "finite-support")
def _orbit_by_search(G: "PermGroup", a: int) -> frozenset:
    orb = G.orbit(a, cap=4096)
    if orb is None:
        raise WitnessSearchFailed(f"orbit of {a} exceeds 4096 points")
    return orb


class PermGroup:
    """A group generated by catalog permutations.

    ``generators`` is a list of permutations or a :class:`BlockFamily`.
    ``search_gens`` bounds how many generators a search may use when nothing
    narrows the alphabet (infinite families only).
    """

    def __init__(self, generators, identity_oracle: Optional[str] = None,
                 orbit_oracle: Optional[str] = None, name: str = "", search_gens: int = 32):
        if isinstance(generators, BlockFamily):
            self.family = generators
            self._gens = None
        else:
            self.family = None
            self._gens = list(generators)
            if not self._gens:
                raise ValueError("a group needs at least one generator")
        self.identity_oracle = identity_oracle
        self.orbit_oracle_name = orbit_oracle
        self.name = name
        self.search_gens = search_gens

    # generators
    @property
    def n_gens(self) -> Optional[int]:
        return None if self._gens is None else len(self._gens)

    def gen(self, i: int) -> Permutation:
        if i < 0:
            raise IndexOutOfRange(f"generator index {i}")
        if self._gens is None:
            return self.family[i]
        if i >= len(self._gens):
            raise IndexOutOfRange(f"generator index {i} >= {len(self._gens)}")
        return self._gens[i]

    def letter(self, i: int, s: int):
        g = self.gen(i)
        return g if s > 0 else g.inverse()

    def alphabet(self, limit: Optional[int] = None) -> list[int]:
        n = self.n_gens
        bound = self.search_gens if limit is None else limit
        return list(range(bound if n is None else min(n, bound)))

    def touching(self, points) -> Optional[list[int]]:
        """Generators whose support meets ``points``; None if some generator
        has infinite support (no narrowing is possible)."""
        if self.family is not None:
            return self.family.touching(points)
        pts = set(points)
        out = []
        for i, g in enumerate(self._gens):
            sup = g.support()
            if sup is None:
                return None
            if sup & pts:
                out.append(i)
        return out

    def letters(self, alphabet) -> list[tuple[int, int]]:
        out = []
        for i in alphabet:
            out.append((i, 1))
            if not self.gen(i).is_involution:
                out.append((i, -1))
        return out

    # evaluation
    def word_eval(self, word) -> Permutation:
        perm = IDENTITY
        for i, s in reversed(tuple(word)):
            g = self.letter(i, s)
            perm = g if perm is IDENTITY else Compose(g, perm)
        return perm

    def apply_word(self, word, x: int) -> int:
        for i, s in reversed(tuple(word)):
            g = self.gen(i)
            x = g(x) if s > 0 else g.inv(x)
        return x

    def is_identity(self, word) -> Optional[bool]:
        if not word:
            return True
        if self.identity_oracle is None:
            return None
        return IDENTITY_ORACLES[self.identity_oracle](self, tuple(word))

    def orbit(self, a: int, cap: int = 64) -> Optional[frozenset]:
        """Orbit of ``a`` by search; None once it exceeds ``cap`` points."""
        seen = {a}
        queue = deque([a])
        while queue:
            x = queue.popleft()
            alpha = self.touching([x])
            if alpha is None:
                alpha = self.alphabet()
            for i, s in self.letters(alpha):
                y = self.apply_word(((i, s),), x)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap:
                        return None
                    queue.append(y)
        return frozenset(seen)

    def orbit_of(self, a: int) -> Optional[frozenset]:
        if self.orbit_oracle_name is None:
            return None
        return ORBIT_ORACLES[self.orbit_oracle_name](self, a)

    def describe(self) -> dict:
        gens = (
            {"family": self.family.to_json()}
            if self.family is not None
            else [g.to_json() for g in self._gens]
        )
        return {
            "name": self.name,
            "generators": gens,
            "identity_oracle": self.identity_oracle,
            "orbit_oracle": self.orbit_oracle_name,
        }

    def memo_key(self) -> str:
        """Stable identity for registry memos (object ids get reused)."""
        return json.dumps(self.describe(), sort_keys=True)


def word_eval(G: PermGroup, word) -> Permutation:
    return G.word_eval(word)


# -- searches ----------------------------------------------------------------

def words_shortlex(G: PermGroup, max_len: int, alphabet=None):
    """All reduced words up to ``max_len`` in search order."""
    letters = G.letters(G.alphabet() if alphabet is None else alphabet)
    level = [()]
    yield ()
    for _ in range(max_len):
        nxt = []
        for w in level:
            for a in letters:
                if w and w[0] == (a[0], -a[1]):
                    continue
                if w and G.gen(a[0]).is_involution and w[0][0] == a[0]:
                    continue
                nw = (a,) + w
                nxt.append(nw)
                yield nw
        level = nxt


def state_search(G: PermGroup, points, accept, max_len: int, max_states: int = 200_000,
                 alphabet_for=None):
    """Breadth-first search over words keyed by the images of ``points``.

    Returns ``(word, images)`` for the first word whose images satisfy
    ``accept``, or ``(None, exhausted)`` where ``exhausted`` says the reachable
    image space was fully explored (so no witness exists at all).
    """
    points = tuple(points)
    start = points
    if accept(start):
        return (), start
    seen = {start}
    level = [((), start)]
    for _ in range(max_len):
        nxt = []
        for w, st in level:
            if alphabet_for is not None:
                alpha = alphabet_for(st)
            else:
                alpha = G.touching(st)
                if alpha is None:
                    alpha = G.alphabet()
            for i, s in G.letters(alpha):
                g = G.gen(i)
                img = tuple(g(x) for x in st) if s > 0 else tuple(g.inv(x) for x in st)
                if img in seen:
                    continue
                seen.add(img)
                nw = ((i, s),) + w
                if accept(img):
                    return nw, img
                nxt.append((nw, img))
                if len(seen) > max_states:
                    return None, False
        if not nxt:
            return None, True
        level = nxt
    return None, False


def avoid_finite_set(G: PermGroup, F, budget: int = 64):
    """A word ``g`` with ``g.F`` disjoint from ``F``."""
    F = tuple(sorted(set(F)))
    if not F:
        return ()
    fs = set(F)
    word, info = state_search(G, F, lambda img: fs.isdisjoint(img), budget)
    if word is None:
        reason = "image space exhausted" if info else f"word-length budget {budget} exhausted"
        shown = list(F) if len(F) <= 12 else f"{list(F[:6])}..{list(F[-3:])} ({len(F)} points)"
        raise NoWitnessInBudget(f"no g with g.F disjoint from F={shown}: {reason}")
    return word


def non_isolation_witness(G: PermGroup, F, budget: int = 2, alphabet=None):
    """A word fixing ``F`` pointwise that does not act as the identity."""
    if G.identity_oracle is None:
        raise PreconditionError("non-isolation witnesses need an identity oracle")
    F = sorted(set(F))
    for w in words_shortlex(G, budget, alphabet):
        if not w:
            continue
        if all(G.apply_word(w, x) == x for x in F) and G.is_identity(w) is False:
            return w
    return None


def _closure(G: PermGroup, points, cap: int = 4096):
    """Generators and points reachable from ``points`` through overlapping
    finite supports; None if an infinite-support generator is involved."""
    pts = set(points)
    gens: set[int] = set()
    while True:
        t = G.touching(pts)
        if t is None:
            return None
        new = set(t) - gens
        if not new:
            return sorted(gens), pts
        gens |= new
        for i in new:
            pts |= G.gen(i).support()
        if len(pts) > cap:
            return None


def _components(G: PermGroup, gens):
    parent = {i: i for i in gens}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}
    for i in gens:
        for x in G.gen(i).support():
            if x in owner:
                a, b = find(owner[x]), find(i)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[x] = i
    comps: dict[int, list[int]] = {}
    for i in gens:
        comps.setdefault(find(i), []).append(i)
    return [sorted(c) for _, c in sorted(comps.items())]


def search_map(G: PermGroup, fixed: dict, budget: int = 8, avoid: Optional[dict] = None):
    """A word ``g`` with ``g(a) == b`` for every ``a -> b`` in ``fixed`` and
    ``g(a) != c`` for every ``a -> c`` in ``avoid``.

    When the relevant generators have finite supports, the search splits into
    independent searches over support-connected components (generators in
    different components commute and move disjoint points); the returned word
    concatenates the component words in component order.  Returns None if no
    word is found within ``budget`` letters per component.
    """
    avoid = avoid or {}
    for a, b in fixed.items():
        if a in avoid and avoid[a] == b:
            return None
    keys = sorted(set(fixed) | set(avoid))
    if not keys:
        return ()

    def ok(pts, img):
        m = dict(zip(pts, img))
        return all(m[a] == fixed[a] for a in pts if a in fixed) and all(
            m[a] != avoid[a] for a in pts if a in avoid
        )

    closure = _closure(G, keys)
    if closure is None:
        word, _ = state_search(G, keys, lambda img: ok(keys, img), budget)
        return word
    gens, _ = closure
    word: tuple = ()
    placed = set()
    for comp in _components(G, gens):
        support = set()
        for i in comp:
            support |= G.gen(i).support()
        pts = tuple(a for a in keys if a in support)
        placed.update(pts)
        if not pts:
            continue
        w, _ = state_search(G, pts, lambda img, pts=pts: ok(pts, img), budget,
                            alphabet_for=lambda st, comp=comp: comp)
        if w is None:
            return None
        word = word + w
    # points no generator moves are fixed by every word
    rest = [a for a in keys if a not in placed]
    if not ok(rest, rest):
        return None
    return word


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    word_len: int = 3
    orbit_cap: int = 64
    sample_points: int = 8
    sample_sets: int = 8
    max_states: int = 100_000

    @classmethod
    def of(cls, b):
        if isinstance(b, Budget):
            return b
        if b is None:
            return cls()
        return cls(word_len=int(b))


@dataclass(frozen=True)
class ActionClass:
    tag: str  # FinitelyManyActions | InfiniteOrbit | NonIsolated | Unknown
    witness: dict

    def to_json(self):
        return {"tag": self.tag, "witness": self.witness}


FINITELY_MANY = "FinitelyManyActions"
INFINITE_ORBIT = "InfiniteOrbit"
NON_ISOLATED = "NonIsolated"
UNKNOWN = "Unknown"


def action_representatives(G: PermGroup, F, budget: Budget):
    """One word per distinct restriction to ``F``; None if the image space was
    not exhausted within budget."""
    F = tuple(sorted(F))
    reps = {F: ()}
    queue = deque([((), F)])
    while queue:
        w, st = queue.popleft()
        alpha = G.touching(st)
        if alpha is None:
            alpha = G.alphabet()
        for i, s in G.letters(alpha):
            img = tuple(G.apply_word(((i, s),), x) for x in st)
            if img not in reps:
                reps[img] = ((i, s),) + w
                if len(reps) > budget.max_states:
                    return None
                queue.append((reps[img], img))
    return [reps[k] for k in sorted(reps, key=lambda k: (len(reps[k]), reps[k]))]


def classify_action(G: PermGroup, budget=None) -> ActionClass:
    budget = Budget.of(budget)
    sizes = {}
    for a in range(budget.sample_points):
        orb = G.orbit(a, cap=budget.orbit_cap)
        if orb is None:
            return ActionClass(INFINITE_ORBIT, {"seed": a, "explored": budget.orbit_cap})
        sizes[a] = len(orb)
    if G.identity_oracle is None:
        return ActionClass(UNKNOWN, {"reason": "no identity oracle", "budget": budget.word_len})
    witnesses = {}
    for k in range(1, budget.sample_sets + 1):
        F = range(k)
        w = non_isolation_witness(G, F, budget.word_len)
        if w is None:
            reps = action_representatives(G, F, budget)
            if reps is None:
                return ActionClass(UNKNOWN, {"reason": "action enumeration exceeded budget",
                                             "certified_set": list(F)})
            return ActionClass(FINITELY_MANY, {
                "certified_set": list(F),
                "representatives": [format_word(r) for r in reps],
                "orbit_sizes": sizes,
            })
        witnesses[k] = format_word(w)
    return ActionClass(NON_ISOLATED, {"stabilizer_witnesses": witnesses, "orbit_sizes": sizes})


# -- taming ------------------------------------------------------------------

class TamedGroup(PermGroup):
    """Subgroup built in stages so that the orbit of ``a`` is frozen at stage
    ``a``.

    Stage ``s`` first admits the first (in search order) new non-identity
    element of the parent that fixes ``{0, ..., s-1}`` pointwise and maps every
    frozen orbit onto itself, then freezes the orbit of ``s`` under the
    elements admitted so far.  ``orbit_of`` runs the construction far enough
    to answer.
    """

    def __init__(self, parent: PermGroup, stages: int = 0, budget: int = 2):
        super().__init__([IDENTITY], identity_oracle="finite-support",
                         name=f"tamed({parent.name})", search_gens=parent.search_gens)
        self.parent = parent
        self.budget = budget
        self._gens = []
        self.admitted_words: list[tuple] = []
        self.frozen: dict[int, frozenset] = {}
        self.stage = 0
        self.log: list[dict] = []
        self.extend_to(stages)

    @property
    def n_gens(self):
        return None

    def gen(self, i):
        if i < 0:
            raise IndexOutOfRange(f"generator index {i}")
        while len(self._gens) <= i:
            self.extend_to(self.stage + 1)
        return self._gens[i]

    def touching(self, points):
        pts = set(points)
        if pts:
            self.extend_to(max(pts) + 1)
        return [i for i, g in enumerate(self._gens) if g.support() & pts]

    def alphabet(self, limit=None):
        bound = self.search_gens if limit is None else limit
        self.gen(bound - 1)
        return list(range(bound))

    def _orbit_now(self, a):
        seen = {a}
        queue = deque([a])
        while queue:
            x = queue.popleft()
            for g in self._gens:
                for y in (g(x), g.inv(x)):
                    if y not in seen:
                        seen.add(y)
                        queue.append(y)
        return frozenset(seen)

    def _admissible(self, w, s) -> bool:
        P = self.parent
        if w in self.admitted_words:
            return False
        if any(P.apply_word(w, x) != x for x in range(s)):
            return False
        for orb in self.frozen.values():
            if any(P.apply_word(w, x) not in orb for x in orb):
                return False
        return P.is_identity(w) is False

    def extend_to(self, stages: int):
        P = self.parent
        while self.stage < stages:
            s = self.stage
            alphabet = P.alphabet(P.search_gens + s)
            found = None
            for w in words_shortlex(P, self.budget, alphabet):
                if w and self._admissible(w, s):
                    found = w
                    break
            if found is None:
                raise WitnessSearchFailed(
                    f"stage {s}: no admissible non-identity element fixing [0,{s}) "
                    f"within {self.budget} letters")
            perm = P.word_eval(found)
            if perm.support() is None:
                raise WitnessSearchFailed(f"stage {s}: admitted element has infinite support")
            self.admitted_words.append(found)
            self._gens.append(perm)
            self.frozen[s] = self._orbit_now(s)
            self.log.append({"stage": s, "admitted": format_word(found),
                             "frozen_orbit": sorted(self.frozen[s])})
            self.stage = s + 1

    def orbit_of(self, a: int) -> frozenset:
        self.extend_to(a + 1)
        return self.frozen[a]

    def describe(self):
        return {"name": self.name, "parent": self.parent.describe(), "stage": self.stage}

    def memo_key(self) -> str:
        # admitted generators depend only on the parent and the word budget
        return json.dumps({"tamed": self.parent.describe(), "budget": self.budget},
                          sort_keys=True)


def tame_subgroup(G: PermGroup, stages: int, budget=None) -> TamedGroup:
    cls = classify_action(G, budget)
    if cls.tag != NON_ISOLATED:
        raise PreconditionError(f"taming needs non-isolated actions, got {cls.tag}")
    b = Budget.of(budget)
    return TamedGroup(G, stages, budget=b.word_len)


# -- induced action on c.e. indices -----------------------------------------

def induced_alpha(reg: Registry, G: PermGroup, word, e: int) -> int:
    """Index of ``{g(x) : x in W_e}`` for ``g = word_eval(G, word)``; memoized."""
    word = tuple(word)
    if e < 0 or e >= len(reg):
        raise IndexOutOfRange(f"no c.e. index {e}")
    perm = G.word_eval(word)
    key = ("alpha", G.memo_key(), word, e)
    return reg.memo(key, lambda: reg.register(image_of(e, perm, name=f"alpha({format_word(word)},{e})")))


def singleton_index(reg: Registry, n: int) -> int:
    return reg.memo(("singleton", n), lambda: reg.register(finite([n])))


def extract_permutation(reg: Registry, alpha_fn, word, n: int, max_stages: int = 32) -> int:
    """Recover ``F_g(n)`` by watching which number enters the image of ``{n}``."""
    src = singleton_index(reg, n)
    img = alpha_fn(word, src)
    for s in range(1, max_stages + 1):
        seen = reg.W(img, s)
        if len(seen) > 1:
            raise ValueError(f"image of a singleton grew to {sorted(seen)}: not an induced action")
        if len(seen) == 1:
            return next(iter(seen))
    raise Timeout(f"no element entered W_{img} within {max_stages} stages")


# -- catalog -----------------------------------------------------------------

def _s3_on_3():
    return PermGroup([cycles((0, 1)), cycles((0, 1, 2))], "finite-support", "finite-support",
                     name="s3-on-3")


def _z_shift():
    return PermGroup([ZShift(1)], "exponent-sum", None, name="z-shift")


def _block_swaps():
    return PermGroup(BlockFamily(2, (((0, 1),),)), "finite-support", "finite-support",
                     name="block-swaps")


def _s3_blocks():
    return PermGroup(BlockFamily(3, (((0, 1, 2),), ((0, 1),))), "finite-support",
                     "finite-support", name="s3-blocks")


def _swap01():
    return PermGroup([cycles((0, 1))], "finite-support", "finite-support", name="swap01")


def _trivial():
    return PermGroup([IDENTITY], "finite-support", "finite-support", name="trivial")


CATALOG: dict[str, Callable[[], PermGroup]] = {
    "s3-on-3": _s3_on_3,
    "z-shift": _z_shift,
    "block-swaps": _block_swaps,
    "s3-blocks": _s3_blocks,
    "swap01": _swap01,
    "trivial": _trivial,
}


def group_from_json(obj) -> PermGroup:
    gens = obj["generators"]
    if isinstance(gens, dict) and "family" in gens:
        fam = gens["family"]
        gen_spec = BlockFamily(int(fam["block"]), tuple(
            tuple(tuple(int(x) for x in c) for c in pat) for pat in fam["patterns"]))
    else:
        gen_spec = [perm_from_json(g) for g in gens]
    for key, table in (("identity_oracle", IDENTITY_ORACLES), ("orbit_oracle", ORBIT_ORACLES)):
        val = obj.get(key)
        if val is not None and val not in table:
            raise ValueError(f"unknown {key} {val!r}")
    return PermGroup(gen_spec, obj.get("identity_oracle"), obj.get("orbit_oracle"),
                     name=obj.get("name", ""), search_gens=int(obj.get("search_gens", 32)))


def load_catalog(path) -> dict[str, Callable[[], PermGroup]]:
    data = json.loads(Path(path).read_text())
    entries = data if isinstance(data, list) else data.get("groups", [data])
    return {e["name"]: (lambda e=e: group_from_json(e)) for e in entries}


def get_group(name: str, catalog=None) -> PermGroup:
    table = CATALOG if catalog is None else catalog
    if name not in table:
        raise KeyError(f"unknown group {name!r}; known: {sorted(table)}")
    return table[name]()
