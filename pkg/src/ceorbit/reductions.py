"""Computable reductions between relations on c.e. indices and the uniform
families witnessing that relations are enumerable in indices.

Every map registers programs into a :class:`~ceorbit.ce_core.Registry` and
returns the new index.  Maps are memoized per registry, so the same input
always yields the same index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .ce_core import Program, Registry, image_of
from .coding import pair, tuple_code, tuple_decode, unpair
from .orbit_rel import MalformedTuple, decode_components
from .perm_group import PermGroup, induced_alpha

ALL_NUMBERS = "AllNumbers"
ODDS_ONLY = "OddsOnly"

DEFAULT_LEVEL_CAP = 6


class _Pin:
    """Memo-key handle comparing by identity and keeping its object alive,
    so the id cannot be reused by a later object."""

    __slots__ = ("obj",)

    def __init__(self, obj):
        self.obj = obj

    def __hash__(self):
        return id(self.obj)

    def __eq__(self, other):
        return isinstance(other, _Pin) and other.obj is self.obj


# -- E_set^n to =^ce ---------------------------------------------------------

def char_mask(xs, k: int) -> int:
    """Bit ``x`` set for each ``x < k`` in ``xs``."""
    m = 0
    for x in xs:
        if x < k:
            m |= 1 << x
    return m


def eset_codes(k: int, sets) -> list[int]:
    """Level-``k`` codes ``<k, r_0, ..., r_{n-1}>``: each ``r_t`` is a
    length-``k`` binary string (as a bitmask) contained in ``sets[pi(t)]``
    for one common rearrangement ``pi``."""
    return kernels.eset_level_codes(k, [char_mask(x, k) for x in sets])


class _EsetStep:
    """Step for the code set V; silent while the components are unchanged."""

    def __init__(self, comps, level_cap):
        self.comps, self.level_cap = comps, level_cap
        self.reset()

    def reset(self):
        self.last = None

    def __call__(self, own, t, view):
        sets = [view[c] for c in self.comps]
        key = tuple(len(x) for x in sets)
        if key == self.last:
            return []
        self.last = key
        out = []
        for k in range(self.level_cap + 1):
            out.extend(eset_codes(k, sets))
        return out


def esetn_to_eqce(reg: Registry, n: int, tuple_index: int,
                  level_cap: int = DEFAULT_LEVEL_CAP) -> int:
    """Index of the code set V for the family coded by ``tuple_index``.

    V collects, for every level ``k <= level_cap``, the codes of ``eset_codes``
    against the current approximations.  Two families agree up to
    rearrangement exactly when their V's agree; levels above the largest
    element of a settled family add nothing new, so a cap at or above that
    bound loses no information for such families.
    """
    comps = decode_components(reg, n, tuple_index)
    step = _EsetStep(comps, level_cap)
    settle = None
    if all(reg.program(c).settle is not None for c in comps):
        settle = max(reg.program(c).settle for c in comps) + 1
    key = ("esetn", n, tuple_index, level_cap)
    return reg.memo(key, lambda: reg.register(
        Program(step, settle=settle, cap=None, name=f"V[{n}:{tuple_index}]")))


def decode_eset_code(code: int, n: int) -> tuple[int, tuple]:
    k, rest = unpair(code)
    return k, tuple_decode(rest, n)


# -- R^ce_G to E_set^n -------------------------------------------------------

def rceg_to_esetn(reg: Registry, G: PermGroup, reps, e: int) -> int:
    """Tuple code of the images of ``W_e`` under the representative words."""
    return tuple_code([induced_alpha(reg, G, w, e) for w in reps])


# -- =^ce into R_n and R_n into R_{n+1} ------------------------------------

def shift_embed(reg: Registry, k: int) -> int:
    """Index of ``{x + 1 : x in W_k}``; such sets never contain 0."""
    if k < 0 or k >= len(reg):
        raise IndexError(f"no c.e. index {k}")
    settle = reg.program(k).settle
    return reg.memo(("shift", k), lambda: reg.register(
        Program(image_of(k, lambda x: x + 1).step, settle=settle, cap=None,
                name=f"shift({k})")))


def rn_image(n: int, W) -> set:
    """Residue re-coding from mod ``n`` to mod ``n + 1``: ``n*x + y``
    (``y < n``) goes to ``(n+1)*x + y`` and nothing else is produced."""
    out = set()
    for z in W:
        x, y = divmod(z, n)
        out.add((n + 1) * x + y)
    return out


def rn_filled_image(n: int, W) -> set:
    """:func:`rn_image` plus the new residue ``n`` of block ``x`` once the
    whole source block ``[0, n*(x+1))`` is present.

    The least missing number then moves from ``n*x + y`` to ``(n+1)*x + y``,
    keeping its residue, and residue ``n`` is never the least missing number.
    The plain re-coding loses that: for ``n = 2`` the sets ``[0, 5)`` and
    ``[0, 6)`` have least missing numbers of different parity, yet their
    images both miss 2 first.
    """
    out = rn_image(n, W)
    prefix = 0
    while prefix in W:
        prefix += 1
    for x in range(prefix // n):
        out.add((n + 1) * x + n)
    return out


def rn_step(reg: Registry, n: int, k: int, fill: bool = False) -> int:
    """Index of the residue re-coding of ``W_k`` (see :func:`rn_image`);
    ``fill=True`` uses :func:`rn_filled_image`."""
    if n < 1:
        raise ValueError("rn_step needs n >= 1")
    if k < 0 or k >= len(reg):
        raise IndexError(f"no c.e. index {k}")
    image = rn_filled_image if fill else rn_image

    def step(own, t, view):
        return image(n, view[k])

    settle = reg.program(k).settle
    return reg.memo(("rn", n, k, fill), lambda: reg.register(
        Program(step, settle=settle, cap=None, name=f"rn{n}({k})" + ("+fill" if fill else ""))))


def rn_literal_image(n: int, W) -> set:
    """The re-coding read with the bound ``0 <= y < x`` on ``n*x + y``.
    Kept for the comparison test showing it is not a reduction."""
    out = set()
    for z in W:
        for x in range(z // max(n, 1) + 1):
            y = z - n * x
            if 0 <= y < x:
                out.add((n + 1) * x + y)
    return out


def f_missing_of(W, mode: str = ALL_NUMBERS) -> int:
    if mode == ALL_NUMBERS:
        k = 0
        while k in W:
            k += 1
        return k
    if mode == ODDS_ONLY:
        k = 0
        while 2 * k + 1 in W:
            k += 1
        return k
    raise ValueError(f"unknown mode {mode!r}")


def f_missing(reg: Registry, i: int, s: int, mode: str = ALL_NUMBERS) -> int:
    return f_missing_of(reg.W(i, s), mode)


# -- ceers -------------------------------------------------------------------

class Ceer:
    """c.e. equivalence relation on the naturals approximated in stages."""

    def related(self, x: int, y: int, s: int) -> bool:
        raise NotImplementedError

    def next_in_class(self, y: int, after: int, s: int, exclude=frozenset()) -> int:
        """Least ``z > after`` related to ``y`` at stage ``s`` and not excluded."""
        z = after + 1
        while True:
            if z not in exclude and self.related(z, y, s):
                return z
            z += 1


@dataclass
class ModCeer(Ceer):
    """``Id_n``: equality modulo ``n`` on all of the naturals."""

    n: int

    def related(self, x, y, s):
        return x % self.n == y % self.n


def column_of(x: int) -> tuple[int, int]:
    """``x = <w, k>`` lies at position ``w`` of column ``k``."""
    return unpair(x)


def column_point(w: int, k: int) -> int:
    return pair(w, k)


@dataclass
class ColumnCeer(Ceer):
    """Direct sum over columns ``{<w, k> : w}`` of a base ceer E.

    E relates positions ``<a, b>`` and ``<a', b'>`` iff ``a == a'`` (infinitely
    many infinite classes).  A column may be collapsed to ``Id_q``: positions
    are related iff their E-class labels agree modulo ``q``.  That coarsens E,
    has exactly ``q`` classes, and keeps every class infinite; later collapses
    must coarsen earlier ones (``q`` must divide the previous modulus).
    """

    name: str = "X"
    log: list = field(default_factory=list)  # (stage, column, q)

    def collapse(self, stage: int, column: int, q: int):
        if q < 1:
            raise ValueError("modulus must be positive")
        cur = self.modulus(column, stage + 1)
        if cur is not None and cur % q != 0:
            raise ValueError(f"collapse of column {column} to Id_{q} would split Id_{cur}")
        if self.log and stage < self.log[-1][0]:
            raise ValueError("collapses must be logged in stage order")
        self.log.append((stage, column, q))

    def modulus(self, column: int, s: int) -> Optional[int]:
        """Modulus in force at stage ``s`` (collapses at stage t count from t+1)."""
        q = None
        for t, c, m in self.log:
            if t >= s:
                break
            if c == column:
                q = m
        return q

    def n_classes(self, column: int, s: int) -> Optional[int]:
        return self.modulus(column, s)

    def related(self, x, y, s):
        if x == y:
            return True
        wx, kx = column_of(x)
        wy, ky = column_of(y)
        if kx != ky:
            return False
        ax, ay = unpair(wx)[0], unpair(wy)[0]
        q = self.modulus(kx, s)
        if q is None:
            return ax == ay
        return ax % q == ay % q

    def next_in_class(self, y, after, s, exclude=frozenset()):
        # stay inside y's column: enumerate positions w in order
        wy, k = column_of(y)
        w = 0
        while True:
            z = column_point(w, k)
            if z > after and z not in exclude and self.related(z, y, s):
                return z
            w += 1


# -- the R_X enumerator ------------------------------------------------------

class _RxMember:
    """Stateful step for member ``m >= 1`` of the R_X family of ``i``.

    ``m - 1`` codes ``<birth, c, r>``.  Before stage ``birth`` nothing is
    enumerated.  If 0 is not yet in ``W_i`` at ``birth`` the member copies
    ``W_i`` forever.  Otherwise it targets ``x``: the ``r``-th positive number
    X-related to the current least non-element ``y`` of ``W_i``, and
    enumerates ``(W_c + [0, x)) - {x}``.  When ``y`` moves to ``y'`` the target
    migrates to the least ``x' > x`` related to ``y'`` not yet enumerated.
    """

    def __init__(self, X: Ceer, i: int, m: int):
        self.X, self.i = X, i
        self.birth, self.c, self.r = tuple_decode(m - 1, 3)
        self.reset()

    def reset(self):
        self.mode = None
        self.target = None
        self.y = None
        self.emitted: set = set()
        self.history: list = []

    def _first_target(self, y, t):
        x, seen = 0, -1
        while seen < self.r:
            x = self.X.next_in_class(y, x, t)
            seen += 1
        return x

    def __call__(self, own, t, view):
        if t < self.birth:
            return ()
        W = view[self.i]
        if self.mode is None:
            self.mode = "target" if 0 in W else "copy"
            if self.mode == "target":
                self.y = f_missing_of(W)
                self.target = self._first_target(self.y, t)
                self.history.append((t, self.target))
        if self.mode == "copy":
            out = set(W)
        else:
            y = f_missing_of(W)
            if y != self.y:
                self.y = y
                self.target = self.X.next_in_class(y, self.target, t, exclude=self.emitted)
                self.history.append((t, self.target))
            Y = view[self.c] if self.c < own else frozenset()
            out = (set(Y) | set(range(self.target))) - {self.target}
        self.emitted |= out
        return out


def rx_enumerator(reg: Registry, X: Ceer, i: int, m: int) -> int:
    if i < 0 or i >= len(reg):
        raise IndexError(f"no c.e. index {i}")
    key = ("rx", _Pin(X), i, m)
    if m == 0:
        return reg.memo(key, lambda: reg.register(
            Program(lambda own, t, view: view[i], cap=None, name=f"rx({i},0)")))
    return reg.memo(key, lambda: reg.register(
        Program(_RxMember(X, i, m), cap=None, name=f"rx({i},{m})")))


def rx_template(Y, x: int) -> set:
    return (set(Y) | set(range(x))) - {x}


# -- A_n taxonomy and enumerator ---------------------------------------------

ODDISH = "Oddish"
PROPER_CODING = "ProperCoding"
FULL_CODING = "FullCoding"
BIG = "Big"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class IndexKind:
    tag: str
    stage: int
    k: Optional[int] = None
    final: bool = False

    def __str__(self):
        return f"{self.tag}({self.k})" if self.k is not None else self.tag


def an_classify(reg: Registry, i: int, s: int, window: int = 64) -> IndexKind:
    """Kind of ``i`` from ``W_{i,s}``.  Odd coverage is judged on
    ``[0, window)``: every odd number below the window present means
    FullCoding."""
    W = reg.W(i, s)
    evens = sorted(x for x in W if x % 2 == 0)
    settled = reg.settled(i, s)
    if len(evens) >= 2:
        return IndexKind(BIG, s, final=True)
    if not evens:
        return IndexKind(ODDISH, s, final=settled)
    k = evens[0] // 2
    if all(x in W for x in range(1, window, 2)):
        return IndexKind(FULL_CODING, s, k=k, final=False)
    return IndexKind(PROPER_CODING, s, k=k, final=settled)


class _AnMember:
    """Stateful step for member ``m >= 1`` of the A_n family of ``i``.

    ``m - 1`` codes ``<birth, c, r>`` and the phase is fixed at ``birth`` by
    the evens seen in ``W_i``:

    * none: copy ``W_i`` forever;
    * one, ``2k``: enumerate ``{2k} + ((odd part of W_c + {2j+1 : j < w}) - {2w+1})``
      where ``<w, k>`` is X-related to ``<F(i), k>`` (F = least ``j`` with
      ``2j+1`` missing), migrating ``w`` as ``F(i)`` moves, and adding the
      evens of ``W_i`` once a second even appears;
    * two or more: ``W_c`` plus two distinct evens ``2a, 2b`` decoded from ``r``.
    """

    def __init__(self, X: Ceer, i: int, m: int):
        self.X, self.i = X, i
        self.birth, self.c, self.r = tuple_decode(m - 1, 3)
        self.reset()

    def reset(self):
        self.mode = None
        self.k = None
        self.w = None
        self.f = None
        self.emitted: set = set()

    def _w_after(self, f, after_w, t, exclude_w):
        target = column_point(f, self.k)
        w = after_w + 1
        while True:
            if w not in exclude_w and self.X.related(column_point(w, self.k), target, t):
                return w
            w += 1

    def __call__(self, own, t, view):
        if t < self.birth:
            return ()
        W = view[self.i]
        evens = sorted(x for x in W if x % 2 == 0)
        Y = view[self.c] if self.c < own else frozenset()
        if self.mode is None:
            if not evens:
                self.mode = "copy"
            elif len(evens) == 1:
                self.mode = "coding"
                self.k = evens[0] // 2
                self.f = f_missing_of(W, ODDS_ONLY)
                w, seen = -1, -1
                while seen < self.r:
                    w = self._w_after(self.f, w, t, ())
                    seen += 1
                self.w = w
            else:
                self.mode = "big"
        if self.mode == "copy":
            out = set(W)
        elif self.mode == "big":
            a, b = unpair(self.r)
            out = set(Y) | {2 * a, 2 * (a + 1 + b)}
        else:
            f = f_missing_of(W, ODDS_ONLY)
            if f != self.f:
                self.f = f
                taken = {(x - 1) // 2 for x in self.emitted if x % 2 == 1}
                self.w = self._w_after(f, self.w, t, taken)
            odds = {x for x in Y if x % 2 == 1} | {2 * j + 1 for j in range(self.w)}
            out = {2 * self.k} | (odds - {2 * self.w + 1})
            if len(evens) >= 2:
                out |= set(evens)
        self.emitted |= out
        return out

    @property
    def target(self):
        return self.w


def an_enumerator(reg: Registry, X: Ceer, i: int, m: int) -> int:
    if i < 0 or i >= len(reg):
        raise IndexError(f"no c.e. index {i}")
    key = ("an", _Pin(X), i, m)
    if m == 0:
        return reg.memo(key, lambda: reg.register(
            Program(lambda own, t, view: view[i], cap=None, name=f"an({i},0)")))
    return reg.memo(key, lambda: reg.register(
        Program(_AnMember(X, i, m), cap=None, name=f"an({i},{m})")))


def member_code(birth: int, c: int, r: int) -> int:
    """Family position ``m`` of the member born at ``birth`` over base ``c``
    with choice ``r``."""
    return tuple_code([birth, c, r]) + 1


def odd_embed(reg: Registry, k: int) -> int:
    """Index of ``{2x + 1 : x in W_k}`` (an Oddish index)."""
    settle = reg.program(k).settle
    return reg.memo(("odd", k), lambda: reg.register(
        Program(image_of(k, lambda x: 2 * x + 1).step, settle=settle, cap=None,
                name=f"odd({k})")))


__all__ = [
    "MalformedTuple", "esetn_to_eqce", "eset_codes", "rceg_to_esetn", "shift_embed",
    "rn_step", "rn_image", "f_missing", "f_missing_of", "Ceer", "ModCeer", "ColumnCeer",
    "rx_enumerator", "an_classify", "an_enumerator", "IndexKind", "member_code",
]
