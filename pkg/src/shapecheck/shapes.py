"""Abstract tensor shapes.

A shape is one of three things:

* ranked -- an ordered vector of per-axis extents, each either a known
  non-negative integer or unknown (``None``);
* unranked -- nothing is known about the tensor, not even its rank;
* bottom -- the error shape, produced when constraints provably conflict.

``Shape.scalar()`` (a ranked shape with zero axes) is a legal value.  Bottom
is absorbing: every operation that receives it returns it, and the executor
turns it into a diagnostic.  The domain supports ``meet`` (greatest lower
bound, used to bind fed data to declared shapes and to re-assert shapes) but
deliberately has no join: the checker only ever refines what it knows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

Dim = int | None

#: Largest representable known extent; larger values are rejected at parse time.
MAX_DIM = 2**31 - 1

_KINDS = ("ranked", "unranked", "bottom")


@dataclass(frozen=True)
class Shape:
    """An abstract tensor shape. Use the constructors below, not the raw ctor."""

    kind: str
    dims: tuple[int | None, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"bad shape kind {self.kind!r}")
        if self.kind != "ranked" and self.dims:
            raise ValueError(f"{self.kind} shape cannot carry dims")
        for d in self.dims:
            if d is None:
                continue
            if isinstance(d, bool) or not isinstance(d, int) or d < 0:
                raise ValueError(f"dim must be a non-negative int or None, got {d!r}")

    @staticmethod
    def of(*dims: int | None) -> "Shape":
        return Shape("ranked", tuple(dims))

    @staticmethod
    def ranked(dims: Iterable[int | None]) -> "Shape":
        return Shape("ranked", tuple(dims))

    @staticmethod
    def scalar() -> "Shape":
        return Shape("ranked", ())

    @property
    def is_ranked(self) -> bool:
        return self.kind == "ranked"

    @property
    def is_unranked(self) -> bool:
        return self.kind == "unranked"

    @property
    def is_bottom(self) -> bool:
        return self.kind == "bottom"

    @property
    def rank(self) -> int | None:
        """Number of axes, or None when the rank itself is unknown."""
        return len(self.dims) if self.kind == "ranked" else None

    @property
    def is_fully_known(self) -> bool:
        return self.kind == "ranked" and all(d is not None for d in self.dims)

    @property
    def is_partly_known(self) -> bool:
        return self.kind == "ranked" and any(d is None for d in self.dims)

    def __str__(self) -> str:
        if self.is_bottom:
            return "⊥"
        if self.is_unranked:
            return '"?"'
        return "[" + ", ".join("null" if d is None else str(d) for d in self.dims) + "]"


UNRANKED = Shape("unranked")
BOTTOM = Shape("bottom")
SCALAR = Shape.scalar()

#: Wildcard entry of a target shape: "work this axis out from the element count".
WILDCARD = -1


@dataclass(frozen=True)
class DesiredShape:
    """A reshape target: positive extents with at most one wildcard (-1) slot."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        wilds = 0
        for e in self.entries:
            if isinstance(e, bool) or not isinstance(e, int):
                raise ValueError(f"desired entry must be an int, got {e!r}")
            if e == WILDCARD:
                wilds += 1
            elif e < 1:
                raise ValueError(f"desired entry must be >= 1 or the wildcard -1, got {e}")
        if wilds > 1:
            raise ValueError("desired shape may contain at most one wildcard")

    @staticmethod
    def of(*entries: int) -> "DesiredShape":
        return DesiredShape(tuple(entries))

    @property
    def wildcard_index(self) -> int | None:
        for i, e in enumerate(self.entries):
            if e == WILDCARD:
                return i
        return None

    @property
    def known_product(self) -> int:
        """Product of the non-wildcard entries."""
        return math.prod(e for e in self.entries if e != WILDCARD)


def meet(a: Shape, b: Shape) -> Shape:
    """Most precise shape consistent with both, or bottom on conflict.

    Commutative, associative, idempotent; unranked is the identity and
    bottom is absorbing.  Ranked shapes of different rank conflict, as do
    axes carrying two distinct known extents.
    """
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    if a.is_unranked:
        return b
    if b.is_unranked:
        return a
    if len(a.dims) != len(b.dims):
        return BOTTOM
    out: list[int | None] = []
    for x, y in zip(a.dims, b.dims):
        if x is None:
            out.append(y)
        elif y is None or x == y:
            out.append(x)
        else:
            return BOTTOM
    return Shape.ranked(out)


def element_count(s: Shape) -> int | None:
    """Total number of elements when fully known, else None. Scalars count 1."""
    if not s.is_fully_known:
        return None
    return math.prod(s.dims)  # type: ignore[arg-type]


def broadcast(a: Shape, b: Shape) -> Shape:
    """Right-aligned elementwise broadcast of two shapes.

    Per axis: a known 1 yields the other side, equal knowns pass, a known
    against an unknown yields unknown, and unequal knowns (neither 1)
    conflict.  Any unranked operand makes the result unranked.
    """
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    if a.is_unranked or b.is_unranked:
        return UNRANKED
    rank = max(len(a.dims), len(b.dims))
    da = (1,) * (rank - len(a.dims)) + a.dims
    db = (1,) * (rank - len(b.dims)) + b.dims
    out: list[int | None] = []
    for x, y in zip(da, db):
        if x == 1:
            out.append(y)
        elif y == 1:
            out.append(x)
        elif x is None or y is None:
            out.append(None)
        elif x == y:
            out.append(x)
        else:
            return BOTTOM
    return Shape.ranked(out)


def contains(s: Shape, concrete: Sequence[int]) -> bool:
    """Whether a concrete shape belongs to the concretization of ``s``."""
    if s.is_bottom:
        return False
    if s.is_unranked:
        return True
    if len(s.dims) != len(concrete):
        return False
    return all(d is None or d == c for d, c in zip(s.dims, concrete))


def refines(a: Shape, b: Shape) -> bool:
    """Whether every concrete shape of ``a`` is also a concrete shape of ``b``."""
    if a.is_bottom:
        return True
    if b.is_bottom:
        return False
    if b.is_unranked:
        return True
    if a.is_unranked:
        return False
    if len(a.dims) != len(b.dims):
        return False
    return all(y is None or x == y for x, y in zip(a.dims, b.dims))


def from_literal(lit: object) -> Shape:
    """Decode an IR shape literal: a list of ints/nulls, or "?" for unranked.

    Raises ValueError with a human message for malformed literals.
    """
    if lit == "?":
        return UNRANKED
    if not isinstance(lit, list):
        raise ValueError(f'shape literal must be a list or "?", got {lit!r}')
    dims: list[int | None] = []
    for i, d in enumerate(lit):
        if d is None:
            dims.append(None)
        elif isinstance(d, int) and not isinstance(d, bool) and 0 <= d <= MAX_DIM:
            dims.append(d)
        else:
            raise ValueError(
                f"shape entry {i} must be null or an integer in [0, {MAX_DIM}], got {d!r}"
            )
    return Shape.ranked(dims)


def to_literal(s: Shape) -> object:
    """Encode a shape as its IR literal. Bottom has no literal form."""
    if s.is_bottom:
        raise ValueError("the bottom shape has no IR literal")
    if s.is_unranked:
        return "?"
    return list(s.dims)


def format_shape(s: Shape) -> str:
    """Render a shape the way the IR would spell it (used in diagnostics)."""
    return str(s)
