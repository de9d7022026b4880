"""The operation catalog: one shape transfer function per supported op kind.

Every transfer is total -- it returns a shape for any combination of input
shapes (bottom included) and never raises for domain values.  Conflicts are
reported as the bottom shape, which the session layer converts into a
diagnostic.  Attribute well-formedness is checked separately (at parse and
graph-build time) by :func:`validate_attrs`, so transfers may assume their
attributes are structurally sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from .shapes import (
    BOTTOM,
    UNRANKED,
    WILDCARD,
    DesiredShape,
    Shape,
    broadcast,
    element_count,
)

Attrs = Mapping[str, Any]

_CONFLICT = object()  # per-axis sentinel used by the sliding-window helper


# ---------------------------------------------------------------------------
# transfers
# ---------------------------------------------------------------------------

def identity_transfer(x: Shape) -> Shape:
    """Shape-preserving ops (relu, dropout, tanh, ...): the input passes through."""
    return x


def elementwise_transfer(a: Shape, b: Shape) -> Shape:
    """Binary elementwise ops (add, sub, mul, div, bias_add) broadcast."""
    return broadcast(a, b)


def matmul_transfer(a: Shape, b: Shape) -> Shape:
    """Rank-2 matrix product: [m, k] x [k, n] -> [m, n].

    An unknown inner extent passes optimistically; a known inner mismatch or
    a known rank other than 2 is a conflict.  An unranked operand makes the
    result unranked.
    """
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    if a.is_unranked or b.is_unranked:
        return UNRANKED
    if a.rank != 2 or b.rank != 2:
        return BOTTOM
    k1, k2 = a.dims[1], b.dims[0]
    if k1 is not None and k2 is not None and k1 != k2:
        return BOTTOM
    return Shape.of(a.dims[0], b.dims[1])


def reshape_transfer(x: Shape, desired: DesiredShape | Shape | None) -> Shape:
    """Reshape to a target that is fully given, has one wildcard, or is unknown.

    ``desired`` may be a :class:`DesiredShape`, ``None`` (the target shape is
    not known at all, which is illegal), or the bottom shape (the target was
    itself the result of a failed computation).

    * no wildcard: the output is exactly the target; if the input is fully
      known the element counts must agree, otherwise the count cannot be
      checked and the target is trusted;
    * wildcard + fully known input: the wildcard axis is the element count
      divided by the product of the other entries (conflict when not
      divisible);
    * wildcard + partly known or unranked input: the wildcard axis is
      unknown, the other axes are the given entries.
    """
    if isinstance(desired, Shape):
        if desired.is_bottom:
            return BOTTOM
        raise TypeError("desired must be a DesiredShape, None, or the bottom shape")
    if x.is_bottom:
        return BOTTOM
    if desired is None:
        return BOTTOM
    w = desired.wildcard_index
    if w is None:
        n = element_count(x)
        if n is not None and n != desired.known_product:
            return BOTTOM
        return Shape.ranked(desired.entries)
    if x.is_fully_known:
        n = element_count(x)
        others = desired.known_product
        if others == 0 or n % others:  # others == 0 cannot happen for a valid target
            return BOTTOM
        return Shape.ranked(n // others if e == WILDCARD else e for e in desired.entries)
    return Shape.ranked(None if e == WILDCARD else e for e in desired.entries)


def reduce_transfer(x: Shape, axis: int | None = None, keep_dims: bool = False) -> Shape:
    """Reductions (mean/sum/max): no axis collapses everything to a scalar.

    With an axis, the axis is removed (or pinned to 1 under ``keep_dims``)
    after normalizing a negative index; an out-of-range axis conflicts.  An
    unranked input stays unranked when an axis is named.
    """
    if x.is_bottom:
        return BOTTOM
    if axis is None:
        return Shape.scalar()
    if x.is_unranked:
        return UNRANKED
    r = len(x.dims)
    ax = axis + r if axis < 0 else axis
    if not 0 <= ax < r:
        return BOTTOM
    dims = list(x.dims)
    if keep_dims:
        dims[ax] = 1
    else:
        del dims[ax]
    return Shape.ranked(dims)


def _window_axis(size: int | None, k: int | None, stride: int, padding: str):
    """Output extent of one spatial axis under a sliding window.

    SAME pads so every stride offset yields a position: ceil(size/stride).
    VALID places the window fully inside: ceil((size-k+1)/stride), a conflict
    when the window is larger than the axis.
    """
    if padding == "SAME":
        return None if size is None else -(-size // stride)
    if size is None or k is None:
        return None
    if size < k:
        return _CONFLICT
    return -(-(size - k + 1) // stride)


def conv2d_transfer(x: Shape, filt: Shape, strides: Sequence[int], padding: str) -> Shape:
    """2-D convolution over [N, H, W, C] with an [kh, kw, Cin, Cout] filter."""
    if x.is_bottom or filt.is_bottom:
        return BOTTOM
    if x.is_unranked or filt.is_unranked:
        return UNRANKED
    if x.rank != 4 or filt.rank != 4:
        return BOTTOM
    c, c_in = x.dims[3], filt.dims[2]
    if c is not None and c_in is not None and c != c_in:
        return BOTTOM
    h = _window_axis(x.dims[1], filt.dims[0], strides[1], padding)
    w = _window_axis(x.dims[2], filt.dims[1], strides[2], padding)
    if h is _CONFLICT or w is _CONFLICT:
        return BOTTOM
    return Shape.of(x.dims[0], h, w, filt.dims[3])


def pool2d_transfer(x: Shape, ksize: Sequence[int], strides: Sequence[int], padding: str) -> Shape:
    """2-D max/avg pooling over [N, H, W, C]: batch and channels pass through."""
    if x.is_bottom:
        return BOTTOM
    if x.is_unranked:
        return UNRANKED
    if x.rank != 4:
        return BOTTOM
    h = _window_axis(x.dims[1], ksize[1], strides[1], padding)
    w = _window_axis(x.dims[2], ksize[2], strides[2], padding)
    if h is _CONFLICT or w is _CONFLICT:
        return BOTTOM
    return Shape.of(x.dims[0], h, w, x.dims[3])


def concat_transfer(inputs: Sequence[Shape], axis: int) -> Shape:
    """Concatenate along one axis: ranks must agree, non-axis extents must meet.

    The axis extent is the sum when every contribution is known, else
    unknown.  Unranked operands contribute nothing but leave the axis sum
    unknown; with no ranked operand at all the result is unranked.
    """
    if any(s.is_bottom for s in inputs):
        return BOTTOM
    ranked = [s for s in inputs if s.is_ranked]
    if not ranked:
        return UNRANKED
    r = len(ranked[0].dims)
    if any(len(s.dims) != r for s in ranked):
        return BOTTOM
    ax = axis + r if axis < 0 else axis
    if not 0 <= ax < r:
        return BOTTOM
    dims: list[int | None] = []
    for i in range(r):
        if i == ax:
            dims.append(None)  # patched below
            continue
        d: int | None = None
        for s in ranked:
            di = s.dims[i]
            if di is None:
                continue
            if d is None:
                d = di
            elif d != di:
                return BOTTOM
        dims.append(d)
    if len(ranked) == len(inputs) and all(s.dims[ax] is not None for s in ranked):
        dims[ax] = sum(s.dims[ax] for s in ranked)  # type: ignore[misc]
    return Shape.ranked(dims)


def transpose_transfer(x: Shape, perm: Sequence[int] | None = None) -> Shape:
    """Permute axes; with no permutation given, reverse them."""
    if x.is_bottom:
        return BOTTOM
    if perm is not None and sorted(perm) != list(range(len(perm))):
        return BOTTOM
    if x.is_unranked:
        return UNRANKED
    if perm is None:
        return Shape.ranked(reversed(x.dims))
    if len(perm) != len(x.dims):
        return BOTTOM
    return Shape.ranked(x.dims[p] for p in perm)


def expand_dims_transfer(x: Shape, axis: int) -> Shape:
    """Insert a size-1 axis at ``axis`` (negative counts from the new rank)."""
    if x.is_bottom:
        return BOTTOM
    if x.is_unranked:
        return UNRANKED
    r = len(x.dims)
    ax = axis + r + 1 if axis < 0 else axis
    if not 0 <= ax <= r:
        return BOTTOM
    dims = list(x.dims)
    dims.insert(ax, 1)
    return Shape.ranked(dims)


def squeeze_transfer(x: Shape, axes: Sequence[int] | None = None) -> Shape:
    """Drop size-1 axes.

    Named axes must be known to be 1; a named unknown axis is treated as a
    conflict rather than silently guessed.  With no axes named, a partly
    known input squeezes to an unranked result because any unknown axis
    might concretely be 1.
    """
    if x.is_bottom:
        return BOTTOM
    if x.is_unranked:
        return UNRANKED
    if axes is None:
        if any(d is None for d in x.dims):
            return UNRANKED
        return Shape.ranked(d for d in x.dims if d != 1)
    r = len(x.dims)
    norm = []
    for a in axes:
        ax = a + r if a < 0 else a
        if not 0 <= ax < r:
            return BOTTOM
        norm.append(ax)
    if len(set(norm)) != len(norm):
        return BOTTOM
    for ax in norm:
        if x.dims[ax] != 1:  # unknown compares unequal: strict
            return BOTTOM
    drop = set(norm)
    return Shape.ranked(d for i, d in enumerate(x.dims) if i not in drop)


def argmax_transfer(x: Shape, axis: int = 0) -> Shape:
    """Index of the maximum along one axis: the axis is removed."""
    if x.is_bottom:
        return BOTTOM
    if x.is_unranked:
        return UNRANKED
    r = len(x.dims)
    ax = axis + r if axis < 0 else axis
    if not 0 <= ax < r:
        return BOTTOM
    dims = list(x.dims)
    del dims[ax]
    return Shape.ranked(dims)


def one_hot_transfer(x: Shape, depth: int) -> Shape:
    """Append a new trailing axis of extent ``depth``."""
    if x.is_bottom:
        return BOTTOM
    if x.is_unranked:
        return UNRANKED
    return Shape.ranked(x.dims + (depth,))


def flatten_transfer(x: Shape) -> Shape:
    """Keep the leading axis, collapse the rest into one axis."""
    if x.is_bottom:
        return BOTTOM
    if x.is_unranked:
        return UNRANKED
    if len(x.dims) == 0:
        return BOTTOM
    rest = x.dims[1:]
    tail: int | None
    if any(d is None for d in rest):
        tail = None
    else:
        tail = math.prod(rest)  # type: ignore[arg-type]
    return Shape.of(x.dims[0], tail)


# ---------------------------------------------------------------------------
# attribute validation
# ---------------------------------------------------------------------------

def _is_int(v: object) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _check_int(v: object) -> str | None:
    return None if _is_int(v) else f"expected an integer, got {v!r}"


def _check_nonneg_int(v: object) -> str | None:
    if not _is_int(v) or v < 0:
        return f"expected a non-negative integer, got {v!r}"
    return None


def _check_bool(v: object) -> str | None:
    return None if isinstance(v, bool) else f"expected a boolean, got {v!r}"


def _check_int_list(v: object) -> str | None:
    if not isinstance(v, list) or not all(_is_int(e) for e in v):
        return f"expected a list of integers, got {v!r}"
    return None


def _check_window4(v: object) -> str | None:
    err = _check_int_list(v)
    if err:
        return err
    assert isinstance(v, list)
    if len(v) != 4 or any(e < 1 for e in v):
        return f"expected 4 entries all >= 1, got {v!r}"
    if v[0] != 1 or v[3] != 1:
        return f"first and last entries must be 1 (layout [N, H, W, C]), got {v!r}"
    return None


def _check_padding(v: object) -> str | None:
    if v not in ("SAME", "VALID"):
        return f'expected "SAME" or "VALID", got {v!r}'
    return None


def _check_desired(v: object) -> str | None:
    err = _check_int_list(v)
    if err:
        return err
    assert isinstance(v, list)
    try:
        DesiredShape(tuple(v))
    except ValueError as e:
        return str(e)
    return None


def _check_value_literal(v: object) -> str | None:
    """Nested (non-ragged) numeric literal; its shape is derived elsewhere."""
    try:
        literal_shape(v)
    except ValueError as e:
        return str(e)
    return None


def literal_shape(v: object) -> tuple[int, ...]:
    """Shape of a nested list/scalar literal; ragged nesting is rejected."""
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return ()
    if isinstance(v, list):
        if not v:
            return (0,)
        subs = [literal_shape(e) for e in v]
        if any(s != subs[0] for s in subs[1:]):
            raise ValueError("ragged literal: sub-lists have differing shapes")
        return (len(v),) + subs[0]
    raise ValueError(f"literal must be a number or nested list of numbers, got {v!r}")


@dataclass(frozen=True)
class AttrField:
    name: str
    required: bool
    check: Callable[[object], "str | None"]


_NO_ATTRS: tuple[AttrField, ...] = ()

_ATTR_SCHEMAS: dict[str, tuple[AttrField, ...]] = {
    "placeholder": _NO_ATTRS,
    "variable": _NO_ATTRS,
    "constant": (AttrField("value", False, _check_value_literal),),
    "assign": (AttrField("validate", False, _check_bool),),
    "set_shape": _NO_ATTRS,
    "reshape": (AttrField("desired", False, _check_desired),),
    "matmul": _NO_ATTRS,
    "conv2d": (
        AttrField("strides", True, _check_window4),
        AttrField("padding", True, _check_padding),
    ),
    "transpose": (AttrField("perm", False, _check_int_list),),
    "concat": (AttrField("axis", True, _check_int),),
    "expand_dims": (AttrField("axis", True, _check_int),),
    "squeeze": (AttrField("axes", False, _check_int_list),),
    "argmax": (AttrField("axis", False, _check_int),),
    "one_hot": (AttrField("depth", True, _check_nonneg_int),),
    "flatten": _NO_ATTRS,
}
for _name in ("reduce_mean", "reduce_sum", "reduce_max"):
    _ATTR_SCHEMAS[_name] = (
        AttrField("axis", False, _check_int),
        AttrField("keep_dims", False, _check_bool),
    )
for _name in ("max_pool", "avg_pool"):
    _ATTR_SCHEMAS[_name] = (
        AttrField("ksize", True, _check_window4),
        AttrField("strides", True, _check_window4),
        AttrField("padding", True, _check_padding),
    )
for _name in ("add", "sub", "mul", "div", "bias_add", "relu", "dropout",
              "tanh", "sigmoid", "softmax", "cast"):
    _ATTR_SCHEMAS[_name] = _NO_ATTRS


def attr_schema(op: str) -> tuple[AttrField, ...]:
    """Declared attribute fields of an op kind."""
    return _ATTR_SCHEMAS[op]


def validate_attrs(op: str, attrs: Attrs) -> list[str]:
    """Structural attribute errors for one node, as human-readable strings."""
    schema = _ATTR_SCHEMAS.get(op)
    if schema is None:
        return [f"unknown op kind {op!r}"]
    errors = []
    known = {f.name for f in schema}
    for key in attrs:
        if key not in known:
            errors.append(f"op {op!r} does not take attribute {key!r}")
    for f in schema:
        if f.name not in attrs:
            if f.required:
                errors.append(f"op {op!r} requires attribute {f.name!r}")
            continue
        err = f.check(attrs[f.name])
        if err:
            errors.append(f"attribute {f.name!r}: {err}")
    if op in ("reduce_mean", "reduce_sum", "reduce_max"):
        if attrs.get("keep_dims") and "axis" not in attrs:
            errors.append("keep_dims requires an axis (a full reduction is a scalar)")
    return errors


# ---------------------------------------------------------------------------
# op registry
# ---------------------------------------------------------------------------

PureTransfer = Callable[[Sequence[Shape], Attrs], Shape]


@dataclass(frozen=True)
class OpSpec:
    """Static description of one op kind: arity, attributes, transfer."""

    name: str
    category: str  # "source" | "special" | "pure"
    arity: int | None  # None means variadic, at least 1 input
    transfer: PureTransfer | None = None

    @property
    def takes_shape_field(self) -> bool:
        return self.name in ("placeholder", "variable", "constant", "set_shape")


def _desired_from_attrs(attrs: Attrs) -> DesiredShape | None:
    d = attrs.get("desired")
    return None if d is None else DesiredShape(tuple(d))


def _reduce(shapes: Sequence[Shape], attrs: Attrs) -> Shape:
    return reduce_transfer(shapes[0], attrs.get("axis"), bool(attrs.get("keep_dims", False)))


_PURE_TRANSFERS: dict[str, PureTransfer] = {
    "reshape": lambda s, a: reshape_transfer(s[0], _desired_from_attrs(a)),
    "matmul": lambda s, a: matmul_transfer(s[0], s[1]),
    "conv2d": lambda s, a: conv2d_transfer(s[0], s[1], a["strides"], a["padding"]),
    "transpose": lambda s, a: transpose_transfer(s[0], a.get("perm")),
    "concat": lambda s, a: concat_transfer(s, a["axis"]),
    "expand_dims": lambda s, a: expand_dims_transfer(s[0], a["axis"]),
    "squeeze": lambda s, a: squeeze_transfer(s[0], a.get("axes")),
    "argmax": lambda s, a: argmax_transfer(s[0], a.get("axis", 0)),
    "one_hot": lambda s, a: one_hot_transfer(s[0], a["depth"]),
    "flatten": lambda s, a: flatten_transfer(s[0]),
}
for _name in ("reduce_mean", "reduce_sum", "reduce_max"):
    _PURE_TRANSFERS[_name] = _reduce
for _name in ("max_pool", "avg_pool"):
    _PURE_TRANSFERS[_name] = lambda s, a: pool2d_transfer(s[0], a["ksize"], a["strides"], a["padding"])
for _name in ("add", "sub", "mul", "div", "bias_add"):
    _PURE_TRANSFERS[_name] = lambda s, a: elementwise_transfer(s[0], s[1])
for _name in ("relu", "dropout", "tanh", "sigmoid", "softmax", "cast"):
    _PURE_TRANSFERS[_name] = lambda s, a: identity_transfer(s[0])


def _arity(name: str) -> int | None:
    if name in ("placeholder", "variable", "constant"):
        return 0
    if name in ("matmul", "conv2d", "assign", "add", "sub", "mul", "div", "bias_add"):
        return 2
    if name == "concat":
        return None  # variadic, >= 1
    return 1


REGISTRY: dict[str, OpSpec] = {}
for _name in ("placeholder", "variable", "constant"):
    REGISTRY[_name] = OpSpec(_name, "source", 0)
for _name in ("assign", "set_shape"):
    REGISTRY[_name] = OpSpec(_name, "special", _arity(_name))
for _name, _fn in _PURE_TRANSFERS.items():
    REGISTRY[_name] = OpSpec(_name, "pure", _arity(_name), _fn)

OP_NAMES = tuple(sorted(REGISTRY))


def apply_transfer(op: str, shapes: Sequence[Shape], attrs: Attrs) -> Shape:
    """Run the pure transfer registered for ``op``."""
    spec = REGISTRY[op]
    if spec.transfer is None:
        raise ValueError(f"op {op!r} has no pure transfer (handled by the session)")
    return spec.transfer(shapes, attrs)
