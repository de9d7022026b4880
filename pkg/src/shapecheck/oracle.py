"""A miniature concrete interpreter over the same IR, used as ground truth.

Nodes are executed on real (zero-filled) numpy buffers: matmul really
multiplies, pooling really slides a window, reshape really reshapes.  Shape
errors therefore come out of genuine array machinery (or explicit
precondition checks on concrete integers), not out of the abstract transfer
rules, which makes this a fair differential oracle for the abstract engine.

Unknown extents in feed literals are concretized to sampled sizes in [1, 6];
sampling is deterministic per seed, and a fresh generator per literal keeps
equal axis positions coherent across feeds under one seed (two feeds with an
unknown leading axis get the same sampled batch).

Values are irrelevant for every cataloged operation, so buffers stay
zero-filled; this would need revisiting if a value-dependent op were added.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .graph import ShapeGraph, topo_order
from .ir import ProgramIR, RunPlan
from .ops import literal_shape
from .session import FeedSet
from .shapes import Shape, contains

AxisError = np.exceptions.AxisError


class ShapeError(Exception):
    """A concrete operation rejected its inputs' shapes."""


@dataclass(frozen=True)
class ConcreteError:
    run_index: int
    node_id: str
    op: str
    iteration: int
    message: str


@dataclass(frozen=True)
class OracleRunVerdict:
    run_index: int
    graph: str
    iterations: int
    error: ConcreteError | None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class OracleReport:
    verdicts: tuple[OracleRunVerdict, ...]

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    @property
    def first_error(self) -> ConcreteError | None:
        for v in self.verdicts:
            if v.error is not None:
                return v.error
        return None


def concretize(decl: Shape, seed: int) -> tuple[int, ...]:
    """Replace unknown extents with sampled sizes in [1, 6], deterministically.

    An unranked declaration first samples a rank in [0, 4].  The declaration
    must not be bottom.
    """
    if decl.is_bottom:
        raise ValueError("cannot concretize the bottom shape")
    rng = random.Random(seed)
    if decl.is_unranked:
        rank = rng.randint(0, 4)
        return tuple(rng.randint(1, 6) for _ in range(rank))
    return tuple(d if d is not None else rng.randint(1, 6) for d in decl.dims)


# ---------------------------------------------------------------------------
# concrete op implementations
# ---------------------------------------------------------------------------

def _window_positions(size: int, k: int, stride: int, padding: str) -> list[int]:
    """Start offsets of every window placement along one axis.

    The output extent *emerges* from enumerating placements instead of from
    closed-form arithmetic.  SAME pads so every stride offset below the axis
    size yields a window; VALID keeps the window fully inside and rejects a
    window larger than the axis.
    """
    positions = []
    p = 0
    if padding == "VALID":
        if size < k:
            raise ShapeError(f"window of {k} does not fit in axis of {size}")
        while p + k <= size:
            positions.append(p)
            p += stride
    else:
        while p < size:
            positions.append(p)
            p += stride
    return positions


def _pool_window(x: np.ndarray, n: int, i0: int, j0: int, kh: int, kw: int) -> np.ndarray:
    # clip to the padded-with-nothing view; zero padding adds no information
    return x[n, i0:min(i0 + kh, x.shape[1]), j0:min(j0 + kw, x.shape[2]), :]


def _conv2d(x: np.ndarray, f: np.ndarray, strides: Sequence[int], padding: str) -> np.ndarray:
    if x.ndim != 4 or f.ndim != 4:
        raise ShapeError(f"conv2d needs rank-4 input and filter, got {x.shape} and {f.shape}")
    if x.shape[3] != f.shape[2]:
        raise ShapeError(f"input channels {x.shape[3]} != filter channels {f.shape[2]}")
    kh, kw = f.shape[0], f.shape[1]
    rows = _window_positions(x.shape[1], kh, strides[1], padding)
    cols = _window_positions(x.shape[2], kw, strides[2], padding)
    out = np.zeros((x.shape[0], len(rows), len(cols), f.shape[3]))
    fm = f.reshape(-1, f.shape[3])
    for n in range(x.shape[0]):
        for oi, i0 in enumerate(rows):
            for oj, j0 in enumerate(cols):
                win = _pool_window(x, n, i0, j0, kh, kw)
                if win.shape[0] == kh and win.shape[1] == kw:
                    out[n, oi, oj, :] = win.reshape(-1) @ fm
                # else: the window hangs over the edge under SAME padding;
                # zero padding contributes zero, and the buffer is zero anyway
    return out


def _pool2d(kind: str, x: np.ndarray, ksize: Sequence[int], strides: Sequence[int],
            padding: str) -> np.ndarray:
    if x.ndim != 4:
        raise ShapeError(f"pooling needs a rank-4 input, got {x.shape}")
    kh, kw = ksize[1], ksize[2]
    rows = _window_positions(x.shape[1], kh, strides[1], padding)
    cols = _window_positions(x.shape[2], kw, strides[2], padding)
    out = np.zeros((x.shape[0], len(rows), len(cols), x.shape[3]))
    reducer = np.max if kind == "max" else np.mean
    for n in range(x.shape[0]):
        for oi, i0 in enumerate(rows):
            for oj, j0 in enumerate(cols):
                win = _pool_window(x, n, i0, j0, kh, kw)
                if win.size:
                    out[n, oi, oj, :] = reducer(win, axis=(0, 1))
    return out


def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs two rank-2 operands, got {a.shape} and {b.shape}")
    return a @ b


def _reshape(x: np.ndarray, attrs: Mapping[str, Any]) -> np.ndarray:
    desired = attrs.get("desired")
    if desired is None:
        raise ShapeError("reshape without a known target shape is illegal")
    return np.reshape(x, tuple(desired))


def _reduce(fn: Callable, x: np.ndarray, attrs: Mapping[str, Any]) -> np.ndarray:
    axis = attrs.get("axis")
    if axis is None:
        # a full reduction is a scalar by contract, keep_dims is rejected upstream
        return np.asarray(fn(x))
    return np.asarray(fn(x, axis=axis, keepdims=bool(attrs.get("keep_dims", False))))


def _softmax(x: np.ndarray) -> np.ndarray:
    if x.ndim == 0:
        return np.ones(())
    e = np.exp(x - np.max(x, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


def _transpose(x: np.ndarray, attrs: Mapping[str, Any]) -> np.ndarray:
    perm = attrs.get("perm")
    if perm is None:
        return np.transpose(x)
    if sorted(perm) != list(range(len(perm))) or len(perm) != x.ndim:
        raise ShapeError(f"perm {perm} is not a permutation of the {x.ndim} axes")
    return np.transpose(x, perm)


def _squeeze(x: np.ndarray, attrs: Mapping[str, Any]) -> np.ndarray:
    axes = attrs.get("axes")
    if axes is None:
        return np.squeeze(x)
    return np.squeeze(x, axis=tuple(axes))


def _flatten(x: np.ndarray) -> np.ndarray:
    if x.ndim < 1:
        raise ShapeError("flatten needs at least one axis")
    return np.reshape(x, (x.shape[0], int(np.prod(x.shape[1:], dtype=np.int64))))


def _one_hot(x: np.ndarray, depth: int) -> np.ndarray:
    return np.zeros(x.shape + (depth,))


def concrete_apply(op: str, arrays: Sequence[np.ndarray], attrs: Mapping[str, Any]) -> np.ndarray:
    """Execute one pure op on concrete buffers; ShapeError on shape misuse."""
    try:
        with np.errstate(all="ignore"):
            if op == "matmul":
                return _matmul(arrays[0], arrays[1])
            if op == "conv2d":
                return _conv2d(arrays[0], arrays[1], attrs["strides"], attrs["padding"])
            if op == "max_pool":
                return _pool2d("max", arrays[0], attrs["ksize"], attrs["strides"], attrs["padding"])
            if op == "avg_pool":
                return _pool2d("avg", arrays[0], attrs["ksize"], attrs["strides"], attrs["padding"])
            if op == "add" or op == "bias_add":
                return arrays[0] + arrays[1]
            if op == "sub":
                return arrays[0] - arrays[1]
            if op == "mul":
                return arrays[0] * arrays[1]
            if op == "div":
                return arrays[0] / arrays[1]
            if op == "relu":
                return np.maximum(arrays[0], 0.0)
            if op == "dropout":
                return arrays[0] * 1.0
            if op == "tanh":
                return np.tanh(arrays[0])
            if op == "sigmoid":
                return 1.0 / (1.0 + np.exp(-arrays[0]))
            if op == "softmax":
                return _softmax(arrays[0])
            if op == "cast":
                return arrays[0].astype(np.float32)
            if op == "reshape":
                return _reshape(arrays[0], attrs)
            if op == "reduce_mean":
                return _reduce(np.mean, arrays[0], attrs)
            if op == "reduce_sum":
                return _reduce(np.sum, arrays[0], attrs)
            if op == "reduce_max":
                return _reduce(np.max, arrays[0], attrs)
            if op == "transpose":
                return _transpose(arrays[0], attrs)
            if op == "concat":
                return np.concatenate(list(arrays), axis=attrs["axis"])
            if op == "expand_dims":
                return np.expand_dims(arrays[0], attrs["axis"])
            if op == "squeeze":
                return _squeeze(arrays[0], attrs)
            if op == "argmax":
                return np.asarray(np.argmax(arrays[0], axis=attrs.get("axis", 0)), dtype=float)
            if op == "one_hot":
                return _one_hot(arrays[0], attrs["depth"])
            if op == "flatten":
                return _flatten(arrays[0])
    except ShapeError:
        raise
    except (ValueError, IndexError, AxisError) as e:
        raise ShapeError(str(e)) from None
    raise ValueError(f"op {op!r} has no concrete implementation")


# ---------------------------------------------------------------------------
# the interpreter loop
# ---------------------------------------------------------------------------

TraceSink = Callable[[int, int, str, tuple[int, ...]], None]


def _check_declared(concrete: tuple[int, ...], declared: Shape) -> "str | None":
    if not contains(declared, concrete):
        return f"concrete shape {list(concrete)} does not satisfy declared shape {declared}"
    return None


def _run_plan(
    plan: RunPlan,
    run_index: int,
    graph: ShapeGraph,
    seed: int,
    max_iterations: int | None,
    sink: "TraceSink | None",
) -> OracleRunVerdict:
    order = topo_order(graph, list(plan.fetches))
    variables: dict[str, np.ndarray] = {}
    for vid in graph.variable_ids:
        declared = graph.node(vid).shape
        assert declared is not None
        variables[vid] = np.zeros(concretize(declared, seed))

    feeds: Sequence[FeedSet] = list(plan.feeds) or [FeedSet({})]
    total = plan.repeat * len(feeds)
    if max_iterations is not None:
        total = min(total, max_iterations)

    completed = 0
    for i in range(total):
        iteration = i + 1
        feed = feeds[i % len(feeds)]
        values: dict[str, np.ndarray] = {}
        error: ConcreteError | None = None

        for node_id in order:
            node = graph.node(node_id)
            try:
                if node.op == "placeholder":
                    assert node.shape is not None
                    if node_id not in feed.bindings:
                        raise ShapeError("placeholder was not fed")
                    fed = concretize(feed.bindings[node_id], seed)
                    problem = _check_declared(fed, node.shape)
                    if problem:
                        raise ShapeError(problem)
                    values[node_id] = np.zeros(fed)
                elif node.op == "constant":
                    if node.shape is not None:
                        values[node_id] = np.zeros(concretize(node.shape, seed))
                    else:
                        values[node_id] = np.zeros(literal_shape(node.attrs["value"]))
                elif node.op == "variable":
                    values[node_id] = variables[node_id]
                elif node.op == "set_shape":
                    current = values[node.inputs[0]]
                    assert node.shape is not None
                    problem = _check_declared(current.shape, node.shape)
                    if problem:
                        raise ShapeError(problem)
                    values[node_id] = current
                elif node.op == "assign":
                    target = node.inputs[0]
                    new = values[node.inputs[1]]
                    if node.attrs.get("validate", True) and new.shape != variables[target].shape:
                        raise ShapeError(
                            f"assigned shape {list(new.shape)} does not match variable "
                            f"shape {list(variables[target].shape)}")
                    variables[target] = new
                    values[node_id] = new
                else:
                    inputs = [values[i] for i in node.inputs]
                    values[node_id] = concrete_apply(node.op, inputs, node.attrs)
            except ShapeError as e:
                error = ConcreteError(run_index, node_id, node.op, iteration, str(e))
                break
            if sink is not None:
                sink(run_index, iteration, node_id, values[node_id].shape)

        if error is not None:
            return OracleRunVerdict(run_index, plan.graph, completed, error)
        completed += 1
    return OracleRunVerdict(run_index, plan.graph, completed, None)


def concrete_run(
    ir: ProgramIR,
    seed: int,
    max_iterations: int | None = None,
    sink: "TraceSink | None" = None,
) -> OracleReport:
    """Execute every run plan on concrete buffers; first error stops its plan."""
    verdicts = []
    for idx, plan in enumerate(ir.runs):
        verdicts.append(_run_plan(plan, idx, ir.graph_of(plan.graph), seed,
                                  max_iterations, sink))
    return OracleReport(tuple(verdicts))
