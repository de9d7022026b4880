"""Transfer functions: per-op contracts, table conformance, totality, monotonicity."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shapecheck import ops
from shapecheck.oracle import ShapeError, concrete_apply
from shapecheck.shapes import BOTTOM, UNRANKED, DesiredShape, Shape, refines

S = Shape.of


# -- reshape ------------------------------------------------------------------

def test_reshape_known_known():
    assert ops.reshape_transfer(S(2, 6), DesiredShape.of(3, 4)) == S(3, 4)


def test_reshape_wildcard_forced():
    assert ops.reshape_transfer(S(2, 6), DesiredShape.of(4, -1)) == S(4, 3)


def test_reshape_unranked_known_target_trusted():
    assert ops.reshape_transfer(UNRANKED, DesiredShape.of(5, 5)) == S(5, 5)


def test_reshape_not_divisible():
    assert ops.reshape_transfer(S(2, 6), DesiredShape.of(5, -1)) == BOTTOM


def test_reshape_partly_known_wildcard():
    assert ops.reshape_transfer(S(None, 6), DesiredShape.of(4, -1)) == S(4, None)


def test_reshape_missing_target_is_illegal():
    assert ops.reshape_transfer(S(2, 6), None) == BOTTOM
    assert ops.reshape_transfer(UNRANKED, None) == BOTTOM


def test_reshape_bottom_absorbing():
    assert ops.reshape_transfer(BOTTOM, DesiredShape.of(2)) == BOTTOM
    assert ops.reshape_transfer(S(2), BOTTOM) == BOTTOM


def test_reshape_count_mismatch_fully_known():
    assert ops.reshape_transfer(S(2, 6), DesiredShape.of(5, 5)) == BOTTOM


def test_reshape_partly_known_fixed_target_trusted():
    # the count cannot be checked, so the target is taken at face value
    assert ops.reshape_transfer(S(None, 6), DesiredShape.of(5, 5)) == S(5, 5)


def test_reshape_zero_count_with_wildcard():
    assert ops.reshape_transfer(S(0, 3), DesiredShape.of(4, -1)) == S(4, 0)


CATEGORIES = ("known", "partly", "unranked", "bottom")


def classify(s: Shape) -> str:
    if s.is_bottom:
        return "bottom"
    if s.is_unranked:
        return "unranked"
    return "partly" if s.is_partly_known else "known"


# representatives: input count 12 so the known target [3, 4] is compatible
RESHAPE_INPUT_REPS = {
    "known": S(2, 6),
    "partly": S(None, 6),
    "unranked": UNRANKED,
    "bottom": BOTTOM,
}
RESHAPE_TARGET_REPS = {
    "known": DesiredShape.of(3, 4),
    "partly": DesiredShape.of(4, -1),
    "unranked": None,
    "bottom": BOTTOM,
}
# expected output category per (input category, target category)
RESHAPE_TABLE = {
    ("known", "known"): "known",
    ("known", "partly"): "known",
    ("known", "unranked"): "bottom",
    ("known", "bottom"): "bottom",
    ("partly", "known"): "known",
    ("partly", "partly"): "partly",
    ("partly", "unranked"): "bottom",
    ("partly", "bottom"): "bottom",
    ("unranked", "known"): "known",
    ("unranked", "partly"): "partly",
    ("unranked", "unranked"): "bottom",
    ("unranked", "bottom"): "bottom",
    ("bottom", "known"): "bottom",
    ("bottom", "partly"): "bottom",
    ("bottom", "unranked"): "bottom",
    ("bottom", "bottom"): "bottom",
}


def test_reshape_sixteen_cell_table():
    for (in_cat, tgt_cat), want in RESHAPE_TABLE.items():
        out = ops.reshape_transfer(RESHAPE_INPUT_REPS[in_cat], RESHAPE_TARGET_REPS[tgt_cat])
        assert classify(out) == want, (in_cat, tgt_cat, out)


# -- reduce ------------------------------------------------------------------

def test_reduce_no_axis_collapses_to_scalar():
    assert ops.reduce_transfer(S(3, 4)) == Shape.scalar()
    assert ops.reduce_transfer(S(None, 4)) == Shape.scalar()
    assert ops.reduce_transfer(UNRANKED) == Shape.scalar()
    assert ops.reduce_transfer(BOTTOM) == BOTTOM


def test_reduce_axis_removal():
    assert ops.reduce_transfer(S(3, 4), axis=0) == S(4)
    assert ops.reduce_transfer(S(3, 4), axis=-1) == S(3)


def test_reduce_keep_dims():
    assert ops.reduce_transfer(S(3, 4), axis=0, keep_dims=True) == S(1, 4)


def test_reduce_axis_out_of_range():
    assert ops.reduce_transfer(S(3, 4), axis=2) == BOTTOM
    assert ops.reduce_transfer(S(3, 4), axis=-3) == BOTTOM


def test_reduce_axis_on_unranked_stays_unranked():
    assert ops.reduce_transfer(UNRANKED, axis=1) == UNRANKED


# -- matmul ------------------------------------------------------------------

def test_matmul_inner_match():
    assert ops.matmul_transfer(S(3, 4), S(4, 5)) == S(3, 5)


def test_matmul_inner_mismatch():
    assert ops.matmul_transfer(S(3, 4), S(5, 6)) == BOTTOM


def test_matmul_unknown_batch_derived():
    # reference: concrete products for batches 1..5 all come out (b, 10)
    for b in range(1, 6):
        out = np.zeros((b, 784)) @ np.zeros((784, 10))
        assert out.shape == (b, 10)
    assert ops.matmul_transfer(S(None, 784), S(784, 10)) == S(None, 10)


def test_matmul_unknown_inner_passes():
    assert ops.matmul_transfer(S(3, None), S(4, 5)) == S(3, 5)


def test_matmul_bad_rank():
    assert ops.matmul_transfer(S(3), S(3, 4)) == BOTTOM
    assert ops.matmul_transfer(S(3, 4, 5), S(5, 6)) == BOTTOM


def test_matmul_unranked_operand():
    assert ops.matmul_transfer(UNRANKED, S(4, 5)) == UNRANKED
    assert ops.matmul_transfer(UNRANKED, S(3)) == UNRANKED


# -- conv2d ------------------------------------------------------------------

def _concrete_conv_shape(in_shape, f_shape, strides, padding):
    return concrete_apply(
        "conv2d", [np.zeros(in_shape), np.zeros(f_shape)],
        {"strides": strides, "padding": padding}).shape


def test_conv2d_same_preserves_spatial_derived():
    # reference: concrete sliding-window convolution at batch 2
    assert _concrete_conv_shape((2, 28, 28, 1), (5, 5, 1, 32), [1, 1, 1, 1], "SAME") \
        == (2, 28, 28, 32)
    out = ops.conv2d_transfer(S(None, 28, 28, 1), S(5, 5, 1, 32), [1, 1, 1, 1], "SAME")
    assert out == S(None, 28, 28, 32)


def test_conv2d_valid_strided_derived():
    assert _concrete_conv_shape((1, 7, 7, 3), (3, 3, 3, 8), [1, 2, 2, 1], "VALID") \
        == (1, 3, 3, 8)
    out = ops.conv2d_transfer(S(1, 7, 7, 3), S(3, 3, 3, 8), [1, 2, 2, 1], "VALID")
    assert out == S(1, 3, 3, 8)


def test_conv2d_channel_mismatch():
    out = ops.conv2d_transfer(S(1, 28, 28, 4), S(3, 3, 5, 8), [1, 1, 1, 1], "SAME")
    assert out == BOTTOM


def test_conv2d_window_too_large_valid():
    assert ops.conv2d_transfer(S(1, 2, 2, 1), S(3, 3, 1, 4), [1, 1, 1, 1], "VALID") == BOTTOM


def test_conv2d_rank_and_unranked():
    assert ops.conv2d_transfer(S(5, 5), S(3, 3, 1, 4), [1, 1, 1, 1], "SAME") == BOTTOM
    assert ops.conv2d_transfer(UNRANKED, S(3, 3, 1, 4), [1, 1, 1, 1], "SAME") == UNRANKED


# -- pooling -----------------------------------------------------------------

def _concrete_pool_shape(in_shape, ksize, strides, padding):
    return concrete_apply(
        "max_pool", [np.zeros(in_shape)],
        {"ksize": ksize, "strides": strides, "padding": padding}).shape


def test_pool_same_halves_derived():
    assert _concrete_pool_shape((2, 28, 28, 32), [1, 2, 2, 1], [1, 2, 2, 1], "SAME") \
        == (2, 14, 14, 32)
    out = ops.pool2d_transfer(S(None, 28, 28, 32), [1, 2, 2, 1], [1, 2, 2, 1], "SAME")
    assert out == S(None, 14, 14, 32)


def test_pool_valid_derived():
    assert _concrete_pool_shape((1, 7, 7, 3), [1, 3, 3, 1], [1, 2, 2, 1], "VALID") \
        == (1, 3, 3, 3)
    out = ops.pool2d_transfer(S(1, 7, 7, 3), [1, 3, 3, 1], [1, 2, 2, 1], "VALID")
    assert out == S(1, 3, 3, 3)


def test_pool_requires_rank_4():
    assert ops.pool2d_transfer(S(5, 5), [1, 2, 2, 1], [1, 2, 2, 1], "SAME") == BOTTOM


# -- elementwise / identity ----------------------------------------------------

def test_elementwise_scalars():
    assert ops.elementwise_transfer(Shape.scalar(), Shape.scalar()) == Shape.scalar()


def test_elementwise_broadcasts():
    assert ops.elementwise_transfer(S(2, 3), S(3)) == S(2, 3)
    assert ops.elementwise_transfer(S(2, 3), S(4, 3)) == BOTTOM


def test_identity_passthrough():
    assert ops.identity_transfer(S(None, 1024)) == S(None, 1024)
    assert ops.identity_transfer(UNRANKED) == UNRANKED
    assert ops.identity_transfer(BOTTOM) == BOTTOM


# -- concat ------------------------------------------------------------------

def test_concat_sums_axis():
    assert ops.concat_transfer([S(2, 3), S(4, 3)], 0) == S(6, 3)


def test_concat_non_axis_conflict():
    assert ops.concat_transfer([S(2, 3), S(2, 5)], 0) == BOTTOM


def test_concat_unknown_contribution():
    assert ops.concat_transfer([S(None, 3), S(2, 3)], 0) == S(None, 3)


def test_concat_rank_mismatch_and_unranked():
    assert ops.concat_transfer([S(2, 3), S(2, 3, 1)], 0) == BOTTOM
    assert ops.concat_transfer([UNRANKED, S(2, 3)], 0) == S(None, 3)
    assert ops.concat_transfer([UNRANKED, UNRANKED], 0) == UNRANKED


def test_concat_negative_and_bad_axis():
    assert ops.concat_transfer([S(2, 3), S(2, 4)], -1) == S(2, 7)
    assert ops.concat_transfer([S(2, 3)], 5) == BOTTOM


# -- transpose ---------------------------------------------------------------

def test_transpose_reverses_without_perm():
    assert ops.transpose_transfer(S(3, 5)) == S(5, 3)


def test_transpose_perm():
    assert ops.transpose_transfer(S(2, 3, 4), [2, 0, 1]) == S(4, 2, 3)


def test_transpose_bad_perm():
    assert ops.transpose_transfer(S(2, 3), [0, 0]) == BOTTOM
    assert ops.transpose_transfer(S(2, 3), [0, 1, 2]) == BOTTOM


def test_transpose_unranked():
    assert ops.transpose_transfer(UNRANKED) == UNRANKED


# -- shape adjusters -----------------------------------------------------------

def test_expand_dims():
    assert ops.expand_dims_transfer(S(3, 4), 0) == S(1, 3, 4)
    assert ops.expand_dims_transfer(S(3, 4), 2) == S(3, 4, 1)
    assert ops.expand_dims_transfer(S(3, 4), -1) == S(3, 4, 1)
    assert ops.expand_dims_transfer(S(3, 4), 5) == BOTTOM


def test_squeeze_unnamed():
    assert ops.squeeze_transfer(S(1, 3, 1)) == S(3)
    assert ops.squeeze_transfer(S(None, 3)) == UNRANKED  # the unknown might be 1


def test_squeeze_named():
    assert ops.squeeze_transfer(S(1, 3, 1), [0]) == S(3, 1)
    assert ops.squeeze_transfer(S(1, 3, 1), [-1]) == S(1, 3)
    assert ops.squeeze_transfer(S(1, 3), [1]) == BOTTOM           # known != 1
    assert ops.squeeze_transfer(S(None, 3), [0]) == BOTTOM        # unknown: strict
    assert ops.squeeze_transfer(S(1, 3), [0, 0]) == BOTTOM        # repeated axis


def test_argmax():
    assert ops.argmax_transfer(S(3, 4), 1) == S(3)
    assert ops.argmax_transfer(S(3, 4)) == S(4)
    assert ops.argmax_transfer(Shape.scalar()) == BOTTOM


def test_one_hot():
    assert ops.one_hot_transfer(S(5), 10) == S(5, 10)
    assert ops.one_hot_transfer(Shape.scalar(), 3) == S(3)


def test_flatten():
    assert ops.flatten_transfer(S(2, 3, 4)) == S(2, 12)
    assert ops.flatten_transfer(S(None, 3, None)) == S(None, None)
    assert ops.flatten_transfer(S(7)) == S(7, 1)
    assert ops.flatten_transfer(Shape.scalar()) == BOTTOM


# -- registry ----------------------------------------------------------------

def test_registry_is_total():
    """Every op kind maps to a category and, for pure ops, one transfer."""
    assert len(ops.OP_NAMES) >= 30
    for name in ops.OP_NAMES:
        spec = ops.REGISTRY[name]
        if spec.category == "pure":
            assert spec.transfer is not None
        else:
            assert spec.transfer is None


def test_validate_attrs_rejects_unknown_and_missing():
    assert ops.validate_attrs("conv3d", {}) == ["unknown op kind 'conv3d'"]
    assert any("requires attribute" in e for e in ops.validate_attrs("conv2d", {}))
    assert any("does not take" in e for e in ops.validate_attrs("relu", {"rate": 1}))
    assert any("keep_dims requires" in e
               for e in ops.validate_attrs("reduce_mean", {"keep_dims": True}))
    assert ops.validate_attrs("max_pool", {
        "ksize": [1, 2, 2, 1], "strides": [1, 2, 2, 1], "padding": "SAME"}) == []
    assert any("first and last" in e for e in ops.validate_attrs("max_pool", {
        "ksize": [2, 2, 2, 1], "strides": [1, 2, 2, 1], "padding": "SAME"}))


# -- totality and monotonicity properties --------------------------------------

dims = st.one_of(st.none(), st.integers(0, 6))
any_shape = st.one_of(
    st.just(UNRANKED), st.just(BOTTOM),
    st.lists(dims, max_size=4).map(Shape.ranked),
)


def _attrs_for(op, draw):
    if op in ("reduce_mean", "reduce_sum", "reduce_max", "argmax"):
        axis = draw(st.one_of(st.none(), st.integers(-5, 5)))
        attrs = {} if axis is None else {"axis": axis}
        if op != "argmax" and axis is not None and draw(st.booleans()):
            attrs["keep_dims"] = True
        return attrs
    if op in ("max_pool", "avg_pool"):
        return {"ksize": [1, draw(st.integers(1, 4)), draw(st.integers(1, 4)), 1],
                "strides": [1, draw(st.integers(1, 3)), draw(st.integers(1, 3)), 1],
                "padding": draw(st.sampled_from(["SAME", "VALID"]))}
    if op == "conv2d":
        return {"strides": [1, draw(st.integers(1, 3)), draw(st.integers(1, 3)), 1],
                "padding": draw(st.sampled_from(["SAME", "VALID"]))}
    if op == "reshape":
        if draw(st.booleans()):
            return {}
        entries = draw(st.lists(st.integers(1, 6), min_size=0, max_size=3))
        if draw(st.booleans()):
            entries.insert(draw(st.integers(0, len(entries))), -1)
        return {"desired": entries}
    if op == "transpose":
        perm = draw(st.one_of(st.none(), st.permutations(list(range(draw(st.integers(0, 4)))))))
        return {} if perm is None else {"perm": list(perm)}
    if op == "concat":
        return {"axis": draw(st.integers(-4, 4))}
    if op == "expand_dims":
        return {"axis": draw(st.integers(-5, 5))}
    if op == "squeeze":
        axes = draw(st.one_of(st.none(), st.lists(st.integers(-4, 4), max_size=3)))
        return {} if axes is None else {"axes": axes}
    if op == "one_hot":
        return {"depth": draw(st.integers(0, 8))}
    return {}


pure_ops = [n for n in ops.OP_NAMES if ops.REGISTRY[n].category == "pure"]


@given(st.data())
def test_transfers_are_total(data):
    """Any op, any shapes, any well-formed attrs: a Shape comes back, no raise."""
    op = data.draw(st.sampled_from(pure_ops))
    spec = ops.REGISTRY[op]
    n = spec.arity if spec.arity is not None else data.draw(st.integers(1, 3))
    shapes_in = [data.draw(any_shape) for _ in range(n)]
    attrs = _attrs_for(op, data.draw)
    out = ops.apply_transfer(op, shapes_in, attrs)
    assert isinstance(out, Shape)
    if any(s.is_bottom for s in shapes_in):
        assert out == BOTTOM


def _refinements(s: Shape, draw):
    """One step more precise than s: fill an unknown, or rank an unranked."""
    if s.is_unranked:
        return Shape.ranked([draw(st.integers(0, 6)) for _ in range(draw(st.integers(0, 4)))])
    if s.is_partly_known:
        dims = list(s.dims)
        idxs = [i for i, d in enumerate(dims) if d is None]
        dims[draw(st.sampled_from(idxs))] = draw(st.integers(0, 6))
        return Shape.ranked(dims)
    return s


@given(st.data())
def test_transfers_monotone_under_refinement(data):
    """Refining an input never rewrites known output extents; it may only
    refine unknowns or reveal a conflict."""
    op = data.draw(st.sampled_from(pure_ops))
    spec = ops.REGISTRY[op]
    n = spec.arity if spec.arity is not None else data.draw(st.integers(1, 3))
    shapes_in = [data.draw(any_shape.filter(lambda s: not s.is_bottom))
                 for _ in range(n)]
    attrs = _attrs_for(op, data.draw)
    base = ops.apply_transfer(op, shapes_in, attrs)
    refined_in = [_refinements(s, data.draw) for s in shapes_in]
    refined = ops.apply_transfer(op, refined_in, attrs)
    if base.is_bottom:
        return  # a conflict only gets more certain under refinement
    assert refined.is_bottom or refines(refined, base), (op, shapes_in, refined_in, base, refined)
