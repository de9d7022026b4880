"""Regenerate the shipped corpus files under corpus/.

Each case is a small, complete program in the JSON graph IR: a buggy
variant that must trip the checker and a fixed variant that must not.
Run from the repository root:  python tools/make_corpus.py
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "corpus"

U = None  # an unknown extent in shape literals


def node(id, op, inputs=(), attrs=None, shape="absent"):
    out = {"id": id, "op": op}
    if inputs:
        out["inputs"] = list(inputs)
    if attrs:
        out["attrs"] = attrs
    if shape != "absent":
        out["shape"] = shape
    return out


def program(nodes, fetches, feeds, repeat=1, graph="main"):
    return {
        "version": 1,
        "graphs": {graph: nodes},
        "runs": [{"graph": graph, "fetches": fetches, "feeds": feeds,
                  "repeat": repeat}],
    }


def conv_net(feed_images, feed_labels):
    """The hand-written-digits network: two conv/pool blocks, two dense layers."""
    nodes = [
        node("images", "placeholder", shape=[U, 784]),
        node("labels", "placeholder", shape=[U, 10]),
        node("imgs4d", "reshape", ["images"], {"desired": [-1, 28, 28, 1]}),
        node("w1", "constant", shape=[5, 5, 1, 32]),
        node("conv1", "conv2d", ["imgs4d", "w1"],
             {"strides": [1, 1, 1, 1], "padding": "SAME"}),
        node("pool1", "max_pool", ["conv1"],
             {"ksize": [1, 2, 2, 1], "strides": [1, 2, 2, 1], "padding": "SAME"}),
        node("w2", "constant", shape=[5, 5, 32, 64]),
        node("conv2", "conv2d", ["pool1", "w2"],
             {"strides": [1, 1, 1, 1], "padding": "SAME"}),
        node("pool2", "max_pool", ["conv2"],
             {"ksize": [1, 2, 2, 1], "strides": [1, 2, 2, 1], "padding": "SAME"}),
        node("flat", "flatten", ["pool2"]),
        node("w3", "constant", shape=[3136, 1024]),
        node("fc1", "matmul", ["flat", "w3"]),
        node("b3", "constant", shape=[1024]),
        node("fc1b", "bias_add", ["fc1", "b3"]),
        node("act1", "relu", ["fc1b"]),
        node("drop", "dropout", ["act1"]),
        node("w4", "constant", shape=[1024, 10]),
        node("logits", "matmul", ["drop", "w4"]),
        node("b4", "constant", shape=[10]),
        node("logitsb", "bias_add", ["logits", "b4"]),
        node("probs", "softmax", ["logitsb"]),
        node("per_ex", "mul", ["probs", "labels"]),
        node("loss", "reduce_mean", ["per_ex"]),
    ]
    return program(nodes, ["loss"],
                   [{"images": feed_images, "labels": feed_labels}], repeat=2)


def cases():
    out = {}

    # 1. training data fed in the wrong order: labels where images belong
    out["feed_order"] = (
        conv_net([50, 10], [50, 784]),   # swapped
        conv_net([50, 784], [50, 10]),
        {"expected_error_node": "images", "expected_iteration": 1},
    )

    # 2. reshape target does not divide the element count
    def reshape_case(per_image):
        nodes = [
            node("x", "placeholder", shape=[U, 28, 28]),
            node("r", "reshape", ["x"], {"desired": [-1, per_image]}),
            node("w", "constant", shape=[784, 10]),
            node("y", "matmul", ["r", "w"]),
            node("pred", "argmax", ["y"], {"axis": 1}),
        ]
        return program(nodes, ["pred"], [{"x": [32, 28, 28]}])
    out["reshape_count"] = (
        reshape_case(785), reshape_case(784),
        {"expected_error_node": "r", "expected_iteration": 1},
    )

    # 3. dense layers whose boundary widths disagree
    def dense_case(w2_rows):
        nodes = [
            node("x", "placeholder", shape=[U, 784]),
            node("w1", "constant", shape=[784, 256]),
            node("h1", "matmul", ["x", "w1"]),
            node("a1", "relu", ["h1"]),
            node("w2", "constant", shape=[w2_rows, 64]),
            node("h2", "matmul", ["a1", "w2"]),
            node("out", "sigmoid", ["h2"]),
        ]
        return program(nodes, ["out"], [{"x": [64, 784]}])
    out["layer_boundary"] = (
        dense_case(128), dense_case(256),
        {"expected_error_node": "h2", "expected_iteration": 1},
    )

    # 4. a variable whose shape drifts: fails on the second mini-batch only
    def minibatch_case(n):
        nodes = [
            node("input", "placeholder", shape=[3, n]),
            node("store", "variable", shape=[n, 3]),
            node("mm", "matmul", ["input", "store"]),
            node("tr", "transpose", ["mm"]),
            node("upd", "assign", ["store", "tr"], {"validate": False}),
        ]
        return program(nodes, ["upd"], [{"input": [3, n]}], repeat=3)
    out["minibatch_assign"] = (
        minibatch_case(4), minibatch_case(3),
        {"expected_error_node": "mm", "expected_iteration": 2},
    )

    # 5. re-asserting a shape that was already pinned down
    def set_shape_case(declared):
        nodes = [
            node("x", "placeholder", shape=declared),
            node("y", "placeholder", shape=[5]),
            node("xs", "set_shape", ["x"], shape=[32, 10]),
            node("sx", "reduce_sum", ["xs"]),
            node("sy", "reduce_sum", ["y"]),
            node("out", "add", ["sx", "sy"]),
        ]
        feed_x = declared if declared[0] is not None else [32, 10]
        return program(nodes, ["out"], [{"x": feed_x, "y": [5]}])
    out["double_set_shape"] = (
        set_shape_case([64, 10]), set_shape_case([U, 10]),
        {"expected_error_node": "xs", "expected_iteration": 1},
    )

    # 6. concatenating feature blocks along the wrong axis
    def concat_case(axis):
        nodes = [
            node("a", "placeholder", shape=[U, 10]),
            node("b", "placeholder", shape=[U, 12]),
            node("joined", "concat", ["a", "b"], {"axis": axis}),
            node("act", "relu", ["joined"]),
        ]
        return program(nodes, ["act"], [{"a": [32, 10], "b": [32, 12]}])
    out["concat_axis"] = (
        concat_case(0), concat_case(1),
        {"expected_error_node": "joined", "expected_iteration": 1},
    )

    # 7. filter built for the wrong number of input channels
    def conv_channel_case(c_in):
        nodes = [
            node("x", "placeholder", shape=[1, 28, 28, 3]),
            node("w", "constant", shape=[5, 5, c_in, 8]),
            node("conv", "conv2d", ["x", "w"],
                 {"strides": [1, 1, 1, 1], "padding": "SAME"}),
            node("pool", "max_pool", ["conv"],
                 {"ksize": [1, 2, 2, 1], "strides": [1, 2, 2, 1], "padding": "VALID"}),
        ]
        return program(nodes, ["pool"], [{"x": [1, 28, 28, 3]}])
    out["conv_channel"] = (
        conv_channel_case(1), conv_channel_case(3),
        {"expected_error_node": "conv", "expected_iteration": 1},
    )

    # 8. pooling applied to flat features instead of an image block
    def pool_rank_case(fix_it):
        nodes = [node("x", "placeholder", shape=[U, 784])]
        inp = "x"
        if fix_it:
            nodes.append(node("r", "reshape", ["x"], {"desired": [-1, 28, 28, 1]}))
            inp = "r"
        nodes.append(node("pool", "max_pool", [inp],
                          {"ksize": [1, 2, 2, 1], "strides": [1, 2, 2, 1],
                           "padding": "SAME"}))
        return program(nodes, ["pool"], [{"x": [16, 784]}])
    out["pool_rank"] = (
        pool_rank_case(False), pool_rank_case(True),
        {"expected_error_node": "pool", "expected_iteration": 1},
    )

    # 9. bias vector sized for a different layer
    def bias_case(width):
        nodes = [
            node("x", "placeholder", shape=[U, 256]),
            node("b", "constant", shape=[width]),
            node("y", "bias_add", ["x", "b"]),
            node("act", "relu", ["y"]),
            node("loss", "reduce_mean", ["act"]),
        ]
        return program(nodes, ["loss"], [{"x": [8, 256]}])
    out["broadcast_mismatch"] = (
        bias_case(128), bias_case(256),
        {"expected_error_node": "y", "expected_iteration": 1},
    )

    # 10. reducing over an axis the tensor does not have
    def reduce_axis_case(axis):
        nodes = [
            node("x", "placeholder", shape=[U, 10]),
            node("m", "reduce_mean", ["x"], {"axis": axis}),
            node("e", "expand_dims", ["m"], {"axis": 1}),
        ]
        return program(nodes, ["e"], [{"x": [32, 10]}])
    out["reduce_axis"] = (
        reduce_axis_case(2), reduce_axis_case(1),
        {"expected_error_node": "m", "expected_iteration": 1},
    )

    # 11. control: a correct constants-only program (no buggy variant)
    harmonic = program(
        [
            node("x", "constant", attrs={"value": 11}),
            node("y", "constant", attrs={"value": 21}),
            node("z", "constant", attrs={"value": 2}),
            node("prod", "mul", ["x", "y"]),
            node("prod2", "mul", ["prod", "z"]),
            node("sum", "add", ["x", "y"]),
            node("harmonic", "div", ["prod2", "sum"]),
        ],
        ["harmonic"], [],
    )
    out["control"] = (None, harmonic, {})
    return out


def main() -> None:
    ROOT.mkdir(exist_ok=True)
    manifest = []
    for name, (buggy, fixed, expect) in cases().items():
        entry = {"name": name}
        if buggy is not None:
            path = ROOT / f"{name}_buggy.json"
            path.write_text(json.dumps(buggy, indent=2) + "\n")
            entry["buggy"] = path.name
        else:
            entry["buggy"] = None
        path = ROOT / f"{name}_fixed.json"
        path.write_text(json.dumps(fixed, indent=2) + "\n")
        entry["fixed"] = path.name
        entry.update(expect)
        manifest.append(entry)
    (ROOT / "cases.json").write_text(json.dumps({"cases": manifest}, indent=2) + "\n")
    print(f"wrote {len(manifest)} cases to {ROOT}")


if __name__ == "__main__":
    main()
