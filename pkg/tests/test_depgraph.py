from fclear.depgraph import SystemClass, build_dependency_graph, classify_system
from fclear.gadgets import SystemBuilder, add_branching
from fclear.model import build_system


def test_edge_rules():
    s = build_system([0, 0, 0], {(2, 1): 1.0}, {(0, 1, 2): 2.0})
    dg = build_dependency_graph(s)
    assert dg.green == {(2, 1), (0, 1), (2, 0)}
    assert dg.red == {(2, 1)}
    covered = build_system([0, 0, 0], {(2, 1): 2.0}, {(0, 1, 2): 2.0})
    assert build_dependency_graph(covered).red == frozenset()


def test_creditor_aggregation():
    # two CDSs into the same creditor on the same reference, each covered alone
    s = build_system([0, 0, 0, 0], {(2, 1): 1.5}, {(0, 1, 2): 1.0, (3, 1, 2): 1.0})
    assert build_dependency_graph(s, "contract").red == frozenset()
    assert build_dependency_graph(s, "creditor").red == {(2, 1)}


def test_classes():
    assert classify_system(build_system([1, 0], {(0, 1): 1.0})).kind is SystemClass.ACYCLIC
    cyc = build_system([1, 0], {(0, 1): 1.0, (1, 0): 1.0})
    # cyclic but without red edges
    assert classify_system(cyc).kind is SystemClass.RED_TO_LEAF_ONLY
    # a debt cycle with a red edge into a leaf
    leaf = build_system([0, 0, 0, 0], {(0, 1): 1.0, (1, 0): 1.0}, {(2, 3, 0): 1.0})
    assert classify_system(leaf).kind is SystemClass.RED_TO_LEAF_ONLY
    b = SystemBuilder()
    add_branching(b)
    s = b.finalize()
    cls = classify_system(s)
    assert cls.kind is SystemClass.GENERAL
    labels = [s.label(i) for i in range(s.n)]
    assert cls.describe(labels) == "General: red cycle x0 -> y0 -> x0"


def test_text_format():
    s = build_system([0, 0, 0], {(2, 1): 1.0}, {(0, 1, 2): 2.0}, labels=["a", "b", "c"])
    text = build_dependency_graph(s).to_text(["a", "b", "c"])
    assert text.splitlines() == ["G a b", "G c a", "G c b", "R c b"]
