"""Walkthrough conformance on the hand-built 8x8 fixture.

The fixture reproduces the published example's constraints: root min/max
[1, 5], the quadrant holding M1's subtree at [1, 3], a uniform value-5
quadrant under the bottom-right, and the three-branch R-tree layout. The
tests assert the full decision sequences of the join stack walkthrough and
the top-1 priority-queue walkthrough.
"""

from rastvec.join import MbrOverlap, QuadOverlap, join
from rastvec.topk import top_k

from fixtures import WORKED_MATRIX, worked_example


def test_fixture_quadrant_constraints():
    raster, _, _ = worked_example()
    assert (raster.rmin, raster.rmax) == (1, 5)
    q1, q2, q3, q4 = raster.child_cursors(raster.root_cursor())
    assert (q2.min, q2.max) == (1, 3)        # the pruning quadrant
    assert (q3.min, q3.max) == (1, 5)
    assert (q4.min, q4.max) == (1, 5)
    q41, q42, q43, q44 = raster.child_cursors(q4)
    assert (q44.min, q44.max) == (5, 5)      # uniform value-5 quadrant
    assert not q44.has_children
    q31, q32, q33, q34 = raster.child_cursors(q3)
    assert (q32.min, q32.max) == (3, 3)      # prunes m21 below the range


def test_join_decision_sequence_matches_table():
    raster, tree, names = worked_example()
    trace = []
    result = join(tree, raster, 4, 5, trace=trace)

    got = [(names[ev.node_id], ev.quad_kind, ev.pk_deep_quad, ev.action,
            ev.mbr_kind) for ev in trace]
    assert got == [
        ("M1", QuadOverlap.NO_OVERLAP, (0, 4, 4), "prune", None),
        ("M2", QuadOverlap.POSSIBLE_OVERLAP, (4, 0, 4), "push-children", None),
        ("m21", QuadOverlap.NO_OVERLAP, (4, 2, 2), "prune", None),
        ("m22", QuadOverlap.POSSIBLE_OVERLAP, (4, 0, 4), "definitive-mbr",
         MbrOverlap.TOTAL_OVERLAP),
        ("M3", QuadOverlap.POSSIBLE_OVERLAP, (4, 4, 4), "push-children", None),
        ("m31", QuadOverlap.POSSIBLE_OVERLAP, (4, 4, 4), "probable-mbr",
         MbrOverlap.PARTIAL_OVERLAP),
        ("m32", QuadOverlap.TOTAL_OVERLAP, (6, 6, 2), "definitive-quadrant",
         None),
    ]

    # stack evolution reconstructed from the events matches the 5-step table:
    # seed [M1 M2 M3]; after M1 [M2 M3]; after M2 [m21 m22 M3];
    # after m21+m22 [M3]; after M3 [m31 m32]
    stack = ["M1", "M2", "M3"]
    snapshots = [tuple(stack)]
    pushes = {"M2": ["m21", "m22"], "M3": ["m31", "m32"]}
    for ev in trace:
        popped = stack.pop(0)
        assert popped == names[ev.node_id]
        if ev.action == "push-children":
            stack = pushes[popped] + stack
        snapshots.append(tuple(stack))
    assert snapshots[1] == ("M2", "M3")
    assert snapshots[2] == ("m21", "m22", "M3")
    assert snapshots[4] == ("M3",)
    assert snapshots[5] == ("m31", "m32")
    assert snapshots[-1] == ()


def test_join_result_matches_walkthrough():
    raster, tree, _ = worked_example()
    result = join(tree, raster, 4, 5)
    # d (in m22) and f (in m32) definitive, e (in m31) probable
    assert [(oid, cells.tolist()) for oid, cells in result.definitive] == [
        (4, [[5, 0], [5, 1], [6, 0], [6, 1]]),
        (6, [[6, 6], [6, 7], [7, 6], [7, 7]]),
    ]
    assert [(oid, cells.tolist()) for oid, cells in result.probable] == [
        (5, [[4, 6]]),
    ]
    # every returned cell holds a value in [4, 5]
    for _, cells in result.definitive + result.probable:
        vals = WORKED_MATRIX[cells[:, 0], cells[:, 1]]
        assert ((vals >= 4) & (vals <= 5)).all()


def test_top1_decision_sequence_matches_table():
    raster, tree, names = worked_example()
    trace = []
    result = top_k(tree, raster, 1, "highest", trace=trace)
    assert result.entries == [(6, 5)]       # object f at value 5

    # seeding: M2 and M3 carry bound 5 (quadrants q3/q4), M1 bound 3 (q2)
    seeds = [(names[ev.vect], ev.value, ev.pk_quad) for ev in trace
             if ev.op == "push" and ev.tent][:3]
    assert seeds == [("M1", 3, (0, 4, 4)), ("M2", 5, (4, 0, 4)),
                     ("M3", 5, (4, 4, 4))]

    pops = [(names[ev.vect] if ev.tent else ev.vect, ev.value, ev.tent,
             ev.action) for ev in trace if ev.op == "pop"]
    assert pops == [
        ("M2", 5, True, "push-children"),
        ("m22", 5, True, "check-geometry"),
        ("M3", 5, True, "push-children"),
        ("m31", 5, True, "check-geometry"),
        ("m32", 5, True, "uniform-add-descendants"),
    ]

    # the two check-geometry calls re-queued d and e as confirmed entries
    requeued = [(ev.vect, ev.value) for ev in trace
                if ev.op == "push" and not ev.tent]
    assert requeued == [(4, 4), (5, 4)]

    # children of M2 entered with quadrant bounds (m21 via uniform q32 at 3,
    # m22 staying at q3 with bound 5)
    child_pushes = {names[ev.vect]: (ev.value, ev.pk_quad) for ev in trace
                    if ev.op == "push" and ev.tent}
    assert child_pushes["m21"] == (3, (4, 2, 2))
    assert child_pushes["m22"] == (5, (4, 0, 4))
    assert child_pushes["m31"] == (5, (4, 4, 4))
    assert child_pushes["m32"] == (5, (6, 6, 2))
