"""Smoke test for the patrolscope Python module.

Build and install the extension first:

    pip install --no-build-isolation ./crates/python

then run `python python/smoke_test.py`.
"""

import json
import math

import patrolscope as ps


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def check_three_node():
    s = ps.Strategy.generate("three-node")
    assert s.node_ids == ["0", "1", "2"], s.node_ids
    pi = ps.stationary_distribution(s)
    for node, expected in zip(["0", "1", "2"], [1 / 9, 2 / 3, 2 / 9]):
        assert close(pi[node], expected), pi

    # each step of the exact series is one matrix-vector product
    order, rows = s.matrix()
    series = ps.visit_distribution(s, "2", horizon=5)
    dist = [0.0, 0.0, 1.0]
    for row in series:
        dist = [sum(dist[i] * rows[i][j] for i in range(3)) for j in range(3)]
        assert all(close(a, b, 1e-12) for a, b in zip(dist, row)), (dist, row)

    again = ps.Strategy.from_json(s.to_json())
    assert again.digest() == s.digest()
    assert "cluster_" in s.to_dot()


def check_corridor():
    s = ps.Strategy.generate("corridor", n=4)
    assert close(ps.expected_hitting_time(s, "e0", "e5"), 25.0, 1e-9)
    try:
        ps.expected_hitting_time(s, "e0", "nope")
    except ps.PatrolscopeError as e:
        assert e.code == "UnknownReference", e.code
    else:
        raise AssertionError("expected an error")


def check_errors():
    try:
        ps.Strategy("bad", [("a", "A")], [("x", "a")], [("x", "x", 0.5)])
    except ps.PatrolscopeError as e:
        assert e.code == "RowNotStochastic", e.code
        assert e.diagnostic["node"] == "x"
    else:
        raise AssertionError("expected an error")
    assert issubclass(ps.PatrolscopeError, ValueError)


def check_loops():
    s = ps.Strategy.generate("hidden-ring")
    sweep = ps.loop_break_sweep(s, open=s.location_ids)
    assert sweep and close(sweep[0][0], 0.001), sweep
    report = ps.loop_report(s, threshold=0.0)
    assert len(report["on_loop"]) == len(report["elements"])


def check_simulation():
    s = ps.Strategy.generate("three-node")
    a = ps.simulate(s, "1", count=2000, horizon=20, seed=7)
    b = ps.simulate(s, "1", count=2000, horizon=20, seed=7)
    assert a.path(0) == b.path(0)
    assert a.occupancy(0) == [0, 2000, 0]
    exact = ps.visit_distribution(s, "1", horizon=20)[-1]
    empirical = [c / 2000 for c in a.occupancy(20)]
    tv = 0.5 * sum(abs(x - y) for x, y in zip(exact, empirical))
    assert tv < 0.05, tv


def check_report():
    s = ps.Strategy.generate("office")
    text = ps.analyze_json(s, seed=3)
    assert text == ps.analyze_json(s, seed=3)
    report = ps.analyze(s, seed=3)
    assert report == json.loads(text)
    assert math.isclose(sum(m["mass"] for m in report["stationary"]), 1.0, abs_tol=1e-6)


def check_layout():
    s = ps.Strategy.generate("corridor", n=4)
    placed = ps.compute_layout(s, seed=1, max_iter=5000)
    assert len(placed["locations"]) == len(s.location_ids)
    assert placed["iterations"] >= 1


def check_session():
    s = ps.Strategy.generate("three-node")
    sess = ps.Session(s, layout_seed=4)
    assert sess.revision == 1
    graph = sess.set_threshold(0.4)
    assert graph["revision"] == 2
    assert graph["threshold"] == 0.4
    d = sess.distribution("2", target="1", horizon=3)
    assert len(d["target_series"]) == 3
    agents = sess.spawn_agents("2", count=50, horizon=10, seed=9)
    assert len(agents["single_agent"]) == 11
    occ = sess.set_cursor(10)
    assert sum(occ["counts"]) == 50
    step = sess.step_layout(steps=3)
    assert step["steps"] == 3
    try:
        sess.set_cursor(11)
    except ps.PatrolscopeError as e:
        assert e.code == "CursorOutOfRange"
    else:
        raise AssertionError("expected an error")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("check_"):
            fn()
            print(f"ok  {name[len('check_'):]}")
    print("python smoke test passed")
