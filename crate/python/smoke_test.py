"""Smoke test for the socsim extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/socsim-*.whl
"""

import math

import socsim

WEEK = 7 * 24 * 3600


def main():
    log = socsim.InteractionLog(
        [
            (0, "a", "b", "host_offer", 3.0),
            (10, "b", "c", "surf_request", 3.0),
            (20, "c", "a", "friend_request", 3.0),
        ]
    )
    assert len(log) == 3
    assert log.span() == (0, 20)
    again = socsim.InteractionLog.from_csv(log.to_csv())
    assert again.records() == log.records()

    snap = socsim.snapshot(log, 100)
    assert snap.entities() == ["a", "b", "c"]
    assert len(snap.relations()) == 3
    assert snap.groups() == [["a", "b", "c"]]
    dist = snap.role_distribution()
    assert math.isclose(sum(dist.values()), 1.0)

    cycle = [("a", "b"), ("b", "c"), ("c", "a")]
    pr = socsim.metrics(cycle, directed=True)["pagerank"]
    assert all(math.isclose(v, 1 / 3, abs_tol=1e-9) for v in pr.values())

    assert socsim.communities([("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")]) == [["a", "b", "c"]]
    (u, v, score), = socsim.predict_links([("u", "z"), ("z", "v")], model="AA", k=1)
    assert (u, v) == ("u", "v") and math.isclose(score, 1 / math.log(2), abs_tol=1e-12)

    fixture = socsim.InteractionLog.fixture(initial=60, windows=4)
    start, _ = fixture.span()
    config = socsim.SimConfig('{"steps": 2, "seed": 5}')
    s0 = socsim.snapshot(fixture, start + 2 * WEEK, config)
    synthetic, trajectory = socsim.simulate(s0, config)
    again, _ = socsim.simulate(s0, config)
    assert synthetic.to_csv() == again.to_csv()
    assert len(trajectory) == 2

    l1, delta = socsim.compare(s0.role_distribution(), trajectory[-1])
    assert 0.0 <= l1 <= 2.0
    assert math.isclose(sum(delta.values()), 0.0, abs_tol=1e-9)

    try:
        socsim.InteractionLog([(0, "a", "a", "host_offer", 1.0)])
    except ValueError:
        pass
    else:
        raise AssertionError("self-interaction accepted")

    print("smoke test ok:", repr(snap), f"l1={l1:.4f}")


if __name__ == "__main__":
    main()
