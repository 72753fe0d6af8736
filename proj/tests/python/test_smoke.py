import math

import pytest

import snd


@pytest.fixture(scope="module")
def tiny():
    inst = snd.Instance.tiny(4)
    return inst, snd.PathPool(inst, 0.0, 8)


def test_generate_round_trip():
    inst = snd.Instance.generate({"seed": 3, "requests": 12})
    assert inst.request_count == 12
    assert inst.validate() == []
    again = snd.Instance.from_dict(inst.to_dict())
    assert again.to_dict() == inst.to_dict()


def test_everything_by_truck_matches_breakdown(tiny):
    inst, pool = tiny
    sol = {"x": [1] * inst.request_count, "y": [0] * inst.leg_count}
    b = snd.evaluate(inst, pool, sol)
    parts = b["revenue"] - b["booking"] - b["transit"] - b["transfer"] - b["store"] - b["delay"]
    assert math.isclose(b["profit"], parts, rel_tol=1e-12, abs_tol=1e-9)


def test_annealing_never_beats_oracle(tiny):
    inst, pool = tiny
    best = snd.oracle(inst, pool)
    res = snd.solve("SA_H", inst, pool, config={"max_iterations": 300, "seed": 5})
    assert res["best_z"] <= best["z"] + 1e-6
    again = snd.solve("SA_H", inst, pool, config={"max_iterations": 300, "seed": 5})
    assert again["solution"] == res["solution"]


def test_simulation_is_seeded(tiny):
    inst, pool = tiny
    sol = {"x": [1] * inst.request_count, "y": [0] * inst.leg_count}
    a = snd.simulate(inst, pool, sol, "V+F-", 11)
    b = snd.simulate(inst, pool, sol, "V+F-", 11)
    assert a == b


def test_surrogate_fit_and_errors():
    g = [0.1 * k for k in range(12)]
    c = [5 + 2 * x + x**3 for x in g]
    model = snd.fit_surrogate(g, c)
    assert model["a0"] == pytest.approx(5, rel=1e-6)
    assert model["a3"] == pytest.approx(1, rel=1e-6)
    assert snd.predict_delay_cost(model, 0.5) == pytest.approx(5 + 1 + 0.125, rel=1e-9)
    with pytest.raises(snd.FitError):
        snd.fit_surrogate([0.1, 0.1, 0.2], [1.0, 2.0, 3.0])


def test_spearman_and_presets():
    assert snd.spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
    assert "V-F-" in snd.scenario_presets()
