import math

import numpy as np
import pytest

import fdsc


def desk(**over):
    cfg = {"num_sbs": 2, "dl_ues_per_cell": 1, "ul_ues_per_cell": 1, "num_subcarriers": 2,
           "macro_radius": 150.0, "queue_min": 20, "queue_max": 60, "seed": 3}
    cfg.update(over)
    return cfg


def test_default_config_has_table_values():
    cfg = fdsc.default_config()
    assert cfg["num_sbs"] == 10
    assert cfg["setup"] == "C"
    assert math.isclose(cfg["circuit_power"], 1.0)


def test_amgm_bound():
    assert fdsc.amgm_bound(2.0, 3.0, 1.5) == pytest.approx(6.0)
    assert fdsc.amgm_bound(2.0, 3.0, 1.0) > 6.0


def test_minorant_below_function():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    X0 = a @ a.conj().T + np.eye(2)
    h = rng.normal(size=2) + 1j * rng.normal(size=2)
    X = X0 + 0.5 * np.eye(2)
    f = fdsc.matrix_fractional(1.3, X, h)
    assert fdsc.matrix_fractional_minorant(1.0, X0, h, 1.3, X) <= f + 1e-12
    assert fdsc.matrix_fractional_minorant(1.0, X0, h, 1.0, X0) == pytest.approx(fdsc.matrix_fractional(1.0, X0, h))


def test_centralized_run():
    r = fdsc.run(desk(), max_spca_iterations=5, trials=10)
    assert r["feasible"], r["violations"]
    assert r["spca_iterations"] >= 1
    objs = [row["objective"] for row in r["spca"]]
    assert all(b <= a + 1e-6 for a, b in zip(objs, objs[1:]))
    assert len(r["beams"]) == 2 * 2
    assert r["residual_backlog"] >= 0.0


def test_bad_config_raises():
    with pytest.raises(ValueError):
        fdsc.run(desk(num_sbs=0))


def test_plan():
    plan = {"base": desk(), "seeds": [1], "alphas": [0.05, 0.1], "max_spca_iterations": 2, "trials": 5,
            "output_dir": ""}
    res = fdsc.run_plan(plan)
    assert len(res["runs"]) == 2
    assert len(res["alpha"]) == 2
    with pytest.raises(ValueError):
        fdsc.run_plan(dict(plan, seeds=[]))


def test_surrogate_dump():
    text = fdsc.surrogate_dump(desk())
    assert len(text.splitlines()) > 10
