import math
import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from ulsched.service import app

client = TestClient(app)

CHANNEL = {"alpha": 4.0, "noise_dbm": -90.0, "pu_dbm": 23.0, "rho_dbm": -70.0}


def _params(lam_bs: float, lam_ue: float) -> dict:
    return dict(CHANNEL, lambda_bs_per_km2=lam_bs, lambda_ue_per_km2=lam_ue)


def _col(body: dict, name: str) -> list:
    i = body["columns"].index(name)
    return [row[i] for row in body["rows"]]


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"]


def test_ccdf_analytic_only():
    req = {
        "params": _params(20.0, 8.0),
        "grid": {"start_db": -10.0, "stop_db": 20.0, "count": 7},
        "engines": ["analytic-1", "analytic-2"],
    }
    r = client.post("/ccdf", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["columns"] == ["theta_db", "analytic_fn1", "analytic_fn2",
                               "sim_mean", "sim_stderr"]
    assert len(body["rows"]) == 7
    a1 = _col(body, "analytic_fn1")
    a2 = _col(body, "analytic_fn2")
    assert all(0.0 <= v <= 1.0 for v in a1 + a2)
    assert all(x >= y - 1e-12 for x, y in zip(a1, a1[1:]))
    # simulation engine not requested: its cells stay empty
    assert set(_col(body, "sim_mean")) == {None}
    assert body["manifest"]["command"] == "ccdf"
    assert body["manifest"]["package"].startswith("ulsched ")


def test_ccdf_with_simulation():
    req = {
        "params": _params(20.0, 8.0),
        "grid": {"start_db": 0.0, "stop_db": 10.0, "count": 3},
        "engines": ["sim"],
        "sim": {"trials": 200, "seed": 4},
    }
    r = client.post("/ccdf", json=req)
    assert r.status_code == 200
    body = r.json()
    assert set(_col(body, "analytic_fn1")) == {None}
    sims = _col(body, "sim_mean")
    errs = _col(body, "sim_stderr")
    assert all(0.0 <= v <= 1.0 for v in sims)
    assert all(e >= 0.0 for e in errs)
    assert body["manifest"]["trials"] == 200
    assert body["manifest"]["seed"] == 4


def test_rate_rows_per_engine():
    req = {
        "params": _params(20.0, 8.0),
        "engines": ["analytic-1", "sim"],
        "sim": {"trials": 300, "seed": 2},
    }
    r = client.post("/rate", json=req)
    assert r.status_code == 200
    body = r.json()
    assert _col(body, "engine") == ["analytic-1", "sim"]
    for row_gain in _col(body, "gain"):
        assert row_gain > 1.0
    ana, sim = body["rows"]
    g = body["columns"].index("gain")
    se = body["columns"].index("gain_stderr")
    assert ana[se] is None
    assert sim[g] == pytest.approx(ana[g], abs=5.0 * sim[se] + 0.02)


def test_gain_forced_model_tracks_engine():
    req = {
        "params": _params(20.0, 8.0),
        "ratios": {"start": 1.0, "stop": 4.0, "count": 4},
        "engines": ["analytic-2"],
    }
    r = client.post("/gain", json=req)
    assert r.status_code == 200
    body = r.json()
    assert set(body["manifest"]["analytic_models"].split()) == {"range"}
    gains = _col(body, "gain_analytic")
    assert _col(body, "ratio") == [1.0, 2.0, 3.0, 4.0]
    assert all(x < y for x, y in zip(gains, gains[1:]))
    assert gains[0] > 1.0


def test_validity_reference_points():
    req = {
        "channel": CHANNEL,
        "lambdas": {"start_per_km2": 0.2, "stop_per_km2": 20.0, "count": 3},
    }
    r = client.post("/validity", json=req)
    assert r.status_code == 200
    body = r.json()
    lams = _col(body, "lambda_bs_per_km2")
    assert lams == pytest.approx([0.2, 2.0, 20.0])
    g1 = _col(body, "g1")
    g2 = _col(body, "g2")
    assert g1[2] == pytest.approx(0.940, abs=1e-3)
    assert g1[1] == pytest.approx(0.245, abs=1e-3)
    assert g2[1] == pytest.approx(0.325, abs=1e-3)
    assert g2[0] == pytest.approx(0.894, abs=1e-3)


def test_pmf_columns_sum_to_one():
    req = {"params": _params(20.0, 8.0), "engines": ["analytic-1", "analytic-2"],
           "n_max": 40}
    r = client.post("/pmf", json=req)
    assert r.status_code == 200
    body = r.json()
    assert _col(body, "n") == list(range(41))
    for name in ("f_n1", "f_n2"):
        assert math.fsum(_col(body, name)) == pytest.approx(1.0, abs=1e-6)
    assert set(_col(body, "empirical")) == {None}


def test_dump_realization_row_count():
    req = {"params": _params(20.0, 8.0), "sim": {"seed": 6}, "trial_index": 2}
    r = client.post("/dump-realization", json=req)
    assert r.status_code == 200
    body = r.json()
    kinds = _col(body, "kind")
    n_bs = kinds.count("bs")
    n_ue = kinds.count("user")
    assert n_bs + n_ue == len(body["rows"])
    assert n_bs > 0 and n_ue > 0
    assert body["manifest"]["trial_index"] == 2
    assert 0.0 < body["manifest"]["outage_probability"] < 1.0


def test_validation_error_is_422():
    bad = {"params": _params(-3.0, 8.0),
           "grid": {"start_db": 0.0, "stop_db": 1.0, "count": 2}}
    assert client.post("/ccdf", json=bad).status_code == 422
    empty = {"params": _params(20.0, 8.0), "engines": []}
    assert client.post("/ccdf", json=empty).status_code == 422


def test_domain_error_is_400_with_shape():
    # alpha passes field bounds but the window rule rejects the config
    req = {"params": _params(20.0, 8.0), "engines": ["sim"],
           "sim": {"trials": 10, "seed": 0, "window_radius_m": 50.0}}
    r = client.post("/ccdf", json=req)
    assert r.status_code == 400
    body = r.json()
    assert set(body) == {"error", "message"}
    assert body["error"] == "ParameterError"
    assert "window" in body["message"]


def test_unknown_engine_rejected():
    # engine names are a closed vocabulary, enforced at the schema layer
    req = {"params": _params(20.0, 8.0), "engines": ["analytic-3"]}
    assert client.post("/rate", json=req).status_code == 422
