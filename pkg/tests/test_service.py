import pytest
from fastapi.testclient import TestClient

from percolab import __version__
from percolab.service.app import app

client = TestClient(app)


def test_healthz():
    res = client.get("/healthz")
    assert res.status_code == 200
    assert res.json() == {"status": "ok", "version": __version__}


def test_count_endpoint():
    res = client.post("/count", json={"dim": 2, "n": 1, "p": 0.0, "seed": 7})
    assert res.status_code == 200
    body = res.json()
    assert body["clusters"] == 9
    assert body["vertices"] == 9 and body["bonds"] == 12
    assert body["open_bonds"] == 0


def test_count_deterministic():
    payload = {"dim": 2, "n": 4, "p": 0.5, "seed": 11, "replicate": 3}
    a = client.post("/count", json=payload).json()
    b = client.post("/count", json=payload).json()
    assert a == b


def test_exact_verify_endpoint_line():
    res = client.post("/exact-verify", json={"dim": 1, "n": 2})
    assert res.status_code == 200
    body = res.json()
    assert body["all_ok"]
    assert body["derivative"]["ok"] and body["variance"]["ok"]
    assert body["bonds"] == 4


def test_exact_verify_endpoint_reports_violation():
    res = client.post("/exact-verify", json={"dim": 2, "n": 1})
    assert res.status_code == 200  # honest data, not a transport error
    body = res.json()
    assert body["derivative"]["ok"]
    assert not body["variance"]["ok"]
    assert not body["all_ok"]
    assert isinstance(body["variance"]["first_mismatch"], int)
    assert body["variance"]["aux"]["martingale_ok"]


def test_variance_endpoint():
    res = client.post("/variance", json={"dim": 1, "n": 10, "p": 0.5,
                                         "replicates": 60, "seed": 5})
    assert res.status_code == 200
    body = res.json()
    assert body["mean"]["replicates"] == 60
    assert body["density"]["point"] == pytest.approx(
        body["variance"]["point"] / 21, rel=1e-12
    )


def test_kappa_prime_endpoint():
    res = client.post("/kappa-prime", json={"dim": 1, "p": 0.4, "replicates": 40,
                                            "seed": 2, "radii": [4, 8]})
    assert res.status_code == 200
    body = res.json()
    assert body["kappa_prime"]["point"] == -1.0
    assert body["converged"]
    assert [row["radius"] for row in body["sequence"]] == [4, 8]
    assert all(row["seed"] == 2 for row in body["sequence"])


def test_kappa_prime_endpoint_conflict_on_nonconvergence():
    res = client.post("/kappa-prime", json={"dim": 2, "p": 0.5, "replicates": 200,
                                            "seed": 2, "radii": [2, 4],
                                            "epsilon": 1e-9})
    assert res.status_code == 409


def test_theorem_endpoint():
    res = client.post("/theorem", json={"dim": 1, "n": 20, "p": 0.3,
                                        "replicates": 200, "seed": 9,
                                        "radii": [4, 8]})
    assert res.status_code == 200
    body = res.json()
    assert body["kappa_prime"]["point"] == -1.0
    assert body["predicted_limit"] == pytest.approx(0.21)
    assert body["gap"] == pytest.approx(body["empirical_density"] - body["predicted_limit"])


def test_clt_endpoint_degenerate():
    res = client.post("/clt", json={"dim": 1, "n": 5, "p": 0.0,
                                    "replicates": 600, "seed": 1})
    assert res.status_code == 409


def test_two_arm_endpoint():
    res = client.post("/two-arm", json={"dim": 2, "p": 1.0, "radii": [2, 3],
                                        "replicates": 30, "seed": 4})
    assert res.status_code == 200
    body = res.json()
    assert [row["estimate"] for row in body["rows"]] == [1.0, 1.0]


def test_sweep_endpoint():
    res = client.post("/sweep", json={"dim": 1, "n": 10, "p_values": [0.0, 0.5, 1.0],
                                      "replicates": 40, "seed": 6, "radii": [4, 8]})
    assert res.status_code == 200
    rows = res.json()["rows"]
    assert [row["p"] for row in rows] == [0.0, 0.5, 1.0]
    assert rows[0]["variance"]["point"] == 0.0
    assert rows[2]["variance"]["point"] == 0.0


def test_validation_errors_are_422():
    assert client.post("/count", json={"dim": 0, "n": 1, "p": 0.5}).status_code == 422
    assert client.post("/count", json={"dim": 2, "n": 1, "p": 1.5}).status_code == 422
    assert client.post("/exact-verify", json={"dim": 2, "n": 2}).status_code == 422  # over cap
