"""Service endpoints through the in-process test client."""

import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from starlette.testclient import TestClient

from gwroot import __version__
from gwroot.api import app
from gwroot.trees import free_from_json, rooted_from_json

BINOM2 = {"family": "binomial", "params": {"k": 2}}
PATH4 = {"n": 4, "edges": [[0, 1], [1, 2], [2, 3]]}


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok", "version": __version__}


class TestSample:
    def test_shape(self, client):
        r = client.post(
            "/sample", json={"dist": BINOM2, "n": 9, "count": 3, "seed": 5}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["n"] == 9 and body["count"] == 3 and body["seed"] == 5
        assert body["dist"]["family"] == "binomial"
        assert len(body["trees"]) == 3
        for entry in body["trees"]:
            rooted = rooted_from_json(entry["rooted"])
            free = free_from_json(entry["free"])
            assert rooted.n == free.n == 9

    def test_deterministic(self, client):
        payload = {"dist": BINOM2, "n": 12, "count": 2, "seed": 8}
        a = client.post("/sample", json=payload).json()
        b = client.post("/sample", json=payload).json()
        assert a == b

    def test_infeasible_size(self, client):
        r = client.post(
            "/sample",
            json={"dist": {"family": "uniform-set", "params": {"values": [0, 2]}}, "n": 4},
        )
        assert r.status_code == 400
        assert r.json()["error"] == "infeasible-size"

    def test_response_cap(self, client):
        r = client.post(
            "/sample", json={"dist": BINOM2, "n": 1000, "count": 100_000}
        )
        assert r.status_code == 400
        assert r.json()["error"] == "too-large"

    def test_validation_error(self, client):
        r = client.post("/sample", json={"dist": BINOM2, "n": 0})
        assert r.status_code == 422

    def test_bad_family(self, client):
        r = client.post("/sample", json={"dist": {"family": "zeta"}, "n": 5})
        assert r.status_code == 400
        assert r.json()["error"] == "invalid-params"


class TestEstimate:
    def test_path(self, client):
        r = client.post(
            "/estimate", json={"dist": BINOM2, "tree": PATH4, "seed": 0}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["candidates"] == [0, 3]
        assert body["chosen"] in (0, 3)
        assert body["max_ratio"] == 2.0
        assert body["conditional_correctness"] == pytest.approx(1 / 3)
        assert body["exact_correctness"] == "1/3"
        assert body["special_hit"] is False
        assert body["n"] == 4

    def test_special_hit_reported_as_null_ratio(self, client):
        tree = {"n": 3, "edges": [[0, 1], [1, 2]]}
        dist = {"family": "uniform-set", "params": {"values": [0, 2]}}
        body = client.post(
            "/estimate", json={"dist": dist, "tree": tree, "seed": 1}
        ).json()
        assert body["special_hit"] is True
        assert body["max_ratio"] is None  # inf has no JSON encoding
        assert body["chosen"] == 1
        assert body["exact_correctness"] == "1/1"

    def test_infeasible_tree(self, client):
        star = {"n": 4, "edges": [[0, 1], [0, 2], [0, 3]]}
        dist = {"family": "uniform-set", "params": {"values": [0, 2]}}
        r = client.post("/estimate", json={"dist": dist, "tree": star, "seed": 0})
        assert r.status_code == 400
        assert r.json()["error"] == "infeasible-tree"


class TestPosterior:
    def test_exact_strings(self, client):
        r = client.post("/posterior", json={"dist": BINOM2, "tree": PATH4})
        assert r.status_code == 200
        body = r.json()
        assert body["omega"] == [0, 3]
        assert body["p_correct"] == "1/3"
        assert [e["posterior"] for e in body["nodes"]] == ["1/3", "1/6", "1/6", "1/3"]

    def test_float_mode(self, client):
        r = client.post(
            "/posterior",
            json={"dist": {"family": "poisson"}, "tree": PATH4, "method": "log"},
        )
        body = r.json()
        assert body["p_correct"] == pytest.approx(0.25)
        assert sum(e["posterior"] for e in body["nodes"]) == pytest.approx(1.0)

    def test_unknown_method(self, client):
        r = client.post(
            "/posterior", json={"dist": BINOM2, "tree": PATH4, "method": "fast"}
        )
        assert r.status_code == 400
        assert r.json()["error"] == "invalid-params"


class TestVerify:
    def test_suite_passes(self, client):
        r = client.post(
            "/verify", json={"suite": "cycle-lemma", "trees": 20, "max_n": 10}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["passed"] is True
        assert body["checked"] == 20

    def test_unknown_suite(self, client):
        r = client.post("/verify", json={"suite": "lemmas"})
        assert r.status_code == 400
        assert r.json()["error"] == "invalid-params"


class TestTrials:
    def test_report_with_checks(self, client):
        r = client.post(
            "/trials",
            json={
                "dist": BINOM2,
                "n": 10,
                "trials": 500,
                "seed": 4,
                "checks": ["exact-3sigma"],
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert body["trials"] == 500
        assert body["checks_passed"] is True
        assert body["check_failures"] == []
        assert body["predicted"]["p_correct"]["kind"] == "exact"

    def test_failed_check_is_reported_not_an_error(self, client):
        dist = {"family": "uniform-set", "params": {"values": [0, 2]}}
        body = client.post(
            "/trials",
            json={"dist": dist, "n": 7, "trials": 50, "checks": ["exact-3sigma"]},
        ).json()
        assert body["checks_passed"] is False
        assert "no exact prediction" in body["check_failures"][0]


class TestCampaignEndpoints:
    def test_campaign(self, client):
        entries = [
            {"dist": BINOM2, "n": 10, "trials": 100, "seed": 1},
            {"dist": {"family": "geometric"}, "n": 10, "trials": 100},
        ]
        r = client.post("/campaign", json={"entries": entries})
        assert r.status_code == 200
        body = r.json()
        assert len(body["rows"]) == 2
        assert body["csv_columns"][0] == "label"
        assert len(body["csv_rows"]) == 2
        assert body["csv_rows"][0]["label"] == "binomial(k=2)"

    def test_families(self, client):
        r = client.post("/families", json={"n": 10, "trials": 40, "seed": 0})
        assert r.status_code == 200
        body = r.json()
        assert len(body["rows"]) == 5
        assert body["rows"][4]["n"] == 11


class TestPredict:
    def test_binomial(self, client):
        r = client.post("/predict", json={"dist": BINOM2, "n": 100})
        assert r.status_code == 200
        body = r.json()
        assert body["predictions"]["p_correct"] == {
            "value": pytest.approx(2 / 102),
            "kind": "exact",
        }

    def test_explicit_pmf(self, client):
        dist = {"pmf": {"0": "2/3", "3": "1/3"}}
        body = client.post("/predict", json={"dist": dist, "n": 10}).json()
        assert body["predictions"]["limit_p_correct"]["value"] == 1.0
