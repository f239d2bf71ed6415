"""Tests for the campaign HTTP service: creation, the live observation
protocol, reports, persistence across restarts, and write serialization."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from fastapi.testclient import TestClient

from paretopool.data import load_bundled_catalog, save_catalog, save_schema, synth_catalog
from paretopool.service import create_app

SIM_CONFIG = {
    "mode": "simulation",
    "max_iterations": 6,
    "initial_samples": 6,
    "batch_size": 3,
    "seed": 1,
}
LIVE_CONFIG = {
    "mode": "live",
    "max_iterations": 4,
    "initial_samples": 5,
    "batch_size": 5,
    "seed": 2,
}


@pytest.fixture()
def client(tmp_path):
    with TestClient(create_app(tmp_path / "data")) as c:
        yield c


def create_bundled(client, config):
    response = client.post(
        "/campaigns", json={"config": config, "catalog": {"bundled": "campaign"}}
    )
    assert response.status_code == 201, response.text
    return response.json()


def oracle_values():
    catalog = load_bundled_catalog()
    return catalog.objectives


class TestCreate:
    def test_handle_fields_and_listing(self, client):
        handle = create_bundled(client, SIM_CONFIG)
        assert handle["id"] and handle["config_digest"]
        assert handle["mode"] == "simulation" and handle["status"] == "running"
        listed = client.get("/campaigns").json()
        assert [h["id"] for h in listed] == [handle["id"]]
        assert client.get(f"/campaigns/{handle['id']}").json()["id"] == handle["id"]

    def test_distinct_ids(self, client):
        a = create_bundled(client, SIM_CONFIG)
        b = create_bundled(client, SIM_CONFIG)
        assert a["id"] != b["id"]

    def test_k_exceeds_catalog_names_both(self, client):
        response = client.post(
            "/campaigns",
            json={
                "config": {**SIM_CONFIG, "initial_samples": 500},
                "catalog": {"bundled": "campaign"},
            },
        )
        assert response.status_code == 422
        assert "k=500" in response.json()["detail"]
        assert "l=402" in response.json()["detail"]

    def test_bad_config_values(self, client):
        for bad in ({"hv_threshold": 2.0}, {"mode": "dry"}, {"no_such_knob": 1}):
            response = client.post(
                "/campaigns",
                json={"config": {**SIM_CONFIG, **bad}, "catalog": {"bundled": "campaign"}},
            )
            assert response.status_code == 422, bad

    def test_inline_csv(self, client):
        csv_text = "a,b,y1,y2\n" + "\n".join(
            f"{i},{i % 7},{i * 2},{i}" for i in range(30)
        )
        schema = {
            "features": ["a", "b"],
            "objectives": ["y1", "y2"],
            "directions": ["max", "max"],
        }
        response = client.post(
            "/campaigns",
            json={
                "config": {**SIM_CONFIG, "initial_samples": 4, "max_iterations": 1},
                "catalog": {"csv": csv_text, "schema": schema},
            },
        )
        assert response.status_code == 201, response.text

    def test_inline_csv_requires_schema(self, client):
        response = client.post(
            "/campaigns", json={"config": SIM_CONFIG, "catalog": {"csv": "a,y\n1,2\n"}}
        )
        assert response.status_code == 422

    def test_path_with_sidecar_schema(self, client, tmp_path):
        ds = synth_catalog("convex", 40, 5)
        path = tmp_path / "cat.csv"
        save_catalog(ds, path)
        save_schema(ds.schema, tmp_path / "cat.schema.json")
        response = client.post(
            "/campaigns", json={"config": SIM_CONFIG, "catalog": {"path": str(path)}}
        )
        assert response.status_code == 201, response.text

    def test_catalog_source_validation(self, client):
        for catalog in ({}, {"bundled": "campaign", "path": "x"}, {"bundled": "nope"},
                        {"path": "/does/not/exist.csv"}):
            response = client.post(
                "/campaigns", json={"config": SIM_CONFIG, "catalog": catalog}
            )
            assert response.status_code == 422, catalog

    def test_unknown_campaign_404(self, client):
        for method, url in (
            ("get", "/campaigns/nope"),
            ("get", "/campaigns/nope/suggestions"),
            ("get", "/campaigns/nope/report"),
            ("post", "/campaigns/nope/run"),
        ):
            assert getattr(client, method)(url).status_code == 404
        response = client.post(
            "/campaigns/nope/observations", json={"snapped_index": 0, "values": [1, 2]}
        )
        assert response.status_code == 404

    def test_cross_origin_browser_access(self, client):
        # dashboard runs on its own origin
        response = client.get("/campaigns", headers={"origin": "http://localhost:8080"})
        assert response.status_code == 200
        assert response.headers["access-control-allow-origin"] == "*"
        preflight = client.options(
            "/campaigns",
            headers={
                "origin": "http://localhost:8080",
                "access-control-request-method": "POST",
                "access-control-request-headers": "content-type",
            },
        )
        assert preflight.status_code == 200
        assert "POST" in preflight.headers["access-control-allow-methods"]


class TestSimulationCampaign:
    def test_fresh_report_and_byte_identical_reads(self, client):
        handle = create_bundled(client, SIM_CONFIG)
        first = client.get(f"/campaigns/{handle['id']}/report")
        second = client.get(f"/campaigns/{handle['id']}/report")
        assert first.status_code == 200
        assert first.content == second.content
        report = first.json()
        assert len(report["trace"]) == 1
        assert report["iteration"] == 0
        assert report["predictions"] is not None
        assert len(report["predictions"]) == report["catalog_rows"]
        assert report["front"]["catalog_indices"] == [
            report["evaluated"][i]["catalog_index"] for i in report["front"]["positions"]
        ]

    def test_suggestions_conflict(self, client):
        handle = create_bundled(client, SIM_CONFIG)
        response = client.get(f"/campaigns/{handle['id']}/suggestions")
        assert response.status_code == 409

    def test_run_to_completion_and_idempotent_rerun(self, client):
        handle = create_bundled(client, SIM_CONFIG)
        result = client.post(f"/campaigns/{handle['id']}/run").json()
        assert result["status"] in ("stopped_threshold", "stopped_iterations")
        assert result["steps_executed"] >= 1
        assert result["final_report"]["phv"] is not None
        report = client.get(f"/campaigns/{handle['id']}/report").json()
        assert len(report["trace"]) == result["iteration"] + 1
        again = client.post(f"/campaigns/{handle['id']}/run").json()
        assert again["steps_executed"] == 0
        assert again["status"] == result["status"]

    def test_observations_conflict_without_pending(self, client):
        handle = create_bundled(client, SIM_CONFIG)
        response = client.post(
            f"/campaigns/{handle['id']}/observations",
            json={"snapped_index": 0, "values": [1.0, 2.0]},
        )
        assert response.status_code == 409


class TestLiveProtocol:
    def start(self, client):
        handle = create_bundled(client, LIVE_CONFIG)
        oracle = oracle_values()
        return handle["id"], oracle

    def resolve_batch(self, client, campaign_id, oracle):
        cards = client.get(f"/campaigns/{campaign_id}/suggestions").json()["suggestions"]
        last = None
        for card in cards:
            idx = card["snapped_index"]
            last = client.post(
                f"/campaigns/{campaign_id}/observations",
                json={"snapped_index": idx, "values": [float(v) for v in oracle[idx]]},
            )
            assert last.status_code == 200, last.text
        return cards, last.json()

    def test_initial_cards_idempotent_until_observed(self, client):
        campaign_id, oracle = self.start(client)
        first = client.get(f"/campaigns/{campaign_id}/suggestions")
        second = client.get(f"/campaigns/{campaign_id}/suggestions")
        assert first.content == second.content
        body = first.json()
        assert len(body["suggestions"]) == 5
        assert body["iteration"] == 0
        assert all(card["predicted"] is None for card in body["suggestions"])
        assert all("Ductility" in card["catalog_row"] for card in body["suggestions"])

    def test_full_iteration_cycle(self, client):
        campaign_id, oracle = self.start(client)
        cards, closing = self.resolve_batch(client, campaign_id, oracle)
        assert closing["iteration"] == 0
        assert closing["report"] is not None
        assert closing["pending_remaining"] == 0

        body = client.get(f"/campaigns/{campaign_id}/suggestions").json()
        assert len(body["suggestions"]) == 5
        assert all(card["predicted"] is not None for card in body["suggestions"])
        seen = {c["snapped_index"] for c in cards}
        assert not seen & {c["snapped_index"] for c in body["suggestions"]}

        _, closing = self.resolve_batch(client, campaign_id, oracle)
        assert closing["iteration"] == 1
        report = client.get(f"/campaigns/{campaign_id}/report").json()
        assert len(report["trace"]) == 2
        assert report["trace"][-1]["phv"] is None
        assert report["trace"][-1]["utilization"] == 10 / 402

    def test_observation_errors(self, client):
        campaign_id, oracle = self.start(client)
        cards = client.get(f"/campaigns/{campaign_id}/suggestions").json()["suggestions"]
        idx = cards[0]["snapped_index"]
        not_pending = client.post(
            f"/campaigns/{campaign_id}/observations",
            json={"snapped_index": 399 if idx != 399 else 398, "values": [1.0, 2.0]},
        )
        assert not_pending.status_code == 409
        nan = client.post(
            f"/campaigns/{campaign_id}/observations",
            json={"snapped_index": idx, "values": ["NaN", 2.0]},
        )
        assert nan.status_code == 422
        ok = client.post(
            f"/campaigns/{campaign_id}/observations",
            json={"snapped_index": idx, "values": [float(v) for v in oracle[idx]]},
        )
        assert ok.status_code == 200
        duplicate = client.post(
            f"/campaigns/{campaign_id}/observations",
            json={"snapped_index": idx, "values": [float(v) for v in oracle[idx]]},
        )
        assert duplicate.status_code == 409

    def test_concurrent_observations_serialize(self, client):
        campaign_id, oracle = self.start(client)
        cards = client.get(f"/campaigns/{campaign_id}/suggestions").json()["suggestions"]

        def submit(card):
            idx = card["snapped_index"]
            return client.post(
                f"/campaigns/{campaign_id}/observations",
                json={"snapped_index": idx, "values": [float(v) for v in oracle[idx]]},
            ).status_code

        with ThreadPoolExecutor(max_workers=5) as pool:
            codes = list(pool.map(submit, cards))
        assert codes == [200] * 5
        report = client.get(f"/campaigns/{campaign_id}/report").json()
        assert len(report["evaluated"]) == 5
        assert len(report["trace"]) == 1


class TestRestart:
    def test_report_survives_restart(self, tmp_path):
        data_dir = tmp_path / "data"
        with TestClient(create_app(data_dir)) as client:
            handle = create_bundled(client, SIM_CONFIG)
            client.post(f"/campaigns/{handle['id']}/run")
            before = client.get(f"/campaigns/{handle['id']}/report")
        with TestClient(create_app(data_dir)) as client:
            listed = client.get("/campaigns").json()
            assert [h["id"] for h in listed] == [handle["id"]]
            after = client.get(f"/campaigns/{handle['id']}/report")
        assert before.content == after.content

    def test_live_pending_survives_restart(self, tmp_path):
        data_dir = tmp_path / "data"
        oracle = oracle_values()
        with TestClient(create_app(data_dir)) as client:
            handle = create_bundled(client, LIVE_CONFIG)
            cards_before = client.get(f"/campaigns/{handle['id']}/suggestions")
        with TestClient(create_app(data_dir)) as client:
            cards_after = client.get(f"/campaigns/{handle['id']}/suggestions")
            assert cards_before.content == cards_after.content
            for card in cards_after.json()["suggestions"]:
                idx = card["snapped_index"]
                response = client.post(
                    f"/campaigns/{handle['id']}/observations",
                    json={"snapped_index": idx, "values": [float(v) for v in oracle[idx]]},
                )
                assert response.status_code == 200
            report = client.get(f"/campaigns/{handle['id']}/report").json()
            assert len(report["trace"]) == 1
