import json
import threading
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from uaproj import (
    aggregate_mixture,
    build_weighted_moments,
    projection_from_ua,
)
from uaproj.cli import main
from uaproj.model import ImportanceWeights
from uaproj.service import create_app

from conftest import random_mixture
from test_dataio_cli import two_class_csv


@pytest.fixture()
def client():
    return TestClient(create_app())


def class_models(n_classes=3, dim=4, seed=11):
    rng = np.random.default_rng(seed)
    entries = []
    models = []
    for i in range(n_classes):
        m = random_mixture(rng, dim, 2)
        models.append(m)
        entries.append(
            {"name": f"class{i}", "model": m.to_json(), "count": 100 * (i + 1)}
        )
    return entries, models


def make_session(client, resolution=64, **extra):
    entries, models = class_models()
    body = {"classes": entries, "resolution": resolution, **extra}
    res = client.post("/sessions", json=body)
    assert res.status_code == 201, res.text
    return res.json(), models


# ----------------------------------------------------------------- create


def test_create_session_descriptor(client):
    desc, _ = make_session(client)
    assert [c["name"] for c in desc["classes"]] == ["class0", "class1", "class2"]
    assert desc["revision"] == 1
    # initial tau proportional to counts (100, 200, 300)
    assert np.allclose(desc["tau"], [1 / 6, 2 / 6, 3 / 6])
    assert len(desc["contours"]) == 3
    assert len(desc["projection"]["basis"]) == 2  # d=2 rows


def test_create_without_counts_uses_equal_tau(client):
    entries, _ = class_models()
    for e in entries:
        del e["count"]
    res = client.post("/sessions", json={"classes": entries, "resolution": 32})
    assert res.status_code == 201
    assert np.allclose(res.json()["tau"], 1 / 3)


def test_create_rejects_bad_bodies(client):
    assert client.post("/sessions", json={}).status_code == 400
    assert (
        client.post("/sessions", json={"classes": [{"name": "x"}]}).status_code == 400
    )
    res = client.post(
        "/sessions",
        json={"dataset": "/nonexistent/file.csv", "label_column": "label"},
    )
    assert res.status_code == 400
    assert "file" in res.json()["detail"]


def test_identical_uploads_identical_contours(client):
    a, _ = make_session(client)
    b, _ = make_session(client)
    assert a["session_id"] != b["session_id"]
    assert a["contours"] == b["contours"]
    assert a["projection"] == b["projection"]


def test_create_from_dataset_csv(client, tmp_path):
    csv_path = tmp_path / "d.csv"
    two_class_csv(csv_path, n=(300, 100))
    res = client.post(
        "/sessions",
        json={
            "dataset": str(csv_path),
            "label_column": "label",
            "resolution": 64,
            "fit": {"k_min": 1, "k_max": 2, "restarts": 2, "seed": 1},
        },
    )
    assert res.status_code == 201, res.text
    desc = res.json()
    assert [c["name"] for c in desc["classes"]] == ["alpha", "beta"]
    assert np.allclose(desc["tau"], [0.75, 0.25])


# ------------------------------------------------------------------ update


def test_put_same_tau_same_projection_new_revision(client):
    desc, _ = make_session(client)
    sid = desc["session_id"]
    res = client.put(f"/sessions/{sid}/weights", json={"tau": desc["tau"]})
    assert res.status_code == 200
    out = res.json()
    assert out["revision"] == desc["revision"] + 1
    assert out["projection"]["basis"] == desc["projection"]["basis"]
    assert out["contours"] == desc["contours"]


def test_put_normalizes_tau_echo(client):
    desc, _ = make_session(client)
    sid = desc["session_id"]
    out = client.put(f"/sessions/{sid}/weights", json={"tau": [8, 1, 1]}).json()
    assert np.allclose(out["tau"], [0.8, 0.1, 0.1])
    assert sum(out["tau"]) == pytest.approx(1.0, abs=1e-12)


def test_put_emphasis_changes_projection(client):
    desc, _ = make_session(client)
    sid = desc["session_id"]
    equal = client.put(f"/sessions/{sid}/weights", json={"tau": [1, 1, 1]}).json()
    focus = client.put(
        f"/sessions/{sid}/weights", json={"tau": [0.95, 0.025, 0.025]}
    ).json()
    assert not np.allclose(focus["projection"]["basis"], equal["projection"]["basis"])
    assert focus["contours"] != equal["contours"]


def test_put_validation_errors(client):
    desc, _ = make_session(client)
    sid = desc["session_id"]
    assert client.put(f"/sessions/{sid}/weights", json={}).status_code == 400
    assert (
        client.put(f"/sessions/{sid}/weights", json={"tau": [1, 1]}).status_code == 400
    )
    assert (
        client.put(
            f"/sessions/{sid}/weights", json={"tau": [1, -1, 1]}
        ).status_code
        == 400
    )
    assert (
        client.put("/sessions/nope/weights", json={"tau": [1, 1, 1]}).status_code
        == 404
    )


def test_revision_fencing(client):
    desc, _ = make_session(client)
    sid = desc["session_id"]
    r1 = client.put(
        f"/sessions/{sid}/weights", json={"tau": [1, 1, 1], "revision": 1}
    )
    assert r1.status_code == 200 and r1.json()["revision"] == 2
    stale = client.put(
        f"/sessions/{sid}/weights", json={"tau": [2, 1, 1], "revision": 1}
    )
    assert stale.status_code == 409
    current = client.put(
        f"/sessions/{sid}/weights", json={"tau": [2, 1, 1], "revision": 2}
    )
    assert current.status_code == 200 and current.json()["revision"] == 3


# -------------------------------------------------------------------- read


def test_get_reflects_latest_put(client):
    desc, _ = make_session(client)
    sid = desc["session_id"]
    out = client.put(f"/sessions/{sid}/weights", json={"tau": [5, 3, 2]}).json()
    got = client.get(f"/sessions/{sid}").json()
    assert got["revision"] == out["revision"]
    assert got["tau"] == out["tau"]
    assert got["contours"] == out["contours"]
    contours = client.get(f"/sessions/{sid}/contours").json()
    assert contours == {"revision": out["revision"], "contours": out["contours"]}
    assert client.get("/sessions/nope").status_code == 404
    assert client.get("/sessions/nope/contours").status_code == 404


def test_reads_never_tear_across_revisions(client):
    desc, _ = make_session(client, resolution=32)
    sid = desc["session_id"]
    # each tau vector is distinct, so a response mixing two revisions would
    # pair a tau with contours from a different snapshot
    tau_by_revision = {1: tuple(desc["tau"])}
    stop = threading.Event()
    seen = []
    errors = []

    def reader():
        while not stop.is_set():
            got = client.get(f"/sessions/{sid}").json()
            seen.append((got["revision"], tuple(got["tau"])))

    threads = [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    try:
        for i in range(2, 8):
            out = client.put(
                f"/sessions/{sid}/weights", json={"tau": [1.0, 1.0, float(i)]}
            ).json()
            tau_by_revision[out["revision"]] = tuple(out["tau"])
    finally:
        stop.set()
        for t in threads:
            t.join()
    assert not errors
    assert seen
    for revision, tau in seen:
        assert tau == tau_by_revision[revision]


# -------------------------------------------------- equivalence and timing


def test_cached_moments_match_from_scratch(client):
    desc, models = make_session(client)
    sid = desc["session_id"]
    for tau in ([1, 1, 1], [9, 1, 2], [0.5, 0.25, 0.25]):
        out = client.put(f"/sessions/{sid}/weights", json={"tau": tau}).json()
        weights = ImportanceWeights.normalized([float(v) for v in tau])
        wms = build_weighted_moments(
            [aggregate_mixture(m) for m in models], weights
        )
        p = projection_from_ua(wms, 2)
        served = np.asarray(out["projection"]["basis"]).T
        assert np.allclose(served, p.basis, atol=1e-12)


def test_contours_match_cli_output(client, tmp_path):
    csv_path = tmp_path / "d.csv"
    two_class_csv(csv_path, n=(900, 100))
    runner = CliRunner()
    res = runner.invoke(
        main,
        ["fit", "--input", str(csv_path), "--label-column", "label",
         "--kmin", "1", "--kmax", "2", "--restarts", "2", "--seed", "3",
         "--out", str(tmp_path / "models")],
    )
    assert res.exit_code == 0, res.output
    res = runner.invoke(
        main,
        ["project", "--models", str(tmp_path / "models" / "models.json"),
         "--tau", "samples", "--out", str(tmp_path / "proj")],
    )
    assert res.exit_code == 0, res.output
    res = runner.invoke(
        main,
        ["contours", "--models", str(tmp_path / "proj" / "projected_models.json"),
         "--resolution", "128", "--out", str(tmp_path / "contours")],
    )
    assert res.exit_code == 0, res.output

    index = json.loads((tmp_path / "models" / "models.json").read_text())
    entries = []
    for entry in index["classes"]:
        model = json.loads((tmp_path / "models" / entry["model"]).read_text())
        entries.append(
            {"name": entry["name"], "model": model, "count": entry["n_samples"]}
        )
    res = client.post(
        "/sessions", json={"classes": entries, "resolution": 128}
    )
    assert res.status_code == 201, res.text
    desc = res.json()

    cli_projection = json.loads((tmp_path / "proj" / "projection.json").read_text())
    assert np.allclose(
        np.asarray(desc["projection"]["basis"]),
        np.asarray(cli_projection["basis"]),
        atol=1e-12,
    )
    for cid, served in enumerate(desc["contours"]):
        cli_payload = json.loads(
            (tmp_path / "contours" / f"contours_{cid:03d}.json").read_text()
        )
        assert served == cli_payload


def test_weight_update_latency(client):
    rng = np.random.default_rng(21)
    entries = []
    for i in range(10):
        entries.append(
            {"name": f"c{i}", "model": random_mixture(rng, 8, 3).to_json()}
        )
    res = client.post("/sessions", json={"classes": entries, "resolution": 256})
    assert res.status_code == 201, res.text
    sid = res.json()["session_id"]
    start = time.perf_counter()
    out = client.put(
        f"/sessions/{sid}/weights", json={"tau": [1.0] * 10}
    )
    elapsed = time.perf_counter() - start
    assert out.status_code == 200
    assert elapsed < 0.5
