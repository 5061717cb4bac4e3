import json

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from qcapacity import cli
from qcapacity.serialize import channel_from_spec, channel_to_spec
from qcapacity.service import app
from qcapacity.zoo import zoo

FAST = {"restarts": 4}


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


class TestService:
    def test_health(self, client):
        assert client.get("/health").json()["status"] == "ok"

    def test_capacity(self, client):
        resp = client.post("/capacity", json={"channel": {"zoo": "identity"}, "options": FAST})
        body = resp.json()
        assert resp.status_code == 200
        assert body["quantity"] == "holevo"
        assert body["value"] == pytest.approx(1.0, abs=1e-3)
        assert body["config"]["restarts"] == 4

    def test_ea_capacity_from_kraus(self, client):
        spec = channel_to_spec(zoo("pinching", d=2))
        resp = client.post("/ea-capacity", json={"channel": spec})
        assert resp.json()["value"] == pytest.approx(1.0, abs=1e-3)

    def test_complementary(self, client):
        body = client.post("/complementary", json={"channel": {"zoo": "identity"}}).json()
        assert body["dim_env"] == 1
        assert channel_from_spec(body["channel"]).dim_out == 1

    def test_detect_cq(self, client):
        body = client.post("/detect-cq", json={"channel": {"zoo": "cq_orthogonal", "params": {"d": 2}}}).json()
        assert body["accepted"]
        assert body["structure"]["residual"] == 0.0
        assert not client.post("/detect-cq", json={"channel": {"zoo": "depolarizing"}}).json()["accepted"]

    def test_check_lemma1(self, client):
        req = {"channel": {"zoo": "depolarizing", "params": {"p": 0.3}},
               "ensemble": {"weights": [0.5, 0.5], "vectors": [[1, 0], [0, 1]]}}
        body = client.post("/check/lemma1", json=req).json()
        assert body["status"] == "consistent" and body["exit_code"] == 0
        assert body["verdict"]["residual"] <= 1e-8

    def test_check_corollary1_skipped(self, client):
        body = client.post("/check/corollary1", json={"channel": {"zoo": "blocksum"}}).json()
        assert body["status"] == "skipped" and body["exit_code"] == 2

    def test_check_state(self, client):
        req = {"channel": {"zoo": "pinching"}, "state": [[0.7, 0], [0, 0.3]], "options": FAST}
        body = client.post("/check/state", json=req).json()
        assert body["status"] == "consistent"
        assert body["verdict"]["equality"]

    @pytest.mark.parametrize("path, req", [
        ("/capacity", {"channel": {"zoo": "nope"}}),
        ("/capacity", {"channel": {"kraus": [[[1, 0], [0, 0.5]]]}}),
        ("/capacity", {"channel": {}}),
        ("/check/lemma1", {"channel": {"zoo": "identity"}}),
        ("/check/corollary2", {"channel": {"zoo": "identity"}}),
        ("/check/bogus", {"channel": {"zoo": "identity"}}),
        ("/zoo/identity", {"p": 1}),
    ])
    def test_invalid(self, client, path, req):
        assert client.post(path, json=req).status_code == 422

    def test_zoo(self, client):
        names = {e["name"] for e in client.get("/zoo").json()}
        assert {"identity", "blocksum", "depolarizing"} <= names
        spec = client.post("/zoo/depolarizing", json={"p": 0.5}).json()
        assert len(spec["kraus"]) == 4
        # entries are [re, im] pairs
        assert spec["kraus"][0][0][0] == [pytest.approx(np.sqrt(5 / 8)), 0.0]


class TestCli:
    def test_capacity(self, runner, tmp_path):
        spec = write(tmp_path, "id.json", {"zoo": "identity"})
        report = tmp_path / "report.json"
        res = runner.invoke(cli.main, ["--restarts", "4", "--report", str(report), "capacity", spec])
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["value"] == pytest.approx(1.0, abs=1e-3)
        rep = json.loads(report.read_text())
        assert rep["exit_code"] == 0
        assert rep["config"]["restarts"] == 4
        assert rep["timings"]["wall_seconds"] > 0

    def test_stdin(self, runner):
        res = runner.invoke(cli.main, ["ea-capacity", "-"], input=json.dumps({"zoo": "identity"}))
        assert res.exit_code == 0
        assert json.loads(res.output)["value"] == pytest.approx(2.0, abs=1e-3)

    def test_complementary(self, runner, tmp_path):
        spec = write(tmp_path, "p.json", channel_to_spec(zoo("pinching", d=2)))
        out = tmp_path / "comp.json"
        res = runner.invoke(cli.main, ["complementary", spec, "-o", str(out)])
        assert res.exit_code == 0
        assert channel_from_spec(json.loads(out.read_text())).dim_out == 2

    def test_detect_cq(self, runner, tmp_path):
        spec = write(tmp_path, "c.json", {"zoo": "cq_random", "params": {"d": 2, "seed": 1}})
        res = runner.invoke(cli.main, ["detect-cq", spec])
        assert json.loads(res.output)["accepted"]

    def test_check_corollary2(self, runner, tmp_path):
        spec = write(tmp_path, "p.json", {"zoo": "pinching"})
        h = write(tmp_path, "h.json", [[0, 0], [0, 1]])
        res = runner.invoke(cli.main, ["--restarts", "4", "check", "corollary2", spec,
                                       "--h-operator", h, "--h-bound", "0.1"])
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["verdict"]["assertion_a"] is True

    def test_check_skipped_exit_code(self, runner, tmp_path):
        spec = write(tmp_path, "d.json", {"zoo": "depolarizing"})
        res = runner.invoke(cli.main, ["--restarts", "4", "check", "proposition1", spec])
        assert res.exit_code == 2
        assert json.loads(res.output)["status"] == "skipped"

    def test_spec_with_extras(self, runner, tmp_path):
        spec = write(tmp_path, "l.json", {"channel": {"zoo": "identity"},
                                          "ensemble": {"weights": [1.0], "vectors": [[1, 0]]}})
        res = runner.invoke(cli.main, ["check", "lemma1", spec])
        assert res.exit_code == 0

    @pytest.mark.parametrize("doc", [{"zoo": "nope"}, {"kraus": [[[1, 0], [0, 0.5]]]}, [1, 2]])
    def test_invalid_spec(self, runner, tmp_path, doc):
        res = runner.invoke(cli.main, ["capacity", write(tmp_path, "bad.json", doc)])
        assert res.exit_code == 3

    def test_unreadable_file(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert runner.invoke(cli.main, ["capacity", str(bad)]).exit_code == 3

    def test_zoo(self, runner):
        res = runner.invoke(cli.main, ["zoo", "list"])
        assert "blocksum" in {e["name"] for e in json.loads(res.output)}
        res = runner.invoke(cli.main, ["zoo", "emit", "depolarizing", "p=0.25"])
        assert res.exit_code == 0
        assert "depolarizing(p=0.25)" == json.loads(res.output)["name"]
        assert runner.invoke(cli.main, ["zoo", "emit", "nope"]).exit_code == 3
        assert runner.invoke(cli.main, ["zoo", "emit", "identity", "oops"]).exit_code == 3

    def test_config_file(self, runner, tmp_path):
        cfg = tmp_path / "solver.cfg"
        cfg.write_text("restarts = 3\nseed = 9\n")
        res = runner.invoke(cli.main, ["--config", str(cfg), "capacity", write(tmp_path, "i.json", {"zoo": "identity"})])
        assert json.loads(res.output)["config"]["restarts"] == 3
        assert json.loads(res.output)["config"]["seed"] == 9

    def test_remote_backend(self, runner, tmp_path, monkeypatch):
        def fake_init(self, url, timeout=600.0):
            self.client = TestClient(app)

        monkeypatch.setattr(cli.RemoteBackend, "__init__", fake_init)
        spec = write(tmp_path, "id.json", {"zoo": "identity"})
        res = runner.invoke(cli.main, ["--server", "http://test", "--restarts", "4", "capacity", spec])
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["value"] == pytest.approx(1.0, abs=1e-3)
        bad = write(tmp_path, "bad.json", {"zoo": "nope"})
        assert runner.invoke(cli.main, ["--server", "http://test", "capacity", bad]).exit_code == 3
