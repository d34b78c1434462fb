import hashlib
import json
import socket
import subprocess
import sys
import time

import httpx
import pytest

from adaptmine import load_kb
from adaptmine.cli import EXIT_BUDGET, EXIT_LOAD, EXIT_OK, main
from adaptmine.service import ServiceConfig, serve
from adaptmine.session import STEPS

MINE_KB = """
[ontology]
f1 isa shared
f2 isa shared
[cases]
c1 | f1 and base | D1
c2 | f2 and base | D2
c3 | f1 and base and extra | D1, D3
c4 | base | D2
"""


@pytest.fixture
def kb_file(tmp_path):
    path = tmp_path / "kb.txt"
    path.write_text(MINE_KB)
    return path


class TestGen:
    def test_outputs_and_determinism(self, tmp_path, capsys):
        out1 = tmp_path / "one"
        out2 = tmp_path / "two"
        assert main(["gen", "--cases", "40", "--seed", "9", "--out", str(out1)]) == EXIT_OK
        first = capsys.readouterr().out
        assert "kb digest:" in first
        assert "expected support" in first
        assert main(["gen", "--cases", "40", "--seed", "9", "--out", str(out2)]) == EXIT_OK
        assert (out1 / "casebase.txt").read_text() == (out2 / "casebase.txt").read_text()
        assert (out1 / "ledger.json").read_text() == (out2 / "ledger.json").read_text()

    def test_printed_support_matches_ledger(self, tmp_path, capsys):
        out = tmp_path / "gen"
        main(["gen", "--cases", "30", "--seed", "4", "--prevalence", "0.1", "--out", str(out)])
        stdout = capsys.readouterr().out
        ledger = json.loads((out / "ledger.json").read_text())
        count = ledger["rules"][0]["expected_support_count"]
        assert f"{count} pairs" in stdout

    def test_infeasible_spec(self, tmp_path, capsys):
        code = main(["gen", "--cases", "10", "--prevalence", "0.9", "--out", str(tmp_path)])
        assert code == EXIT_LOAD

    def test_custom_spec_file(self, tmp_path):
        spec = {
            "n_cases": 25,
            "planted": [
                {
                    "name": "swap",
                    "trigger_feature": "Feature-1",
                    "removed_decision": "Decision-2",
                    "added_decision": "Decision-3",
                    "prevalence": 0.05,
                }
            ],
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        out = tmp_path / "out"
        assert main(["gen", "--spec", str(spec_path), "--seed", "2", "--out", str(out)]) == EXIT_OK
        kb = load_kb(out / "casebase.txt")
        assert len(kb.cases) == 25


class TestMine:
    def test_writes_artifacts_and_summary(self, kb_file, tmp_path, capsys):
        out = tmp_path / "mine"
        code = main(["mine", str(kb_file), "--sigma", "0.2", "--out", str(out)])
        assert code == EXIT_OK
        stdout = capsys.readouterr().out
        for needle in ("cases:", "properties:", "transactions:", "fcis mined:", "wall time:"):
            assert needle in stdout
        assert (out / "transactions.txt").exists()
        assert (out / "fcis.txt").exists()
        assert (out / "rules.json").exists()
        assert (out / "session.zip").exists()

    def test_k_overlap_monotone(self, kb_file, tmp_path, capsys):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        main(["mine", str(kb_file), "--sigma", "0.2", "--out", str(out1)])
        base = capsys.readouterr().out
        main(["mine", str(kb_file), "--sigma", "0.2", "--k-overlap", "2", "--out", str(out2)])
        filtered = capsys.readouterr().out

        def transactions(text):
            return int(next(l for l in text.splitlines() if "transactions" in l).split()[-1])

        assert transactions(filtered) <= transactions(base)

    def test_sigma_validation_exits_2(self, kb_file):
        with pytest.raises(SystemExit) as err:
            main(["mine", str(kb_file), "--sigma", "1.01"])
        assert err.value.code == 2

    def test_missing_kb_exits_3(self, tmp_path):
        assert main(["mine", str(tmp_path / "nope.txt")]) == EXIT_LOAD

    def test_invalid_kb_exits_3(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("[ontology]\n[cases]\nc1 | (age <= 5) | D\n")
        assert main(["mine", str(bad)]) == EXIT_LOAD

    def test_budget_exceeded_exits_4(self, tmp_path, capsys):
        out = tmp_path / "gen"
        main(["gen", "--cases", "120", "--seed", "8", "--out", str(out)])
        capsys.readouterr()
        code = main(
            [
                "mine",
                str(out / "casebase.txt"),
                "--sigma", "0.01",
                "--budget-seconds", "0.0",
                "--out", str(tmp_path / "m"),
            ]
        )
        assert code == EXIT_BUDGET

    def test_out_dir_from_environment(self, kb_file, tmp_path, monkeypatch, capsys):
        target = tmp_path / "envout"
        monkeypatch.setenv("ADAPTMINE_OUT", str(target))
        assert main(["mine", str(kb_file), "--sigma", "0.3"]) == EXIT_OK
        assert (target / "fcis.txt").exists()


class TestServe:
    def test_occupied_port_fails_cleanly(self, kb_file):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        try:
            code = main(["serve", str(kb_file), "--port", str(port)])
        finally:
            blocker.close()
        assert code == 5

    def test_subprocess_prints_token_once_and_serves(self, kb_file):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        proc = subprocess.Popen(
            [sys.executable, "-u", "-m", "adaptmine.cli", "serve", str(kb_file), "--port", str(port)],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
        )
        try:
            deadline = time.monotonic() + 15
            up = False
            while time.monotonic() < deadline:
                try:
                    if httpx.get(f"http://127.0.0.1:{port}/api/health", timeout=1).status_code == 200:
                        up = True
                        break
                except httpx.TransportError:
                    time.sleep(0.05)
            assert up, "service never came up"
        finally:
            proc.terminate()
            stdout, _ = proc.communicate(timeout=15)
        assert stdout.count("session token:") == 1


class TestParity:
    def test_cli_and_api_exports_match(self, kb_file, tmp_path):
        out = tmp_path / "cli"
        assert main(["mine", str(kb_file), "--sigma", "0.2", "--out", str(out)]) == EXIT_OK
        cli_fcis = (out / "fcis.txt").read_bytes()
        cli_rules = (out / "rules.json").read_bytes()

        svc = serve(ServiceConfig(kb=load_kb(kb_file), port=0))
        svc.start()
        host, port = svc.address
        client = httpx.Client(base_url=f"http://{host}:{port}", timeout=60.0)
        try:
            headers = {"X-Session-Token": svc.token}
            client.put("/api/params", json={"sigma": 0.2}, headers=headers).raise_for_status()
            for step in STEPS:
                r = client.post(f"/api/steps/{step}/run", json={"wait": True}, headers=headers)
                assert r.status_code == 200, r.text
            api_fcis = client.get("/api/export/fcis").content
            api_rules = client.get("/api/export/rules").content
        finally:
            client.close()
            svc.stop()
        assert hashlib.sha256(api_fcis).hexdigest() == hashlib.sha256(cli_fcis).hexdigest()
        assert hashlib.sha256(api_rules).hexdigest() == hashlib.sha256(cli_rules).hexdigest()
