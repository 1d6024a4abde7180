"""End-to-end tests for the command-line interface."""
from __future__ import annotations

import json
import subprocess
import sys

import pytest

from surfsep.cli import main

GOOD_WRAP_SPEC = {
    "genus": 1,
    "boundary": 2,
    "d": 2,
    "n": 3,
    "subgroup": [],
    "sigma": {"1,1": "a1", "2,1": "b1"},
    "tau": [],
    "excluded": [],
}


def write(path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture()
def word_files(tmp_path):
    return {
        "loops": write(tmp_path / "loops.txt", "a1 b1\n# comment\na1 b1'\n"),
        "sub": write(tmp_path / "sub.txt", "a1\n"),
        "exc": write(tmp_path / "exc.txt", "b1\n"),
    }


class TestFold:
    def test_writes_canonical_graph(self, tmp_path, word_files):
        out = tmp_path / "fold.json"
        code = main(
            ["fold", "--genus", "1", "--boundary", "1",
             "--loops", word_files["loops"], "--json", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data["vertices"] == 2
        assert data["base"] == 0
        assert data["edges"] == [
            {"from": 0, "label": "a1", "to": 1},
            {"from": 0, "label": "b1", "to": 1},
            {"from": 1, "label": "b1", "to": 0},
        ]

    def test_rerun_is_byte_identical(self, tmp_path, word_files):
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        for out in (first, second):
            assert main(
                ["fold", "--genus", "1", "--boundary", "1",
                 "--loops", word_files["loops"], "--json", str(out)]
            ) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_dot_output(self, tmp_path, word_files):
        out = tmp_path / "fold.dot"
        code = main(
            ["fold", "--genus", "1", "--boundary", "1",
             "--loops", word_files["loops"], "--dot", str(out)]
        )
        assert code == 0
        assert out.read_text().startswith("digraph subgroup_graph {")

    def test_requires_input_words(self, capsys):
        assert main(["fold", "--genus", "1", "--boundary", "1"]) == 2
        assert "error" in capsys.readouterr().err

    def test_requires_basis(self, word_files):
        assert main(["fold", "--loops", word_files["loops"]]) == 2

    def test_rejects_bad_basis(self, word_files):
        assert main(
            ["fold", "--genus", "0", "--boundary", "1", "--loops", word_files["loops"]]
        ) == 2

    def test_malformed_word_reports_line(self, tmp_path, capsys):
        bad = write(tmp_path / "bad.txt", "a1 b1\nq7 a1\n")
        code = main(["fold", "--genus", "1", "--boundary", "1", "--loops", bad])
        assert code == 2
        err = capsys.readouterr().err
        assert "bad.txt:2" in err

    def test_missing_file_is_domain_error(self, tmp_path):
        missing = str(tmp_path / "nope.txt")
        assert main(
            ["fold", "--genus", "1", "--boundary", "1", "--loops", missing]
        ) == 1


class TestSeparate:
    def test_produces_verifiable_certificate(self, tmp_path, word_files):
        cert_path = tmp_path / "cert.json"
        code = main(
            ["separate", "--genus", "1", "--boundary", "1",
             "--subgroup", word_files["sub"], "--exclude", word_files["exc"],
             "--json", str(cert_path)]
        )
        assert code == 0
        data = json.loads(cert_path.read_text())
        assert data["index"] == 5
        assert main(["verify", str(cert_path)]) == 0

    def test_peripheral_subgroup_exits_one(self, tmp_path, capsys):
        sub = write(tmp_path / "peri.txt", "x1\n")
        code = main(
            ["separate", "--genus", "1", "--boundary", "2", "--subgroup", sub]
        )
        assert code == 1
        assert "PeripheralSubgroup" in capsys.readouterr().err

    def test_excluded_member_exits_one(self, tmp_path, word_files):
        exc = write(tmp_path / "inside.txt", "a1 a1\n")
        code = main(
            ["separate", "--genus", "1", "--boundary", "1",
             "--subgroup", word_files["sub"], "--exclude", exc]
        )
        assert code == 1

    def test_requires_subgroup_file(self):
        assert main(["separate", "--genus", "1", "--boundary", "1"]) == 2


class TestWrap:
    def test_builds_certificate_from_spec_file(self, tmp_path):
        spec_path = write(tmp_path / "spec.json", json.dumps(GOOD_WRAP_SPEC))
        cert_path = tmp_path / "cert.json"
        code = main(["wrap", "--spec", spec_path, "--json", str(cert_path)])
        assert code == 0
        data = json.loads(cert_path.read_text())
        assert data["index"] == data["d"] * data["N"] + 1
        assert main(["verify", str(cert_path)]) == 0

    def test_rerun_is_byte_identical(self, tmp_path):
        spec_path = write(tmp_path / "spec.json", json.dumps(GOOD_WRAP_SPEC))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert main(["wrap", "--spec", spec_path, "--json", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_degree_override_below_two_exits_two(self, tmp_path):
        spec_path = write(tmp_path / "spec.json", json.dumps(GOOD_WRAP_SPEC))
        assert main(["wrap", "--spec", spec_path, "--d", "1"]) == 2

    def test_exponent_override_is_used(self, tmp_path):
        spec_path = write(tmp_path / "spec.json", json.dumps(GOOD_WRAP_SPEC))
        out = tmp_path / "cert.json"
        assert main(["wrap", "--spec", spec_path, "--n", "7", "--json", str(out)]) == 0
        assert json.loads(out.read_text())["n"] == 7

    def test_requires_spec_file(self):
        assert main(["wrap"]) == 2

    def test_malformed_spec_json_exits_two(self, tmp_path):
        spec_path = write(tmp_path / "spec.json", "{broken")
        assert main(["wrap", "--spec", spec_path]) == 2

    def test_peripheral_content_exits_one(self, tmp_path):
        bad = dict(GOOD_WRAP_SPEC, subgroup=["x1"])
        spec_path = write(tmp_path / "spec.json", json.dumps(bad))
        assert main(["wrap", "--spec", spec_path]) == 1


class TestVerify:
    def make_cert(self, tmp_path, word_files) -> str:
        cert_path = tmp_path / "cert.json"
        assert main(
            ["separate", "--genus", "1", "--boundary", "1",
             "--subgroup", word_files["sub"], "--exclude", word_files["exc"],
             "--json", str(cert_path)]
        ) == 0
        return str(cert_path)

    def test_report_json_shape(self, tmp_path, word_files):
        cert = self.make_cert(tmp_path, word_files)
        report_path = tmp_path / "report.json"
        assert main(["verify", cert, "--json", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert report["pass"] is True
        assert all(
            {"name", "pass", "witness", "certificate"} == set(claim)
            for claim in report["claims"]
        )

    def test_tampered_certificate_fails_with_witness(self, tmp_path, word_files, capsys):
        cert = self.make_cert(tmp_path, word_files)
        data = json.loads(open(cert).read())
        data["index"] += 1
        tampered = write(tmp_path / "tampered.json", json.dumps(data))
        report_path = tmp_path / "report.json"
        assert main(["verify", tampered, "--json", str(report_path)]) == 1
        report = json.loads(report_path.read_text())
        assert report["pass"] is False
        failing = [c for c in report["claims"] if not c["pass"]]
        assert failing and failing[0]["witness"]

    def test_multiple_certificates_with_jobs(self, tmp_path, word_files):
        cert = self.make_cert(tmp_path, word_files)
        spec_path = write(tmp_path / "spec.json", json.dumps(GOOD_WRAP_SPEC))
        wrap_path = tmp_path / "wrap.json"
        assert main(["wrap", "--spec", spec_path, "--json", str(wrap_path)]) == 0
        assert main(["verify", cert, str(wrap_path), "--jobs", "2"]) == 0

    def test_malformed_json_exits_two(self, tmp_path):
        bad = write(tmp_path / "bad.json", '{"no": \n')
        assert main(["verify", str(bad)]) == 2

    def test_wrong_object_exits_two(self, tmp_path):
        bad = write(tmp_path / "bad.json", json.dumps({"genus": 1}))
        assert main(["verify", str(bad)]) == 2


class TestOracle:
    def test_finds_minimal_degree(self, tmp_path, word_files, capsys):
        out = tmp_path / "oracle.json"
        code = main(
            ["oracle", "--genus", "1", "--boundary", "1",
             "--subgroup", word_files["sub"], "--exclude", word_files["exc"],
             "--max-index", "6", "--json", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data["found"] is True
        assert data["certificate"]["index"] == 3
        assert data["kernel"] in ("compiled", "python")

    def test_reports_none_when_capped(self, tmp_path, word_files, capsys):
        out = tmp_path / "oracle.json"
        code = main(
            ["oracle", "--genus", "1", "--boundary", "1",
             "--subgroup", word_files["sub"], "--exclude", word_files["exc"],
             "--max-index", "2", "--json", str(out)]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data["found"] is False
        assert data["certificate"] is None


class TestExportDot:
    def test_exports_graph_json(self, tmp_path, word_files):
        fold_path = tmp_path / "fold.json"
        assert main(
            ["fold", "--genus", "1", "--boundary", "1",
             "--loops", word_files["loops"], "--json", str(fold_path)]
        ) == 0
        dot_path = tmp_path / "out.dot"
        assert main(["export-dot", str(fold_path), "--dot", str(dot_path)]) == 0
        assert "digraph" in dot_path.read_text()

    def test_exports_certificate_json(self, tmp_path, word_files):
        cert_path = tmp_path / "cert.json"
        assert main(
            ["separate", "--genus", "1", "--boundary", "1",
             "--subgroup", word_files["sub"], "--json", str(cert_path)]
        ) == 0
        dot_path = tmp_path / "out.dot"
        assert main(["export-dot", str(cert_path), "--dot", str(dot_path)]) == 0
        assert "doublecircle" in dot_path.read_text()

    def test_requires_dot_path(self, tmp_path, word_files, capsys):
        assert main(["export-dot", str(tmp_path / "whatever.json")]) == 2

    def test_malformed_input_exits_two(self, tmp_path):
        bad = write(tmp_path / "bad.json", json.dumps({"vertices": "x"}))
        assert main(["export-dot", str(bad), "--dot", str(tmp_path / "o.dot")]) == 2


class TestStdoutDiscipline:
    def test_json_mode_keeps_stdout_silent(self, tmp_path, word_files, capsys):
        out = tmp_path / "fold.json"
        main(
            ["fold", "--genus", "1", "--boundary", "1",
             "--loops", word_files["loops"], "--json", str(out)]
        )
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "vertices=" in captured.err

    def test_plain_mode_prints_summary(self, word_files, capsys):
        main(
            ["separate", "--genus", "1", "--boundary", "1",
             "--subgroup", word_files["sub"]]
        )
        assert "index=" in capsys.readouterr().out


class TestModuleEntry:
    def test_python_dash_m_invocation(self, tmp_path):
        loops = write(tmp_path / "loops.txt", "a1 b1\n")
        proc = subprocess.run(
            [sys.executable, "-m", "surfsep", "fold", "--genus", "1",
             "--boundary", "1", "--loops", str(loops)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "vertices=" in proc.stdout
