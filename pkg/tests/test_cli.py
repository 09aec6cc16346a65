import json

import pytest

from panel_logit_moments.cli import main, read_report, write_report


def run(argv, path):
    return main(argv + ["--out", str(path)])


class TestReports:
    def test_byte_stable(self, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        assert run(["dims", "--p", "1", "--T", "2..3", "--beta0"], p1) == 0
        assert run(["dims", "--p", "1", "--T", "2..3", "--beta0"], p2) == 0
        assert p1.read_bytes() == p2.read_bytes()
        assert p1.read_bytes().endswith(b"\n")

    def test_report_embeds_config_seed_version(self, tmp_path):
        p = tmp_path / "r.json"
        run(["dims", "--p", "1", "--T", "2..2", "--beta0", "--seed", "9"], p)
        report = read_report(str(p))
        assert report["seed"] == 9
        assert report["version"]
        assert report["config"]["T"] == "2..2"

    def test_parse_serialize_fixpoint(self, tmp_path):
        p = tmp_path / "r.json"
        run(["estimate", "--T", "3", "--N", "200", "--seed", "4"], p)
        parsed = read_report(str(p))
        p2 = tmp_path / "r2.json"
        write_report(parsed, "json", str(p2))
        assert p.read_bytes() == p2.read_bytes()

    def test_empty_rows_report(self, tmp_path):
        p = tmp_path / "empty.csv"
        write_report({"rows": [], "csv_columns": ["a", "b"]}, "csv", str(p))
        assert p.read_text() == "a,b\n"

    def test_csv_output(self, tmp_path):
        p = tmp_path / "dims.csv"
        assert run(["dims", "--p", "1", "--T", "2..3", "--beta0", "--format", "csv"], p) == 0
        lines = p.read_text().splitlines()
        assert lines[0].startswith("p,T,init,pattern,rank,dim,expected,match")
        assert len(lines) == 3


class TestExitCodes:
    def test_usage_error_is_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["rank"])  # missing required --T
        assert exc.value.code == 2

    def test_dims_pass(self, tmp_path):
        assert run(["dims", "--p", "2", "--T", "3..4", "--beta0"], tmp_path / "d.json") == 0

    def test_lemma1_pass(self, tmp_path):
        p = tmp_path / "l.json"
        assert run(["lemma1", "--T", "3", "--trials", "10", "--selections", "5"], p) == 0
        report = read_report(str(p))
        assert report["rows"][0]["nonzero_determinants"] == 10


class TestCommands:
    def test_rank_command(self, tmp_path):
        p = tmp_path / "rank.json"
        assert run(["rank", "--p", "1", "--T", "2..4", "--beta0"], p) == 0
        rows = read_report(str(p))["rows"]
        assert [r["claimed_rank"] for r in rows] == [4, 6, 8]

    def test_poly_command(self, tmp_path):
        p = tmp_path / "poly.json"
        assert run(["poly", "--p", "1", "--T", "2..4"], p) == 0
        rows = read_report(str(p))["rows"]
        assert all(r["rank"] == r["expected_rank"] for r in rows)

    def test_basis_command(self, tmp_path):
        p = tmp_path / "basis.json"
        assert run(["basis", "--p", "1", "--T", "3", "--beta0", "--fresh", "10"], p) == 0
        report = read_report(str(p))
        assert report["basis"]["d"] == 2
        assert report["validation"]["exact_zero"]

    def test_patterns_command(self, tmp_path):
        p = tmp_path / "pat.json"
        assert run(["patterns", "--T", "3"], p) == 0
        assert read_report(str(p))["rows"][0]["surplus"] == 1

    def test_stacked_command(self, tmp_path):
        p = tmp_path / "st.json"
        assert run(["stacked", "--T", "3", "--x-draws", "2"], p) == 0

    def test_mc_command_small(self, tmp_path):
        p = tmp_path / "mc.json"
        assert run(
            ["mc", "--T", "3", "--N", "200", "--reps", "3", "--gamma", "0.5"], p
        ) == 0
        rows = read_report(str(p))["rows"]
        assert rows[0]["reps"] == 3

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PANEL_LOGIT_MOMENTS_OUT", str(tmp_path))
        assert main(["poly", "--p", "1", "--T", "2..2", "--out", "rel.json"]) == 0
        assert (tmp_path / "rel.json").exists()
