import json
from pathlib import Path

import pytest

from schmidtgames.cli import main


ESCAPE_CFG = {
    "command": "play-escape",
    "system": {
        "matrices": {"kind": "power", "base": 3},
        "targets": {"kind": "lattice", "shift": [0]},
        "beta": "0.25",
    },
    "target_stages": 6,
}

BAD0_CFG = {
    "command": "play-bad0",
    "m_rows": 1,
    "n_cols": 1,
    "R": 4,
    "beta": "0.25",
    "opening": {"center": ["0.32"], "radius": "0.25"},
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run_dir_files(out: Path):
    return sorted(p.name for p in out.iterdir())


class TestEscapePipeline:
    def test_play_verify_report(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, ESCAPE_CFG)
        out = tmp_path / "run"
        assert main(["play-escape", "--config", cfg, "--seed", "3", "--out", str(out)]) == 0
        assert {"transcript.json", "certificates.json", "run.json"} <= set(
            run_dir_files(out)
        )
        run = json.loads((out / "run.json").read_text())
        assert run["result"]["stages"] >= 6
        assert run["constants"]["c_value"] is not None

        assert main(["verify", "--transcript", str(out / "transcript.json")]) == 0
        verify = json.loads((out / "verify.json").read_text())
        assert verify["revalidation_discrepancies"] == []
        assert verify["all_ok"]
        assert all(r["ok"] for r in verify["certified_rows"])

        capsys.readouterr()
        assert main(["report", "--dir", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "report.txt" in printed
        assert (out / "report.txt").exists()
        assert (out / "report.json").exists()
        assert (out / "escape_bounds.png").exists()


class TestBad0Pipeline:
    def test_play_verify_report(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, BAD0_CFG)
        out = tmp_path / "run"
        assert main(["play-bad0", "--config", cfg, "--seed", "7", "--out", str(out)]) == 0
        run = json.loads((out / "run.json").read_text())
        assert run["result"]["succeeded_through"] == 4

        assert main(["verify", "--transcript", str(out / "transcript.json")]) == 0
        verify = json.loads((out / "verify.json").read_text())
        assert verify["crosscheck"]["passed"]
        assert verify["cf_consistency"]["ok"]
        assert verify["badness"]["infimum"] > 0
        assert (out / "windows.csv").exists()

        capsys.readouterr()
        assert main(["report", "--dir", str(out)]) == 0
        assert (out / "report.txt").exists()
        assert (out / "radius_decay.png").exists()

    def test_deterministic_artifacts(self, tmp_path):
        cfg = write_cfg(tmp_path, BAD0_CFG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert main(
                ["play-bad0", "--config", cfg, "--seed", "7", "--out", str(out)]
            ) == 0
        for name in ("transcript.json", "certificates.json", "run.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_changes_the_run(self, tmp_path):
        cfg = write_cfg(tmp_path, BAD0_CFG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["play-bad0", "--config", cfg, "--seed", "1", "--out", str(out1)]) == 0
        assert main(["play-bad0", "--config", cfg, "--seed", "2", "--out", str(out2)]) == 0
        assert (out1 / "transcript.json").read_bytes() != (
            out2 / "transcript.json"
        ).read_bytes()


class TestConfigValidation:
    def test_beta_out_of_range(self, tmp_path, capsys):
        bad = dict(BAD0_CFG, beta="0.5")
        cfg = write_cfg(tmp_path, bad)
        out = tmp_path / "run"
        assert main(["play-bad0", "--config", cfg, "--seed", "0", "--out", str(out)]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "ConfigError"

    def test_unknown_field_rejected(self, tmp_path, capsys):
        bad = dict(BAD0_CFG, extra_knob=1)
        cfg = write_cfg(tmp_path, bad)
        assert main(
            ["play-bad0", "--config", cfg, "--seed", "0", "--out", str(tmp_path / "r")]
        ) == 2
        err = json.loads(capsys.readouterr().err)
        assert "extra_knob" in err["error"]["message"]

    def test_missing_field_rejected(self, tmp_path, capsys):
        bad = {k: v for k, v in BAD0_CFG.items() if k != "opening"}
        cfg = write_cfg(tmp_path, bad)
        assert main(
            ["play-bad0", "--config", cfg, "--seed", "0", "--out", str(tmp_path / "r")]
        ) == 2
        err = json.loads(capsys.readouterr().err)
        assert "opening" in err["error"]["message"]

    def test_command_mismatch_rejected(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, BAD0_CFG)
        assert main(
            ["play-escape", "--config", cfg, "--seed", "0", "--out", str(tmp_path / "r")]
        ) == 2
        capsys.readouterr()

    def test_unknown_bob_kind_rejected(self, tmp_path, capsys):
        bad = dict(BAD0_CFG, bob={"kind": "psychic"})
        cfg = write_cfg(tmp_path, bad)
        assert main(
            ["play-bad0", "--config", cfg, "--seed", "0", "--out", str(tmp_path / "r")]
        ) == 2
        capsys.readouterr()


class TestVerifyFailures:
    def test_tampered_transcript_rejected(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, BAD0_CFG)
        out = tmp_path / "run"
        assert main(["play-bad0", "--config", cfg, "--seed", "7", "--out", str(out)]) == 0
        doc = json.loads((out / "transcript.json").read_text())
        bob_balls = [
            t for t in doc["turns"] if t["player"] == "bob" and t.get("ball")
        ]
        # The opening ball is free; deflating a later ball breaks the
        # radius-floor rule.
        bob_balls[2]["ball"]["radius"] = "1e-9"
        (out / "transcript.json").write_text(json.dumps(doc))
        code = main(
            [
                "verify",
                "--transcript",
                str(out / "transcript.json"),
                "--out",
                str(out),
            ]
        )
        assert code == 3
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "VerificationFailed"
        assert (out / "error.json").exists()
        verify = json.loads((out / "verify.json").read_text())
        assert verify["revalidation_discrepancies"]

    def test_missing_transcript_is_config_error(self, tmp_path, capsys):
        assert main(["verify", "--transcript", str(tmp_path / "nope.json")]) == 2
        capsys.readouterr()

    def test_report_needs_artifacts(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["report", "--dir", str(empty)]) == 3
        capsys.readouterr()


class TestFractalCommand:
    def test_builtin_with_points(self, tmp_path, capsys):
        out = tmp_path / "frac"
        code = main(
            [
                "fractal",
                "--ifs",
                "lipgraph5",
                "--depth",
                "4",
                "--emit-points",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n_points"] == 81
        assert payload["open_set_condition"] is True
        lines = (out / "points.csv").read_text().strip().splitlines()
        assert lines[0] == "x0,x1"
        assert len(lines) == 82

    def test_json_file_input(self, tmp_path, capsys):
        spec = {
            "maps": [
                {"ratio": 0.25, "translation": [0.0]},
                {"ratio": 0.25, "translation": [0.75]},
            ],
            "open_set": {"lower": [0.0], "upper": [1.0]},
        }
        path = tmp_path / "dust.json"
        path.write_text(json.dumps(spec))
        assert main(["fractal", "--ifs", str(path), "--out", str(tmp_path / "o")]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["ifs"] == "dust"
        assert payload["similarity_dimension"] == pytest.approx(0.5)

    def test_unknown_name_rejected(self, tmp_path, capsys):
        assert main(["fractal", "--ifs", "nonsense", "--out", str(tmp_path / "o")]) == 2
        capsys.readouterr()


class TestValidateSystem:
    CFG = {
        "command": "validate-system",
        "system": ESCAPE_CFG["system"],
    }

    def test_constants_payload(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, self.CFG)
        assert main(["validate-system", "--config", cfg]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 3
        assert payload["r"] == 2
        assert float(payload["q_ratio"]) == pytest.approx(3.0)
        assert float(payload["delta_sep"]) == pytest.approx(1.0)
        assert float(payload["gate_radius"]) == pytest.approx(0.015625)

    def test_env_precision_override_wins(self, tmp_path, capsys, monkeypatch):
        cfg = write_cfg(tmp_path, dict(self.CFG, precision_bits=212))
        assert main(["validate-system", "--config", cfg]) == 0
        long_run = json.loads(capsys.readouterr().out)

        monkeypatch.setenv("SG_PRECISION_BITS", "64")
        assert main(["validate-system", "--config", cfg]) == 0
        short_run = json.loads(capsys.readouterr().out)

        # Output strings carry the working precision, so the low-precision
        # environment override must visibly shorten them.
        assert len(short_run["q_ratio"]) < len(long_run["q_ratio"])
