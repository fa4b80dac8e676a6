import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ibilab.channel import exponential_profile
from ibilab.cli import BER_COLUMNS, BOUND_COLUMNS, S2IBI_COLUMNS, main
from ibilab.config import DEFAULTS, ConfigError, parse_config

SMALL = {"layout": {"N": 16, "L": 5, "D": 4}, "channel": {"max_delay": 3},
         "eta": [1.0, 0.75], "snr_db": [10.0, 30.0], "num_frames": 2}


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_empty_gives_defaults(self):
        cfg = parse_config({})
        assert cfg.layout.block_length == 129 and cfg.layout.num_blocks == 21
        assert cfg.layout.guard_length == 16
        assert cfg.eta == DEFAULTS["eta"] and cfg.seed == 2024

    def test_partial_override(self):
        cfg = parse_config({"eta": [0.5]})
        assert cfg.eta == [0.5] and cfg.domains == ["TD", "FD", "PS"]

    @pytest.mark.parametrize("doc,field", [
        ({"layout": {"N": 0}}, "layout/N"),
        ({"eta": [1.5]}, "eta/0"),
        ({"bogus": 1}, "<root>"),
        ({"channel": {"profile": "harsh"}}, "channel/profile"),
        ({"domains": ["XD"]}, "domains/0"),
    ])
    def test_schema_errors_name_field(self, doc, field):
        with pytest.raises(ConfigError, match=f"config field {field}"):
            parse_config(doc)

    def test_json_error_location(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "seed": ,\n}')
        with pytest.raises(ConfigError, match="line 2 column"):
            parse_config(p)

    def test_channel_spec_presets(self):
        spec = parse_config({"channel": {"profile": "severe", "taps": "integer"}}).channel_spec()
        assert len(spec.paths) == 16 and spec.name == "severe-integer"
        assert np.sum(np.abs(spec.gains) ** 2) == pytest.approx(1.0)

    def test_channel_file(self, tmp_path):
        p = tmp_path / "ch.json"
        p.write_text(exponential_profile(0.5, 0.5, 2, seed=3).to_json())
        spec = parse_config({"channel": {"file": str(p)}}).channel_spec()
        assert len(spec.paths) == 5


class TestCli:
    def test_dpss_dump(self, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["dpss", "dump", "--length", "16", "--half-bandwidth", "0.2", "--order", "4",
                     "--out", str(out)]) == 0
        rows = np.loadtxt(out, delimiter=",")
        assert rows.shape == (17, 4)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "dpss" and manifest["prng"] == "numpy.random.PCG64"

    @pytest.mark.parametrize("cmd,cols", [("s2ibi", S2IBI_COLUMNS), ("bound", BOUND_COLUMNS)])
    def test_tables(self, tmp_path, cmd, cols):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(SMALL))
        assert main([cmd, "--config", str(cfg), "--out", str(tmp_path)]) == 0
        rows = _read(tmp_path / f"{cmd}.csv")
        assert list(rows[0]) == cols and len(rows) == 6
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        for key in ("command", "argv", "config", "seed", "prng", "version", "started_utc",
                    "wall_clock_s", "outputs", "channel"):
            assert key in manifest
        if cmd == "bound":
            assert all(r["dominates"] == "True" for r in rows)

    def test_ber(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({**SMALL, "domains": ["PS"]}))
        out = tmp_path / "ber.csv"
        assert main(["ber", "--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
        rows = _read(out)
        assert list(rows[0]) == BER_COLUMNS and len(rows) == 4
        assert all(r["seed"] == "5" for r in rows)
        assert all(float(r["ci_low"]) <= float(r["ber"]) <= float(r["ci_high"]) for r in rows)
        assert "snr_reference" in json.loads((tmp_path / "manifest.json").read_text())

    def test_reproduce_small(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({**SMALL, "eta": [0.75], "num_frames": 1}))
        assert main(["reproduce-paper", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 0
        names = sorted(p.name for p in (tmp_path / "r").iterdir())
        assert names == sorted([f"{k}_{p}_{t}.csv" for k in ("ber", "s2ibi") for p in ("mild", "severe")
                                for t in ("fractional", "integer")] + ["manifest.json"])

    def test_seed_reproducible(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({**SMALL, "domains": ["TD"]}))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["ber", "--config", str(cfg), "--out", str(a)])
        main(["ber", "--config", str(cfg), "--out", str(b), "--threads", "3"])
        assert a.read_text() == b.read_text()

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"layout": {"N": 0}}))
        assert main(["s2ibi", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "layout/N" in capsys.readouterr().err
        assert not (tmp_path / "s2ibi.csv").exists()

    def test_domain_error_removes_output(self, tmp_path):
        cfg = tmp_path / "c.json"
        # Integer part of the delay exceeds the guard: the bound refuses.
        cfg.write_text(json.dumps({"layout": {"N": 8, "L": 3, "D": 1}, "channel": {"max_delay": 6}}))
        assert main(["bound", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert not (tmp_path / "bound.csv").exists()

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "ibilab", "--version"], capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.strip()
