import csv
import io
import json

import pytest

from tanglepap import cli
from tanglepap.mechanism import ConfigError


@pytest.fixture
def reference_raw():
    return json.loads(cli.bundled_config_path().read_text())


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestLoadConfig:
    def test_bundled_fixture(self):
        cfg = cli.load_config(None)
        m = cfg.mechanism
        assert m.xs == (1.0, 3.0, 10.0)
        assert m.ps == pytest.approx((1 / 3, 1 / 3, 1 / 3))
        assert (m.m, m.alpha, m.beta, m.u0) == (12, 0.1, 80.0, 10.0)
        assert cfg.sweep == (100, 1000, 10000, 100000)

    def test_defaults(self, tmp_path):
        raw = {"types": [{"x": 1, "p": 1}], "max_difficulty": 3, "alpha": 0.1, "beta": 80, "u0": 10}
        cfg = cli.load_config(write(tmp_path, raw))
        assert (cfg.arrival_model, cfg.horizon, cfg.seed) == ("poisson", 2000, 42)
        assert (cfg.slope, cfg.intercept) == (1.0, 0.0)

    def test_fraction_sum(self, tmp_path, reference_raw):
        for t in reference_raw["types"]:
            t["p"] = 0.3
        with pytest.raises(ConfigError, match="AgentTypeSet"):
            cli.load_config(write(tmp_path, reference_raw))

    def test_empty_file(self, tmp_path):
        with pytest.raises(ConfigError, match=r":1:1:"):
            cli.load_config(write(tmp_path, ""))

    def test_parse_error_line(self, tmp_path):
        with pytest.raises(ConfigError, match=r":3:"):
            cli.load_config(write(tmp_path, '{\n "alpha": 1,\n "beta": ,\n}'))

    @pytest.mark.parametrize(
        "path,key", [((), "gamma"), (("sim",), "steps"), (("baseline",), "offset")]
    )
    def test_unknown_keys(self, tmp_path, reference_raw, path, key):
        node = reference_raw
        for p in path:
            node = node[p]
        node[key] = 1
        with pytest.raises(ConfigError, match=key):
            cli.load_config(write(tmp_path, reference_raw))

    def test_zero_horizon(self, tmp_path, reference_raw):
        reference_raw["sim"]["horizon"] = 0
        with pytest.raises(ConfigError, match="horizon"):
            cli.load_config(write(tmp_path, reference_raw))

    def test_bad_sweep(self, tmp_path, reference_raw):
        reference_raw["sweep_N"] = [100, -5]
        with pytest.raises(ConfigError, match="sweep_N"):
            cli.load_config(write(tmp_path, reference_raw))


class TestSolve:
    def test_sweep_rows_monotone(self, capsys):
        assert cli.main(["solve"]) == 0
        rows = rows_of(capsys.readouterr().out)
        assert len(rows) == 12
        assert list(rows[0]) == [
            "N", "type_index", "x", "p", "d", "w", "per_type_rate", "objective_value"
        ]
        for N in ("100", "1000", "10000", "100000"):
            block = [r for r in rows if r["N"] == N]
            ds = [int(r["d"]) for r in block]
            ws = [float(r["w"]) for r in block]
            assert ds == sorted(ds) and ws == sorted(ws)

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["solve", "--out", str(a)])
        cli.main(["solve", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()

    def test_exhaustive_same(self, tmp_path, reference_raw, capsys):
        reference_raw["sweep_N"] = [100]
        p = write(tmp_path, reference_raw)
        cli.main(["solve", "--config", str(p)])
        pruned = capsys.readouterr().out
        cli.main(["solve", "--config", str(p), "--exhaustive"])
        assert capsys.readouterr().out == pruned

    def test_json_round_trip(self, capsys):
        cli.main(["solve"])
        text = capsys.readouterr().out
        cli.main(["solve", "--format", "json"])
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) == {"config", "columns", "rows"}
        table = cli.Table(tuple(payload["columns"]), [tuple(r) for r in payload["rows"]])
        assert table.to_csv() == text
        assert cli.parse_config(payload["config"]).echo() == payload["config"]

    def test_infeasible_exit(self, tmp_path, capsys):
        raw = {"types": [{"x": 1, "p": 1}], "max_difficulty": 2, "alpha": 0.1, "beta": 1, "u0": 100}
        assert cli.main(["solve", "--config", str(write(tmp_path, raw))]) == 3
        assert "infeasible" in capsys.readouterr().err

    def test_config_error_exit(self, tmp_path, capsys):
        assert cli.main(["solve", "--config", str(write(tmp_path, ""))]) == 2
        assert cli.main(["solve", "--config", str(tmp_path / "missing.json")]) == 2


class TestFormatting:
    @pytest.mark.parametrize(
        "v,out",
        [(1.0, "1.0"), (2.453461014414962, "2.45346"), (3, "3"), (None, ""),
         (1234567.0, "1234570.0"), (1e-5, "1e-05")],
    )
    def test_fmt(self, v, out):
        assert cli.fmt(v) == out


class TestSimulate:
    def test_deterministic_reproducible(self, tmp_path, reference_raw, capsys):
        reference_raw["sim"] = {"horizon": 200, "seed": 3, "arrival_model": "deterministic"}
        p = write(tmp_path, reference_raw)
        cli.main(["simulate", "--config", str(p), "--seeds", "2"])
        first = capsys.readouterr().out
        cli.main(["simulate", "--config", str(p), "--seeds", "2"])
        assert capsys.readouterr().out == first
        rows = rows_of(first)
        assert len(rows) == 6
        for r in rows:
            assert int(r["created"]) == int(r["approved"]) + int(r["unapproved"])

    def test_baseline_scheme(self, tmp_path, reference_raw, capsys):
        reference_raw["sim"] = {"horizon": 100}
        p = write(tmp_path, reference_raw)
        assert cli.main(["simulate", "--config", str(p), "--seeds", "1", "--scheme", "baseline"]) == 0
        assert len(rows_of(capsys.readouterr().out)) == 3

    def test_sweep_command(self, tmp_path, reference_raw, capsys):
        reference_raw["sweep_N"] = [100, 1000]
        reference_raw["sim"] = {"horizon": 100}
        p = write(tmp_path, reference_raw)
        assert cli.main(["sweep", "--config", str(p), "--seeds", "2"]) == 0
        rows = rows_of(capsys.readouterr().out)
        assert [(r["N"], r["type_index"]) for r in rows] == [
            (N, t) for N in ("100", "1000") for t in ("1", "2", "3")
        ]

    def test_bad_seed_count(self, capsys):
        assert cli.main(["simulate", "--seeds", "0"]) == 2


class TestCompare:
    def test_reference(self, capsys):
        cli.main(["compare"])
        rows = rows_of(capsys.readouterr().out)
        for r in rows:
            if r["x"] == "1.0":
                assert r["base_d"] == "4"
            if r["x"] == "10.0":
                assert r["base_d"] == "7"
        top = [r for r in rows if r["N"] == "100000"]
        slopes = [float(r["mech_slope"]) for r in top if r["mech_slope"]]
        assert len(slopes) == 2 and slopes == sorted(slopes)

    def test_single_type(self, tmp_path, capsys):
        raw = {"types": [{"x": 2, "p": 1}], "max_difficulty": 4, "alpha": 0.1, "beta": 80, "u0": 10}
        cli.main(["compare", "--config", str(write(tmp_path, raw))])
        assert len(rows_of(capsys.readouterr().out)) == 4
