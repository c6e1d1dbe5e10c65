import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oamnet import cli
from oamnet import config as cfg

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def write(tmp_path):
    def _write(text, name="net.yaml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestConfig:
    @pytest.mark.parametrize("text,value", [
        ("2*pi/15", 2 * math.pi / 15), ("-pi", -math.pi), ("0.5", 0.5), ("(1+2)**2", 9.0),
    ])
    def test_number_expressions(self, text, value):
        assert cfg.number(text) == pytest.approx(value)

    @pytest.mark.parametrize("bad", ["__import__('os')", "pi(", "e", True, [1]])
    def test_number_rejects(self, bad):
        with pytest.raises(cfg.ConfigError):
            cfg.number(bad)

    @given(st.floats(-1e6, 1e6))
    def test_number_passthrough(self, x):
        assert cfg.number(x) == x

    def test_parse_full(self):
        conf = cfg.parse({
            "architecture": "p2mp-multigroup", "dims": {"d_s": 2, "d_r": 4}, "seed": 3,
            "noise": {"mux": ["pi/30", 0]},
            "sweep": {"magnitudes": [0, "2*pi/15"]},
            "protocol": {"type": "bb84", "sender": 1, "receiver": [1, 0]},
        })
        assert conf.seed == 3
        assert conf.spec.noise["mux"] == pytest.approx((math.pi / 30, 0.0))
        assert conf.sweep["magnitudes"][1] == pytest.approx(2 * math.pi / 15)
        assert conf.protocol["receiver"] == (1, 0)

    @pytest.mark.parametrize("data", [
        None,
        {"architecture": "point-to-point"},
        {"architecture": "point-to-point", "dims": {"d": 3}, "typo": 1},
        {"architecture": "point-to-point", "dims": {"d": 3, "x": 1}},
        {"architecture": "point-to-point", "dims": {"d": "3"}},
        {"architecture": "point-to-point", "dims": {"d": 3}, "seed": -1},
        {"architecture": "point-to-point", "dims": {"d": 3}, "sweep": {"magnitudes": []}},
        {"architecture": "point-to-point", "dims": {"d": 3}, "sweep": {"magnitudes": [0], "grid": 1}},
        {"architecture": "point-to-point", "dims": {"d": 3}, "protocol": {"type": "e91"}},
        {"architecture": "point-to-point", "dims": {"d": 3}, "protocol": {"type": "bb84", "pair": [0, 1]}},
        {"architecture": "p2mp-coprime", "dims": {"d_s": 4, "d_r": 6}},
    ])
    def test_parse_rejects(self, data):
        with pytest.raises(cfg.ConfigError):
            cfg.parse(data)

    @pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
    def test_shipped_configs_load(self, path):
        cfg.load(path)


class TestPlan:
    def test_table_i(self, capsys, write, tmp_path):
        path = write("architecture: fully-connected\ndims: {n: 4}\n")
        code, out, _ = run(capsys, "plan", "--config", path, "--out", str(tmp_path / "o"))
        assert code == 0
        assert "B  |3>  |0>  |1>  |2>" in out
        assert "resources (fully-connected): 1x U_4" in out
        assert (tmp_path / "o" / "plan.csv").read_text().startswith("# oamnet-csv v1 assignment")

    def test_table_iii(self, capsys, write, tmp_path):
        path = write("architecture: p2mp-general\ndims: {d_s: 2, d_r: 3}\n")
        code, out, _ = run(capsys, "plan", "--config", path, "--out", str(tmp_path / "o"))
        assert code == 0
        assert "1  |1>  |3>  |5>" in out
        assert "signed_label" in (tmp_path / "o" / "plan.csv").read_text()

    def test_coprimality_error(self, capsys, write, tmp_path):
        path = write("architecture: p2mp-coprime\ndims: {d_s: 4, d_r: 6}\n")
        code, _, err = run(capsys, "plan", "--config", path, "--out", str(tmp_path / "o"))
        assert code == 2 and "not coprime" in err

    def test_passive_has_no_table(self, capsys, tmp_path):
        code, out, _ = run(capsys, "plan", "--config", str(CONFIGS / "ent-passive.yaml"),
                           "--out", str(tmp_path))
        assert code == 0 and "3x U_3; 6x SPP(i)" in out


class TestSimulate:
    def test_fully_connected_five(self, capsys, write, tmp_path):
        path = write("architecture: fully-connected\ndims: {n: 5}\nsimulate: {include_self: true}\n")
        code, out, _ = run(capsys, "simulate", "--config", path, "--out", str(tmp_path / "o"))
        assert code == 0
        assert out.count("1.000000") == 25 + 1
        rows = (tmp_path / "o" / "routing.csv").read_text().splitlines()
        assert len(rows) == 2 + 25

    def test_noisy_warns(self, capsys, tmp_path):
        code, out, err = run(capsys, "simulate", "--config", str(CONFIGS / "noisy-sorter.yaml"),
                             "--out", str(tmp_path))
        assert code == 0
        assert "warning" in err
        assert "min probability 0.961575758952" in out

    def test_noisy_below_threshold(self, capsys, write, tmp_path):
        path = write("architecture: point-to-point\ndims: {d: 3}\n"
                     "noise: {demux: [0, 2*pi/15, -2*pi/15]}\n")
        code, _, _ = run(capsys, "simulate", "--config", path, "--out", str(tmp_path / "o"))
        assert code == 1

    def test_malformed(self, capsys, write):
        path = write("architecture: [point-to-point\n")
        code, _, err = run(capsys, "simulate", "--config", path)
        assert code == 2 and "malformed" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "--config", str(tmp_path / "nope.yaml"))
        assert code == 2


class TestSweep:
    def test_zero_grid(self, capsys, write, tmp_path):
        path = write("architecture: point-to-point\ndims: {d: 3}\nsweep: {magnitudes: [0], samples: 3}\n")
        code, out, _ = run(capsys, "sweep", "--config", path, "--out", str(tmp_path / "o"))
        assert code == 0
        assert out.splitlines()[-1] == "0,1.000000000000,1.000000000000,3"

    def test_claim_row(self, capsys, tmp_path):
        code, out, _ = run(capsys, "sweep", "--config", str(CONFIGS / "noisy-sorter.yaml"),
                           "--out", str(tmp_path))
        assert code == 0
        mag, mean, _, _ = out.splitlines()[-1].split(",")
        assert float(mag) == pytest.approx(2 * math.pi / 15)
        assert float(mean) >= 0.96

    def test_byte_identical(self, capsys, write, tmp_path):
        path = write("architecture: p2mp-general\ndims: {d_s: 2, d_r: 2}\n"
                     "sweep: {magnitudes: [0.1, 0.2], samples: 10}\n")
        for name in ("a", "b"):
            assert run(capsys, "sweep", "--config", path, "--out", str(tmp_path / name), "--seed", "4")[0] == 0
        assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()

    def test_missing_section(self, capsys, write):
        code, _, err = run(capsys, "sweep", "--config", write("architecture: point-to-point\ndims: {d: 2}\n"))
        assert code == 2 and "sweep" in err


class TestProtocol:
    def test_bb84(self, capsys, tmp_path):
        code, out, _ = run(capsys, "protocol", "--config", str(CONFIGS / "point-to-point.yaml"),
                           "--out", str(tmp_path))
        assert code == 0 and "QBER=0.0000" in out
        assert (tmp_path / "key.csv").exists()

    def test_active(self, capsys, tmp_path):
        code, out, _ = run(capsys, "protocol", "--config", str(CONFIGS / "ent-active.yaml"),
                           "--out", str(tmp_path))
        assert code == 0
        assert "Bell fidelity 1.0, ports (0,2)" in out

    def test_passive_histogram(self, capsys, tmp_path):
        code, out, _ = run(capsys, "protocol", "--config", str(CONFIGS / "ent-passive.yaml"),
                           "--out", str(tmp_path))
        assert code == 0
        rows = [l for l in out.splitlines() if l.strip().endswith("0.111111111111")]
        assert len(rows) == 9
        body = (tmp_path / "coincidences.csv").read_text().splitlines()
        assert len(body) == 2 + 9

    def test_mismatch(self, capsys, write):
        path = write("architecture: point-to-point\ndims: {d: 3}\nprotocol: {type: bbm92}\n")
        code, _, err = run(capsys, "protocol", "--config", path)
        assert code == 2 and "entanglement" in err

    def test_bad_pair(self, capsys, write, tmp_path):
        path = write("architecture: p2mp-general\ndims: {d_s: 2, d_r: 3}\n"
                     "protocol: {type: bb84, sender: 0, receiver: 7}\n")
        code, _, _ = run(capsys, "protocol", "--config", path, "--out", str(tmp_path / "o"))
        assert code == 2


class TestOutputs:
    def test_no_overwrite_without_force(self, capsys, tmp_path):
        args = ["plan", "--config", str(CONFIGS / "fully-connected.yaml"), "--out", str(tmp_path)]
        assert run(capsys, *args)[0] == 0
        code, _, err = run(capsys, *args)
        assert code == 2 and "--force" in err
        assert run(capsys, *args, "--force")[0] == 0

    def test_seed_determinism(self, capsys, tmp_path):
        args = ["protocol", "--config", str(CONFIGS / "p2mp-general.yaml"), "--seed", "5"]
        run(capsys, *args, "--out", str(tmp_path / "a"))
        run(capsys, *args, "--out", str(tmp_path / "b"))
        assert (tmp_path / "a" / "key.csv").read_bytes() == (tmp_path / "b" / "key.csv").read_bytes()

    def test_usage_error(self, capsys):
        assert cli.main(["launch", "--config", "x"]) == 2
        assert cli.main(["plan"]) == 2
