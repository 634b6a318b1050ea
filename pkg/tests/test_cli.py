import csv
import io
import json
import math
from pathlib import Path

import pytest

from ircoop import cli
from ircoop.energy import EnergyQuery, energy_saving_kappa, optimize_tau0
from ircoop.outage import outage_m1
from ircoop.protocol import db_to_linear, linear_to_db
from ircoop.spectra import load_spectrum, random_binary_spectrum, save_spectrum, simple_threshold, spectrum_to_dict

GOLDEN = Path(__file__).parent / "golden"
GOLDEN_ARGS = ["sweep", "--scenario", str(GOLDEN / "m3_lambda.json"), "--var", "snr_lambda_db",
               "--start", "0", "--stop", "12", "--steps", "4",
               "--outputs", "bound,asymptotic,simulation,energy", "--frames", "10000", "--samples", "10000"]


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def scenario(tmp_path, m=1, **extra):
    obj = {"schema_version": 1, "geometry": {"mode": "snr", "rho_db": 5.0, "lambda_db": 0.0},
           "coop": {"m": m}, "code": {"c_star": 0.17}}
    obj.update(extra)
    return write_json(tmp_path / "scenario.json", obj)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestThreshold:
    def test_random_binary_file(self, tmp_path, capsys):
        path = tmp_path / "rb.json"
        save_spectrum(random_binary_spectrum(0.5, 1024), path)
        code, out, _ = run(["threshold", "--spectrum", str(path), "--tau", "0.9", "0.3"], capsys)
        th = simple_threshold(load_spectrum(path))
        assert code == 0
        assert f"{th.c0:.6g}" in out and f"{th.c_star:.6g}" in out
        assert "not self-decodable" in out

    def test_malformed_file(self, tmp_path, capsys):
        obj = spectrum_to_dict(random_binary_spectrum(0.5, 32))
        obj["samples"] = obj["samples"][::-1]
        code, _, err = run(["threshold", "--spectrum", write_json(tmp_path / "s.json", obj)], capsys)
        assert code == 2 and err.startswith("error:")

    def test_missing_file(self, tmp_path, capsys):
        assert run(["threshold", "--spectrum", str(tmp_path / "nope.json")], capsys)[0] == 2

    def test_rate_bound(self, tmp_path, capsys):
        obj = spectrum_to_dict(random_binary_spectrum(0.5, 32))
        obj["samples"] = [[d, r - 0.5] for d, r in obj["samples"]]
        assert run(["threshold", "--spectrum", write_json(tmp_path / "s.json", obj)], capsys)[0] == 3


class TestSweep:
    def test_golden_csv(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert cli.main(GOLDEN_ARGS + ["--out", str(out)]) == 0
        assert out.read_bytes() == (GOLDEN / "m3_lambda.csv").read_bytes()

    def test_golden_csv_with_workers(self, capsys):
        code, out, _ = run(GOLDEN_ARGS + ["--workers", "3"], capsys)
        assert code == 0
        assert out.encode() == (GOLDEN / "m3_lambda.csv").read_bytes()

    def test_single_node_bound(self, tmp_path, capsys):
        code, out, _ = run(["sweep", "--scenario", scenario(tmp_path), "--var", "snr_lambda_db",
                            "--start", "0", "--stop", "20", "--steps", "5"], capsys)
        assert code == 0
        for row in rows(out):
            assert row["kind"] == "bound"
            assert float(row["value"]) == pytest.approx(outage_m1(0.17, db_to_linear(float(row["point"]))).value,
                                                        rel=1e-13)

    def test_db_and_linear_agree(self, tmp_path, capsys):
        args = ["sweep", "--scenario", scenario(tmp_path, m=3, energy={"epsilon": 0.01}),
                "--var", "energy_db", "--start", "-3", "--stop", "17", "--steps", "6",
                "--outputs", "bound,energy", "--samples", "10000"]
        db_rows = rows(run(args + ["--db"], capsys)[1])
        lin_rows = rows(run(args + ["--linear"], capsys)[1])
        assert len(db_rows) == len(lin_rows) == 12
        for a, b in zip(db_rows, lin_rows):
            assert float(linear_to_db(float(b["point"]))) == pytest.approx(float(a["point"]), rel=1e-12, abs=1e-12)
            if a["kind"] == "energy":
                assert float(linear_to_db(float(b["value"]))) == pytest.approx(float(a["value"]), rel=1e-12)
            else:
                assert a["value"] == b["value"]

    def test_kappa_energy_column(self, tmp_path, capsys):
        path = write_json(tmp_path / "k.json", {
            "schema_version": 1,
            "geometry": {"mode": "profile", "r": 0.5, "d": 0.5, "D": 1.0, "path_loss": 3, "symbol_energy": 1.0},
            "coop": {"m": 2}, "code": {"c_star": 0.17}, "energy": {"epsilon": 0.01}})
        code, out, _ = run(["sweep", "--scenario", path, "--var", "kappa", "--start", "0.1", "--stop", "0.9",
                            "--steps", "5", "--outputs", "energy", "--linear"], capsys)
        assert code == 0
        for row in rows(out):
            _, u = optimize_tau0(EnergyQuery(0.01, 2, 0.17), kappa=float(row["point"]))
            assert float(row["value"]) == pytest.approx(u, rel=1e-12)
            assert row["flags"] == "optimized_tau0"

    def test_kappa_energy_fixed_tau0(self, tmp_path, capsys):
        path = write_json(tmp_path / "k.json", {
            "schema_version": 1,
            "geometry": {"mode": "profile", "r": 0.5, "d": 0.5, "D": 1.0, "path_loss": 3, "symbol_energy": 1.0},
            "coop": {"m": 2}, "code": {"c_star": 0.17}, "energy": {"epsilon": 0.01, "tau0": 0.5}})
        out = run(["sweep", "--scenario", path, "--var", "kappa", "--start", "0.1", "--stop", "0.9",
                   "--steps", "3", "--outputs", "energy", "--linear"], capsys)[1]
        for row in rows(out):
            q = EnergyQuery(0.01, 2, 0.17, kappa=float(row["point"]))
            assert float(row["value"]) == pytest.approx(energy_saving_kappa(q, 0.5), rel=1e-12)

    def test_dominance_row_wise(self, tmp_path, capsys):
        code, out, _ = run(["sweep", "--scenario", scenario(tmp_path, m=5, seed=3), "--var", "snr_lambda_db",
                            "--start", "0", "--stop", "8", "--steps", "3", "--outputs", "bound,simulation",
                            "--frames", "50000", "--samples", "20000"], capsys)
        assert code == 0
        table = rows(out)
        for bound, sim in zip(table[::2], table[1::2]):
            joint = math.hypot(float(bound["half_width"]), float(sim["half_width"]))
            assert float(sim["value"]) <= float(bound["value"]) + joint

    def test_m_sweep(self, tmp_path, capsys):
        code, out, _ = run(["sweep", "--scenario", scenario(tmp_path, m=2), "--var", "m", "--start", "1",
                            "--stop", "4", "--steps", "4", "--samples", "10000"], capsys)
        assert code == 0
        values = [float(r["value"]) for r in rows(out)]
        assert values == sorted(values, reverse=True)

    def test_simulation_needs_seed(self, tmp_path, capsys):
        args = ["sweep", "--scenario", scenario(tmp_path, m=2), "--var", "snr_lambda_db", "--start", "0",
                "--stop", "4", "--steps", "2", "--outputs", "simulation", "--frames", "10000"]
        assert run(args, capsys)[0] == 2
        assert run(args + ["--seed", "5"], capsys)[0] == 0

    @pytest.mark.parametrize("extra", [
        ["--steps", "1"],
        ["--outputs", "bound,plot"],
        ["--seed", "-1"],
        ["--var", "distance"],
    ])
    def test_bad_arguments(self, tmp_path, capsys, extra):
        args = ["sweep", "--scenario", scenario(tmp_path, m=2), "--var", "snr_lambda_db",
                "--start", "0", "--stop", "4", "--steps", "2"]
        assert run(args + extra, capsys)[0] == 2

    def test_unknown_scenario_field(self, tmp_path, capsys):
        path = scenario(tmp_path, m=2, colour="blue")
        args = ["sweep", "--scenario", path, "--var", "snr_lambda_db", "--start", "0", "--stop", "4", "--steps", "2"]
        assert run(args, capsys)[0] == 2


class TestReproduce:
    @pytest.mark.parametrize("recipe", ["table2", "example2"])
    def test_recipes_pass(self, recipe, capsys):
        code, out, _ = run(["reproduce", recipe], capsys)
        assert code == 0
        assert "FAIL" not in out and out.count("PASS") >= 2

    def test_m2_bound(self, capsys):
        code, out, _ = run(["reproduce", "m2_bound", "--samples", "200000", "--seed", "1"], capsys)
        assert code == 0 and out.count("PASS") == 4


class TestGenspectrum:
    def test_writes_valid_file(self, tmp_path, capsys):
        path = tmp_path / "g.json"
        code, out, _ = run(["genspectrum", "--rate", "0.25", "--samples", "512", "--out", str(path)], capsys)
        assert code == 0 and "512 samples" in out
        spec = load_spectrum(path)
        assert spec.rate == 0.25 and len(spec.deltas) == 512

    def test_bad_rate(self, tmp_path, capsys):
        assert run(["genspectrum", "--rate", "1.5", "--out", str(tmp_path / "g.json")], capsys)[0] == 2


def test_version(capsys):
    assert run(["--version"], capsys)[0] == 0
