"""End-to-end runs of the command-line drivers against temp directories."""

import json
import math

import pytest
from click.testing import CliRunner

from selfsim.cli import ExperimentConfig, build_config, main, system_from_spec
from selfsim.errors import ConfigError
from selfsim.measures import fourier_hat
from selfsim.systems import builtin

AC = 1.0 - math.sqrt(2.0)
R = abs(AC)
W1 = (1 / math.sqrt(2.0) - 1.0, 1 / math.sqrt(2.0))
W2 = (-1 / math.sqrt(2.0), 1 / math.sqrt(2.0) - 1.0)

OCTAGON = [
    ((1 + math.sqrt(2.0)) / 2, 0.5),
    (0.5, (1 + math.sqrt(2.0)) / 2),
    (-0.5, (1 + math.sqrt(2.0)) / 2),
    (-(1 + math.sqrt(2.0)) / 2, 0.5),
    (-(1 + math.sqrt(2.0)) / 2, -0.5),
    (-0.5, -(1 + math.sqrt(2.0)) / 2),
    (0.5, -(1 + math.sqrt(2.0)) / 2),
    ((1 + math.sqrt(2.0)) / 2, -0.5),
]


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [
        [float(cell) for cell in line.split(",")] for line in lines[1:]
    ]
    return header, rows


def inline_silver_spec():
    return {
        "a": AC,
        "maps": [[[{"t": AC}, {"t": 0.0}, {"t": -AC}]]],
        "family": {"kind": "uniform", "lo": AC, "hi": -AC, "mass": 1.0},
    }


class TestAttractor:
    def test_silver_mc_endpoints(self, tmp_path):
        result = run("attractor", "--system", "silver-mc", "--out", tmp_path)
        assert result.exit_code == 0
        for i, (lo, hi) in enumerate((W1, W2), start=1):
            header, rows = read_csv(tmp_path / f"attractor_component_{i}.csv")
            assert header == ["part", "lo", "hi"]
            assert len(rows) == 1
            assert abs(rows[0][1] - lo) < 1e-12
            assert abs(rows[0][2] - hi) < 1e-12

    def test_point_shrinks_to_origin(self, tmp_path):
        result = run("attractor", "--system", "point", "--out", tmp_path)
        assert result.exit_code == 0
        _, rows = read_csv(tmp_path / "attractor_component_1.csv")
        assert len(rows) == 1
        assert abs(rows[0][1]) < 1e-9 and abs(rows[0][2]) < 1e-9

    def test_ammann_beenker_vertices(self, tmp_path):
        result = run(
            "attractor",
            "--system",
            "ammann-beenker",
            "--out",
            tmp_path,
            "--format",
            "json",
        )
        assert result.exit_code == 0
        data = json.loads((tmp_path / "attractor.json").read_text())
        vertices = data["components"][0]["vertices"]
        assert len(vertices) == 8
        for got, want in zip(sorted(map(tuple, vertices)), sorted(OCTAGON)):
            assert math.dist(got, want) < 1e-9

    def test_convergence_log_written(self, tmp_path):
        result = run("attractor", "--system", "silver-max", "--out", tmp_path)
        assert result.exit_code == 0
        _, rows = read_csv(tmp_path / "convergence.csv")
        assert rows[0][0] == 1.0
        assert rows[-1][1] < 1e-12
        deltas = [r[1] for r in rows]
        assert all(b < a for a, b in zip(deltas[1:], deltas[2:]))

    def test_unknown_system(self, tmp_path):
        result = run("attractor", "--system", "nope", "--out", tmp_path)
        assert result.exit_code == 1
        assert "unknown system" in result.stderr

    def test_system_without_attractor(self, tmp_path):
        result = run("attractor", "--system", "ternary-padic", "--out", tmp_path)
        assert result.exit_code == 1

    def test_max_iter_exhausted(self, tmp_path):
        result = run(
            "attractor", "--system", "silver-max", "--out", tmp_path,
            "--max-iter", 2,
        )
        assert result.exit_code == 2


class TestMeasure:
    def test_silver_max_mass_line(self, tmp_path):
        result = run(
            "measure", "--system", "silver-max", "--out", tmp_path,
            "--grid-step", 2e-3,
        )
        assert result.exit_code == 0
        assert "mass 1.000000" in result.stdout
        manifest = json.loads((tmp_path / "measure.json").read_text())
        assert abs(manifest["mass"] - 1.0) < 1e-6

    def test_density_csv_columns(self, tmp_path):
        run("measure", "--system", "silver-max", "--out", tmp_path,
            "--grid-step", 2e-3)
        header, rows = read_csv(tmp_path / "density.csv")
        assert header == ["x", "density"]
        h = rows[1][0] - rows[0][0]
        total = sum(r[1] for r in rows) * h
        assert abs(total - 1.0) < 1e-6

    def test_mc_max_masses(self, tmp_path):
        result = run(
            "measure", "--system", "silver-mc-max", "--out", tmp_path,
            "--grid-step", 2e-3,
        )
        assert result.exit_code == 0
        manifest = json.loads((tmp_path / "measure.json").read_text())
        assert manifest["n"] == 2
        assert abs(manifest["masses"][0] - 1.0) < 1e-6
        assert abs(manifest["masses"][1] - R) < 1e-6
        for name in manifest["files"]:
            assert (tmp_path / name).exists()

    def test_mc_min_has_no_density(self, tmp_path):
        result = run("measure", "--system", "silver-mc-min", "--out", tmp_path)
        assert result.exit_code == 1
        assert "-max counterpart" in result.stderr

    def test_non_convergence_exit(self, tmp_path):
        result = run(
            "measure", "--system", "silver-max", "--out", tmp_path,
            "--grid-step", 2e-3, "--max-iter", 2,
        )
        assert result.exit_code == 2

    def test_json_grid_roundtrip(self, tmp_path):
        run("measure", "--system", "silver-max", "--out", tmp_path,
            "--grid-step", 2e-3, "--format", "json")
        data = json.loads((tmp_path / "density.json").read_text())
        total = sum(data["weights"]) * data["step"]
        assert abs(total - data["mass"]) < 1e-12
        assert data["counts"] == [len(data["weights"])]


class TestFourier:
    def test_rows_match_library(self, tmp_path):
        result = run(
            "fourier", "--system", "silver-max", "--out", tmp_path,
            "--terms", 30,
        )
        assert result.exit_code == 0
        header, rows = read_csv(tmp_path / "fourier.csv")
        assert header == ["k", "re", "im"]
        assert rows[0] == [0.0, 1.0, 0.0]
        b = builtin("silver-max")
        for k, re, im in rows[::100]:
            want = fourier_hat(b.family, AC, k, 30)
            assert abs(complex(re, im) - want) < 1e-12

    def test_needs_one_dimensional_family(self, tmp_path):
        assert run("fourier", "--system", "silver", "--out", tmp_path).exit_code == 1
        assert (
            run("fourier", "--system", "ammann-beenker", "--out", tmp_path).exit_code
            == 1
        )


class TestWeyl:
    def test_errors_decrease_along_radii(self, tmp_path):
        result = run(
            "weyl", "--system", "silver", "--radii", "100,1000,5000",
            "--out", tmp_path,
        )
        assert result.exit_code == 0
        header, rows = read_csv(tmp_path / "weyl.csv")
        assert header == ["radius", "center", "average", "limit", "abs_error"]
        errors = [r[4] for r in rows]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 1e-3

    def test_single_radius_flag(self, tmp_path):
        result = run(
            "weyl", "--system", "silver", "--radius", 200, "--out", tmp_path
        )
        assert result.exit_code == 0
        _, rows = read_csv(tmp_path / "weyl.csv")
        assert len(rows) == 1 and rows[0][0] == 200.0

    def test_planar_center_columns(self, tmp_path):
        result = run(
            "weyl", "--system", "ammann-beenker", "--radii", "8,12",
            "--out", tmp_path,
        )
        assert result.exit_code == 0
        header, rows = read_csv(tmp_path / "weyl.csv")
        assert header == ["radius", "center_x", "center_y", "average", "limit", "abs_error"]
        assert all(abs(r[3] - r[4]) == r[5] for r in rows)

    def test_needs_a_scheme(self, tmp_path):
        assert run("weyl", "--system", "silver-max", "--out", tmp_path).exit_code == 1

    def test_bad_radii_text(self, tmp_path):
        result = run(
            "weyl", "--system", "silver", "--radii", "10,abc", "--out", tmp_path
        )
        assert result.exit_code == 1


class TestPadic:
    def test_default_depth_passes(self, tmp_path):
        result = run("padic", "--K", 5, "--out", tmp_path)
        assert result.exit_code == 0
        assert "PASS" in result.stdout
        header, rows = read_csv(tmp_path / "padic_component_1.csv")
        assert header == ["residue", "weight_num", "weight_den"]
        assert len(rows) == 3**5

    def test_json_weights_exact(self, tmp_path):
        result = run("padic", "--K", 4, "--format", "json", "--out", tmp_path)
        assert result.exit_code == 0
        data = json.loads((tmp_path / "padic.json").read_text())
        comp = data["components"][0]
        assert comp["mass"] == [1, 1]
        assert comp["weights"][1] == [9, 1]
        assert comp["weights"][0] == [0, 1]

    def test_depth_too_small(self, tmp_path):
        assert run("padic", "--K", 3, "--out", tmp_path).exit_code == 1

    def test_iteration_budget_exhausted(self, tmp_path):
        result = run("padic", "--K", 5, "--max-iter", 1, "--out", tmp_path)
        assert result.exit_code == 2


class TestConfigHandling:
    def test_file_merges_under_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"system": "silver-max", "grid_step": 2e-3}))
        out1 = tmp_path / "a"
        result = run("measure", "--config", cfg, "--out", out1)
        assert result.exit_code == 0
        data = json.loads((out1 / "measure.json").read_text())
        assert abs(data["grid_step"] - 2e-3) < 1e-12
        out2 = tmp_path / "b"
        result = run(
            "measure", "--config", cfg, "--out", out2, "--grid-step", 4e-3
        )
        assert result.exit_code == 0
        data = json.loads((out2 / "measure.json").read_text())
        assert abs(data["grid_step"] - 4e-3) < 1e-12

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"system": "silver-max", "stepsize": 1}))
        result = run("measure", "--config", cfg, "--out", tmp_path)
        assert result.exit_code == 1
        assert "stepsize" in result.stderr

    def test_unreadable_and_malformed_files(self, tmp_path):
        assert (
            run("measure", "--config", tmp_path / "absent.json").exit_code == 1
        )
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run("measure", "--config", bad).exit_code == 1
        arr = tmp_path / "arr.json"
        arr.write_text("[1, 2]")
        assert run("measure", "--config", arr).exit_code == 1

    def test_validation_happens_before_work(self, tmp_path):
        result = run(
            "measure", "--system", "silver-max", "--out", tmp_path,
            "--grid-step", -1,
        )
        assert result.exit_code == 1
        assert not (tmp_path / "density.csv").exists()

    def test_bad_format_value(self, tmp_path):
        result = run(
            "measure", "--system", "silver-max", "--out", tmp_path,
            "--format", "yaml",
        )
        assert result.exit_code == 1

    def test_no_system_given(self, tmp_path):
        result = run("measure", "--out", tmp_path)
        assert result.exit_code == 1
        assert "silver-max" in result.stderr  # the hint lists the builtins

    def test_config_defaults(self):
        cfg = build_config(None)
        assert cfg.fmt == "csv" and cfg.out == "."
        with pytest.raises(ConfigError):
            ExperimentConfig(fmt="xml")
        with pytest.raises(ConfigError):
            ExperimentConfig(tol=0.0)
        with pytest.raises(ConfigError):
            ExperimentConfig(k_min=2.0, k_max=1.0)


class TestInlineSystems:
    def test_attractor_from_inline_maps(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"system": inline_silver_spec()}))
        result = run("attractor", "--config", cfg, "--out", tmp_path)
        assert result.exit_code == 0
        _, rows = read_csv(tmp_path / "attractor_component_1.csv")
        assert abs(rows[0][1] - W2[0]) < 1e-9
        assert abs(rows[0][2] - W1[1]) < 1e-9

    def test_measure_from_inline_family(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps({"system": inline_silver_spec(), "grid_step": 2e-3})
        )
        result = run("measure", "--config", cfg, "--out", tmp_path)
        assert result.exit_code == 0
        assert "mass 1.000000" in result.stdout

    def test_inline_mc_with_mass_check(self, tmp_path):
        spec = {
            "a": AC,
            "sigma": [
                [
                    {"kind": "uniform", "lo": 0.0, "hi": 2.0 + AC, "mass": 2 * R},
                    {"kind": "uniform", "lo": AC, "hi": -AC, "mass": R},
                ],
                [{"kind": "point", "location": AC, "mass": R}, None],
            ],
            "m": [1.0, R],
            "s": [[2 * R, R], [R, 0.0]],
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"system": spec, "grid_step": 2e-3}))
        result = run("measure", "--config", cfg, "--out", tmp_path)
        assert result.exit_code == 0
        manifest = json.loads((tmp_path / "measure.json").read_text())
        assert abs(manifest["masses"][0] - 1.0) < 1e-6

    def test_inline_rejections(self):
        with pytest.raises(ConfigError):
            system_from_spec({"maps": [[[{"t": 0.0}]]]})  # no contraction
        with pytest.raises(ConfigError):
            system_from_spec({"a": 0.5, "family": {"kind": "gaussian"}})
        with pytest.raises(ConfigError):
            system_from_spec({"a": 0.5, "family": {"kind": "uniform", "lo": 0.0}})
        bad_s = {
            "a": AC,
            "sigma": [[{"kind": "uniform", "lo": AC, "hi": -AC, "mass": 1.0}]],
            "s": [[0.9]],
        }
        with pytest.raises(ConfigError):
            system_from_spec(bad_s)

    def test_expanding_inline_maps_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"system": {"a": 1.5, "maps": [[[{"t": 0.0}]]]}}))
        result = run("attractor", "--config", cfg, "--out", tmp_path)
        assert result.exit_code == 1


class TestDeterminism:
    def test_attractor_bytes_identical(self, tmp_path):
        out1, out2 = tmp_path / "one", tmp_path / "two"
        for out in (out1, out2):
            assert run("attractor", "--system", "silver-mc", "--out", out).exit_code == 0
        for name in ("attractor_component_1.csv", "attractor_component_2.csv", "convergence.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_measure_bytes_identical(self, tmp_path):
        out1, out2 = tmp_path / "one", tmp_path / "two"
        for out in (out1, out2):
            args = ("measure", "--system", "silver-max", "--out", out,
                    "--grid-step", 2e-3, "--format", "json")
            assert run(*args).exit_code == 0
        assert (out1 / "density.json").read_bytes() == (out2 / "density.json").read_bytes()
