#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

import io
import os
import csv
import json
import math
import tempfile
import unittest
import contextlib

import yaml

from litelmg.common import ConfigError
from litelmg.gen import RunConfig, main
from litelmg.hpboson import squeeze_header
from litelmg.dicke import master_header

from test.common import compare_with_reference, compare_csv_with_reference


configs_dir = os.path.join(os.path.dirname(os.path.dirname(os.path.realpath(__file__))), "configs")


def run(argv):
    """main() with stdout captured and argparse/logging noise kept off the test output."""
    stdout = io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(io.StringIO()):
        code = main(argv + ["--log-level", "critical"])
    return code, stdout.getvalue()


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestConfig(unittest.TestCase):
    def test_round_trip(self):
        d = {
            "command": "params",
            "mode":    "oracle",
            "threads": 2,
            "out":     "params.json",
            "device": {
                "n_spins":   1e10,
                "kappa":     0.2,
                "channel_a": {"g_collective": [12, 12], "omega_rabi": [{"abs": 4, "phase": 3.141592653589793}, 1],
                              "delta": [20, 80], "kappa": 0.1},
                "channel_b": {"g_collective": [12, 12], "omega_rabi": [1, 4], "delta": [80, 20], "kappa": 0.1},
            },
            "sweep": {"lambdas": {"start": 0.5, "stop": 2.0, "num": 4}, "values": [0.2, 0.5]},
        }
        config = RunConfig.from_dict(d)
        self.assertEqual(RunConfig.from_dict(yaml.safe_load(config.dump_yaml())), config)
        self.assertEqual(config.section("squeeze").lam, 1.0)
        self.assertIsNone(config.squeeze)

    def test_numeric_strings(self):
        # YAML 1.1 reads 1e12 (no dot) as a string.
        config = RunConfig.from_dict(yaml.safe_load("command: params\ndevice:\n  n_spins: 1e12\n  preset: two-axis\n"))
        self.assertEqual(config.device.n_spins, 1e12)

    def test_units_are_rejected(self):
        with self.assertRaises(ConfigError) as cm:
            RunConfig.from_dict({"command": "params", "device": {"kappa": "12 MHz"}})
        self.assertIn("device.kappa", str(cm.exception))

    def test_unknown_fields(self):
        for d in [{"command": "params", "devices": {}},
                  {"command": "params", "device": {"kapa": 0.1}},
                  {"command": "params", "device": {"channel_a": {"g": [1, 1], "g_collective": [1, 1],
                      "omega_rabi": [1, 1], "delta": [1, 1], "kappa": 0.1}}},
                  {"command": "plot"},
                  {"mode": "paper"},
                  {"command": "squeeze", "solver": "exact"}]:
            with self.subTest(d=d):
                with self.assertRaises(ConfigError):
                    RunConfig.from_dict(d)

    def test_yaml_syntax_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.yml")
            with open(path, "w") as f:
                f.write("command: params\ndevice: [1, 2\n")
            with self.assertRaises(ConfigError) as cm:
                RunConfig.load_yaml(path)
            self.assertIn("line", str(cm.exception))
            with self.assertRaises(ConfigError):
                RunConfig.load_yaml(os.path.join(tmp, "missing.yml"))

    def test_generic_variant_needs_chi(self):
        config = RunConfig.from_dict({"command": "evolve-dicke", "dicke": {"variant": "generic"}})
        with self.assertRaises(ConfigError):
            config.dicke.params()

    def test_non_positive_times(self):
        for section, key in [("squeeze", "t_end"), ("squeeze", "dt"), ("dicke", "t_end"), ("dicke", "dt")]:
            for value in [0, -1.0]:
                with self.subTest(section=section, key=key, value=value):
                    with self.assertRaises(ConfigError) as cm:
                        RunConfig.from_dict({"command": "squeeze", section: {key: value}})
                    self.assertIn("{}.{}".format(section, key), str(cm.exception))
        for section, key in [("squeeze", "n_max"), ("dicke", "samples")]:
            with self.subTest(section=section, key=key):
                with self.assertRaises(ConfigError) as cm:
                    RunConfig.from_dict({"command": "squeeze", section: {key: 0}})
                self.assertIn("{}.{}".format(section, key), str(cm.exception))

    def test_shipped_configs(self):
        names = sorted(n for n in os.listdir(configs_dir) if n.endswith(".yml"))
        self.assertGreater(len(names), 0)
        for name in names:
            with self.subTest(name=name):
                RunConfig.load_yaml(os.path.join(configs_dir, name))


class TestParams(unittest.TestCase):
    def test_two_axis_preset(self):
        code, out = run(["params", "--preset", "two-axis"])
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertAlmostEqual(record["lmg"]["lambda"], 0.0666, delta=1e-4)
        self.assertAlmostEqual(record["lmg"]["chi"], -1.0)
        self.assertEqual(record["variant"], "two-axis")
        self.assertEqual(len(record["regime_warnings"]), 2)

    def test_one_axis_preset(self):
        code, out = run(["params", "--preset", "one-axis"])
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertAlmostEqual(record["lmg"]["chi"], 0.0)
        self.assertEqual(record["variant"], "one-axis")

    def test_spin_number_override(self):
        code, out = run(["params", "--preset", "two-axis", "--n", "1e10"])
        self.assertEqual(code, 0)
        self.assertAlmostEqual(json.loads(out)["lmg"]["lambda"], 0.0045298, delta=1e-6)

    def test_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "params.json")
            code, text = run(["params", "--config", os.path.join(configs_dir, "one_axis_params.yml"), "--out", out])
            self.assertEqual(code, 0)
            with open(out) as f:
                self.assertEqual(f.read(), text)
            with open(out + ".json") as f:
                self.assertEqual(json.load(f)["config"]["command"], "params")

    def test_missing_device(self):
        self.assertEqual(run(["params"])[0], 2)

    def test_missing_preset_value(self):
        with self.assertRaises(SystemExit) as cm:
            run(["params", "--preset"])
        self.assertEqual(cm.exception.code, 2)

    def test_wrong_command_for_config(self):
        self.assertEqual(run(["phase-sweep", "--config", os.path.join(configs_dir, "one_axis_params.yml")])[0], 2)


class TestPhaseSweep(unittest.TestCase):
    def write_config(self, tmp, lambdas):
        path = os.path.join(tmp, "sweep.yml")
        with open(path, "w") as f:
            yaml.safe_dump({"command": "phase-sweep",
                "sweep": {"lambdas": lambdas, "axis": "gamma_b", "values": [0.5]}}, f)
        return path

    def test_csv_and_sidecar(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, [0.5, 1.0])
            out    = os.path.join(tmp, "sweep.csv")
            self.assertEqual(run(["phase-sweep", "--config", config, "--out", out])[0], 0)
            with open(out) as f:
                content = f.read()
            compare_with_reference(self, content, "sweep_normal.csv")
            with open(out + ".json") as f:
                sidecar = json.load(f)
            self.assertEqual(sidecar["config"]["sweep"]["lambdas"], [0.5, 1.0])
            self.assertIn("version", sidecar)

    def test_deterministic(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"start": 0.5, "stop": 3.0, "num": 6})
            outputs = []
            for name in ["a.csv", "b.csv"]:
                out = os.path.join(tmp, name)
                self.assertEqual(run(["phase-sweep", "--config", config, "--out", out, "--threads", "2"])[0], 0)
                with open(out, "rb") as f:
                    outputs.append(f.read())
            self.assertEqual(outputs[0], outputs[1])
            self.assertEqual(len(outputs[0].decode().split("\n")), 6 + 2)

    def test_empty_grid(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, [])
            self.assertEqual(run(["phase-sweep", "--config", config, "--out", os.path.join(tmp, "x.csv")])[0], 2)

    def test_missing_out(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.assertEqual(run(["phase-sweep", "--config", self.write_config(tmp, [1.0])])[0], 2)


class TestSqueeze(unittest.TestCase):
    def test_no_coupling_no_squeezing(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = os.path.join(tmp, "squeeze.yml")
            with open(config, "w") as f:
                yaml.safe_dump({"command": "squeeze", "squeeze": {"lambda": 0, "gamma_a": 0, "gamma_b": 0,
                    "gamma_dep": 0, "t_end": 0.1}}, f)
            out = os.path.join(tmp, "squeeze.csv")
            self.assertEqual(run(["squeeze", "--config", config, "--out", out])[0], 0)
            rows = read_csv(out)
            self.assertEqual(list(rows[0].keys()), squeeze_header)
            self.assertEqual({float(r["xi2"]) for r in rows}, {1.0})
            self.assertEqual({r["solver"] for r in rows}, {"moments"})

    def test_grid(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "grid.csv")
            self.assertEqual(run(["squeeze", "--grid", "--t-end", "0.01", "--out", out])[0], 0)
            rows = read_csv(out)
            self.assertEqual(len(rows), 9*11)
            self.assertEqual(rows[0]["gamma"], "1.0000000000000001e-01")

    def test_grid_needs_moments(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "grid.csv")
            self.assertEqual(run(["squeeze", "--grid", "--solver", "fock", "--out", out])[0], 2)

    def test_companion_dicke(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "squeeze.csv")
            self.assertEqual(run(["squeeze", "--t-end", "0.05", "--companion-dicke", "4", "--out", out])[0], 0)
            rows = read_csv(os.path.join(tmp, "squeeze_dicke.csv"))
            self.assertEqual(list(rows[0].keys()), ["t", "xi2", "xi2_db"])
            self.assertAlmostEqual(float(rows[0]["xi2"]), 1.0, delta=1e-9)

    def test_non_positive_t_end(self):
        for value in ["0", "-0.5", "nan"]:
            with self.subTest(value=value):
                with tempfile.TemporaryDirectory() as tmp:
                    out = os.path.join(tmp, "squeeze.csv")
                    self.assertEqual(run(["squeeze", "--t-end", value, "--out", out])[0], 2)
                    self.assertFalse(os.path.exists(out))

    def test_fock_solver(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "squeeze.csv")
            self.assertEqual(run(["squeeze", "--solver", "fock", "--t-end", "0.05", "--out", out])[0], 0)
            self.assertEqual({r["solver"] for r in read_csv(out)}, {"fock"})


class TestEvolveDicke(unittest.TestCase):
    def write_config(self, tmp, dicke):
        path = os.path.join(tmp, "dicke.yml")
        with open(path, "w") as f:
            yaml.safe_dump({"command": "evolve-dicke", "dicke": dicke}, f)
        return path

    def test_precession(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"n_spins": 2, "theta": 1.5707963267948966, "t_end": 0.5, "samples": 5})
            out    = os.path.join(tmp, "dicke.csv")
            self.assertEqual(run(["evolve-dicke", "--config", config, "--out", out])[0], 0)
            rows = read_csv(out)
            self.assertEqual(list(rows[0].keys()), master_header)
            self.assertEqual(len(rows), 6)
            for row in rows:
                t = float(row["t"])
                jx, jy, jz = float(row["jx"]), float(row["jy"]), float(row["jz"])
                with self.subTest(t=t):
                    # Larmor precession at 2h about z.
                    self.assertAlmostEqual(jx, math.cos(2*t), delta=1e-8)
                    self.assertAlmostEqual(abs(jy), abs(math.sin(2*t)), delta=1e-8)
                    self.assertAlmostEqual(jx**2 + jy**2, 1.0, delta=1e-8)
                    self.assertAlmostEqual(jz, 0.0, delta=1e-8)

    def test_non_positive_step(self):
        for dicke in [{"n_spins": 2, "dt": -1}, {"n_spins": 2, "t_end": 0}, {"n_spins": 2, "samples": 0}]:
            with self.subTest(dicke=dicke):
                with tempfile.TemporaryDirectory() as tmp:
                    config = self.write_config(tmp, dicke)
                    out    = os.path.join(tmp, "dicke.csv")
                    self.assertEqual(run(["evolve-dicke", "--config", config, "--out", out])[0], 2)
                    self.assertFalse(os.path.exists(out))

    def test_no_spins(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"n_spins": 0})
            self.assertEqual(run(["evolve-dicke", "--config", config, "--out", os.path.join(tmp, "x.csv")])[0], 2)


class TestShippedConfigs(unittest.TestCase):
    """Shipped configurations at reduced resolution against committed CSVs."""
    def run_config(self, tmp, name, section, extra=(), **changes):
        with open(os.path.join(configs_dir, name + ".yml")) as f:
            d = yaml.safe_load(f)
        for key, value in changes.items():
            if value is None:
                d[section].pop(key, None)
            else:
                d[section][key] = value
        config = os.path.join(tmp, name + ".yml")
        with open(config, "w") as f:
            yaml.safe_dump(d, f)
        out = os.path.join(tmp, name + ".csv")
        self.assertEqual(run([d["command"], "--config", config, "--out", out] + list(extra))[0], 0)
        with open(out) as f:
            return f.read()

    def test_sweep_gamma_b_low(self):
        lambdas = [0.5, 0.96, 1.0, 1.01, 1.02, 1.03, 1.05, 1.1, 1.5, 2.0, 3.0]
        with tempfile.TemporaryDirectory() as tmp:
            content = self.run_config(tmp, "sweep_gamma_b_low", "sweep", lambdas=lambdas)
        #update_reference(content, "sweep_gamma_b_low.csv")
        compare_csv_with_reference(self, content, "sweep_gamma_b_low.csv")
        rows = {float(r["lambda_over_gamma"]): r for r in csv.DictReader(io.StringIO(content))}
        self.assertEqual(rows[1.01]["branch"], "normal")
        self.assertTrue(math.isnan(float(rows[1.02]["Z"])))
        self.assertEqual(rows[1.03]["branch"], "broken-plus")
        # Z jumps from the pole to just below it across lambda_c.
        self.assertLess(float(rows[1.03]["Z"]), 0.995)

    def test_sweep_dephasing_low(self):
        lambdas = [0.5, 1.0, 1.0625, 1.1, 1.5, 2.0, 5.0, 10.0]
        with tempfile.TemporaryDirectory() as tmp:
            content = self.run_config(tmp, "sweep_dephasing_low", "sweep", lambdas=lambdas)
        compare_csv_with_reference(self, content, "sweep_dephasing_low.csv")

    def test_sweep_dephasing_surface(self):
        with tempfile.TemporaryDirectory() as tmp:
            content = self.run_config(tmp, "sweep_dephasing_surface", "sweep", ["--threads", "1"],
                lambdas=[1.0, 1.0625, 1.07, 10.0], values=[0.0, 0.5, 1.0])
        rows = list(csv.DictReader(io.StringIO(content)))
        self.assertEqual(len(rows), 12)
        # Dephasing leaves the transition point alone.
        self.assertEqual({float(r["lambda_c_over_gamma"]) for r in rows}, {1.0625})
        for r in rows:
            if float(r["lambda_over_gamma"]) <= 1.0625:
                self.assertEqual(r["branch"], "normal")
        far = [r for r in rows if float(r["lambda_over_gamma"]) == 10.0 and float(r["gamma_dep_over_gamma"]) == 1.0]
        self.assertEqual(len(far), 1)
        self.assertAlmostEqual(float(far[0]["X"]), 0.87, delta=0.01)
        self.assertAlmostEqual(float(far[0]["Y"]), 0.24, delta=0.01)

    def test_squeeze_headline(self):
        with tempfile.TemporaryDirectory() as tmp:
            content = self.run_config(tmp, "squeeze_headline", "squeeze", dt=0.01, companion_dicke=None)
        compare_csv_with_reference(self, content, "squeeze_headline.csv")
        rows = list(csv.DictReader(io.StringIO(content)))
        self.assertLessEqual(min(float(r["xi2_db"]) for r in rows), -8.5)
        self.assertTrue(all(float(r["xi2"]) < 1 for r in rows[1:]))

    def test_squeeze_grid_short(self):
        with tempfile.TemporaryDirectory() as tmp:
            content = self.run_config(tmp, "squeeze_grid_short", "squeeze", ["--threads", "1"], t_end=0.8)
        minima = {}
        for r in csv.DictReader(io.StringIO(content)):
            key = (float(r["gamma"]), float(r["gamma_dep"]))
            minima[key] = min(minima.get(key, math.inf), float(r["xi2_db"]))
        self.assertEqual(len(minima), 9)
        gammas, gamma_deps = [0.1, 0.01, 0.001], [0.02, 0.03, 0.04]
        # Squeezing deepens as either rate drops.
        for gamma in gammas:
            depths = [minima[(gamma, d)] for d in gamma_deps]
            self.assertEqual(depths, sorted(depths))
        for gamma_dep in gamma_deps:
            depths = [minima[(g, gamma_dep)] for g in gammas]
            self.assertEqual(depths, sorted(depths, reverse=True))
        self.assertEqual(min(minima.values()), minima[(0.001, 0.02)])
        self.assertLessEqual(minima[(0.001, 0.02)], -8.5)

    def test_squeeze_grid_long(self):
        with tempfile.TemporaryDirectory() as tmp:
            content = self.run_config(tmp, "squeeze_grid_long", "squeeze", ["--threads", "1"], dt=0.01)
        last = {}
        for r in csv.DictReader(io.StringIO(content)):
            last[(float(r["gamma"]), float(r["gamma_dep"]))] = float(r["xi2"])
        self.assertEqual(len(last), 9)
        # Every curve is anti-squeezed by the end.
        for key, xi2 in last.items():
            with self.subTest(curve=key):
                self.assertGreater(xi2, 1.0)

    def test_dicke_two_axis(self):
        with tempfile.TemporaryDirectory() as tmp:
            content = self.run_config(tmp, "dicke_two_axis", "dicke", n_spins=4, samples=8)
        compare_csv_with_reference(self, content, "dicke_two_axis.csv")
        rows = list(csv.DictReader(io.StringIO(content)))
        for r in rows:
            # Casimir j(j + 1) = 6 at N = 4.
            casimir = float(r["jx2"]) + float(r["jy2"]) + float(r["jz2"])
            self.assertAlmostEqual(casimir, 6.0, delta=1e-9)
