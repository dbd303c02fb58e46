"""End-to-end checks of the command line: outputs, schemas, exit codes, determinism."""
import csv
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

BIN = Path(sys.argv.pop(1)).resolve()
ROOT = Path(__file__).resolve().parent.parent
SCHEMAS = ROOT / "schemas"

SHORT = {
    "seed": 3,
    "gas": {"gamma": 2.0, "mu": 0.02, "lambda": 0.0},
    "grid": {"dim": 1, "n": [64], "extent": [1.0]},
    "potential": {"name": "cosine", "A": 0.5, "k": 1},
    "mass": 1.0,
    "initial": {"name": "perturbed_steady", "amplitude": 0.05, "mode": 1},
    "solver": {"t_end": 10.0, "cfl": 0.8, "record_dt": 0.05},
    "lyapunov": {"entropy_samples": 2000},
    "verify": {"samples": 500, "trials": 10},
    "sweep": {"gamma": [2.0], "amplitude": [0.05, 0.025], "n": [32, 64]},
}


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(*args, env=None):
    return subprocess.run([str(BIN), *map(str, args)], capture_output=True, text=True, env=env)


class Cli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def config(self, body, name="run.json"):
        p = self.dir / name
        p.write_text(body if isinstance(body, str) else json.dumps(body))
        return p

    def ok(self, *args, env=None):
        r = run(*args, env=env)
        self.assertEqual(r.returncode, 0, r.stderr)
        return r

    def check_manifest(self, out, command):
        m = json.loads((out / "manifest.json").read_text())
        jsonschema.validate(m, schema("manifest"))
        self.assertEqual(m["command"], command)
        for f in m["outputs"]:
            self.assertTrue((out / f).exists(), f)
        return m

    def test_steady_linear(self):
        out = self.dir / "s"
        self.ok("steady", "--config", ROOT / "configs/steady_linear.json", "--out", out)
        rep = json.loads((out / "steady.json").read_text())
        jsonschema.validate(rep, schema("steady_report"))
        self.assertAlmostEqual(rep["k0"], -1.5, delta=1e-10)
        self.assertEqual(rep["regime"], "UniquePositive")
        self.assertLessEqual(rep["residual"], 1e-10)
        self.assertAlmostEqual(rep["m_threshold"], 0.25, delta=1e-10)
        self.check_manifest(out, "steady")

    def test_simulate_fit_and_determinism(self):
        cfg = self.config(SHORT)
        a, b = self.dir / "a", self.dir / "b"
        self.ok("simulate", "--config", cfg, "--out", a)
        self.ok("simulate", "--config", cfg, "--out", b)
        for f in ("trajectory.csv", "simulate.json", "final.bin", "manifest.json"):
            self.assertEqual((a / f).read_bytes(), (b / f).read_bytes(), f)
        rep = json.loads((a / "simulate.json").read_text())
        jsonschema.validate(rep, schema("simulate_report"))
        self.assertTrue(rep["conservation"]["energy_inequality_pass"])
        self.assertTrue(rep["equivalence"]["sandwich_pass"])
        with open(a / "trajectory.csv") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(rows[0], "t,mass,kinetic,potential_gap,E_rel,E_paper,dissipation_cum,V_delta,W_delta".split(","))
        self.assertEqual(len(rows) - 1, rep["run"]["samples"])

        out = self.dir / "f"
        self.ok("fit", "--trajectory", a / "trajectory.csv", "--out", out)
        fit = json.loads((out / "fit.json").read_text())
        jsonschema.validate(fit, schema("fit_report"))
        self.assertAlmostEqual(fit["rate"], rep["fit"]["rate"], places=12)
        self.assertTrue(fit["sandwich_pass"])
        self.check_manifest(out, "fit")

    def test_snapshots(self):
        cfg = dict(SHORT)
        cfg["solver"] = dict(SHORT["solver"], t_end=0.2, snapshot_every=2)
        out = self.dir / "snap"
        self.ok("simulate", "--config", self.config(cfg), "--out", out)
        snaps = sorted((out / "snapshots").iterdir())
        self.assertEqual([p.name for p in snaps], ["sample_000000.bin", "sample_000002.bin", "sample_000004.bin"])
        header = snaps[0].read_bytes().split(b"\n", 1)[0]
        self.assertEqual(json.loads(header)["fields"], ["rho", "u0"])

    def test_verify(self):
        out = self.dir / "v"
        self.ok("verify", "--config", self.config(SHORT), "--out", out, "--seed", 11)
        rep = json.loads((out / "verify.json").read_text())
        jsonschema.validate(rep, schema("verify_report"))
        self.assertEqual(rep["seed"], 11)
        self.assertTrue(rep["pass"])
        with open(out / "commutator.csv") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(rows[0], ["eps", "eps_cells", "norm_2", "norm_q"])
        self.assertEqual(len(rows), 4)
        self.assertEqual(self.check_manifest(out, "verify")["seed"], 11)

    def test_sweep(self):
        out = self.dir / "w"
        cfg = dict(SHORT, lyapunov={"enabled": False})
        self.ok("sweep", "--config", self.config(cfg), "--out", out)
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        self.assertEqual(len(rows), 4)
        for r in rows:
            self.assertEqual(r["status"], "ok")
            self.assertGreater(float(r["rate"]), 0)

    def test_malformed_json(self):
        cfg = self.config('{\n  "gas": {"gamma": 2.0,,}\n}\n')
        r = run("steady", "--config", cfg, "--out", self.dir / "x")
        self.assertEqual(r.returncode, 2)
        err = json.loads(r.stderr.strip().splitlines()[-1])
        jsonschema.validate(err, schema("error"))
        self.assertEqual(err["location"]["line"], 2)

    def test_schema_violations(self):
        for body in (dict(SHORT, bogus=1), dict(SHORT, gas={"gamma": 0.5}), dict(SHORT, solver={"cfl": 1.5}),
                     dict(SHORT, potential={"name": "nope"}), dict(SHORT, mass=-1)):
            r = run("simulate", "--config", self.config(body), "--out", self.dir / "x")
            self.assertEqual(r.returncode, 2, body)
            err = json.loads(r.stderr.strip().splitlines()[-1])
            jsonschema.validate(err, schema("error"))
            self.assertEqual(err["status"], "config")

    def test_fit_refused(self):
        p = self.dir / "short.csv"
        lines = ["t,E_rel"] + [f"{0.1 * k},{2.0 ** (-0.1 * k)}" for k in range(20)]
        p.write_text("\n".join(lines) + "\n")
        r = run("fit", "--trajectory", p, "--out", self.dir / "x")
        self.assertEqual(r.returncode, 4)
        self.assertEqual(json.loads(r.stderr.strip().splitlines()[-1])["status"], "fit_refused")

    def test_numerical_failure(self):
        cfg = dict(SHORT, solver=dict(SHORT["solver"], max_steps=5))
        r = run("simulate", "--config", self.config(cfg), "--out", self.dir / "x")
        self.assertEqual(r.returncode, 3)

    def test_threads_flag_and_env(self):
        out = self.dir / "t"
        self.ok("steady", "--config", ROOT / "configs/steady_linear.json", "--out", out, "--threads", 2)
        self.assertEqual(json.loads((out / "manifest.json").read_text())["threads"], 2)
        env = dict(os.environ, BAROSTAT_THREADS="3")
        self.ok("steady", "--config", ROOT / "configs/steady_linear.json", "--out", out, env=env)
        self.assertEqual(json.loads((out / "manifest.json").read_text())["threads"], 3)

    def test_shipped_configs_validate(self):
        for p in (ROOT / "configs").glob("*.json"):
            jsonschema.validate(json.loads(p.read_text()), schema("config"))

    def test_usage_errors(self):
        self.assertEqual(run().returncode, 2)
        self.assertEqual(run("simulate").returncode, 2)
        self.assertEqual(run("steady", "--config", self.dir / "missing.json").returncode, 2)


if __name__ == "__main__":
    unittest.main(verbosity=2)
