import csv
import json
import math
import re
import subprocess
import sys
import tempfile
from pathlib import Path

CLI = sys.argv[1]

CONFIG = """alpha = 25
tau = 3
alpha_x = 2
num_basis = 25
duration = 3
rate = 100
"""


def run(*args, expect=0):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(f"{args}: exit {proc.returncode}, expected {expect}\n{proc.stdout}\n{proc.stderr}")
    if expect != 0:
        lines = proc.stderr.strip().splitlines()
        assert len(lines) == 1, proc.stderr
        assert re.fullmatch(rf'error code={expect} kind=\w+ message=".*"', lines[0]), lines[0]
    return proc


def weights_file(path, seed, dofs=2, cols=26, scale=50.0, sd=2.0):
    # Small deterministic LCG so the test needs nothing beyond the stdlib.
    state = seed
    def normal():
        nonlocal state
        total = 0.0
        for _ in range(12):
            state = (6364136223846793005 * state + 1442695040888963407) % 2**64
            total += state / 2**64
        return total - 6.0
    n = dofs * cols
    mean = [scale * normal() for _ in range(n)]
    chol = [[0.0] * i + [sd] for i in range(n)]
    path.write_text(json.dumps({"format": "prodmp-weights-distribution", "dofs": dofs,
                                "columns_per_dof": cols, "mean": mean, "chol_lower": chol}))


def positions(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    keys = [k for k in rows[0] if k.endswith("_pos")]
    return [[float(r[k]) for k in keys] for r in rows]


def main():
    with tempfile.TemporaryDirectory() as tmp:
        d = Path(tmp)
        cfg = d / "cfg.txt"
        cfg.write_text(CONFIG)
        bank = d / "bank.bin"

        first = run("precompute", "--config", cfg, "--out", bank).stdout
        again = run("precompute", "--config", cfg, "--out", d / "bank2.bin").stdout
        assert "columns per DoF 26" in first, first
        assert first == again
        assert bank.read_bytes() == (d / "bank2.bin").read_bytes()

        (d / "bad.txt").write_text("alpha = -1\n")
        run("precompute", "--config", d / "bad.txt", "--out", d / "bad.bin", expect=2)
        assert not any(p.name.startswith("bad.bin") for p in d.iterdir())
        (d / "unknown.txt").write_text(CONFIG + "gamma = 1\n")
        run("precompute", "--config", d / "unknown.txt", "--out", d / "x.bin", expect=2)

        w0, w1 = d / "w0.json", d / "w1.json"
        weights_file(w0, 1)
        weights_file(w1, 2)
        common = ["--config", cfg, "--bank", bank]

        run("generate", *common, "--weights", w0, "--y0", "0.5,-1", "--out", d / "gen.csv", "--svg", d / "gen.svg")
        assert (d / "gen.svg").read_text().startswith("<svg")
        header = (d / "gen.csv").read_text().splitlines()[0]
        assert header == "t,dof0_pos,dof0_vel,dof1_pos,dof1_vel", header

        for name in ("s1.csv", "s2.csv"):
            run("sample", *common, "--weights", w0, "--y0", "0.5,-1", "--count", 4, "--seed", 7, "--out", d / name)
        assert (d / "s1.csv").read_bytes() == (d / "s2.csv").read_bytes()
        run("sample", *common, "--weights", w0, "--y0", "0.5,-1", "--count", 4, "--seed", 8, "--out", d / "s3.csv")
        assert (d / "s1.csv").read_bytes() != (d / "s3.csv").read_bytes()

        run("fit", *common, "--demo", d / "gen.csv", "--out", d / "fit.json")
        run("generate", *common, "--weights", d / "fit.json", "--y0", "0.5,-1", "--out", d / "refit.csv")
        a, b = positions(d / "gen.csv"), positions(d / "refit.csv")
        amp = max(max(c) - min(c) for c in zip(*a))
        rmse = math.sqrt(sum((x - y) ** 2 for ra, rb in zip(a, b) for x, y in zip(ra, rb)) / (len(a) * len(a[0])))
        assert rmse <= 0.01 * amp, (rmse, amp)

        run("combine", *common, "--weights", w0, "--weights", w1, "--y0", "0,0", "--out", d / "c.json")
        steps = json.loads((d / "c.json").read_text())["steps"]
        assert len(steps) == 301 and len(steps[0]["mean"]) == 2
        run("blend", *common, "--weights", w0, "--weights", w1, "--y0", "0,0", "--out", d / "b.json")
        blend = json.loads((d / "b.json").read_text())["steps"]
        run("generate", *common, "--weights", w1, "--y0", "0,0", "--out", d / "g1.csv")
        last = positions(d / "g1.csv")[-1]
        assert all(abs(x - y) <= 1e-9 * max(1.0, abs(y)) for x, y in zip(blend[-1]["mean"], last))

        (d / "sc.json").write_text(json.dumps({
            "initial": {"t": 0, "y": [0.5, -1], "dy": [0, 0]}, "end_time": 2.5, "rate": 1000,
            "segments": [{"switch_time": 0, "weights": "w0.json"}, {"switch_time": 1.0, "weights": "w1.json"},
                         {"switch_time": 2.0, "weights": "w0.json"}]}))
        out = run("replan", *common, "--scenario", d / "sc.json", "--out", d / "r.csv").stdout
        jump = float(re.search(r"max position jump (\S+),", out).group(1))
        assert jump <= 1e-9, out
        assert (d / "r.csv").read_text().startswith("segment_id,t,")

        cfg2 = d / "cfg2.txt"
        cfg2.write_text(CONFIG.replace("tau = 3", "tau = 2"))
        run("generate", "--config", cfg2, "--bank", bank, "--weights", w0, "--y0", "0,0", "--out", d / "x.csv",
            expect=2)
        run("generate", *["--config", cfg, "--bank", d / "missing.bin"], "--weights", w0, "--y0", "0,0",
            "--out", d / "x.csv", expect=3)
        run("generate", *common, "--weights", w0, "--y0", "0,0,1", "--out", d / "x.csv", expect=5)
        run("generate", *common, "--weights", w0, "--y0", "0,0", "--out", d / "x.csv", "--bogus", expect=2)

        out = run("bench", "--out", d / "bench.json", "--repetitions", 5, "--warmup", 1).stdout
        reports = json.loads((d / "bench.json").read_text())["reports"]
        assert [r["bc_recompute"] for r in reports] == [False, True]
        for r in reports:
            assert r["oracle_seconds"] > 0 and r["basis_seconds"] > 0
            assert abs(r["speedup"] - r["oracle_seconds"] / r["basis_seconds"]) <= 1e-9 * r["speedup"]
            assert r["parameters"] == 22 and r["points"] == 6001
        assert "speed-up" in out
    print("cli tests passed")


if __name__ == "__main__":
    main()
