"""Acceptance: plotting a completed harness output directory.

Produces the three chart kinds from real harness CSV files (written by the
rankedcucb CLI, the only interface shared between the packages) and checks
the pareto chart labels one point per trade-off weight.
"""

import json
import subprocess
import sys

import pytest

from rankedviz.charts import ChartSpec, build_chart

LAMBDAS = [round(0.1 * k, 1) for k in range(1, 11)]


def run_cli(module, *args):
    return subprocess.run(
        [sys.executable, "-m", module, *args], capture_output=True, text=True
    )


@pytest.fixture(scope="module")
def harness_output(tmp_path_factory):
    root = tmp_path_factory.mktemp("harness")
    config = {
        "instance": {
            "source": "generated",
            "scenario": "adversarial",
            "locations": 6,
            "groups": 3,
            "levels": 3,
            "budget": 4,
            "seed": 1,
        },
        "policies": ["RankedCUCB", "LIZARD", "Random"],
        "lambdas": [0.8],
        "horizon": 60,
        "seeds": [0, 1, 2],
        "out_dir": str(root / "out"),
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config))
    proc = run_cli("rankedcucb.cli", "run", "--config", str(config_path))
    assert proc.returncode == 0, proc.stderr

    sweep_config = dict(config, policies=["Optimal"], lambdas=LAMBDAS, horizon=20, seeds=[0])
    sweep_path = root / "sweep.json"
    sweep_path.write_text(json.dumps(sweep_config))
    proc = run_cli(
        "rankedcucb.cli", "sweep", "--config", str(sweep_path), "--out", str(root / "out")
    )
    assert proc.returncode == 0, proc.stderr
    return root / "out"


def test_plot_produces_three_images(harness_output, tmp_path):
    jobs = [
        ("objective", harness_output / "timeseries.csv", tmp_path / "objective.png"),
        ("components", harness_output / "timeseries.csv", tmp_path / "components.png"),
        ("pareto", harness_output / "pareto.csv", tmp_path / "pareto.png"),
    ]
    for kind, source, image in jobs:
        proc = run_cli(
            "rankedviz.cli", "plot",
            "--kind", kind, "--in", str(source), "--out", str(image),
        )
        assert proc.returncode == 0, proc.stderr
        assert image.exists() and image.stat().st_size > 0
        print(f"PASS: plot --kind {kind} wrote {image.name}")


def test_pareto_chart_labels_one_point_per_lambda(harness_output, tmp_path):
    spec = ChartSpec(harness_output / "pareto.csv", "pareto", tmp_path / "p.png")
    _, meta = build_chart(spec)
    assert sorted(meta["labels"]) == sorted(f"{lam:g}" for lam in LAMBDAS)
    print("PASS: pareto chart labels exactly one point per lambda")
