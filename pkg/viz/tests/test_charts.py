"""Chart building from handcrafted CSV fixtures."""

import numpy as np
import pytest

from rankedviz.charts import ChartDataError, ChartSpec, build_chart, ema, render

TIMESERIES_HEADER = "policy,lambda,seed,t,reward,prioritization,objective,regret"


def write_timeseries(path, policies=("RankedCUCB",), lambdas=(0.8,), seeds=(0, 1), horizon=12):
    rng = np.random.default_rng(0)
    lines = [TIMESERIES_HEADER]
    for policy in policies:
        for lam in lambdas:
            for seed in seeds:
                for t in range(1, horizon + 1):
                    reward = float(rng.uniform(0, 2))
                    pri = float(rng.uniform(-1, 1))
                    obj = lam * reward + (1 - lam) * pri
                    lines.append(
                        f"{policy},{lam!r},{seed},{t},{reward!r},{pri!r},{obj!r},{0.1!r}"
                    )
    path.write_text("\n".join(lines) + "\n")


def write_pareto(path, policies=("Optimal",), lambdas=(0.1, 0.2, 0.5, 1.0)):
    lines = ["policy,lambda,reward,prioritization"]
    for policy in policies:
        for lam in lambdas:
            lines.append(f"{policy},{lam!r},{lam * 2!r},{-lam!r}")
    path.write_text("\n".join(lines) + "\n")


def test_ema_constant_is_fixed_point():
    x = np.full(10, 3.0)
    assert np.allclose(ema(x, 5.0), x)


def test_objective_chart_single_policy_single_series(tmp_path):
    csv = tmp_path / "ts.csv"
    write_timeseries(csv)
    fig, meta = build_chart(ChartSpec(csv, "objective", tmp_path / "o.png"))
    assert meta["series"] == 1
    assert len(fig.axes) == 1
    assert len(fig.axes[0].lines) == 1


def test_objective_chart_separates_policies_and_lambdas(tmp_path):
    csv = tmp_path / "ts.csv"
    write_timeseries(csv, policies=("RankedCUCB", "LIZARD"), lambdas=(0.3, 0.8))
    fig, meta = build_chart(ChartSpec(csv, "objective", tmp_path / "o.png"))
    assert meta["series"] == 4
    fig2, meta2 = build_chart(ChartSpec(csv, "objective", tmp_path / "o.png", lam=0.3))
    assert meta2["series"] == 2


def test_components_chart_has_two_panels(tmp_path):
    csv = tmp_path / "ts.csv"
    write_timeseries(csv, policies=("RankedCUCB", "Random"))
    fig, meta = build_chart(ChartSpec(csv, "components", tmp_path / "c.png"))
    assert meta["panels"] == 2
    assert len(fig.axes) == 2
    assert len(fig.axes[0].lines) == 2


def test_pareto_chart_labels_every_lambda(tmp_path):
    csv = tmp_path / "pareto.csv"
    write_pareto(csv, lambdas=tuple(round(0.1 * k, 1) for k in range(1, 11)))
    fig, meta = build_chart(ChartSpec(csv, "pareto", tmp_path / "p.png"))
    assert meta["rows"] == 10
    assert sorted(meta["labels"]) == sorted(f"{0.1 * k:g}" for k in range(1, 11))
    assert len(fig.axes[0].texts) == 10


def test_render_writes_image(tmp_path):
    csv = tmp_path / "ts.csv"
    write_timeseries(csv)
    out = render(ChartSpec(csv, "objective", tmp_path / "img" / "o.png"))
    assert out.exists() and out.stat().st_size > 0


def test_render_is_deterministic(tmp_path):
    csv = tmp_path / "ts.csv"
    write_timeseries(csv)
    a = render(ChartSpec(csv, "objective", tmp_path / "a.png"))
    b = render(ChartSpec(csv, "objective", tmp_path / "b.png"))
    assert a.read_bytes() == b.read_bytes()


def test_empty_csv_is_an_error_and_writes_nothing(tmp_path):
    csv = tmp_path / "empty.csv"
    csv.write_text("")
    out = tmp_path / "never.png"
    with pytest.raises(ChartDataError, match="empty"):
        render(ChartSpec(csv, "objective", out))
    assert not out.exists()


def test_header_only_csv_is_an_error(tmp_path):
    csv = tmp_path / "header.csv"
    csv.write_text(TIMESERIES_HEADER + "\n")
    with pytest.raises(ChartDataError, match="no data rows"):
        build_chart(ChartSpec(csv, "objective", tmp_path / "x.png"))


def test_missing_column_is_an_error(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("policy,lambda,seed,t,reward\nRandom,0.8,0,1,0.5\n")
    with pytest.raises(ChartDataError, match="missing columns"):
        build_chart(ChartSpec(csv, "objective", tmp_path / "x.png"))


def test_empty_lambda_filter_is_an_error(tmp_path):
    csv = tmp_path / "ts.csv"
    write_timeseries(csv, lambdas=(0.8,))
    with pytest.raises(ChartDataError, match="lambda"):
        build_chart(ChartSpec(csv, "objective", tmp_path / "x.png", lam=0.3))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ChartDataError, match="kind"):
        ChartSpec(tmp_path / "x.csv", "histogram", tmp_path / "x.png")
