from dataclasses import replace

import numpy as np
import pytest
import yaml

from ltirelay.cli import main, spec_from_config
from ltirelay.harness import (
    DETAIL_HEADER,
    SUMMARY_HEADER,
    TRACE_HEADER,
    ExperimentSpec,
    generate_channels,
    read_channel_file,
    run_sweep,
    trace_instance,
    write_detail,
    write_summary,
    write_trace,
)
from ltirelay.optimizer import OptimizerConfig
from ltirelay.spectra import PowerBudget

from conftest import FIXED_TAPS

SMALL = dict(orders=(6, 4), optimizer=OptimizerConfig(max_iters=60))


def test_channels_are_deterministic_and_independent():
    spec = ExperimentSpec()
    a = generate_channels(3, spec, 7)
    b = generate_channels(3, spec, 7)
    c = generate_channels(3, spec, 8)
    np.testing.assert_array_equal(a.h_sr.taps, b.h_sr.taps)
    assert not np.array_equal(a.h_sr.taps, c.h_sr.taps)
    assert not np.array_equal(a.h_sr.taps, a.h_rd.taps)


def test_channel_variances():
    spec = ExperimentSpec(variances=(0.5, 2.0, 1.0), channel_order=10_000)
    ch = generate_channels(0, spec, 0)
    assert np.var(ch.h_sd.taps) == pytest.approx(0.5, rel=0.05)
    assert np.var(ch.h_sr.taps) == pytest.approx(2.0, rel=0.05)
    assert np.var(ch.h_rd.taps) == pytest.approx(1.0, rel=0.05)


def test_zero_variance_gives_zero_channel():
    ch = generate_channels(1, ExperimentSpec(variances=(0.0, 1.0, 1.0)), 0)
    assert np.all(ch.h_sd.taps == 0.0)


@pytest.mark.parametrize("kw", [dict(trials=0), dict(sweep=()), dict(sweep=((1.0, 0.0),)),
                                dict(causal_mode="x"), dict(baselines=("cf",)),
                                dict(variances=(1.0, -1.0, 1.0)), dict(seed=-1)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        ExperimentSpec(**kw)


def test_single_trial_row_is_reproducible():
    spec = ExperimentSpec(trials=1, sweep=((1.0, 1.0),), **SMALL)
    rows1, res1 = run_sweep(spec)
    rows2, res2 = run_sweep(spec)
    assert write_summary(rows1) == write_summary(rows2)
    assert res1[0].rate == res2[0].rate
    r = rows1[0]
    assert r.trials == 1 and r.failed == 0
    assert r.mean_rate > 0 and r.mean_af_rate > 0 and r.mean_strict_rate > 0


def test_workers_do_not_change_results():
    spec = ExperimentSpec(trials=2, sweep=((0.5, 0.5),), **SMALL)
    a, _ = run_sweep(spec)
    b, _ = run_sweep(replace(spec, workers=2))
    assert write_summary(a) == write_summary(b)


def test_errors_are_reported_not_raised():
    spec = ExperimentSpec(trials=2, variances=(0.0, 0.0, 0.0), causal_mode="causal", **SMALL)
    rows, results = run_sweep(spec)
    assert rows[0].failed == 2
    assert all("DegenerateChannel" in r.error for r in results)
    text = write_detail(results)
    assert text.splitlines()[0] == ",".join(DETAIL_HEADER)


def test_summary_schema_and_baselines():
    spec = ExperimentSpec(trials=1, sweep=((0.1, 0.1), (1.0, 1.0)),
                          baselines=("af_flat", "one_tap", "lpf"), **SMALL)
    rows, _ = run_sweep(spec)
    lines = write_summary(rows).splitlines()
    assert lines[0] == ",".join(SUMMARY_HEADER)
    assert len(lines) == 3
    # unit variances: the flat equivalent is a = b = 1
    assert rows[1].flat_lpf_rate >= rows[1].flat_one_tap_rate - 1e-9
    field = lines[1].split(",")[SUMMARY_HEADER.index("mean_rate")]
    assert len(field.replace(".", "").lstrip("0")) <= 9


def test_trace_columns(fixed_channels):
    spec = ExperimentSpec(grid_size=256)
    cols, u = trace_instance(fixed_channels, PowerBudget(1.0, 1.0), spec)
    assert set(cols) == set(TRACE_HEADER)
    assert all(len(v) == 256 for v in cols.values())
    np.testing.assert_allclose(cols["af_flat_psd"], 1.0)
    noise, psd = cols["designed_noise_level"], cols["designed_psd"]
    worst = np.argsort(noise)[-16:]
    assert psd[worst].max() < 0.1 * psd.max()
    text = write_trace(cols)
    assert text.splitlines()[1] == ",".join(TRACE_HEADER)


def test_channel_file_roundtrip(tmp_path):
    path = tmp_path / "ch.txt"
    path.write_text("\n".join(" ".join(map(str, row)) for row in FIXED_TAPS) + "\n")
    ch = read_channel_file(path)
    np.testing.assert_array_equal(ch.h_rd.taps, FIXED_TAPS[1])
    (tmp_path / "bad.txt").write_text("1 2\n3 4\n")
    with pytest.raises(ValueError):
        read_channel_file(tmp_path / "bad.txt")


def test_cli_sweep_and_trace(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["--trials", "1", "--sweep", "1", "--ls", "4", "--lr", "3",
                 "--max-iters", "30", "--out", str(out)])
    assert code == 0
    assert (out / "summary.csv").read_text().startswith("p_s,p_r,trials")
    chan = tmp_path / "ch.txt"
    chan.write_text("\n".join(" ".join(map(str, r)) for r in FIXED_TAPS))
    code = main(["--trace", str(chan), "--ls", "4", "--lr", "3", "--grid", "64",
                 "--max-iters", "30", "--out", str(out)])
    assert code == 0
    assert len((out / "trace.csv").read_text().splitlines()) == 66


def test_cli_config_and_errors(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump({"trials": 1, "sweep": [[0.5, 2.0]], "ls": 3, "lr": 2,
                                   "max_iters": 20, "causal_mode": "causal"}))
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    text = (tmp_path / "o" / "summary.csv").read_text().splitlines()[1]
    assert text.startswith("0.5,2,1,0,")
    assert main(["--trials", "0", "--out", str(tmp_path / "x")]) == 2
    assert "trials must be >= 1" in capsys.readouterr().err
    cfg.write_text("bogus_key: 1\n")
    assert main(["--config", str(cfg)]) == 2


def test_spec_from_config_defaults():
    spec = spec_from_config({"sweep": [0.1, 1.0], "tol": 1e-6})
    assert spec.sweep == ((0.1, 0.1), (1.0, 1.0))
    assert spec.optimizer.rel_tol == 1e-6
    assert spec.orders == (30, 20) and spec.grid_size == 512
