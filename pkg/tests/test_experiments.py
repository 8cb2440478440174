import csv
import io
import json
import math

import numpy as np
import pytest

from levelcross.errors import ConfigError, InvalidPathError
from levelcross.experiments import (ExperimentConfig, bundled_paths, config_from_dict,
                                    frame_transport_sign, gnuplot_script, observed_order,
                                    regime_label, rows_to_csv, rows_to_json, run)
from levelcross.paths import real_plane_loop


def small(experiment, **sections):
    d = {"experiment": experiment, "integrator": {"n_steps": 2 ** 13},
         "path": {"n_samples": 512}}
    for k, v in sections.items():
        d.setdefault(k, {}).update(v)
    return config_from_dict(d)


def test_unknown_keys_named():
    with pytest.raises(ConfigError, match="'path.foo'"):
        config_from_dict({"path": {"foo": 1}})
    with pytest.raises(ConfigError, match="'bogus'"):
        config_from_dict({"bogus": 1})


@pytest.mark.parametrize("d, field", [
    ({"sweep": {"points": 1}}, "sweep.points"),
    ({"path": {"T": -1}}, "path.T"),
    ({"path": {"theta": 4}}, "path.theta"),
    ({"integrator": {"n_steps": 10}}, "integrator.n_steps"),
    ({"output": {"format": "xml"}}, "output.format"),
    ({"experiment": "dance"}, "experiment"),
    ({"path": {"revolutions": 1.5}}, "path.revolutions"),
    ({"path": {"r": "big"}}, "path.r"),
])
def test_invalid_values_named(d, field):
    with pytest.raises(ConfigError, match=field):
        config_from_dict(d)


def test_defaults_by_experiment():
    assert ExperimentConfig(experiment="phase").radius() == 1.0
    assert ExperimentConfig(experiment="c-basis").radius() == 1e-4


def test_regime_labels():
    assert regime_label(100) == "adiabatic"
    assert regime_label(0.01) == "near-crossing"
    assert regime_label(1.0) == "crossover"


def test_two_point_sweep_sorted():
    with pytest.raises(ConfigError, match="sweep.log_max"):
        small("sweep", sweep={"points": 2, "log_min": 2, "log_max": -2})
    cfg = small("sweep", sweep={"points": 2})
    rows = run(cfg)
    assert len(rows) == 2
    assert rows[0]["grT_over_hbar"] == pytest.approx(0.01)
    assert rows[1]["grT_over_hbar"] == pytest.approx(100)
    assert abs(rows[0]["geometric_phase_rad"]) < 0.05
    for row in rows:
        for key in ("r", "theta_rad", "T", "g", "e_shift", "n_steps", "scheme", "level",
                    "revolutions", "version"):
            assert key in row


def test_sweep_threads_deterministic(monkeypatch):
    cfg = small("sweep", sweep={"points": 4})
    monkeypatch.setenv("BERRY_NUM_THREADS", "1")
    a = rows_to_csv(run(cfg))
    monkeypatch.setenv("BERRY_NUM_THREADS", "4")
    b = rows_to_csv(run(cfg))
    assert a == b
    monkeypatch.setenv("BERRY_NUM_THREADS", "many")
    with pytest.raises(ConfigError):
        run(cfg)


def test_csv_format():
    rows = [{"a": 0.1, "b": "x, \"y\"", "c": True, "d": float("nan")}]
    text = rows_to_csv(rows)
    assert text.startswith("a,b,c,d\r\n")
    back = list(csv.reader(io.StringIO(text)))
    assert back[1] == ["0.10000000000000001", 'x, "y"', "true", "nan"]
    assert float(back[1][0]) == 0.1


def test_json_mirrors_rows():
    rows = [{"a": 0.1, "n": 3, "f": np.float64(2.5), "d": float("nan"), "ok": np.bool_(True)}]
    assert json.loads(rows_to_json(rows)) == [{"a": 0.1, "n": 3, "f": 2.5, "d": None, "ok": True}]


def test_observed_order():
    o = observed_order([1.6e-3, 1e-4, 6.25e-6, 1e-13], [1, 4, 16, 64])
    assert math.isnan(o[0]) and o[1] == pytest.approx(2.0) and o[2] == pytest.approx(2.0)
    assert math.isnan(o[3])


def test_bundled_paths_regular_and_cyclic():
    paths = bundled_paths(512)
    assert len(paths) == 5 and all(p.cyclic for p in paths)
    labels = [p.label for p in paths]
    assert "adiabatic-circle" in labels and "near-crossing-circle" in labels


def test_equivalence_rows():
    cfg = small("equivalence", checks={"n_steps_list": [2 ** 12, 2 ** 14]})
    rows = run(cfg)
    assert len(rows) == 10
    for row in rows:
        if row["n_steps"] == 2 ** 14:
            assert row["discrepancy"] < 1e-6


def test_connection_check_rows():
    cfg = small("connection-check", checks={"dt_list": [1e-2, 5e-3], "samples": 8})
    rows = run(cfg)
    assert rows[1]["ratio_to_previous"] == pytest.approx(4.0, abs=0.1)


def test_c_basis_rows():
    rows = run(small("c-basis"))
    plus, minus = rows
    assert plus["mode"] == "c+" and abs(plus["geometric_phase_mod_rad"]) < 1e-10
    assert minus["geometric_phase_rad"] == 0.0
    assert plus["exact_amplitude_mismatch"] < 1e-4


def test_frame_transport_sign():
    assert frame_transport_sign(real_plane_loop(1.0, 100.0, n_samples=512)) == -1
    assert frame_transport_sign(real_plane_loop(1.0, 100.0, n_samples=512, turns=2.0)) == 1


def test_sign_rule_rows():
    rows = run(small("sign-rule"))
    ad, nc = rows
    assert ad["regime"] == "adiabatic" and ad["holonomy_sign"] == -1
    assert nc["regime"] == "near-crossing" and nc["holonomy_sign"] == 1
    assert not nc["sign_flip"] and abs(nc["geometric_phase_rad"]) < 0.05


def test_sign_rule_half_loop():
    with pytest.raises(InvalidPathError, match="cyclic"):
        run(small("sign-rule", checks={"turns": 0.5}))


def test_phase_from_path_file(tmp_path):
    from levelcross.paths import circle_path, save_path
    f = tmp_path / "p.json"
    save_path(circle_path(1e-4, math.pi / 2, 100.0, n_samples=256), f)
    cfg = small("phase")
    cfg.path_file = str(f)
    (row,) = run(cfg)
    assert abs(row["geometric_phase_rad"]) < 0.05


def test_gnuplot_script():
    s = gnuplot_script("out.csv")
    assert "out.csv" in s and "set logscale x" in s
