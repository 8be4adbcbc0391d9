import json

import numpy as np
import pytest

from sparsepr.cli import (
    EXIT_DATA,
    EXIT_USAGE,
    magnitude_preview,
    main,
    phase_preview,
    write_pgm,
)
from sparsepr.experiment import PhantomSpec, binary_phase_phantom, make_support
from sparsepr.fieldfile import read_field_file, write_field_file
from sparsepr.fourier import forward_transform, magnitude_of


def make_inputs(tmp_path, image_size=32, support_size=12, pattern_seed=3):
    spec = PhantomSpec(image_size=image_size, support_size=support_size,
                       pattern_seed=pattern_seed)
    truth = binary_phase_phantom(spec)
    mask = make_support(image_size, support_size)
    magnitude = magnitude_of(forward_transform(truth))
    write_field_file(truth, tmp_path / "truth.prf1")
    write_field_file(mask.astype(np.float64), tmp_path / "support.prf1")
    write_field_file(magnitude, tmp_path / "magnitude.prf1")
    return truth, mask, magnitude


# ------------------------------------------------------------ previews

def test_write_pgm_layout(tmp_path):
    values = np.arange(6, dtype=float).reshape(2, 3) * 40
    path = tmp_path / "img.pgm"
    write_pgm(path, values)
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n3 2\n255\n")
    assert raw[len(b"P5\n3 2\n255\n"):] == bytes([0, 40, 80, 120, 160, 200])


def test_phase_preview_bounds():
    f = np.exp(1j * np.linspace(-np.pi, np.pi, 16)).reshape(4, 4)
    v = phase_preview(f)
    assert v.min() >= 0 and v.max() <= 255


def test_magnitude_preview_zero_safe():
    assert not magnitude_preview(np.zeros((4, 4))).any()


# ------------------------------------------------------------ subcommands

def test_phantom_command(tmp_path):
    out = tmp_path / "ph"
    code = main(["phantom", "--size", "32", "--support", "12",
                 "--seed", "3", "--out", str(out)])
    assert code == 0
    truth = read_field_file(out / "truth.prf1")
    expected = binary_phase_phantom(
        PhantomSpec(image_size=32, support_size=12, pattern_seed=3))
    assert np.array_equal(truth, expected)
    support = read_field_file(out / "support.prf1")
    assert np.array_equal(support != 0, make_support(32, 12))
    assert (out / "truth_phase.pgm").exists()
    spec_echo = json.loads((out / "phantom.json").read_text())
    assert spec_echo["pattern_seed"] == 3


def test_phantom_rejects_bad_geometry(tmp_path):
    code = main(["phantom", "--size", "32", "--support", "20",
                 "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_forward_command(tmp_path):
    truth, _, magnitude = make_inputs(tmp_path)
    out = tmp_path / "fw"
    code = main(["forward", "--truth", str(tmp_path / "truth.prf1"),
                 "--out", str(out)])
    assert code == 0
    written = read_field_file(out / "magnitude.prf1")
    assert np.array_equal(written, magnitude)


def test_forward_missing_input(tmp_path):
    code = main(["forward", "--truth", str(tmp_path / "nope.prf1"),
                 "--out", str(tmp_path)])
    assert code == EXIT_DATA


def test_retrieve_command(tmp_path):
    make_inputs(tmp_path)
    out = tmp_path / "run"
    code = main(["retrieve",
                 "--magnitude", str(tmp_path / "magnitude.prf1"),
                 "--mask", str(tmp_path / "support.prf1"),
                 "--alg", "hio", "--iters", "6", "--seed", "1",
                 "--out", str(out)])
    assert code == 0
    recon = read_field_file(out / "recon.prf1")
    assert recon.shape == (32, 32)
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["algorithm"] == "hio"
    assert report["config"]["seed"] == 1
    assert len(report["penalty_trace"]) == 6
    assert len(report["fourier_residual_trace"]) == 6


def test_retrieve_warns_on_ignored_ntv(tmp_path, capsys):
    make_inputs(tmp_path)
    code = main(["retrieve",
                 "--magnitude", str(tmp_path / "magnitude.prf1"),
                 "--mask", str(tmp_path / "support.prf1"),
                 "--alg", "hio", "--iters", "2", "--ntv", "5",
                 "--out", str(tmp_path / "warn")])
    assert code == 0
    assert "ignored" in capsys.readouterr().err


def test_retrieve_sparse_matches_library(tmp_path):
    from sparsepr.retrieval import RetrievalConfig, run_sparse_hio
    from sparsepr.sparsity import PenaltySpec

    _, mask, magnitude = make_inputs(tmp_path)
    out = tmp_path / "tv"
    code = main(["retrieve",
                 "--magnitude", str(tmp_path / "magnitude.prf1"),
                 "--mask", str(tmp_path / "support.prf1"),
                 "--alg", "hio-tv", "--iters", "4", "--seed", "2",
                 "--out", str(out)])
    assert code == 0
    recon = read_field_file(out / "recon.prf1")
    expected = run_sparse_hio(
        magnitude, mask,
        RetrievalConfig(n_iterations=4, seed=2, penalty=PenaltySpec(kind="tv")),
    ).final_field
    assert np.array_equal(recon, expected)


def test_retrieve_bad_flag_values(tmp_path):
    make_inputs(tmp_path)
    code = main(["retrieve",
                 "--magnitude", str(tmp_path / "magnitude.prf1"),
                 "--mask", str(tmp_path / "support.prf1"),
                 "--alg", "hio-tv", "--iters", "0",
                 "--out", str(tmp_path / "bad")])
    assert code == EXIT_USAGE


def test_metrics_command(tmp_path, capsys):
    make_inputs(tmp_path)
    code = main(["metrics",
                 "--recon", str(tmp_path / "truth.prf1"),
                 "--truth", str(tmp_path / "truth.prf1"),
                 "--mask", str(tmp_path / "support.prf1")])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["c_up"] == pytest.approx(1.0, abs=1e-12)
    assert payload["twin_present"] is False
    assert payload["phase_rmse"] < 1e-12


# ------------------------------------------------------------ sweep

def sweep_config(tmp_path, seeds, algorithms, iters=4):
    cfg = {
        "phantom": {"image_size": 32, "support_size": 12, "kind": "binary",
                    "pattern_seed": 3},
        "retrieval": {"beta": 0.9, "n_iterations": iters},
        "seeds": seeds,
        "algorithms": algorithms,
        "output_dir": str(tmp_path / "sweep_out"),
    }
    tmp_path.mkdir(parents=True, exist_ok=True)
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    return path


def test_sweep_layout_and_aggregate(tmp_path):
    cfg = sweep_config(tmp_path, seeds=[0, 1], algorithms=["hio", "hio-tv"])
    code = main(["sweep", "--config", str(cfg)])
    assert code == 0
    out = tmp_path / "sweep_out"
    for alg in ("hio", "hio-tv"):
        for seed in (0, 1):
            assert (out / f"recon_{alg}_{seed:08d}.prf1").exists()
            cell = json.loads((out / f"recon_{alg}_{seed:08d}.json").read_text())
            assert cell["config"]["seed"] == seed
    aggregate = json.loads((out / "aggregate.json").read_text())
    assert set(aggregate["algorithms"]) == {"hio", "hio-tv"}
    assert aggregate["algorithms"]["hio"]["n_runs"] == 2
    assert aggregate["failures"] == []


def test_sweep_parallel_bit_identical(tmp_path):
    cfg1 = sweep_config(tmp_path / "a", seeds=[0, 1, 2], algorithms=["hio"])
    cfg2 = sweep_config(tmp_path / "b", seeds=[0, 1, 2], algorithms=["hio"])
    assert main(["sweep", "--config", str(cfg1), "--jobs", "1"]) == 0
    assert main(["sweep", "--config", str(cfg2), "--jobs", "4"]) == 0
    for seed in (0, 1, 2):
        name = f"recon_hio_{seed:08d}.prf1"
        a = read_field_file(tmp_path / "a" / "sweep_out" / name)
        b = read_field_file(tmp_path / "b" / "sweep_out" / name)
        assert np.array_equal(a, b)
    agg_a = json.loads((tmp_path / "a" / "sweep_out" / "aggregate.json").read_text())
    agg_b = json.loads((tmp_path / "b" / "sweep_out" / "aggregate.json").read_text())
    assert agg_a["algorithms"] == agg_b["algorithms"]


def test_sweep_rejects_duplicate_seeds(tmp_path):
    cfg = sweep_config(tmp_path, seeds=[1, 1], algorithms=["hio"])
    assert main(["sweep", "--config", str(cfg)]) == EXIT_USAGE


def test_sweep_rejects_unknown_algorithm(tmp_path):
    cfg = sweep_config(tmp_path, seeds=[0], algorithms=["er"])
    assert main(["sweep", "--config", str(cfg)]) == EXIT_USAGE


def test_sweep_missing_config(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "none.json")]) == EXIT_DATA


def test_sweep_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["sweep", "--config", str(path)]) == EXIT_USAGE
