import json

import numpy as np
import pytest

from nhrouter import sweeps
from nhrouter.config import apply_override, parse_config

import oracles


def cfg_with(**over):
    cfg = parse_config()
    for k, v in over.items():
        cfg = apply_override(cfg, f"{k.replace('__', '.')}={json.dumps(v)}")
    return cfg


@pytest.fixture(scope="module")
def spectrum():
    header, rows = sweeps.run_spectrum(parse_config())
    return {r[0]: r[1:] for r in rows}


def test_spectrum_resonance_windows(spectrum):
    tf, tb = spectrum[0.0]
    assert 0.91 <= tf <= 0.95
    assert 0.022 <= tb <= 0.030


def test_spectrum_peak_and_dip_at_resonance(spectrum):
    d = sorted(spectrum)
    i0 = d.index(0.0)
    fw = [spectrum[x][0] for x in d]
    bw = [spectrum[x][1] for x in d]
    assert fw[i0] > fw[i0 - 1] and fw[i0] > fw[i0 + 1]
    assert bw[i0] == min(bw)


@pytest.mark.parametrize("delta", [-100.0, 100.0])
def test_spectrum_far_detuned_reciprocal(delta):
    cfg = cfg_with(delta_range=[delta, delta, 1], delta_unit="gamma")
    (_, tf, tb), = sweeps.run_spectrum(cfg)[1]
    assert abs(tf - tb) < 0.02


def test_map_rows_and_monotone():
    cfg = cfg_with(delta_range=[-1, 1, 5], delta_unit="gamma", depth_range=[0, 40, 9])
    header, maps = sweeps.run_map(cfg)
    assert header == ("D", "delta", "T")
    for d, rows in maps.items():
        assert [(r[0], r[1]) for r in rows] == sorted((r[0], r[1]) for r in rows)
        assert all(r[2] == 1.0 for r in rows if r[0] == 0)
        for x in (-1.0, 0.0, 1.0):
            col = [r[2] for r in rows if r[1] == x]
            assert all(b <= a for a, b in zip(col, col[1:]))
    at0 = {d: [r[2] for r in rows if r[1] == 0.0] for d, rows in maps.items()}
    assert all(f >= b for f, b in zip(at0["forward"], at0["backward"]))


def test_map_needs_two_steps():
    from nhrouter.errors import ConfigError

    with pytest.raises(ConfigError):
        sweeps.run_map(cfg_with(depth_range=[14, 14, 1]))


def test_isolation_linear_without_noise_floor():
    header, rows = sweeps.run_isolation_vs_depth(cfg_with(noise_floor=0, depth_range=[0, 40, 5]))
    iso = dict(rows)
    assert iso[0.0] == 0.0
    assert iso[20.0] == pytest.approx(2 * iso[10.0], rel=1e-9)
    assert iso[40.0] == pytest.approx(4 * iso[10.0], rel=1e-9)


def test_isolation_calibrated_far_depth():
    iso = dict(sweeps.run_isolation_vs_depth(parse_config())[1])
    assert 19.0 <= iso[40.0] <= 21.0
    assert iso[0.0] == 0.0


def test_helicity_flip_table():
    header, rows = sweeps.run_helicity_flip(parse_config())
    t = {(r[0], r[1], r[2]): r[3] for r in rows}
    assert t[(1, "forward", "H")] >= 0.9
    assert t[(-1, "forward", "H")] <= 0.05
    for s in ("H", "V", "D", "R"):
        assert t[(1, "forward", s)] == t[(-1, "backward", s)]
        assert t[(1, "backward", s)] == t[(-1, "forward", s)]


@pytest.fixture(scope="module")
def qubit_report():
    return sweeps.run_qubit_report(parse_config())


def test_qubit_report_insertion_losses(qubit_report):
    _, rows, _ = qubit_report
    got = [r[4] for r in rows]
    assert got == pytest.approx(oracles.MEASURED_INSERTION_DB, abs=0.05)


@pytest.mark.xfail(strict=True, reason=(
    "the dual-rail channel is phase insensitive: every input state sees the same forward and backward "
    "attenuation up to the small H/V imbalance, so the model cannot produce per-state isolation spread "
    "of about 2 dB; all states land near 15.5 dB"))
def test_qubit_report_per_state_isolation(qubit_report):
    _, rows, _ = qubit_report
    assert [r[3] for r in rows] == pytest.approx(oracles.MEASURED_ISOLATION_DB, abs=0.5)


def test_qubit_report_fidelity_with_tomography(qubit_report):
    _, rows, report = qubit_report
    assert [r[5] for r in rows] == pytest.approx(oracles.MEASURED_FIDELITY, abs=0.03)
    assert all(e["converged"] for e in report["states"])


def test_qubit_report_analytic_without_shots():
    _, rows, report = sweeps.run_qubit_report(cfg_with(shots=0))
    assert [r[5] for r in rows] == pytest.approx(oracles.MEASURED_FIDELITY, abs=1e-9)
    assert "rho_hat" not in report["states"][0]


def test_storage_summary():
    signal, fw, bw, s = sweeps.run_storage(parse_config())
    assert s["retrieval_efficiency_forward"] >= 0.1
    assert s["diode_contrast_db"] >= 17.0
    assert abs(s["dark_decay_ratio"] / s["dark_decay_expected"] - 1) < 0.01
    assert 1500.0 <= s["retrieved_peak_time_ns_forward"] <= 2500.0
    assert np.all(np.diff(fw.output.time_grid) > 0)
