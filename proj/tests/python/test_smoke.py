"""End-to-end smoke tests for the python bindings."""

import math

import numpy as np
import pytest

nbiot = pytest.importorskip("nbiot")


def test_anchor_candidates():
    assert nbiot.anchor_prb_candidates(10) == [4, 9, 14, 19, 30, 35, 40, 45]
    with pytest.raises(Exception):
        nbiot.anchor_prb_candidates(7)


def test_raster_offsets():
    assert nbiot.raster_offset_hz("standalone") == 0.0
    assert abs(nbiot.raster_offset_hz("inband", 10, 30)) == pytest.approx(2500.0)
    assert abs(nbiot.raster_offset_hz("inband", 5, 2)) == pytest.approx(7500.0)


def test_zc_sequence_properties():
    zc = nbiot.generate_zc(11, 5)
    assert zc.shape == (11,)
    assert np.allclose(np.abs(zc), 1.0)
    # perfect periodic autocorrelation
    for lag in range(1, 11):
        corr = np.vdot(np.roll(zc, lag), zc)
        assert abs(corr) < 1e-9 * 11


def test_npss_block():
    npss = nbiot.generate_npss()
    assert npss.shape == (11, 11)
    assert np.sum(np.abs(npss) ** 2) == pytest.approx(121.0)


def test_nsss_length_and_modulus():
    nsss = nbiot.generate_nsss(17, 0)
    assert nsss.shape == (132,)
    assert np.allclose(np.abs(nsss), 1.0)


def test_sync_chain_over_awgn():
    cell = nbiot.CellConfig.standalone(17)
    wave = nbiot.downlink_frames(cell, frames=8)
    cfo = nbiot.compose_cfo_hz(5.0, 900e6, 0.0)
    rx = nbiot.apply_channel(wave, snr_db=5.0, cfo_hz=cfo, seed=3)
    res = nbiot.npss_search(rx)
    assert res.detected
    assert abs(res.sample_timing - 5 * 1920) <= 2
    est = nbiot.estimate_cfo(rx, res.sample_timing)
    assert est == pytest.approx(cfo, abs=100.0)
    detected, pcid, frame_pos, metric = nbiot.nsss_detect(rx, res.sample_timing, est)
    assert detected
    assert pcid == 17
    assert frame_pos == 0


def test_nprach_roundtrip():
    cfg = nbiot.NprachConfig()
    cfg.repetitions = 2
    assert cfg.preamble_duration_s() == pytest.approx(5.6e-3, rel=1e-6)
    tones, wave = nbiot.nprach_waveform(cfg, start_subcarrier=5, cell_seed=9)
    assert len(tones) == 8
    rx = nbiot.apply_channel(wave, snr_db=10.0, seed=4)
    dets = nbiot.nprach_detect(rx, cfg, cell_seed=9)
    assert dets and dets[0][0] == 5


def test_papr_of_single_tone():
    cell = nbiot.CellConfig.standalone(1)
    wave = nbiot.npusch_f1_waveform(cell, tbs=56, tones=1, single_tone_modulation="pi2bpsk")
    power = np.abs(wave) ** 2
    papr_db = 10 * math.log10(power.max() / power.mean())
    assert papr_db <= 0.1


def test_calculators():
    assert nbiot.peak_rate_bps("dl") == pytest.approx(226666.7, rel=1e-4)
    assert nbiot.peak_rate_bps("ul") == 250000.0
    assert nbiot.drift_from_cfo(7500, 900e6, 0.640) == pytest.approx(5.33e-6, rel=2e-3)
    assert nbiot.link_budget_mcl_db(23, 5, 15000, -11.8) == pytest.approx(162.0, abs=0.1)


def test_scenario_runner(tmp_path):
    scenario = tmp_path / "demo.scn"
    scenario.write_text("[scenario]\nkind = timeline\ntrials = 100\n")
    rc, log = nbiot.run_scenario(str(scenario), str(tmp_path / "out"))
    assert rc == 0
    assert (tmp_path / "out" / "summary.csv").exists()
