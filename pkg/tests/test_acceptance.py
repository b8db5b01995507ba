"""Exit criteria of the build, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line (also collected in the terminal
summary) and enforces its runtime budget.
"""

import filecmp
import itertools
import subprocess
import sys

import mpmath
import numpy as np
import pytest

from cicdecim.analysis import measure_snr, spectrum
from cicdecim.chain import build_chain, chain_process, chain_response, cic_droop, passband_ripple_db
from cicdecim.cic import (
    CicParams,
    design,
    frequency_response_mag,
    impulse_response,
    init_state,
    process,
    register_growth,
    simulate,
    truncation_error_bound,
)
from cicdecim.mcla import emit_netlist
from cicdecim.sources import make_rng, sdm_sine
from cicdecim.verify import verify_adder, verify_block_identity, verify_netlist

pytestmark = pytest.mark.acceptance

FS_IN = 6.144e6


def fir_oracle(x, params):
    h = np.array(impulse_response(params), dtype=np.int64)
    return np.convolve(x, h)[: x.size]


def test_c01_register_growth(criterion):
    with criterion("C1 register growth", 1.0) as info:
        assert design(CicParams(5, 1, 16, 6)).g_max == 1_048_576
        rng = make_rng(101)
        for _ in range(50):
            N, M, R = int(rng.integers(1, 7)), int(rng.integers(1, 4)), int(rng.integers(2, 33))
            exact = 1
            for _ in range(N):
                exact *= R * M
            assert register_growth(CicParams(N, M, R, 1)) == exact, (N, M, R)
        info["detail"] = "g_max=1048576, 50 random configs exact"


def test_c02_word_length(criterion):
    with criterion("C2 word length", 1.0) as info:
        b6 = design(CicParams(5, 1, 16, 6)).b_max
        b1 = design(CicParams(5, 1, 16, 1)).b_max
        info["detail"] = f"b_max(B_in=6)={b6} b_max(B_in=1)={b1}"
        assert b6 == 25
        assert b1 == 20


def test_c03_fir_oracle_equivalence(criterion):
    with criterion("C3 FIR-oracle equivalence", 120.0) as info:
        rng = make_rng(303)
        runs = wrapped_runs = 0
        for N, M, R, B in itertools.product(range(1, 5), range(1, 3), range(2, 9), range(1, 7)):
            p = CicParams(N, M, R, B)
            d = design(p)
            x = rng.integers(-(2 ** (B - 1)), 2 ** (B - 1), 10_000)
            ref = fir_oracle(x, p)
            for phase in range(min(4, R)):
                state = init_state(d, phase)
                y = process(d, state, x)
                assert np.array_equal(y, ref[phase::R]), (N, M, R, B, phase)
                runs += 1
                wrapped_runs += bool(state.wraps.any())
        info["detail"] = f"{runs} runs, {wrapped_runs} with accumulator wrap"
        assert wrapped_runs > runs // 2


def test_c04_mcla_correctness(criterion):
    with criterion("C4 MCLA correctness", 30.0) as info:
        reports = [
            verify_adder(4, "exhaustive"),
            verify_adder(8, "exhaustive"),
            verify_adder(25, "random", 10 ** 6, seed=404),
            verify_block_identity(),
        ]
        info["detail"] = "; ".join(f"w{r.width}:{r.cases}/{r.mismatches}" for r in reports)
        assert [r.cases for r in reports] == [512, 131_072, 10 ** 6, 512]
        assert all(r.passed for r in reports)


def test_c05_netlist_fidelity(criterion):
    with criterion("C5 netlist fidelity", 60.0) as info:
        rep = verify_netlist(emit_netlist(8), "exhaustive")
        info["detail"] = str(rep)
        assert rep.cases == 131_072
        assert rep.passed


def test_c06_pipeline_equivalence(criterion, pruned_design):
    with criterion("C6 pipeline equivalence", 30.0) as info:
        x = make_rng(606).integers(-32, 32, 10 ** 5)
        N = pruned_design.params.N
        piped = simulate(pruned_design, x, pipelined=True)
        direct = simulate(pruned_design, np.concatenate([np.zeros(N - 1, np.int64), x]))
        info["detail"] = f"{piped.size} outputs, latency {N - 1} input samples"
        assert piped.size > 6000
        assert np.array_equal(piped, direct[: piped.size])


def test_c07_frequency_response(criterion, ref_params):
    with criterion("C7 frequency response", 10.0) as info:
        mpmath.mp.dps = 40
        h = impulse_response(ref_params)
        dc = frequency_response_mag(ref_params, 0.0)
        assert dc == 16 ** 5
        nulls = [frequency_response_mag(ref_params, k / 16) / dc for k in range(1, 8)]
        assert max(nulls) <= 1e-9

        def oracle(f):
            z = mpmath.expj(-2 * mpmath.pi * mpmath.mpf(f))
            return float(abs(mpmath.polyval(h[::-1], z)))

        worst = 0.0
        for f in make_rng(707).uniform(0, 0.5, 1000):
            ref = oracle(f)
            worst = max(worst, abs(frequency_response_mag(ref_params, f) - ref) / ref)
        info["detail"] = f"max null/DC={max(nulls):.1e}, worst rel err={worst:.1e}"
        assert worst <= 1e-9


def test_c08_truncation_bound(criterion, pruned_design, full_design):
    with criterion("C8 truncation bound", 120.0) as info:
        x = make_rng(808).integers(-32, 32, 10 ** 6)
        exact = simulate(full_design, x).astype(np.float64)
        scale = 2.0 ** pruned_design.output_shift
        err = np.abs(simulate(pruned_design, x) * scale - exact) / scale
        bound = truncation_error_bound(pruned_design)
        info["detail"] = f"max err={err.max():.2f} LSB, bound={bound} LSB"
        assert err.max() <= bound


def test_c09_chain_behavior(criterion, pruned_chain):
    with criterion("C9 chain behavior (0-348 kHz as stated)", 60.0) as info:
        cfg = pruned_chain
        rates = cfg.stage_rates
        assert cfg.stage_factors == (16, 2, 2, 2) and cfg.total_decimation == 128
        assert all(a > b for a, b in zip(rates, rates[1:]))

        nulls = 384e3 * np.arange(1, 9)
        null_db = chain_response(cfg, nulls)
        assert null_db.max() <= -100

        grid = np.arange(0, 348_001, 1000.0)
        ripple = passband_ripple_db(chain_response(cfg, grid))
        droop_edge = -20 * np.log10(cic_droop(cfg.cic.params, 348e3 / FS_IN))
        info["detail"] = (
            f"nulls<={null_db.max():.0f} dB, ripple 0-348k={ripple:.1f} dB "
            f"vs CIC droop {droop_edge:.1f} dB"
        )
        assert ripple < droop_edge


def test_c09_chain_behavior_at_design_passband(criterion, pruned_chain):
    with criterion("C9 chain behavior (0-f_pass, f_pass=20 kHz)", 60.0) as info:
        cfg = pruned_chain
        grid = np.arange(0, cfg.f_pass + 1, 1000.0)
        ripple = passband_ripple_db(chain_response(cfg, grid))
        droop_edge = -20 * np.log10(cic_droop(cfg.cic.params, cfg.f_pass / FS_IN))
        null_db = chain_response(cfg, 384e3 * np.arange(1, 9))
        info["detail"] = f"ripple={ripple:.4f} dB vs CIC droop {droop_edge:.3f} dB"
        assert null_db.max() <= -100
        assert ripple < droop_edge


def chain_snr(cfg, seed, n_fft=8192, skip=64, amp=0.5):
    fs_out = cfg.output_rate
    k = round(1000 / (fs_out / n_fft))
    tone = k * fs_out / n_fft
    D = cfg.total_decimation
    x = sdm_sine(amp, tone, FS_IN, (n_fft + skip) * D, seed=seed, width=cfg.cic.params.B_in)
    band = (0.0, 20e3)
    before = measure_snr(spectrum(x[skip * D:], FS_IN, "hann"), tone, band)
    y = chain_process(cfg, x)[skip:]
    after = measure_snr(spectrum(y, fs_out, "hann", full_scale=cfg.dc_gain), tone, band)
    return before, after


def test_c10_snr_methodology(criterion, full_design, pruned_design):
    with criterion("C10 SNR methodology", 120.0) as info:
        cfg = build_chain(full_design)
        pairs = [chain_snr(cfg, seed) for seed in range(1, 6)]
        worst = min(a - b for b, a in pairs)

        n, fs = 8192, 48e3
        amp, sigma = 0.25, 1e-4
        errs = []
        for seed in range(5):
            rng = make_rng(1000 + seed)
            f0 = 171 * fs / n
            x = amp * np.sin(2 * np.pi * f0 / fs * np.arange(n) + rng.uniform(0, 6.28))
            x += rng.normal(0, sigma, n)
            truth = 10 * np.log10((amp ** 2 / 2) / (sigma ** 2 * 20e3 / (fs / 2)))
            errs.append(measure_snr(spectrum(x, fs, "hann"), f0, (0.0, 20e3)) - truth)

        # informational: the pruned 16-bit schedule cannot carry this SNR
        b_p, a_p = chain_snr(build_chain(pruned_design), 1)
        info["detail"] = (
            f"before/after: {', '.join(f'{b:.2f}/{a:.2f}' for b, a in pairs)} dB; "
            f"synthetic err max {max(map(abs, errs)):.3f} dB; "
            f"pruned schedule {b_p:.1f}/{a_p:.1f} dB"
        )
        assert worst >= -1.0
        assert max(map(abs, errs)) <= 0.5


def test_c11_determinism(criterion, tmp_path):
    with criterion("C11 determinism", 120.0) as info:
        dirs = [tmp_path / "a", tmp_path / "b"]
        for d in dirs:
            subprocess.run(
                [sys.executable, "-m", "cicdecim", "snr", "--seed", "11", "--outdir", str(d)],
                check=True, capture_output=True,
            )
        names = ["snr_before.csv", "snr_after.csv", "snr_report.txt"]
        match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        info["detail"] = f"identical: {', '.join(match)}"
        assert match == names and not mismatch and not errors
