"""Command-line front end.

Every run is driven by an INI-style config (``[section]`` headers and
``key = value`` lines). Command-line flags override the file, and
``--set section.key=value`` reaches any key. Exit codes: 0 success,
1 contract/config error, 2 I/O error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import analysis, cic, samplefile, sources, verify
from .chain import build_chain, chain_process, chain_response
from .errors import CicError, ConfigError, SampleIOError, VerificationError
from .mcla import emit_netlist, format_netlist

DEFAULTS: dict[str, dict[str, str]] = {
    "cic": {
        "N": "5", "M": "1", "R": "16", "B_in": "6",
        "integrator_widths": "", "comb_widths": "", "phase": "0",
        "pipelined": "no",
    },
    "chain": {
        "fs_in": "6144000", "f_pass": "20000", "stop_atten_db": "80",
        "droop_length": "31", "frac_bits": "16",
    },
    "source": {
        "kind": "sine", "n": "16384", "amp": "0.5", "freq": "1000",
        "value": "1", "path": "", "dither": "0",
    },
    "response": {"mode": "cic", "points": "4096", "f_max": ""},
    "snr": {
        "kind": "sdm", "amp": "0.5", "freq": "1000", "fft_len": "8192",
        "skip": "64", "band_lo": "0", "band_hi": "20000", "window": "hann",
        "chain": "yes", "dither": "0",
    },
    "adder": {"width": "8", "mode": "exhaustive", "n": "1000000"},
    "netlist": {"width": "8", "verify_vectors": "10000"},
    "run": {"seed": "1"},
    "output": {"path": "", "report": "", "dir": "."},
}

PRESETS = {
    "pruned": {
        "cic.N": "5", "cic.M": "1", "cic.R": "16", "cic.B_in": "6",
        "cic.integrator_widths": "25,22,20,18,16",
        "cic.comb_widths": "16,16,16,16,16",
    },
    "full": {
        "cic.N": "5", "cic.M": "1", "cic.R": "16", "cic.B_in": "6",
        "cic.integrator_widths": "", "cic.comb_widths": "",
    },
}

# flag dest -> config key
FLAG_KEYS = {
    "N": "cic.N", "M": "cic.M", "R": "cic.R", "B_in": "cic.B_in",
    "integrator_widths": "cic.integrator_widths", "comb_widths": "cic.comb_widths",
    "phase": "cic.phase", "pipelined": "cic.pipelined",
    "fs_in": "chain.fs_in", "f_pass": "chain.f_pass",
    "source": "source.kind", "n": "source.n", "amp": "source.amp",
    "freq": "source.freq", "value": "source.value", "input": "source.path",
    "mode": None, "points": "response.points", "f_max": "response.f_max",
    "fft_len": "snr.fft_len", "band_hi": "snr.band_hi", "no_chain": "snr.chain",
    "width": None, "seed": "run.seed",
    "output": "output.path", "report": "output.report", "outdir": "output.dir",
}


class Config:
    def __init__(self, parser: configparser.ConfigParser):
        self.cp = parser

    def get(self, key: str) -> str:
        section, name = key.split(".", 1)
        try:
            return self.cp[section][name].strip()
        except KeyError:
            raise ConfigError(f"unknown config key {key}") from None

    def set(self, key: str, value: str) -> None:
        section, name = key.split(".", 1)
        if not self.cp.has_section(section):
            self.cp.add_section(section)
        self.cp[section][name] = str(value)

    def int(self, key: str) -> int:
        try:
            return int(self.get(key), 0)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {self.get(key)!r}") from None

    def float(self, key: str) -> float:
        try:
            return float(self.get(key))
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {self.get(key)!r}") from None

    def bool(self, key: str) -> bool:
        v = self.get(key).lower()
        if v in ("1", "yes", "true", "on"):
            return True
        if v in ("0", "no", "false", "off"):
            return False
        raise ConfigError(f"{key} must be yes/no, got {v!r}")

    def int_list(self, key: str) -> list[int] | None:
        v = self.get(key)
        if not v:
            return None
        try:
            return [int(x) for x in v.replace(" ", "").split(",")]
        except ValueError:
            raise ConfigError(f"{key} must be a comma-separated list of ints") from None


def load_config(args: argparse.Namespace, command: str) -> Config:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_dict(DEFAULTS)
    cfg = Config(cp)
    if getattr(args, "preset", None):
        for k, v in PRESETS[args.preset].items():
            cfg.set(k, v)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise SampleIOError(f"cannot read config {args.config!r}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {args.config!r}: {exc}") from exc
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is None or value is False:
            continue
        if dest == "mode":
            key = "adder.mode" if command == "adder-verify" else "response.mode"
        elif dest == "width":
            key = "adder.width" if command == "adder-verify" else "netlist.width"
        elif dest == "n" and command == "adder-verify":
            key = "adder.n"
        elif dest == "no_chain":
            value = "no"
        elif dest == "pipelined":
            value = "yes"
        elif isinstance(value, list):
            value = ",".join(str(v) for v in value)
        cfg.set(key, str(value))
    for item in getattr(args, "set", None) or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg.set(k.strip(), v.strip())
    return cfg


# -- shared builders ---------------------------------------------------------


def make_design(cfg: Config) -> cic.CicDesign:
    params = cic.CicParams(
        cfg.int("cic.N"), cfg.int("cic.M"), cfg.int("cic.R"), cfg.int("cic.B_in")
    )
    return cic.design(params, cfg.int_list("cic.integrator_widths"), cfg.int_list("cic.comb_widths"))


def make_chain(cfg: Config, design: cic.CicDesign):
    return build_chain(
        design,
        fs_in=cfg.float("chain.fs_in"),
        f_pass=cfg.float("chain.f_pass"),
        stop_atten_db=cfg.float("chain.stop_atten_db"),
        droop_length=cfg.int("chain.droop_length"),
        frac_bits=cfg.int("chain.frac_bits"),
    )


def make_source(cfg: Config, width: int) -> np.ndarray:
    kind = cfg.get("source.kind")
    n = cfg.int("source.n")
    fs = cfg.float("chain.fs_in")
    seed = cfg.int("run.seed")
    if n < 0:
        raise ConfigError("source.n must be >= 0")
    if kind == "file":
        sf = samplefile.read_samples(cfg.get("source.path"))
        if sf.width != width:
            raise ConfigError(f"input file width {sf.width} != B_in {width}")
        return sf.samples
    if kind == "impulse":
        return sources.gen_impulse(n, cfg.int("source.value"))
    if kind == "dc":
        return sources.gen_dc(n, cfg.int("source.value"))
    if kind == "sine":
        return sources.gen_sine(cfg.float("source.amp"), cfg.float("source.freq"), fs, n, width)
    if kind == "noise":
        return sources.gen_noise(n, width, seed)
    if kind == "sdm":
        return sources.sdm_sine(
            cfg.float("source.amp"), cfg.float("source.freq"), fs, n,
            seed=seed, dither=cfg.float("source.dither"), width=width,
        )
    raise ConfigError(
        f"source.kind must be one of file, impulse, dc, sine, noise, sdm; got {kind!r}"
    )


def _report(lines: dict[str, object], section: str) -> str:
    out = [f"[{section}]"]
    for k, v in lines.items():
        if isinstance(v, (list, tuple)):
            v = ",".join(str(x) for x in v)
        out.append(f"{k} = {v}")
    return "\n".join(out) + "\n"


def _emit(text: str, path: str) -> None:
    sys.stdout.write(text)
    if path:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise SampleIOError(f"cannot write report {path!r}: {exc}") from exc


# -- subcommands ---------------------------------------------------------------


def cmd_design(cfg: Config) -> int:
    d = make_design(cfg)
    p = d.params
    text = _report({
        "N": p.N, "M": p.M, "R": p.R, "B_in": p.B_in,
        "g_max": d.g_max,
        "b_max": d.b_max,
        "full_width": d.full_width,
        "integrator_widths": d.integrator_widths,
        "comb_widths": d.comb_widths,
        "output_width": d.output_width,
        "output_shift": d.output_shift,
        "truncation_error_bound": cic.truncation_error_bound(d),
    }, "design")
    _emit(text, cfg.get("output.report"))
    return 0


def cmd_simulate(cfg: Config) -> int:
    d = make_design(cfg)
    x = make_source(cfg, d.params.B_in)
    pipelined = cfg.bool("cic.pipelined")
    state = cic.init_state(d, cfg.int("cic.phase"))
    run = cic.process_pipelined if pipelined else cic.process
    y = run(d, state, x)
    fs_out = int(round(cfg.float("chain.fs_in") / d.params.R))
    if cfg.get("output.path"):
        samplefile.write_samples(cfg.get("output.path"), y, d.output_width, fs_out)
    text = _report({
        "samples_in": state.samples_in,
        "samples_out": state.samples_out,
        "pipelined": "yes" if pipelined else "no",
        "latency_samples": d.params.N - 1 if pipelined else 0,
        "output_width": d.output_width,
        "output_shift": d.output_shift,
        "integrator_wraps": [int(w) for w in state.wraps],
        "truncation_error_bound": cic.truncation_error_bound(d),
    }, "simulate")
    _emit(text, cfg.get("output.report"))
    return 0


def cmd_chain(cfg: Config) -> int:
    d = make_design(cfg)
    chain = make_chain(cfg, d)
    x = make_source(cfg, d.params.B_in)
    y = chain_process(chain, x)
    width = min(d.output_width + 1, 32)
    if cfg.get("output.path"):
        samplefile.write_samples(cfg.get("output.path"), y, width, int(round(chain.output_rate)))
    text = _report({
        "samples_in": int(x.size),
        "samples_out": int(y.size),
        "stage_factors": chain.stage_factors,
        "output_rate_hz": f"{chain.output_rate:.9g}",
        "fir_lengths": [len(f) for f in chain.firs],
        "dc_gain": f"{chain.dc_gain:.9g}",
    }, "chain")
    _emit(text, cfg.get("output.report"))
    return 0


def response_grid(cfg: Config) -> np.ndarray:
    fs = cfg.float("chain.fs_in")
    f_max = cfg.float("response.f_max") if cfg.get("response.f_max") else fs / 2
    points = cfg.int("response.points")
    if points < 1:
        raise ConfigError("response.points must be >= 1")
    if not 0 < f_max <= fs / 2:
        raise ConfigError(f"response.f_max must be in (0, {fs / 2}] Hz, got {f_max}")
    return np.arange(points + 1) * (f_max / points)


def cmd_response(cfg: Config) -> int:
    d = make_design(cfg)
    grid = response_grid(cfg)
    mode = cfg.get("response.mode")
    fs = cfg.float("chain.fs_in")
    if mode == "cic":
        mag = cic.frequency_response_mag(d.params, grid / fs) / d.g_max
        with np.errstate(divide="ignore"):
            db = np.maximum(20 * np.log10(mag), analysis.DB_FLOOR)
    elif mode == "chain":
        db = chain_response(make_chain(cfg, d), grid)
    else:
        raise ConfigError(f"response.mode must be 'cic' or 'chain', got {mode!r}")
    path = cfg.get("output.path")
    if path:
        analysis.export_csv((grid, db), path)
    else:
        sys.stdout.write(analysis.format_csv(grid, db))
    return 0


def cmd_snr(cfg: Config) -> int:
    d = make_design(cfg)
    fs = cfg.float("chain.fs_in")
    use_chain = cfg.bool("snr.chain")
    n_fft = cfg.int("snr.fft_len")
    skip = cfg.int("snr.skip")
    window = cfg.get("snr.window")
    band = (cfg.float("snr.band_lo"), cfg.float("snr.band_hi"))
    seed = cfg.int("run.seed")
    amp = cfg.float("snr.amp")

    chain = make_chain(cfg, d) if use_chain else None
    D = chain.total_decimation if chain else 1
    fs_out = fs / D
    k = max(int(round(cfg.float("snr.freq") / (fs_out / n_fft))), 1)
    tone = k * fs_out / n_fft
    n_in = (n_fft + skip) * D

    kind = cfg.get("snr.kind")
    if kind == "sdm":
        x = sources.sdm_sine(amp, tone, fs, n_in, seed=seed,
                             dither=cfg.float("snr.dither"), width=d.params.B_in)
    elif kind == "sine":
        phase = sources.make_rng(seed).uniform(0, 2 * np.pi)
        x = amp * np.sin(2 * np.pi * tone / fs * np.arange(n_in) + phase)
    else:
        raise ConfigError(f"snr.kind must be 'sdm' or 'sine', got {kind!r}")

    before_seg = x[skip * D:(skip + n_fft) * D]
    before = analysis.spectrum(before_seg, fs, window)
    result: dict[str, object] = {
        "fs_in_hz": f"{fs:.9g}",
        "tone_hz": f"{tone:.9g}",
        "band_hz": f"{band[0]:.9g},{band[1]:.9g}",
        "window": window,
        "fft_len_out": n_fft,
        "before_db": f"{analysis.measure_snr(before, tone, band):.6f}",
    }
    outdir = Path(cfg.get("output.dir") or ".")
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SampleIOError(f"cannot create {outdir}: {exc}") from exc
    analysis.export_csv(before, outdir / "snr_before.csv")
    if chain is not None:
        if kind != "sdm":
            raise ConfigError("the chain needs integer input; use snr.kind = sdm")
        y = chain_process(chain, x)[skip:skip + n_fft]
        after = analysis.spectrum(y, fs_out, window, full_scale=chain.dc_gain)
        result["after_db"] = f"{analysis.measure_snr(after, tone, band):.6f}"
        analysis.export_csv(after, outdir / "snr_after.csv")
    text = _report(result, "snr")
    _emit(text, str(outdir / "snr_report.txt"))
    return 0


def cmd_adder_verify(cfg: Config) -> int:
    width = cfg.int("adder.width")
    mode = cfg.get("adder.mode")
    reports = [
        verify.verify_adder(width, mode, cfg.int("adder.n"), cfg.int("run.seed")),
        verify.verify_block_identity(),
    ]
    text = "".join(f"{r}\n" for r in reports)
    _emit(text, cfg.get("output.report"))
    if not all(r.passed for r in reports):
        raise VerificationError("adder equivalence failed")
    return 0


def cmd_netlist(cfg: Config) -> int:
    net = emit_netlist(cfg.int("netlist.width"))
    rep = verify.verify_netlist(net, "random", cfg.int("netlist.verify_vectors"), cfg.int("run.seed"))
    if not rep.passed:
        raise VerificationError(f"netlist self-check failed: {rep}")
    text = format_netlist(net)
    path = cfg.get("output.path")
    if path:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise SampleIOError(f"cannot write netlist {path!r}: {exc}") from exc
        sys.stdout.write(
            f"{rep}\ngates={len(net.gates)} group_blocks={net.group_blocks()} -> {path}\n"
        )
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "design": cmd_design,
    "simulate": cmd_simulate,
    "chain": cmd_chain,
    "response": cmd_response,
    "snr": cmd_snr,
    "adder-verify": cmd_adder_verify,
    "netlist": cmd_netlist,
}


def _widths(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cicdecim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--seed", type=int)

    cicopts = argparse.ArgumentParser(add_help=False)
    cicopts.add_argument("--N", type=int)
    cicopts.add_argument("--M", type=int)
    cicopts.add_argument("--R", type=int)
    cicopts.add_argument("--B-in", dest="B_in", type=int)
    cicopts.add_argument("--integrator-widths", type=_widths)
    cicopts.add_argument("--comb-widths", type=_widths)
    cicopts.add_argument("--fs-in", type=float)
    cicopts.add_argument("--f-pass", type=float)

    srcopts = argparse.ArgumentParser(add_help=False)
    srcopts.add_argument("--source", choices=["file", "impulse", "dc", "sine", "noise", "sdm"])
    srcopts.add_argument("--input", help="input sample file (implies --source file)")
    srcopts.add_argument("--n", type=int)
    srcopts.add_argument("--amp", type=float)
    srcopts.add_argument("--freq", type=float)
    srcopts.add_argument("--value", type=int)

    p = sub.add_parser("design", parents=[common, cicopts], help="register sizing report")
    p.add_argument("--report")

    p = sub.add_parser("simulate", parents=[common, cicopts, srcopts], help="run the CIC alone")
    p.add_argument("--pipelined", action="store_true")
    p.add_argument("--phase", type=int)
    p.add_argument("--output")
    p.add_argument("--report")

    p = sub.add_parser("chain", parents=[common, cicopts, srcopts], help="run the full /128 chain")
    p.add_argument("--output")
    p.add_argument("--report")

    p = sub.add_parser("response", parents=[common, cicopts], help="magnitude response CSV")
    p.add_argument("--mode", choices=["cic", "chain"])
    p.add_argument("--points", type=int)
    p.add_argument("--f-max", type=float)
    p.add_argument("--output")

    p = sub.add_parser("snr", parents=[common, cicopts], help="in-band SNR before/after decimation")
    p.add_argument("--fft-len", type=int)
    p.add_argument("--band-hi", type=float)
    p.add_argument("--no-chain", action="store_true")
    p.add_argument("--outdir")

    p = sub.add_parser("adder-verify", parents=[common], help="MCLA equivalence sweep")
    p.add_argument("--width", type=int)
    p.add_argument("--mode", choices=["exhaustive", "random"])
    p.add_argument("--n", type=int)
    p.add_argument("--report")

    p = sub.add_parser("netlist", parents=[common], help="emit a structural MCLA netlist")
    p.add_argument("--width", type=int)
    p.add_argument("--output")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "input", None):
        args.source = "file"
    try:
        cfg = load_config(args, args.command)
        return COMMANDS[args.command](cfg)
    except CicError as exc:
        print(f"cicdecim {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"cicdecim {args.command}: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
