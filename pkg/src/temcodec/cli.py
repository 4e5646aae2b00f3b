"""Command-line surface.

Subcommands: analyze, gen-signal, encode, decode, roundtrip, noise-sweep.
Reports go to stdout as JSON with 17-significant-digit floats; diagnostics
go to stderr.  Exit codes: 0 success, 1 usage or file error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import noiselab
from .decoders import (
    build_system,
    decode_frame_iterative,
    decode_pinv,
    decode_pv_iterative,
)
from .encoders import (
    CosineTest,
    EncoderConfig,
    SpikeTrain,
    density_report,
    encode_crossing,
    encode_if,
    sample_amplitudes,
)
from .errors import TemcodecError
from .generators import density_bound, frame_bounds, spectral_profile
from .serialize import (
    decode_result_to_obj,
    dumps_json17,
    parse_test_function,
    signal_from_obj,
    signal_to_obj,
    spec_from_obj,
    train_from_csv,
    train_from_obj,
    train_to_csv,
    train_to_obj,
)
from .spaces import PeriodicSignal, PeriodicSpace, eval_signal, norms

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(USAGE_ERROR)


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_generator(path: str):
    return spec_from_obj(_load_json(path))


def _load_signal(path: str) -> PeriodicSignal:
    return signal_from_obj(_load_json(path))


def _write_text(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_train(path: str, K: int) -> SpikeTrain:
    if path.endswith(".json"):
        return train_from_obj(_load_json(path))
    with open(path, "r", encoding="utf-8") as fh:
        return train_from_csv(fh.read(), K)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_analyze(args) -> int:
    spec = _load_generator(args.generator)
    profile = spectral_profile(spec, grid_size=args.grid, k_max=args.kmax)
    fb = frame_bounds(profile)
    db = density_bound(profile)
    report = {
        "A": fb.lower,
        "B": fb.upper,
        "tau": db.tau if db.is_finite else None,
        "grid": args.grid,
        "kmax": profile.k_max,
    }
    sys.stdout.write(dumps_json17(report) + "\n")
    return 0


def _cmd_gen_signal(args) -> int:
    spec = _load_generator(args.generator)
    rng = np.random.default_rng(args.seed)
    coeffs = rng.uniform(-1.0, 1.0, spec.period)
    sig = PeriodicSignal(spec, coeffs)
    if args.normalize:
        sup = norms(sig).sup_estimate
        sig = PeriodicSignal(spec, coeffs / sup)
    _write_text(args.out, dumps_json17(signal_to_obj(sig)) + "\n")
    return 0


def _sorted_unique_times(train: SpikeTrain) -> SpikeTrain:
    return train


def _cmd_encode(args) -> int:
    sig = _load_signal(args.signal)
    phi = parse_test_function(args.testfn)
    enc = encode_if if args.mode == "if" else encode_crossing
    train = enc(sig, phi, EncoderConfig())
    if args.out and args.out.endswith(".json"):
        _write_text(args.out, dumps_json17(train_to_obj(train)) + "\n")
    else:
        _write_text(args.out, train_to_csv(train))
    return 0


def _run_decoder(name, space, train, y):
    if name in ("pinv", "pinv-weighted"):
        return decode_pinv(build_system(space, train), y, weighted=True)
    if name == "pinv-plain":
        return decode_pinv(build_system(space, train), y, weighted=False)
    if name == "frame":
        gamma = density_report(train).max_gap / space.tau
        return decode_frame_iterative(build_system(space, train), y, gamma=gamma)
    if name == "pv":
        return decode_pv_iterative(space, train, y)
    raise ValueError(f"unknown decoder {name!r}")


def _cmd_decode(args) -> int:
    spec = _load_generator(args.generator)
    space = PeriodicSpace.for_spec(spec)
    train = _load_train(args.train, spec.period)
    phi = parse_test_function(args.testfn)
    y = sample_amplitudes(phi, train)
    result = _run_decoder(args.decoder, space, train, y)
    sys.stdout.write(dumps_json17(decode_result_to_obj(result)) + "\n")
    if args.out:
        sig = PeriodicSignal(spec, result.coeffs)
        _write_text(args.out, dumps_json17(signal_to_obj(sig)) + "\n")
    return 0


def _cmd_roundtrip(args) -> int:
    sig = _load_signal(args.signal)
    spec = sig.spec
    space = PeriodicSpace.for_spec(spec)
    phi = parse_test_function(args.testfn)
    train = encode_crossing(sig, phi, EncoderConfig())
    if args.quantize > 0:
        train = noiselab.quantize_train(train, args.quantize)
    y = sample_amplitudes(phi, train)
    result = _run_decoder(args.decoder, space, train, y)
    err = result.coeffs - sig.coeffs
    report = {
        "spikes": len(train),
        "max_gap": density_report(train).max_gap,
        "coeff_l2_error": float(np.linalg.norm(err)),
        "signal_L2_error": space.norm(err),
        "decoder": args.decoder,
        "quantize": args.quantize,
    }
    sys.stdout.write(dumps_json17(report) + "\n")
    if args.out:
        rec = PeriodicSignal(spec, result.coeffs)
        _write_text(args.out, dumps_json17(signal_to_obj(rec)) + "\n")
    return 0


def _config_from_obj(obj: dict) -> noiselab.NoiseExperimentConfig:
    kwargs = {}
    if "K" in obj:
        kwargs["K"] = int(obj["K"])
    if "generator" in obj:
        kwargs["generator"] = spec_from_obj(obj["generator"])
    if "test_function" in obj:
        tf = obj["test_function"]
        kwargs["test_function"] = CosineTest(
            amplitude=float(tf.get("amplitude", 1.1)),
            period=float(tf.get("period", 1.0)),
        )
    for key in ("trials", "rng_seed", "bins"):
        if key in obj:
            kwargs[key] = int(obj[key])
    if "epsilon_grid" in obj:
        kwargs["epsilon_grid"] = tuple(float(e) for e in obj["epsilon_grid"])
    if "decoder" in obj:
        kwargs["decoder"] = str(obj["decoder"])
    return noiselab.NoiseExperimentConfig(**kwargs)


def _cmd_noise_sweep(args) -> int:
    cfg = _config_from_obj(_load_json(args.config)) if args.config else noiselab.NoiseExperimentConfig()
    summary = noiselab.run_experiment(cfg)
    csv_text = noiselab.summary_to_csv(summary)
    line = dumps_json17(
        {
            "slope": summary.slope,
            "r_squared": summary.r_squared,
            "trials": summary.trials,
            "failed": summary.failed,
        }
    ) + "\n"
    if args.out:
        _write_text(args.out, csv_text)
        sys.stdout.write(line)
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(line)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="temcodec", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="frame bounds and critical density of a generator")
    a.add_argument("--generator", required=True, help="generator spec JSON file")
    a.add_argument("--grid", type=int, default=4096)
    a.add_argument("--kmax", type=int, default=None)
    a.set_defaults(func=_cmd_analyze)

    g = sub.add_parser("gen-signal", help="draw a random signal in the space")
    g.add_argument("--generator", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="normalize to unit sup norm")
    g.add_argument("--out", default=None)
    g.set_defaults(func=_cmd_gen_signal)

    e = sub.add_parser("encode", help="encode a signal into a spike train")
    e.add_argument("--signal", required=True)
    e.add_argument("--testfn", required=True, help="cosine:AMP:PERIOD | ramp:SPAN | constant:LEVEL")
    e.add_argument("--mode", choices=["crossing", "if"], default="crossing")
    e.add_argument("--out", default=None, help=".csv (default) or .json")
    e.set_defaults(func=_cmd_encode)

    d = sub.add_parser("decode", help="decode a spike train back to a signal")
    d.add_argument("--generator", required=True)
    d.add_argument("--train", required=True, help="spike CSV or JSON")
    d.add_argument("--testfn", required=True)
    d.add_argument("--decoder", choices=["pinv", "pinv-plain", "frame", "pv"], default="pinv")
    d.add_argument("--out", default=None, help="write reconstructed signal JSON here")
    d.set_defaults(func=_cmd_decode)

    r = sub.add_parser("roundtrip", help="encode, optionally quantize, decode, report errors")
    r.add_argument("--signal", required=True)
    r.add_argument("--testfn", required=True)
    r.add_argument("--decoder", choices=["pinv", "pinv-plain", "frame", "pv"], default="pinv")
    r.add_argument("--quantize", type=float, default=0.0)
    r.add_argument("--out", default=None)
    r.set_defaults(func=_cmd_roundtrip)

    n = sub.add_parser("noise-sweep", help="quantization-noise experiment, CSV output")
    n.add_argument("--config", default=None, help="experiment config JSON")
    n.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    n.set_defaults(func=_cmd_noise_sweep)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TemcodecError as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return NUMERICAL_ERROR
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
