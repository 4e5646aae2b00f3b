"""File formats: JSON for specs/signals/results, CSV for spike trains.

Every float is written with 17 significant digits, which round-trips any
double exactly through its decimal representation, so files re-read into
bit-identical values.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .encoders import ConstantTest, CosineTest, RampTest, SpikeTrain
from .generators import GeneratorSpec
from .spaces import PeriodicSignal

__all__ = [
    "fmt17",
    "dumps_json17",
    "spec_to_obj",
    "spec_from_obj",
    "signal_to_obj",
    "signal_from_obj",
    "train_to_csv",
    "train_from_csv",
    "train_to_obj",
    "train_from_obj",
    "decode_result_to_obj",
    "parse_test_function",
    "format_test_function",
]


def fmt17(x: float) -> str:
    """17-significant-digit decimal, the shortest exact-round-trip guarantee."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError("cannot serialize non-finite float")
    return format(float(x), ".17g")


def dumps_json17(obj) -> str:
    """JSON text with all floats rendered through :func:`fmt17`."""
    return _emit(obj)


def _emit(obj) -> str:
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_emit(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt17(float(obj))
    return json.dumps(obj)


# ---------------------------------------------------------------------------
# generator specs
# ---------------------------------------------------------------------------

def spec_to_obj(spec: GeneratorSpec) -> dict:
    obj = {"family": spec.family, "period": spec.period, "centered": spec.centered}
    if spec.family == "bspline":
        obj["degree"] = spec.degree
    if spec.family == "tabulated":
        obj["samples"] = list(spec.samples)
        obj["step"] = spec.step
    return obj


def spec_from_obj(obj: dict) -> GeneratorSpec:
    family = obj["family"]
    period = int(obj["period"])
    centered = bool(obj.get("centered", True))
    if family == "bspline":
        return GeneratorSpec.bspline(int(obj["degree"]), period, centered)
    if family == "sinc":
        return GeneratorSpec.sinc(period)
    if family == "tabulated":
        return GeneratorSpec.tabulated(obj["samples"], float(obj["step"]), period)
    raise ValueError(f"unknown generator family {family!r}")


# ---------------------------------------------------------------------------
# signals
# ---------------------------------------------------------------------------

def signal_to_obj(sig: PeriodicSignal) -> dict:
    return {
        "generator": spec_to_obj(sig.spec),
        "K": sig.K,
        "coeffs": list(sig.coeffs),
    }


def signal_from_obj(obj: dict) -> PeriodicSignal:
    spec = spec_from_obj(obj["generator"])
    coeffs = np.asarray(obj["coeffs"], dtype=float)
    if int(obj["K"]) != spec.period:
        raise ValueError("K field disagrees with generator period")
    return PeriodicSignal(spec, coeffs)


# ---------------------------------------------------------------------------
# spike trains
# ---------------------------------------------------------------------------

def train_to_csv(train: SpikeTrain) -> str:
    lines = ["t"] + [fmt17(t) for t in train.times]
    return "\n".join(lines) + "\n"


def train_from_csv(text: str, K: int) -> SpikeTrain:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "t":
        raise ValueError("spike CSV must start with header 't'")
    times = np.array([float(ln) for ln in lines[1:]], dtype=float)
    return SpikeTrain(times=times, K=K)


def train_to_obj(train: SpikeTrain) -> dict:
    return {"K": train.K, "times": list(train.times)}


def train_from_obj(obj: dict) -> SpikeTrain:
    return SpikeTrain(times=np.asarray(obj["times"], dtype=float), K=int(obj["K"]))


def decode_result_to_obj(result) -> dict:
    return {
        "coeffs": list(result.coeffs),
        "iterations": result.iterations,
        "residuals": list(result.residual_history),
        "converged": result.converged,
    }


# ---------------------------------------------------------------------------
# test-function mini grammar: kind:param[:param]
# ---------------------------------------------------------------------------

def parse_test_function(text: str):
    """Parse 'cosine:AMP:PERIOD', 'ramp:SPAN' or 'constant:LEVEL'."""
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "cosine":
            amp = float(parts[1]) if len(parts) > 1 else 1.1
            period = float(parts[2]) if len(parts) > 2 else 1.0
            return CosineTest(amplitude=amp, period=period)
        if kind == "ramp":
            return RampTest(span=float(parts[1]))
        if kind == "constant":
            return ConstantTest(level=float(parts[1]))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad test-function spec {text!r}") from exc
    raise ValueError(f"unknown test-function kind {kind!r}")


def format_test_function(phi) -> str:
    if isinstance(phi, CosineTest):
        return f"cosine:{fmt17(phi.amplitude)}:{fmt17(phi.period)}"
    if isinstance(phi, RampTest):
        return f"ramp:{fmt17(phi.span)}"
    if isinstance(phi, ConstantTest):
        return f"constant:{fmt17(phi.level)}"
    raise ValueError("unknown test function")
