"""Experiment configuration: JSON documents validated against a schema."""

from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field

import jsonschema

from .basis import DEFAULT_PS_HALF_BANDWIDTH, FrameLayout
from .channel import ChannelSpec, exponential_profile

DEFAULT_ETAS = [0.9, 0.92, 0.93, 0.95, 0.96, 0.98, 1.0]

# Exponential-profile presets: tap magnitude exp(-decay * delay).
PROFILES = {"mild": 0.5, "severe": 0.05}
TAP_SPACING = {"integer": 1.0, "fractional": 0.1}

_number_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "layout": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "N": {"type": "integer", "minimum": 2},
                "L": {"type": "integer", "minimum": 1},
                "D": {"type": "integer", "minimum": 0},
            },
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "profile": {"enum": list(PROFILES)},
                "taps": {"enum": list(TAP_SPACING)},
                "decay": {"type": "number", "exclusiveMinimum": 0},
                "spacing": {"type": "number", "exclusiveMinimum": 0},
                "max_delay": {"type": "number", "exclusiveMinimum": 0},
                "normalize": {"type": "boolean"},
                "seed": {"type": "integer", "minimum": 0},
                "file": {"type": "string"},
            },
        },
        "domains": {"type": "array", "items": {"enum": ["TD", "FD", "PS"]}, "minItems": 1},
        "eta": {"type": "array", "minItems": 1,
                "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
        "snr_db": _number_list,
        "num_frames": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "ps_half_bandwidth": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
        "redraw_channel": {"type": "boolean"},
        "threads": {"type": "integer", "minimum": 1},
        "dpss": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "length": {"type": "integer", "minimum": 1},
                "half_bandwidth": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                "order": {"type": "integer", "minimum": 1},
            },
        },
    },
}

DEFAULTS = {
    "layout": {"N": 129, "L": 21, "D": 16},
    "channel": {"profile": "mild", "taps": "fractional", "max_delay": 15.0, "normalize": True},
    "domains": ["TD", "FD", "PS"],
    "eta": DEFAULT_ETAS,
    "snr_db": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0],
    "num_frames": 100,
    "seed": 2024,
    "ps_half_bandwidth": DEFAULT_PS_HALF_BANDWIDTH,
    "redraw_channel": True,
    "threads": 1,
    "dpss": {"length": 129, "half_bandwidth": 0.45, "order": 116},
}


class ConfigError(ValueError):
    """Malformed or invalid configuration document."""


@dataclass
class ExperimentConfig:
    layout: FrameLayout
    channel: dict
    domains: list
    eta: list
    snr_db: list
    num_frames: int
    seed: int
    ps_half_bandwidth: float
    redraw_channel: bool
    threads: int
    dpss: dict
    document: dict = field(repr=False, default_factory=dict)

    def channel_spec(self) -> ChannelSpec:
        ch = self.channel
        if "file" in ch:
            with open(ch["file"], encoding="utf-8") as fh:
                return ChannelSpec.from_json(fh.read())
        decay = ch.get("decay", PROFILES[ch.get("profile", "mild")])
        spacing = ch.get("spacing", TAP_SPACING[ch.get("taps", "fractional")])
        seed = ch.get("seed", self.seed)
        name = f"{ch.get('profile', 'custom')}-{ch.get('taps', 'custom')}"
        return exponential_profile(decay, spacing, ch["max_delay"], seed,
                                   normalize=ch["normalize"], name=name)


def _merge(defaults: dict, doc: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in doc.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def from_dict(doc: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {exc.message}") from None
    full = _merge(DEFAULTS, doc)
    if "decay" in doc.get("channel", {}) and "profile" not in doc.get("channel", {}):
        full["channel"]["profile"] = "custom"
    lay = full["layout"]
    dp = full["dpss"]
    if dp["order"] > dp["length"]:
        raise ConfigError("config field dpss/order: must not exceed dpss/length")
    return ExperimentConfig(
        layout=FrameLayout(lay["L"], lay["N"], lay["D"]),
        channel=full["channel"],
        domains=list(full["domains"]),
        eta=[float(e) for e in full["eta"]],
        snr_db=[float(s) for s in full["snr_db"]],
        num_frames=full["num_frames"],
        seed=full["seed"],
        ps_half_bandwidth=float(full["ps_half_bandwidth"]),
        redraw_channel=full["redraw_channel"],
        threads=full["threads"],
        dpss=dp,
        document=full,
    )


def parse_config(source=None) -> ExperimentConfig:
    """Load a config from a path, ``"-"``/``None`` for stdin, or a dict."""
    if isinstance(source, dict):
        return from_dict(source)
    if source is None or source == "-":
        text, label = sys.stdin.read(), "<stdin>"
    else:
        label = str(source)
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {label}: {exc}") from None
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{label}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{label}: top-level JSON value must be an object")
    return from_dict(doc)
