"""Command-line entry point: ``ibilab {dpss,s2ibi,bound,ber,reproduce-paper}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import DomainError, NumericalError, __version__
from .channel import PRNG_NAME
from .config import ConfigError, ExperimentConfig, PROFILES, TAP_SPACING, parse_config
from .ibi import s2ibi_sweep
from .prolate import dump_csv, generate_dpss
from .simulate import SimConfig, run_ber

log = logging.getLogger("ibilab")

S2IBI_COLUMNS = ["domain", "eta", "s2ibi_db", "s2ibi_bound_db", "ibi_energy", "bound_energy",
                 "channel_id", "seed"]
BOUND_COLUMNS = ["domain", "eta", "bound_energy", "ibi_energy", "s2ibi_bound_db", "s2ibi_db",
                 "dominates", "channel_id", "seed"]
BER_COLUMNS = ["domain", "eta", "snr_db", "ber", "errors", "bits", "ci_low", "ci_high", "seed"]
SNR_REFERENCE = ("noise variance 10**(-snr_db/10) per complex sample; unit average transmit sample "
                 "energy; channel gains normalized to unit total power")


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _resolve_out(out: str | None, default_name: str) -> tuple[Path, Path]:
    """Return ``(csv_path, directory)`` for an ``--out`` that is a file or a directory."""
    target = Path(out or ".")
    if target.suffix == ".csv":
        directory = target.parent if str(target.parent) else Path(".")
        csv_path = target
    else:
        directory = target
        csv_path = target / default_name
    directory.mkdir(parents=True, exist_ok=True)
    return csv_path, directory


def _threads(args, cfg: ExperimentConfig | None) -> int:
    if args.threads:
        return args.threads
    env = os.environ.get("IBILAB_THREADS")
    if env:
        return max(1, int(env))
    return cfg.threads if cfg else 1


def _load(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else parse_config({})
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.document["seed"] = args.seed
    return cfg


def s2ibi_rows(cfg: ExperimentConfig, spec, threads: int) -> list[dict]:
    reports = s2ibi_sweep(cfg.domains, cfg.eta, spec, cfg.layout,
                          ps_half_bandwidth=cfg.ps_half_bandwidth, threads=threads)
    rows = []
    for r, eta in zip(reports, [e for _ in cfg.domains for e in cfg.eta]):
        rows.append({
            "domain": r.domain, "eta": eta, "s2ibi_db": r.s2ibi_db,
            "s2ibi_bound_db": r.s2ibi_lower_bound_db, "ibi_energy": r.total_energy,
            "bound_energy": r.bound_energy, "channel_id": r.channel_id, "seed": spec.seed,
            "dominates": bool(r.bound_energy >= r.total_energy) if any(
                p.is_fractional for p in spec.paths) else "",
        })
    return rows


def ber_rows(cfg: ExperimentConfig, spec, threads: int) -> list[dict]:
    rows = []
    for domain in cfg.domains:
        for eta in cfg.eta:
            sim = SimConfig(domain, eta, spec, cfg.layout, tuple(cfg.snr_db), cfg.num_frames,
                            cfg.seed, redraw_channel=cfg.redraw_channel,
                            ps_half_bandwidth=cfg.ps_half_bandwidth)
            curve = run_ber(sim, threads=threads)
            log.info("ber %s eta=%.2f done", domain, eta)
            for p in curve.points:
                lo, hi = p.wilson_interval()
                rows.append({"domain": domain, "eta": eta, "snr_db": p.snr_db, "ber": p.ber,
                             "errors": p.error_count, "bits": p.bit_count, "ci_low": lo,
                             "ci_high": hi, "seed": cfg.seed})
    return rows


def _cmd_dpss(args, written: list) -> dict:
    cfg = _load(args)
    length = args.length or cfg.dpss["length"]
    w = args.half_bandwidth or cfg.dpss["half_bandwidth"]
    order = args.order or cfg.dpss["order"]
    dpss = generate_dpss(length, w, order)
    csv_path, directory = _resolve_out(args.out, "dpss.csv")
    written.append(csv_path)
    dump_csv(dpss, csv_path)
    return {"directory": directory, "config": {"length": length, "half_bandwidth": w, "order": order},
            "seed": None, "extra": {"diagnostics": dpss.diagnostics}}


def _cmd_table(args, written: list, kind: str) -> dict:
    cfg = _load(args)
    threads = _threads(args, cfg)
    spec = cfg.channel_spec()
    csv_path, directory = _resolve_out(args.out, f"{kind}.csv")
    written.append(csv_path)
    if kind == "ber":
        write_csv(csv_path, BER_COLUMNS, ber_rows(cfg, spec, threads))
    else:
        columns = S2IBI_COLUMNS if kind == "s2ibi" else BOUND_COLUMNS
        write_csv(csv_path, columns, s2ibi_rows(cfg, spec, threads))
    extra = {"channel": json.loads(spec.to_json())}
    if kind == "ber":
        extra["snr_reference"] = SNR_REFERENCE
    return {"directory": directory, "config": cfg.document, "seed": cfg.seed, "extra": extra}


def _cmd_reproduce(args, written: list) -> dict:
    cfg = _load(args)
    threads = _threads(args, cfg)
    directory = Path(args.out or "paper_results")
    directory.mkdir(parents=True, exist_ok=True)
    for profile in PROFILES:
        for taps in TAP_SPACING:
            cfg.channel = {**cfg.channel, "profile": profile, "taps": taps}
            cfg.channel.pop("decay", None)
            cfg.channel.pop("spacing", None)
            spec = cfg.channel_spec()
            s_path = directory / f"s2ibi_{profile}_{taps}.csv"
            written.append(s_path)
            write_csv(s_path, S2IBI_COLUMNS, s2ibi_rows(cfg, spec, threads))
            log.info("wrote %s", s_path)
            b_path = directory / f"ber_{profile}_{taps}.csv"
            written.append(b_path)
            write_csv(b_path, BER_COLUMNS, ber_rows(cfg, spec, threads))
            log.info("wrote %s", b_path)
    return {"directory": directory, "config": cfg.document, "seed": cfg.seed,
            "extra": {"snr_reference": SNR_REFERENCE}}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file ('-' for stdin)")
    common.add_argument("--out", help="output CSV file or directory")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--threads", type=int, help="worker threads (env IBILAB_THREADS)")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ibilab", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dpss", parents=[common], help="dump DPSS and eigenvalues to CSV")
    p.add_argument("action", nargs="?", choices=["dump"], default="dump")
    p.add_argument("--length", type=int)
    p.add_argument("--half-bandwidth", type=float)
    p.add_argument("--order", type=int)

    sub.add_parser("s2ibi", parents=[common], help="exact S2IBI sweep over domains and eta")
    sub.add_parser("bound", parents=[common], help="IBI upper bound vs exact IBI")
    sub.add_parser("ber", parents=[common], help="Monte-Carlo BER vs SNR")
    sub.add_parser("reproduce-paper", parents=[common],
                   help="all S2IBI and BER tables for mild/severe x integer/fractional channels")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    written: list[Path] = []
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        if args.command == "dpss":
            info = _cmd_dpss(args, written)
        elif args.command == "reproduce-paper":
            info = _cmd_reproduce(args, written)
        else:
            info = _cmd_table(args, written, args.command)
    except (ConfigError, DomainError) as exc:
        _cleanup(written)
        print(f"ibilab: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError, MemoryError) as exc:
        _cleanup(written)
        print(f"ibilab: numerical failure in {type(exc).__module__}: {exc}", file=sys.stderr)
        return 1
    manifest = {
        "command": args.command,
        "argv": sys.argv[1:] if argv is None else list(argv),
        "config": info["config"],
        "seed": info["seed"],
        "prng": PRNG_NAME,
        "version": __version__,
        "started_utc": started.isoformat(),
        "wall_clock_s": time.perf_counter() - t0,
        "outputs": [str(p) for p in written],
        **info["extra"],
    }
    with open(Path(info["directory"]) / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, default=str)
    return 0


def _cleanup(paths) -> None:
    for p in paths:
        try:
            Path(p).unlink()
        except FileNotFoundError:
            pass


if __name__ == "__main__":
    sys.exit(main())
