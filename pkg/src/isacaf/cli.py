"""Command-line entry point: ``isacaf run | af | metrics``.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .ambiguity import ambiguity_surface, zero_delay_cut, zero_doppler_cut
from .errors import ConfigError, InputError
from .experiments import FULL_R, run_campaign
from .io import (
    PRESETS,
    config_to_tree,
    export_cut,
    export_surface,
    metrics_to_tree,
    parse_config,
    recompute_metrics,
    render_table,
    write_campaign,
    write_manifest,
)
from .metrics import cut_metrics
from .waveforms import generate_symbols, modulate

log = logging.getLogger("isacaf")

EXIT_CONFIG = 2
EXIT_IO = 3


def _add_signal_options(p: argparse.ArgumentParser):
    g = p.add_argument_group("signal")
    g.add_argument("--config", type=Path, help="JSON/YAML config file (flags override it)")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--waveform", action="append", help="ofdm, otfs, afdm, cpafdm (repeatable or comma list)")
    g.add_argument("--N", type=int)
    g.add_argument("--K", type=int)
    g.add_argument("--L", type=int)
    g.add_argument("--c1", type=float)
    g.add_argument("--c2", type=float)
    g.add_argument("--perm-seed", type=int, dest="perm_seed")
    g.add_argument("--mode", choices=["random", "unimodular"])
    g.add_argument("--M", type=int)
    g.add_argument("--seed", type=int)
    a = p.add_argument_group("ambiguity function")
    a.add_argument("--otau", type=int, dest="O_tau")
    a.add_argument("--onu", type=int, dest="O_nu")
    a.add_argument("--lh", type=int, dest="L_h")
    a.add_argument("--window", choices=["hann", "kaiser", "rectangular"])
    a.add_argument("--kaiser-beta", type=float, dest="kaiser_beta")
    a.add_argument("--numax", type=float, dest="nu_max")
    p.add_argument("--ts", type=float, dest="T_s", help="sample period in seconds (adds physical-unit columns)")
    p.add_argument("--out-dir", type=Path, default=Path("out"))


def _overrides(args) -> dict:
    tree: dict = {}
    for key in ("N", "K", "L", "c1", "c2", "perm_seed", "mode", "M", "seed", "T_s"):
        value = getattr(args, key, None)
        if value is not None:
            tree[key] = value
    for key in ("R", "averaging", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            tree[key] = value
    if getattr(args, "full_scale", False):
        tree["R"] = FULL_R
    if getattr(args, "surface", False):
        tree["keep_surface"] = True
    if getattr(args, "no_perm_randomization", False):
        tree["randomize_permutation"] = False
    if args.waveform:
        tree["waveforms"] = [w.strip() for item in args.waveform for w in item.split(",") if w.strip()]
    af = {k: getattr(args, k) for k in ("O_tau", "O_nu", "L_h", "window", "kaiser_beta", "nu_max")}
    af = {k: v for k, v in af.items() if v is not None}
    if af:
        tree["af"] = af
    return tree


def cmd_run(args) -> int:
    cfg = parse_config(args.config, _overrides(args), args.preset)
    log.info("running %s campaign over %d waveform(s)", cfg.mode, len(cfg.waveforms))
    result = run_campaign(cfg)
    files = write_campaign(result, args.out_dir)
    write_manifest(cfg, files, args.out_dir, result.provenance)
    sys.stdout.write(render_table(result))
    return 0


def cmd_af(args) -> int:
    cfg = parse_config(args.config, _overrides(args), args.preset)
    if len(cfg.waveforms) != 1:
        raise ConfigError("the af subcommand takes exactly one --waveform", key="waveforms")
    spec = cfg.waveforms[0]
    if cfg.mode == "random":
        x = generate_symbols("random_qam", cfg.N, cfg.M, seed=cfg.master_seed)
    else:
        x = generate_symbols("unimodular", cfg.N)
    surface = ambiguity_surface(modulate(spec, x), cfg.af)
    out = args.out_dir
    files = [export_surface(surface, out / f"{spec.kind}_surface.csv", args.layout)]
    report = {"waveform": spec.label, "peak_value_raw": surface.peak_value_raw}
    for cut in (zero_doppler_cut(surface), zero_delay_cut(surface)):
        m = cut_metrics(cut)
        files += export_cut(cut, m, out / f"{spec.kind}_{cut.kind}.csv")
        report[cut.kind] = metrics_to_tree(m)
    write_manifest(cfg, files, out)
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return 0


def cmd_metrics(args) -> int:
    m = recompute_metrics(args.cut)
    sys.stdout.write(json.dumps(metrics_to_tree(m), indent=2) + "\n")
    return 0


def cmd_config(args) -> int:
    cfg = parse_config(args.config, _overrides(args), args.preset)
    sys.stdout.write(json.dumps(config_to_tree(cfg), indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isacaf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a random or unimodular campaign")
    _add_signal_options(run)
    run.add_argument("--R", type=int, help="realizations in random mode (default 100)")
    run.add_argument("--full-scale", action="store_true", help=f"use R={FULL_R}")
    run.add_argument("--averaging", choices=["magnitude", "power"])
    run.add_argument("--workers", type=int)
    run.add_argument("--surface", action="store_true", help="also export full AF surfaces")
    run.add_argument("--no-perm-randomization", action="store_true",
                     help="keep the configured CP-AFDM permutation in random mode")
    run.set_defaults(func=cmd_run)

    af = sub.add_parser("af", help="surface and cuts of a single signal")
    _add_signal_options(af)
    af.add_argument("--layout", choices=["matrix", "triplets"], default="matrix")
    af.set_defaults(func=cmd_af)

    met = sub.add_parser("metrics", help="recompute metrics from an exported cut CSV")
    met.add_argument("cut", type=Path)
    met.set_defaults(func=cmd_metrics)

    show = sub.add_parser("config", help="print the resolved configuration")
    _add_signal_options(show)
    show.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        key = getattr(exc, "key", None)
        print(f"configuration error{f' [{key}]' if key else ''}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
