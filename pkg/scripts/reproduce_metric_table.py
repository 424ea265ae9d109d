#!/usr/bin/env python3
"""Unimodular metric table at N=144, K=L=12, O_tau=O_nu=4, L_h=4.

Writes cuts, metrics and the table to --out-dir and prints the table.
"""

import argparse
import sys
from pathlib import Path

from isacaf.experiments import reference_preset, run_campaign
from isacaf.io import render_table, write_campaign, write_manifest
from isacaf.waveforms import PermutationSpec, WaveformSpec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--perm-seed", type=int, default=0, help="CP-AFDM permutation seed")
    p.add_argument("--alpha", type=int, default=None, help="AFDM c1 = (2*alpha+1)/(2N); default keeps c1 = 5/(2N)")
    p.add_argument("--surface", action="store_true")
    p.add_argument("--out-dir", type=Path, default=Path("out/table"))
    args = p.parse_args(argv)

    N = 144
    c1 = None if args.alpha is None else (2 * args.alpha + 1) / (2 * N)
    waveforms = (
        WaveformSpec.ofdm(N),
        WaveformSpec.otfs(12, 12),
        WaveformSpec.afdm(N, c1),
        WaveformSpec.cpafdm(N, c1, perm=PermutationSpec.seeded(args.perm_seed)),
    )
    cfg = reference_preset(waveforms=waveforms, keep_surface=args.surface)
    result = run_campaign(cfg)
    files = write_campaign(result, args.out_dir)
    write_manifest(cfg, files, args.out_dir, result.provenance)
    sys.stdout.write(render_table(result))


if __name__ == "__main__":
    main()
