#!/usr/bin/env python3
"""AFDM unimodular metrics for c1 = (2*alpha+1)/(2N), c2 = 1/(2N)."""

import argparse

from isacaf.ambiguity import AfConfig, ambiguity_cuts
from isacaf.metrics import cut_metrics
from isacaf.waveforms import WaveformSpec, generate_symbols, modulate


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=144)
    p.add_argument("--alphas", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    args = p.parse_args(argv)

    N = args.N
    x = generate_symbols("unimodular", N)
    print(f"{'alpha':>5} {'c1':>9} {'dtau':>8} {'dnu':>8} {'PSLR_t':>8} {'ISLR_t':>8} {'PSLR_n':>8} {'ISLR_n':>8}")
    for a in args.alphas:
        c1 = (2 * a + 1) / (2 * N)
        d, n = ambiguity_cuts(modulate(WaveformSpec.afdm(N, c1, 1 / (2 * N)), x), AfConfig(4, 4, 4))
        md, mn = cut_metrics(d), cut_metrics(n)
        print(f"{a:5d} {c1:9.6f} {md.width_3db:8.5f} {mn.width_3db:8.5f} "
              f"{md.pslr_db:8.3f} {md.islr_db:8.3f} {mn.pslr_db:8.3f} {mn.islr_db:8.3f}")


if __name__ == "__main__":
    main()
