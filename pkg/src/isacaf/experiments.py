"""Random-symbol and unimodular AF campaigns over a set of waveforms."""

from __future__ import annotations

import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import __version__
from .ambiguity import (
    AfConfig,
    AfCut,
    AfSurface,
    ambiguity_cuts,
    ambiguity_surface,
    delay_axis,
    doppler_axis,
)
from .errors import ConfigError, InputError
from .metrics import CutMetrics, cut_metrics
from .waveforms import (
    SUPPORTED_QAM,
    PermutationSpec,
    WaveformSpec,
    generate_symbols,
    modulate,
    rng_stream,
)

# realizations per work unit; fixed so the summation order never depends on worker count
CHUNK = 32
FULL_R = 10_000
DESK_R = 100


def default_waveforms(N: int, K: int, L: int, c1=None, c2=None, perm_seed: int = 0):
    return (
        WaveformSpec.ofdm(N),
        WaveformSpec.otfs(K, L),
        WaveformSpec.afdm(N, c1, c2),
        WaveformSpec.cpafdm(N, c1, c2, PermutationSpec.seeded(perm_seed)),
    )


@dataclass(frozen=True)
class CampaignConfig:
    N: int = 144
    K: int = 12
    L: int = 12
    waveforms: tuple[WaveformSpec, ...] | None = None
    mode: str = "unimodular"
    M: int = 16
    R: int = DESK_R
    master_seed: int = 0
    af: AfConfig = field(default_factory=AfConfig)
    randomize_permutation: bool = True
    averaging: str = "magnitude"
    keep_surface: bool = False
    T_s: float | None = None
    workers: int = 1

    def __post_init__(self):
        if self.K * self.L != self.N:
            raise ConfigError(
                f"K*L must equal N (K={self.K}, L={self.L}, N={self.N})", key="K"
            )
        if self.waveforms is None:
            object.__setattr__(self, "waveforms", default_waveforms(self.N, self.K, self.L))
        object.__setattr__(self, "waveforms", tuple(self.waveforms))
        for spec in self.waveforms:
            if spec.N != self.N:
                raise ConfigError(f"{spec.label} has N={spec.N}, campaign N={self.N}", key="N")
        if self.mode not in ("unimodular", "random"):
            raise ConfigError(f"mode must be 'random' or 'unimodular', got {self.mode!r}", key="mode")
        if self.mode == "random":
            if self.M not in SUPPORTED_QAM:
                raise ConfigError(f"M={self.M} is not a supported square QAM size", key="M")
            if self.R < 1:
                raise ConfigError(f"R must be >= 1, got {self.R}", key="R")
            if self.keep_surface and self.R > 1:
                raise ConfigError(
                    "full-surface retention is only available for single-realization runs", key="keep_surface"
                )
        if self.averaging not in ("magnitude", "power"):
            raise ConfigError(f"averaging must be 'magnitude' or 'power', got {self.averaging!r}", key="averaging")
        if self.T_s is not None and not self.T_s > 0:
            raise ConfigError(f"T_s must be positive, got {self.T_s}", key="T_s")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}", key="workers")
        if self.master_seed < 0:
            raise ConfigError("seed must be non-negative", key="seed")


def reference_preset(mode: str = "unimodular", **overrides) -> CampaignConfig:
    """N=144, K=L=12, O_tau=O_nu=4, L_h=4, 16-QAM (desk-scale R unless overridden)."""
    return CampaignConfig(N=144, K=12, L=12, mode=mode, M=16, af=AfConfig(4, 4, 4), **overrides)


@dataclass(frozen=True)
class WaveformResult:
    spec: WaveformSpec
    delay_cut: AfCut
    doppler_cut: AfCut
    delay_metrics: CutMetrics
    doppler_metrics: CutMetrics
    surface: AfSurface | None = None

    @property
    def label(self) -> str:
        return self.spec.label


@dataclass(frozen=True)
class CampaignResult:
    config: CampaignConfig
    waveforms: tuple[WaveformResult, ...]
    provenance: dict

    def __getitem__(self, label: str) -> WaveformResult:
        for w in self.waveforms:
            if w.label == label or w.spec.kind == label:
                return w
        raise KeyError(label)


def average_cuts(cuts: Sequence[AfCut], operand: str = "magnitude") -> AfCut:
    """Elementwise mean of cut magnitudes (or RMS for ``operand='power'``), unit peak."""
    if not cuts:
        raise InputError("no cuts to average")
    first = cuts[0]
    for cut in cuts:
        if cut.axis.shape != first.axis.shape or not np.array_equal(cut.axis, first.axis):
            raise InputError("cannot average cuts with different axes")
    stack = np.stack([c.values if operand == "magnitude" else c.values**2 for c in cuts])
    # summing each column in sorted order makes the mean independent of list order
    acc = np.sort(stack, axis=0).sum(axis=0) / len(cuts)
    if operand == "power":
        acc = np.sqrt(acc)
    return AfCut(acc, first.axis, first.kind).normalized()


def realization_signal(spec: WaveformSpec, cfg: CampaignConfig, r: int) -> np.ndarray:
    """Transmit block of realization ``r``; symbols come from stream ``(seed, r)``."""
    x = generate_symbols("random_qam", cfg.N, cfg.M, seed=(cfg.master_seed, r))
    if spec.kind == "cpafdm" and cfg.randomize_permutation:
        perm = rng_stream(cfg.master_seed, r, 1).permutation(cfg.N)
        spec = replace(spec, perm=PermutationSpec.explicit(perm))
    return modulate(spec, x)


def _chunk_sums(args) -> tuple[np.ndarray, np.ndarray]:
    spec, cfg, start, stop = args
    delay_acc = doppler_acc = 0.0
    for r in range(start, stop):
        dcut, ncut = ambiguity_cuts(realization_signal(spec, cfg, r), cfg.af)
        if cfg.averaging == "power":
            delay_acc = delay_acc + dcut.values**2
            doppler_acc = doppler_acc + ncut.values**2
        else:
            delay_acc = delay_acc + dcut.values
            doppler_acc = doppler_acc + ncut.values
    return delay_acc, doppler_acc


def _averaged_cuts(spec: WaveformSpec, cfg: CampaignConfig, pool) -> tuple[AfCut, AfCut]:
    jobs = [(spec, cfg, a, min(a + CHUNK, cfg.R)) for a in range(0, cfg.R, CHUNK)]
    parts = pool.map(_chunk_sums, jobs) if pool is not None else map(_chunk_sums, jobs)
    delay_acc = doppler_acc = 0.0
    for d, n in parts:  # fixed chunk order
        delay_acc = delay_acc + d
        doppler_acc = doppler_acc + n
    delay_acc, doppler_acc = delay_acc / cfg.R, doppler_acc / cfg.R
    if cfg.averaging == "power":
        delay_acc, doppler_acc = np.sqrt(delay_acc), np.sqrt(doppler_acc)
    af = cfg.af
    return (
        AfCut(delay_acc, delay_axis(cfg.N, af.O_tau), "zero_doppler").normalized(),
        AfCut(doppler_acc, doppler_axis(cfg.N, af.O_nu, af.nu_max), "zero_delay").normalized(),
    )


def _result(spec, delay_cut, doppler_cut, surface=None) -> WaveformResult:
    return WaveformResult(spec, delay_cut, doppler_cut, cut_metrics(delay_cut), cut_metrics(doppler_cut), surface)


def run_campaign(cfg: CampaignConfig) -> CampaignResult:
    """Run every waveform of ``cfg`` and attach cut metrics.

    Random mode averages per-realization peak-normalized cuts over ``R``
    realizations; the result does not depend on ``cfg.workers``.
    """
    results = []
    pool = None
    if cfg.mode == "random" and cfg.workers > 1 and cfg.R > CHUNK:
        pool = ProcessPoolExecutor(max_workers=cfg.workers)
    try:
        for spec in cfg.waveforms:
            if cfg.mode == "unimodular":
                s = modulate(spec, generate_symbols("unimodular", cfg.N))
                surface = ambiguity_surface(s, cfg.af) if cfg.keep_surface else None
                results.append(_result(spec, *ambiguity_cuts(s, cfg.af), surface))
            elif cfg.R == 1 and cfg.keep_surface:
                s = realization_signal(spec, cfg, 0)
                results.append(_result(spec, *ambiguity_cuts(s, cfg.af), ambiguity_surface(s, cfg.af)))
            else:
                results.append(_result(spec, *_averaged_cuts(spec, cfg, pool)))
    finally:
        if pool is not None:
            pool.shutdown()
    provenance = {
        "tool": "isacaf",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "mode": cfg.mode,
        "master_seed": cfg.master_seed,
        "averaging": cfg.averaging if cfg.mode == "random" else None,
        "symbol_streams": "(master_seed, r)" if cfg.mode == "random" else None,
        "permutation_streams": "(master_seed, r, 1)"
        if cfg.mode == "random" and cfg.randomize_permutation
        else None,
    }
    return CampaignResult(cfg, tuple(results), provenance)
