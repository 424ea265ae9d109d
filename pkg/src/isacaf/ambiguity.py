"""Interpolated, energy-normalized discrete ambiguity function.

For a length-``N`` block ``s`` (unit sample spacing) the engine evaluates

    A(tau, nu) = sum_n s[n] * conj(s~(n - tau)) * exp(-2j*pi*nu*n)

where ``s~`` is the windowed-sinc reconstruction of ``s``. Delay ``tau`` is
sampled every ``1/O_tau`` samples over ``|tau| <= N-1`` and Doppler ``nu``
(cycles per sample) every ``1/(O_nu*N)`` over ``|nu| <= nu_max``. Axes are
reported normalized: ``tau/N`` and ``nu``.

Correlation is aperiodic: samples outside ``0..N-1`` are zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError

WINDOWS = ("hann", "kaiser", "rectangular")


@dataclass(frozen=True)
class AfConfig:
    O_tau: int = 4
    O_nu: int = 4
    L_h: int = 4
    window: str = "hann"
    kaiser_beta: float = 6.0
    nu_max: float = 0.5

    def __post_init__(self):
        for key in ("O_tau", "O_nu", "L_h"):
            value = getattr(self, key)
            if int(value) != value or value < 1:
                raise ConfigError(f"{key} must be an integer >= 1, got {value}", key=key)
        if self.window not in WINDOWS:
            raise ConfigError(f"window must be one of {WINDOWS}, got {self.window!r}", key="window")
        if not 0 < self.nu_max <= 0.5:
            raise ConfigError(f"nu_max must lie in (0, 0.5], got {self.nu_max}", key="nu_max")


@dataclass(frozen=True)
class AfCut:
    """1D slice through the origin; ``kind`` is ``zero_doppler`` or ``zero_delay``."""

    values: np.ndarray
    axis: np.ndarray
    kind: str

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        axis = np.array(self.axis, dtype=float)
        if values.shape != axis.shape or values.ndim != 1:
            raise InputError(f"cut values {values.shape} and axis {axis.shape} do not match")
        if values.size > 1 and not np.all(np.diff(axis) > 0):
            raise InputError("cut axis must be strictly increasing")
        values.flags.writeable = False
        axis.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "axis", axis)

    @property
    def origin(self) -> int:
        return int(np.argmin(np.abs(self.axis)))

    def normalized(self) -> AfCut:
        """Scale to unit value at the axis origin (or unit maximum if that is zero)."""
        ref = self.values[self.origin]
        if not ref > 0:
            ref = self.values.max()
        if not ref > 0:
            raise InputError("cannot normalize an all-zero cut")
        return AfCut(self.values / ref, self.axis, self.kind)


@dataclass(frozen=True)
class AfSurface:
    """``mag[i, j]`` is ``|A|`` at ``delay_axis[i]``, ``doppler_axis[j]``.

    Normalized by the origin value ``A(0, 0) = sum |s|**2`` (``peak_value_raw``).
    The origin is the maximum on the integer-delay rows; at fractional delays
    the windowed-sinc passband gain can lift a few points marginally above 1.
    """

    mag: np.ndarray
    delay_axis: np.ndarray
    doppler_axis: np.ndarray
    peak_value_raw: float
    N: int
    config: AfConfig

    @property
    def origin(self) -> tuple[int, int]:
        return (self.delay_axis.size // 2, self.doppler_axis.size // 2)


def window_taper(x, L_h: int, window: str = "hann", kaiser_beta: float = 6.0) -> np.ndarray:
    """Taper evaluated at (possibly fractional) tap offsets ``x``; zero for ``|x| > L_h``."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= L_h
    if window == "hann":
        w = 0.5 * (1.0 + np.cos(np.pi * x / L_h))
    elif window == "kaiser":
        r = np.clip(1.0 - (x / L_h) ** 2, 0.0, None)
        w = np.i0(kaiser_beta * np.sqrt(r)) / np.i0(kaiser_beta)
    elif window == "rectangular":
        w = np.ones_like(x)
    else:
        raise ConfigError(f"unknown window {window!r}", key="window")
    return np.where(inside, w, 0.0)


def shift_kernel(delta: float, L_h: int, window: str = "hann", kaiser_beta: float = 6.0):
    """Taps ``h[j] = w(j - delta) * sinc(j - delta)`` for ``|j - delta| <= L_h``.

    Returns ``(first_tap_index, taps)``.
    """
    j = np.arange(int(np.ceil(delta - L_h)), int(np.floor(delta + L_h)) + 1)
    x = j - delta
    return int(j[0]), window_taper(x, L_h, window, kaiser_beta) * np.sinc(x)


def fractional_shift(
    s,
    delta: float,
    L_h: int = 4,
    window: str = "hann",
    pad: int = 0,
    kaiser_beta: float = 6.0,
) -> np.ndarray:
    """Evaluate the windowed-sinc reconstruction of ``s`` at ``n - delta``.

    Output index ``i`` corresponds to ``n = i - pad``, for ``n`` in
    ``[-pad, N-1+pad]``. Input samples outside ``0..N-1`` are zero and the
    truncated kernel is not renormalized. ``delta == 0`` returns ``s``
    unchanged (zero-padded by ``pad``).
    """
    s = np.asarray(s, dtype=complex)
    if not 0.0 <= delta < 1.0:
        raise InputError(f"delta must lie in [0, 1), got {delta}")
    N = s.shape[0]
    out = np.zeros(N + 2 * pad, dtype=complex)
    if delta == 0.0:
        out[pad:pad + N] = s
        return out
    j0, h = shift_kernel(delta, L_h, window, kaiser_beta)
    full = np.convolve(s, h)  # full[i] is the value at n = i + j0
    lo = max(-pad, j0)
    hi = min(N - 1 + pad, j0 + full.size - 1)
    if hi >= lo:
        out[lo + pad:hi + pad + 1] = full[lo - j0:hi - j0 + 1]
    return out


def delay_axis(N: int, O_tau: int) -> np.ndarray:
    """Normalized delays ``k/(N*O_tau)`` for ``|k| <= (N-1)*O_tau``."""
    k = np.arange(-(N - 1) * O_tau, (N - 1) * O_tau + 1)
    return k / (N * O_tau)


def doppler_bins(N: int, O_nu: int, nu_max: float) -> np.ndarray:
    M = O_nu * N
    kmax = int(np.floor(nu_max * M + 1e-9))
    return np.arange(-kmax, kmax + 1)


def doppler_axis(N: int, O_nu: int, nu_max: float = 0.5) -> np.ndarray:
    return doppler_bins(N, O_nu, nu_max) / (O_nu * N)


def _lag_products(s: np.ndarray, cfg: AfConfig, d: int) -> np.ndarray:
    """Rows ``p_l[n] = s[n] * conj(s~(n - l - d/O_tau))`` for ``l = 0..N-1``."""
    N = s.shape[0]
    pad = cfg.L_h + 1
    shifted = fractional_shift(s, d / cfg.O_tau, cfg.L_h, cfg.window, pad, cfg.kaiser_beta)
    # extend on the left so n - l down to -(N-1) stays in range (those entries are zero)
    ext = np.concatenate([np.zeros(N - 1 - pad if N - 1 > pad else 0, dtype=complex), shifted])
    offset = ext.size - shifted.size + pad  # ext[offset + m] is sample m
    lags = np.arange(N)[:, None]
    n = np.arange(N)[None, :]
    return s[None, :] * np.conj(ext[offset + n - lags])


def _check_signal(s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.ndim != 1 or s.shape[0] < 2:
        raise InputError(f"signal must be a 1D array with N >= 2, got shape {s.shape}")
    if not np.any(s):
        raise InputError("all-zero signal has no ambiguity peak to normalize")
    return s


def _mirror(half: np.ndarray) -> np.ndarray:
    """Full delay range from rows at ``tau >= 0`` via ``|A(-tau,-nu)| = |A(tau,nu)|``."""
    return np.concatenate([half[:0:-1, ::-1], half], axis=0)


def raw_surface(s, cfg: AfConfig = AfConfig()) -> np.ndarray:
    """Un-normalized ``|A|`` on the full grid (delays x Doppler)."""
    s = _check_signal(s)
    N = s.shape[0]
    M = cfg.O_nu * N
    bins = doppler_bins(N, cfg.O_nu, cfg.nu_max) % M
    n_half = (N - 1) * cfg.O_tau + 1
    half = np.empty((n_half, bins.size))
    for d in range(cfg.O_tau):
        rows = np.arange(N) * cfg.O_tau + d
        keep = rows < n_half
        spectrum = np.fft.fft(_lag_products(s, cfg, d)[keep], n=M, axis=1)
        half[rows[keep]] = np.abs(spectrum[:, bins])
    return _mirror(half)


def ambiguity_surface(s, cfg: AfConfig = AfConfig()) -> AfSurface:
    """Energy-normalized interpolated AF magnitude of ``s``.

    Delay rows ``tau >= 0`` are computed directly (one zero-padded FFT of the
    lag product per row); rows ``tau < 0`` are their point mirrors.
    """
    s = _check_signal(s)
    N = s.shape[0]
    mag = raw_surface(s, cfg)
    peak = float(mag[mag.shape[0] // 2, mag.shape[1] // 2])
    mag = mag / peak
    mag.flags.writeable = False
    return AfSurface(
        mag=mag,
        delay_axis=delay_axis(N, cfg.O_tau),
        doppler_axis=doppler_axis(N, cfg.O_nu, cfg.nu_max),
        peak_value_raw=peak,
        N=N,
        config=cfg,
    )


def zero_doppler_cut(surface: AfSurface) -> AfCut:
    return AfCut(surface.mag[:, surface.origin[1]], surface.delay_axis, "zero_doppler").normalized()


def zero_delay_cut(surface: AfSurface) -> AfCut:
    return AfCut(surface.mag[surface.origin[0], :], surface.doppler_axis, "zero_delay").normalized()


def ambiguity_cuts(s, cfg: AfConfig = AfConfig()) -> tuple[AfCut, AfCut]:
    """Zero-Doppler and zero-delay cuts without forming the surface.

    Same grid and conventions as :func:`ambiguity_surface`; used by the
    Monte-Carlo campaigns where only the cuts are needed.
    """
    s = _check_signal(s)
    N = s.shape[0]
    n_half = (N - 1) * cfg.O_tau + 1
    half = np.empty(n_half)
    for d in range(cfg.O_tau):
        rows = np.arange(N) * cfg.O_tau + d
        keep = rows < n_half
        half[rows[keep]] = np.abs(_lag_products(s, cfg, d)[keep].sum(axis=1))
    delay_values = np.concatenate([half[:0:-1], half])

    M = cfg.O_nu * N
    bins = doppler_bins(N, cfg.O_nu, cfg.nu_max) % M
    doppler_values = np.abs(np.fft.fft(np.abs(s) ** 2, n=M)[bins])
    return (
        AfCut(delay_values, delay_axis(N, cfg.O_tau), "zero_doppler").normalized(),
        AfCut(doppler_values, doppler_axis(N, cfg.O_nu, cfg.nu_max), "zero_delay").normalized(),
    )


def to_physical(value, T_s: float, kind: str = "delay", N: int | None = None):
    """Map normalized delay (``tau/N``) to seconds or Doppler (cycles/sample) to hertz."""
    if not T_s > 0:
        raise InputError(f"sample period must be positive, got {T_s}")
    value = np.asarray(value, dtype=float)
    if kind == "delay":
        if N is None:
            raise InputError("delay conversion needs the block length N")
        return value * N * T_s
    if kind == "doppler":
        return value / T_s
    raise InputError(f"kind must be 'delay' or 'doppler', got {kind!r}")
