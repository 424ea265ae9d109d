"""Symbol generation and the four unitary multicarrier modulators.

Every modulator maps a length-``N`` symbol vector ``x`` to a discrete-time
transmit vector ``s = M @ x``. ``F`` below is the unitary DFT matrix with
entries ``exp(-2j*pi*i*n/N) / sqrt(N)``; numpy's FFTs are rescaled to match.

==========  ===========================================
OFDM        ``F^H``
OTFS        ``kron(F_L^H, I_K)``
AFDM        ``diag(l1)^H F^H diag(l2)^H``
CP-AFDM     ``diag(l1)^H F^H diag(l2[perm])^H``
==========  ===========================================

with chirp sequences ``l_c[n] = exp(-2j*pi*c*n**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputError

WAVEFORM_KINDS = ("ofdm", "otfs", "afdm", "cpafdm")
SUPPORTED_QAM = (4, 16, 64)
MAX_LEX_N = 20


def rng_stream(seed: int | Sequence[int], *keys: int) -> np.random.Generator:
    """Counter-based generator for the stream identified by ``(seed, *keys)``.

    Philox is keyed through a SeedSequence, so distinct realization indices
    give independent streams and any subset can be regenerated in isolation.
    """
    entropy = [int(seed)] if np.isscalar(seed) else [int(v) for v in seed]
    entropy += [int(k) for k in keys]
    if any(v < 0 for v in entropy):
        raise ConfigError(f"seeds must be non-negative, got {entropy}", key="seed")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def qam_constellation(M: int) -> np.ndarray:
    """Square M-QAM points in row-major lattice order, unit average power."""
    if M not in SUPPORTED_QAM:
        raise ConfigError(f"M={M} is not a supported square QAM size {SUPPORTED_QAM}", key="M")
    side = math.isqrt(M)
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    # row-major: imaginary part selects the row, real part the column
    re, im = np.meshgrid(levels, levels[::-1])
    points = (re + 1j * im).ravel()
    return points / np.sqrt(2.0 * (M - 1) / 3.0)


@dataclass(frozen=True)
class SymbolBlock:
    """A block of ``N`` complex symbols and the recipe that produced it."""

    values: np.ndarray
    mode: str = "unimodular"
    M: int | None = None
    seed: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=complex)))

    def __len__(self) -> int:
        return self.values.shape[0]


def generate_symbols(
    mode: str, N: int, M: int = 16, seed: int | Sequence[int] = 0
) -> SymbolBlock:
    """Draw a symbol block.

    ``mode`` is ``"unimodular"`` (all ones) or ``"random_qam"``. ``seed`` may be
    a single integer or a tuple such as ``(master_seed, realization)``; the
    same arguments always give a bit-identical block.
    """
    if N < 2:
        raise ConfigError(f"N must be >= 2, got {N}", key="N")
    if mode == "unimodular":
        return SymbolBlock(np.ones(N, dtype=complex), mode="unimodular")
    if mode != "random_qam":
        raise ConfigError(f"unknown symbol mode {mode!r}", key="mode")
    points = qam_constellation(M)
    key = (int(seed),) if np.isscalar(seed) else tuple(int(v) for v in seed)
    idx = rng_stream(key).integers(0, M, size=N)
    return SymbolBlock(points[idx], mode="random_qam", M=M, seed=key)


def chirp_sequence(c: float, N: int) -> np.ndarray:
    """``exp(-2j*pi*c*n**2)`` for ``n = 0..N-1``."""
    n = np.arange(N, dtype=np.int64)
    # reduce the phase modulo one cycle before the exponential
    phase = np.mod(c * (n * n).astype(float), 1.0)
    return np.exp(-2j * np.pi * phase)


@dataclass(frozen=True)
class PermutationSpec:
    """How the CP-AFDM chirp permutation is chosen.

    ``kind`` is one of ``identity``, ``explicit`` (``value`` is an index
    array), ``seeded`` (``value`` is an RNG seed) or ``lex_rank`` (``value`` is
    the 0-based rank in lexicographic order, only for ``N <= 20``).
    """

    kind: str = "identity"
    value: object = None

    def __post_init__(self):
        if self.kind not in ("identity", "explicit", "seeded", "lex_rank"):
            raise ConfigError(f"unknown permutation kind {self.kind!r}", key="perm")
        if self.kind == "explicit":
            object.__setattr__(self, "value", tuple(int(v) for v in self.value))
        elif self.kind in ("seeded", "lex_rank"):
            if int(self.value) < 0:
                raise ConfigError(f"{self.kind} value must be non-negative", key="perm")
            object.__setattr__(self, "value", int(self.value))

    @classmethod
    def identity(cls) -> PermutationSpec:
        return cls("identity")

    @classmethod
    def explicit(cls, indices: Sequence[int]) -> PermutationSpec:
        return cls("explicit", indices)

    @classmethod
    def seeded(cls, seed: int) -> PermutationSpec:
        return cls("seeded", seed)

    @classmethod
    def lex_rank(cls, rank: int) -> PermutationSpec:
        return cls("lex_rank", rank)


def _unrank_lex(rank: int, N: int) -> np.ndarray:
    if N > MAX_LEX_N:
        raise ConfigError(
            f"lexicographic rank is only supported for N <= {MAX_LEX_N}, got N={N}", key="perm"
        )
    if rank >= math.factorial(N):
        raise ConfigError(f"rank {rank} out of range for N={N} (N! = {math.factorial(N)})", key="perm")
    pool = list(range(N))
    out = []
    for i in range(N - 1, -1, -1):
        digit, rank = divmod(rank, math.factorial(i))
        out.append(pool.pop(digit))
    return np.array(out, dtype=np.int64)


def resolve_permutation(p: PermutationSpec, N: int) -> np.ndarray:
    """Materialize ``p`` as an index array ``perm`` with ``(Pi v)[n] = v[perm[n]]``."""
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}", key="N")
    if p.kind == "identity":
        return np.arange(N)
    if p.kind == "seeded":
        return rng_stream(p.value).permutation(N)
    if p.kind == "lex_rank":
        return _unrank_lex(p.value, N)
    perm = np.asarray(p.value, dtype=np.int64)
    if perm.shape != (N,) or not np.array_equal(np.sort(perm), np.arange(N)):
        raise InputError(f"explicit permutation is not a bijection on 0..{N - 1}")
    return perm


@dataclass(frozen=True)
class WaveformSpec:
    """One of the four modulators with its parameters.

    Use the ``ofdm``/``otfs``/``afdm``/``cpafdm`` constructors; chirp rates
    default to ``c1 = 5/(2N)`` and ``c2 = 1/(2N)``.
    """

    kind: str
    N: int
    K: int | None = None
    L: int | None = None
    c1: float = 0.0
    c2: float = 0.0
    perm: PermutationSpec = field(default_factory=PermutationSpec)

    def __post_init__(self):
        if self.kind not in WAVEFORM_KINDS:
            raise ConfigError(f"unknown waveform {self.kind!r}", key="waveform")
        if self.N < 2:
            raise ConfigError(f"N must be >= 2, got {self.N}", key="N")
        if self.kind == "otfs":
            if self.K is None or self.L is None or self.K < 1 or self.L < 1:
                raise ConfigError("OTFS needs positive K and L", key="K")
            if self.K * self.L != self.N:
                raise ConfigError(
                    f"K*L must equal N for OTFS, got K={self.K}, L={self.L}, N={self.N}", key="K"
                )

    @property
    def label(self) -> str:
        return {"ofdm": "OFDM", "otfs": "OTFS", "afdm": "AFDM", "cpafdm": "CP-AFDM"}[self.kind]

    @classmethod
    def ofdm(cls, N: int) -> WaveformSpec:
        return cls("ofdm", N)

    @classmethod
    def otfs(cls, K: int, L: int) -> WaveformSpec:
        return cls("otfs", K * L, K=K, L=L)

    @classmethod
    def afdm(cls, N: int, c1: float | None = None, c2: float | None = None) -> WaveformSpec:
        c1, c2 = default_chirp_rates(N, c1, c2)
        return cls("afdm", N, c1=c1, c2=c2)

    @classmethod
    def cpafdm(
        cls,
        N: int,
        c1: float | None = None,
        c2: float | None = None,
        perm: PermutationSpec | None = None,
    ) -> WaveformSpec:
        c1, c2 = default_chirp_rates(N, c1, c2)
        return cls("cpafdm", N, c1=c1, c2=c2, perm=perm or PermutationSpec.seeded(0))


def default_chirp_rates(N: int, c1: float | None = None, c2: float | None = None):
    return (5.0 / (2 * N) if c1 is None else float(c1), 1.0 / (2 * N) if c2 is None else float(c2))


def _as_vector(x, N: int) -> np.ndarray:
    values = x.values if isinstance(x, SymbolBlock) else np.asarray(x, dtype=complex)
    if values.shape != (N,):
        raise InputError(f"expected {N} symbols, got shape {values.shape}")
    return values


def _unitary_idft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.fft.ifft(x, axis=axis) * np.sqrt(x.shape[axis])


def modulate(spec: WaveformSpec, x) -> np.ndarray:
    """Transmit samples ``s = M @ x`` (FFT-based).

    ``x`` is a SymbolBlock or array of length ``spec.N``; the result is a
    length-``N`` complex array with unit sample spacing.
    """
    x = _as_vector(x, spec.N)
    if spec.kind == "ofdm":
        return _unitary_idft(x)
    if spec.kind == "otfs":
        # x[l*K + k] is grid point (k, l): blocks of K samples, IDFT across blocks
        return _unitary_idft(x.reshape(spec.L, spec.K), axis=0).ravel()
    l1 = chirp_sequence(spec.c1, spec.N)
    l2 = chirp_sequence(spec.c2, spec.N)
    if spec.kind == "cpafdm":
        l2 = l2[resolve_permutation(spec.perm, spec.N)]
    return np.conj(l1) * _unitary_idft(np.conj(l2) * x)


def dft_matrix(N: int) -> np.ndarray:
    i = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(i, i) / N) / np.sqrt(N)


def modulation_matrix(spec: WaveformSpec) -> np.ndarray:
    """Dense ``N x N`` modulator built directly from its matrix definition."""
    N = spec.N
    if spec.kind == "ofdm":
        return dft_matrix(N).conj().T
    if spec.kind == "otfs":
        return np.kron(dft_matrix(spec.L).conj().T, np.eye(spec.K))
    l2 = chirp_sequence(spec.c2, N)
    if spec.kind == "cpafdm":
        Pi = np.eye(N)[resolve_permutation(spec.perm, N)]
        l2 = Pi @ l2
    return np.diag(chirp_sequence(spec.c1, N)).conj().T @ dft_matrix(N).conj().T @ np.diag(l2).conj().T
