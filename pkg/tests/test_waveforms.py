import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isacaf.errors import ConfigError, InputError
from isacaf.waveforms import (
    PermutationSpec,
    SymbolBlock,
    WaveformSpec,
    chirp_sequence,
    generate_symbols,
    modulate,
    modulation_matrix,
    qam_constellation,
    resolve_permutation,
)
from oracles import dense_dft


def all_specs(N, rng):
    specs = [WaveformSpec.ofdm(N)]
    for K in range(1, N + 1):
        if N % K == 0:
            specs.append(WaveformSpec.otfs(K, N // K))
    c1, c2 = rng.uniform(-0.5, 0.5, size=2)
    specs += [
        WaveformSpec.afdm(N),
        WaveformSpec.afdm(N, c1, c2),
        WaveformSpec.cpafdm(N, c1, c2, PermutationSpec.seeded(int(rng.integers(1 << 32)))),
        WaveformSpec.cpafdm(N, perm=PermutationSpec.explicit(rng.permutation(N))),
    ]
    return specs


# -- symbols ---------------------------------------------------------------

def test_unimodular_block():
    block = generate_symbols("unimodular", 4)
    assert np.array_equal(block.values, np.ones(4, dtype=complex))


def test_qam4_points(rng):
    block = generate_symbols("random_qam", 257, M=4, seed=int(rng.integers(1 << 62)))
    allowed = {complex(a, b) / math.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    assert all(min(abs(v - p) for p in allowed) < 1e-15 for v in block.values)


@pytest.mark.parametrize("M", [4, 16, 64])
def test_constellation_unit_power(M):
    points = qam_constellation(M)
    assert points.size == M
    assert len(set(np.round(points, 12))) == M
    assert abs(np.mean(np.abs(points) ** 2) - 1.0) < 1e-12


def test_qam16_mean_power_large_block():
    block = generate_symbols("random_qam", 100_000, M=16, seed=7)
    assert abs(np.mean(np.abs(block.values) ** 2) - 1.0) < 1e-2


def test_symbols_reproducible():
    a = generate_symbols("random_qam", 144, 16, seed=(5, 17))
    b = generate_symbols("random_qam", 144, 16, seed=(5, 17))
    c = generate_symbols("random_qam", 144, 16, seed=(5, 18))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_symbol_block_is_read_only():
    block = generate_symbols("unimodular", 8)
    with pytest.raises(ValueError):
        block.values[0] = 2


@pytest.mark.parametrize("M", [2, 8, 32, 256])
def test_unsupported_qam_rejected(M):
    with pytest.raises(ConfigError):
        generate_symbols("random_qam", 16, M=M, seed=0)


# -- chirps and permutations -----------------------------------------------

def test_chirp_examples():
    assert np.array_equal(chirp_sequence(0.0, 3), np.ones(3))
    assert np.allclose(chirp_sequence(0.25, 2), [1, -1j], atol=1e-15)


@given(st.floats(-10, 10, allow_nan=False), st.integers(1, 4096))
def test_chirp_unimodular(c, N):
    assert np.max(np.abs(np.abs(chirp_sequence(c, N)) - 1)) < 1e-14


def test_permutation_examples():
    assert resolve_permutation(PermutationSpec.identity(), 4).tolist() == [0, 1, 2, 3]
    assert resolve_permutation(PermutationSpec.lex_rank(0), 3).tolist() == [0, 1, 2]
    assert resolve_permutation(PermutationSpec.lex_rank(5), 3).tolist() == [2, 1, 0]


@pytest.mark.parametrize("N", [1, 2, 4, 5])
def test_lex_rank_matches_enumeration(N):
    # itertools.permutations yields lexicographic order for sorted input
    for rank, expected in enumerate(itertools.permutations(range(N))):
        assert tuple(resolve_permutation(PermutationSpec.lex_rank(rank), N)) == expected


def test_lex_rank_large_n_exact():
    N = 20
    last = resolve_permutation(PermutationSpec.lex_rank(math.factorial(N) - 1), N)
    assert last.tolist() == list(range(N - 1, -1, -1))


def test_lex_rank_guards():
    with pytest.raises(ConfigError):
        resolve_permutation(PermutationSpec.lex_rank(0), 21)
    with pytest.raises(ConfigError):
        resolve_permutation(PermutationSpec.lex_rank(6), 3)


def test_seeded_permutation_deterministic():
    a = resolve_permutation(PermutationSpec.seeded(11), 144)
    b = resolve_permutation(PermutationSpec.seeded(11), 144)
    assert np.array_equal(a, b)
    assert np.array_equal(np.sort(a), np.arange(144))


@pytest.mark.parametrize("bad", [[0, 0, 1, 2], [0, 1, 2], [1, 2, 3, 4]])
def test_explicit_permutation_must_be_bijective(bad):
    with pytest.raises(InputError):
        resolve_permutation(PermutationSpec.explicit(bad), 4)


def test_otfs_geometry_validated():
    with pytest.raises(ConfigError):
        WaveformSpec("otfs", 100, K=12, L=12)


# -- modulators ------------------------------------------------------------

def test_ofdm_first_column():
    x = np.zeros(4, dtype=complex)
    x[0] = 1
    assert np.allclose(modulate(WaveformSpec.ofdm(4), x), [0.5] * 4, atol=1e-15)


@pytest.mark.parametrize("N", [2, 7, 144])
def test_ofdm_constant_input(N):
    s = modulate(WaveformSpec.ofdm(N), np.ones(N))
    expected = np.zeros(N)
    expected[0] = math.sqrt(N)
    assert np.allclose(s, expected, atol=1e-12)


def test_otfs_single_block_is_identity(rng):
    x = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    assert np.allclose(modulate(WaveformSpec.otfs(9, 1), x), x, atol=1e-15)


def test_afdm_zero_chirp_is_ofdm(rng):
    x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert np.allclose(modulate(WaveformSpec.afdm(16, 0.0, 0.0), x), modulate(WaveformSpec.ofdm(16), x), atol=1e-14)


def test_cpafdm_identity_is_afdm(rng):
    x = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    for c1, c2 in rng.uniform(-1, 1, size=(5, 2)):
        a = modulate(WaveformSpec.afdm(24, c1, c2), x)
        b = modulate(WaveformSpec.cpafdm(24, c1, c2, PermutationSpec.identity()), x)
        assert np.allclose(a, b, atol=1e-14)


def test_otfs_unimodular_closed_form_12x12():
    spec = WaveformSpec.otfs(12, 12)
    s = modulate(spec, generate_symbols("unimodular", 144))
    expected = np.zeros(144)
    expected[:12] = math.sqrt(12)
    assert np.allclose(s, expected, atol=1e-12)
    assert np.allclose(modulation_matrix(spec) @ np.ones(144), expected, atol=1e-12)


@pytest.mark.parametrize("K,L", [(1, 6), (2, 3), (3, 2), (4, 5), (6, 1), (3, 8)])
def test_otfs_unimodular_closed_form(K, L):
    s = modulate(WaveformSpec.otfs(K, L), np.ones(K * L))
    expected = np.zeros(K * L)
    expected[:K] = math.sqrt(L)
    assert np.allclose(s, expected, atol=1e-12)


def test_dense_modulators_match_definitions():
    # modulation_matrix against products of explicitly built factors
    N = 6
    F = dense_dft(N)
    assert np.allclose(modulation_matrix(WaveformSpec.ofdm(N)), F.conj().T, atol=1e-14)
    FL = dense_dft(3)
    assert np.allclose(modulation_matrix(WaveformSpec.otfs(2, 3)), np.kron(FL.conj().T, np.eye(2)), atol=1e-14)
    c1, c2 = 0.13, -0.07
    n = np.arange(N)
    l1 = np.exp(-2j * np.pi * c1 * n**2)
    l2 = np.exp(-2j * np.pi * c2 * n**2)
    perm = [3, 0, 5, 1, 4, 2]
    M = np.diag(l1.conj()) @ F.conj().T @ np.diag(l2[perm].conj())
    got = modulation_matrix(WaveformSpec.cpafdm(N, c1, c2, PermutationSpec.explicit(perm)))
    assert np.allclose(got, M, atol=1e-14)


@pytest.mark.parametrize("N", [4, 8, 12, 16])
def test_fast_path_matches_dense_matrix(N, rng):
    for spec in all_specs(N, rng):
        M = modulation_matrix(spec)
        assert np.allclose(M.conj().T @ M, np.eye(N), atol=1e-12)
        for _ in range(10):
            x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            assert np.max(np.abs(modulate(spec, x) - M @ x)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from(["ofdm", "otfs", "afdm", "cpafdm"]),
    st.sampled_from([(2, 2), (3, 4), (12, 12), (8, 2), (5, 7)]),
    st.integers(0, 2**32 - 1),
)
def test_unitarity(kind, KL, seed):
    K, L = KL
    N = K * L
    r = np.random.default_rng(seed)
    x = r.standard_normal(N) + 1j * r.standard_normal(N)
    spec = {
        "ofdm": WaveformSpec.ofdm(N),
        "otfs": WaveformSpec.otfs(K, L),
        "afdm": WaveformSpec.afdm(N, *r.uniform(-1, 1, 2)),
        "cpafdm": WaveformSpec.cpafdm(N, *r.uniform(-1, 1, 2), PermutationSpec.seeded(seed)),
    }[kind]
    s = modulate(spec, x)
    assert s.shape == (N,)
    assert abs(np.linalg.norm(s) - np.linalg.norm(x)) < 1e-10


def test_symbol_block_energy_preserved():
    block = generate_symbols("random_qam", 144, 16, seed=3)
    for spec in (WaveformSpec.ofdm(144), WaveformSpec.otfs(12, 12), WaveformSpec.afdm(144), WaveformSpec.cpafdm(144)):
        s = modulate(spec, block)
        assert abs(np.sum(np.abs(s) ** 2) - np.sum(np.abs(block.values) ** 2)) < 1e-10


def test_dimension_mismatch():
    with pytest.raises(InputError):
        modulate(WaveformSpec.ofdm(8), np.ones(7))
    with pytest.raises(InputError):
        modulate(WaveformSpec.ofdm(8), SymbolBlock(np.ones(9)))
