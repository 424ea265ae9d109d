"""Normalized ambiguity-function analysis of OFDM, OTFS, AFDM and CP-AFDM."""

__version__ = "0.1.0"

from .ambiguity import (  # noqa: E402
    AfConfig,
    AfCut,
    AfSurface,
    ambiguity_cuts,
    ambiguity_surface,
    fractional_shift,
    to_physical,
    zero_delay_cut,
    zero_doppler_cut,
)
from .errors import ConfigError, InputError  # noqa: E402
from .metrics import CutMetrics, cut_metrics, islr, mainlobe_bounds, pslr, width_3db  # noqa: E402
from .waveforms import (  # noqa: E402
    PermutationSpec,
    SymbolBlock,
    WaveformSpec,
    chirp_sequence,
    generate_symbols,
    modulate,
    resolve_permutation,
)
