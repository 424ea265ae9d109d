"""Config parsing and text serialization of cuts, surfaces, tables and manifests.

Config files are JSON or YAML trees with these keys (all optional)::

    N, K, L, mode, M, R, seed, c1, c2, perm_seed, randomize_permutation,
    averaging, T_s, workers, keep_surface,
    waveforms: [ofdm | otfs | afdm | cpafdm | {kind: ..., c1: ..., ...}, ...]
    af: {O_tau, O_nu, L_h, window, kaiser_beta, nu_max}

The ``config`` block of a run manifest uses the same schema and can be fed
back as a config file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .ambiguity import AfConfig, AfCut, AfSurface
from .errors import ConfigError, InputError
from .experiments import CampaignConfig, CampaignResult
from .metrics import CutMetrics, cut_metrics
from .waveforms import WAVEFORM_KINDS, PermutationSpec, WaveformSpec

DB_FLOOR = -400.0
CUT_HEADER = ("axis", "magnitude", "magnitude_db")
TABLE_COLUMNS = ("dtau_3dB", "dnu_3dB", "PSLR_tau", "ISLR_tau", "PSLR_nu", "ISLR_nu")

TOP_KEYS = {
    "N", "K", "L", "mode", "M", "R", "seed", "c1", "c2", "perm_seed",
    "randomize_permutation", "averaging", "T_s", "workers", "keep_surface",
    "waveforms", "af",
}
AF_KEYS = {"O_tau", "O_nu", "L_h", "window", "kaiser_beta", "nu_max"}
WAVEFORM_KEYS = {"kind", "c1", "c2", "perm"}

PRESETS = {
    "paper-table1": {
        "N": 144, "K": 12, "L": 12, "mode": "unimodular", "M": 16,
        "af": {"O_tau": 4, "O_nu": 4, "L_h": 4},
    },
    "paper-random": {
        "N": 144, "K": 12, "L": 12, "mode": "random", "M": 16,
        "af": {"O_tau": 4, "O_nu": 4, "L_h": 4},
    },
}


def load_tree(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    tree = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    if tree is None:
        return {}
    if not isinstance(tree, dict):
        raise ConfigError(f"config {path} must be a key-value mapping")
    # accept a run manifest directly
    return tree["config"] if "config" in tree and "tool" in tree else tree


def merge_trees(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_trees(out[key], value)
        else:
            out[key] = value
    return out


def _check_keys(tree: dict, allowed: set, where: str):
    unknown = sorted(set(tree) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(unknown)}", key=unknown[0])


def _perm_from_tree(value) -> PermutationSpec:
    if isinstance(value, PermutationSpec):
        return value
    if value is None or value == "identity":
        return PermutationSpec.identity()
    if isinstance(value, int):
        return PermutationSpec.seeded(value)
    if isinstance(value, list):
        return PermutationSpec.explicit(value)
    if isinstance(value, dict) and len(value) == 1:
        (kind, arg), = value.items()
        return PermutationSpec(kind, arg)
    raise ConfigError(f"cannot interpret permutation {value!r}", key="perm")


def _waveform_from_tree(item, tree: dict) -> WaveformSpec:
    N, K, L = tree["N"], tree["K"], tree["L"]
    if isinstance(item, str):
        item = {"kind": item}
    if not isinstance(item, dict):
        raise ConfigError(f"cannot interpret waveform entry {item!r}", key="waveforms")
    _check_keys(item, WAVEFORM_KEYS, "waveform")
    kind = str(item.get("kind", "")).lower().replace("-", "")
    if kind not in WAVEFORM_KINDS:
        raise ConfigError(f"unknown waveform {item.get('kind')!r}", key="waveforms")
    c1 = item.get("c1", tree.get("c1"))
    c2 = item.get("c2", tree.get("c2"))
    if kind == "ofdm":
        return WaveformSpec.ofdm(N)
    if kind == "otfs":
        return WaveformSpec.otfs(K, L)
    if kind == "afdm":
        return WaveformSpec.afdm(N, c1, c2)
    perm = item.get("perm", tree.get("perm_seed", 0))
    return WaveformSpec.cpafdm(N, c1, c2, _perm_from_tree(perm))


def config_from_tree(tree: dict) -> CampaignConfig:
    """Validate a key-value tree and build the campaign configuration."""
    _check_keys(tree, TOP_KEYS, "config")
    af_tree = tree.get("af") or {}
    if not isinstance(af_tree, dict):
        raise ConfigError("'af' must be a mapping", key="af")
    _check_keys(af_tree, AF_KEYS, "af")
    tree = dict(tree)
    tree.setdefault("N", 144)
    if "K" not in tree and "L" not in tree and tree["N"] == 144:
        tree["K"] = tree["L"] = 12
    if "K" in tree and "L" not in tree:
        tree["L"] = tree["N"] // tree["K"] if tree["K"] else 0
    if "L" in tree and "K" not in tree:
        tree["K"] = tree["N"] // tree["L"] if tree["L"] else 0
    if "K" not in tree:
        wants_otfs = any(
            (w if isinstance(w, str) else w.get("kind", "")) == "otfs"
            for w in (tree.get("waveforms") or WAVEFORM_KINDS)
        ) if not isinstance(tree.get("waveforms"), str) else "otfs" in tree["waveforms"]
        if wants_otfs:
            raise ConfigError("K and L must be given for OTFS when N != 144", key="K")
        tree["K"], tree["L"] = tree["N"], 1
    for key in ("N", "K", "L"):
        if not isinstance(tree[key], int) or tree[key] < 1:
            raise ConfigError(f"{key} must be a positive integer, got {tree[key]!r}", key=key)
    if tree["K"] * tree["L"] != tree["N"]:
        raise ConfigError(
            f"K*L != N: K={tree['K']}, L={tree['L']}, N={tree['N']}", key="K"
        )
    try:
        af = AfConfig(**af_tree)
    except TypeError as exc:
        raise ConfigError(str(exc), key="af") from exc
    names = tree.get("waveforms")
    if names is None:
        names = list(WAVEFORM_KINDS)
    if isinstance(names, str):
        names = [n.strip() for n in names.split(",") if n.strip()]
    waveforms = tuple(_waveform_from_tree(item, tree) for item in names)
    mode = tree.get("mode", "unimodular")
    return CampaignConfig(
        N=tree["N"],
        K=tree["K"],
        L=tree["L"],
        waveforms=waveforms,
        mode=mode,
        M=int(tree.get("M", 16)),
        R=int(tree.get("R", 100)),
        master_seed=int(tree.get("seed", 0)),
        af=af,
        randomize_permutation=bool(tree.get("randomize_permutation", True)),
        averaging=tree.get("averaging", "magnitude"),
        keep_surface=bool(tree.get("keep_surface", False)),
        T_s=None if tree.get("T_s") is None else float(tree["T_s"]),
        workers=int(tree.get("workers", 1)),
    )


def parse_config(path=None, overrides: dict | None = None, preset: str | None = None) -> CampaignConfig:
    """Preset, then config file, then flag overrides (later wins)."""
    tree: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}", key="preset")
        tree = merge_trees(tree, PRESETS[preset])
    if path is not None:
        tree = merge_trees(tree, load_tree(path))
    if overrides:
        tree = merge_trees(tree, overrides)
    return config_from_tree(tree)


def _spec_to_tree(spec: WaveformSpec) -> dict:
    out: dict = {"kind": spec.kind}
    if spec.kind in ("afdm", "cpafdm"):
        out["c1"], out["c2"] = spec.c1, spec.c2
    if spec.kind == "cpafdm":
        p = spec.perm
        out["perm"] = "identity" if p.kind == "identity" else {p.kind: list(p.value) if p.kind == "explicit" else p.value}
    return out


def config_to_tree(cfg: CampaignConfig) -> dict:
    return {
        "N": cfg.N,
        "K": cfg.K,
        "L": cfg.L,
        "mode": cfg.mode,
        "M": cfg.M,
        "R": cfg.R,
        "seed": cfg.master_seed,
        "randomize_permutation": cfg.randomize_permutation,
        "averaging": cfg.averaging,
        "keep_surface": cfg.keep_surface,
        "T_s": cfg.T_s,
        "workers": cfg.workers,
        "waveforms": [_spec_to_tree(s) for s in cfg.waveforms],
        "af": asdict(cfg.af),
    }


# -- numbers ---------------------------------------------------------------

def fmt_value(x: float) -> str:
    """12-decimal fixed notation when that keeps 12 significant digits, else scientific."""
    x = float(x)
    if x == 0.0 or 0.1 <= abs(x) < 1e3:
        return f"{x:.12f}"
    return f"{x:.11e}"


def fmt_db(x: float) -> str:
    return repr(float(f"{x:.12g}"))


def magnitude_db(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(values)
    return np.maximum(db, DB_FLOOR)


def _json_number(x):
    if x is None:
        return None
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return float(f"{x:.12g}")


def metrics_to_tree(m: CutMetrics) -> dict:
    tree = {k: _json_number(v) for k, v in m.as_dict().items() if k != "flags"}
    tree["flags"] = sorted(m.flags)
    return tree


def metrics_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".metrics.json")


def _write_text(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def export_cut(cut: AfCut, metrics: CutMetrics | None, path) -> list[Path]:
    """Write ``axis,magnitude,magnitude_db`` CSV plus a ``.metrics.json`` sibling."""
    path = Path(path)
    lines = [",".join(CUT_HEADER)]
    for x, v, db in zip(cut.axis, cut.values, magnitude_db(cut.values)):
        lines.append(f"{fmt_value(x)},{fmt_value(v)},{fmt_db(db)}")
    _write_text(path, "\n".join(lines) + "\n")
    written = [path]
    if metrics is not None:
        tree = {"kind": cut.kind, **metrics_to_tree(metrics)}
        mpath = metrics_path(path)
        _write_text(mpath, json.dumps(tree, indent=2) + "\n")
        written.append(mpath)
    return written


def read_cut(path, kind: str | None = None) -> AfCut:
    """Parse a cut CSV written by :func:`export_cut`."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    if not rows or tuple(rows[0]) != CUT_HEADER:
        raise InputError(f"{path} does not start with header {','.join(CUT_HEADER)}")
    data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
    if kind is None:
        mpath = metrics_path(path)
        kind = json.loads(mpath.read_text()).get("kind", "zero_doppler") if mpath.exists() else "zero_doppler"
    return AfCut(data[:, 1], data[:, 0], kind)


def export_surface(surface: AfSurface, path, layout: str = "matrix") -> Path:
    """Surface as CSV.

    ``matrix``: first row is ``tau\\nu`` followed by the Doppler axis; each
    further row is one delay value followed by its magnitudes.
    ``triplets``: header ``tau,nu,mag`` and one row per grid point.
    """
    path = Path(path)
    lines = []
    if layout == "matrix":
        lines.append(",".join(["tau\\nu"] + [fmt_value(v) for v in surface.doppler_axis]))
        for tau, row in zip(surface.delay_axis, surface.mag):
            lines.append(",".join([fmt_value(tau)] + [fmt_value(v) for v in row]))
    elif layout == "triplets":
        lines.append("tau,nu,mag")
        for tau, row in zip(surface.delay_axis, surface.mag):
            for nu, v in zip(surface.doppler_axis, row):
                lines.append(f"{fmt_value(tau)},{fmt_value(nu)},{fmt_value(v)}")
    else:
        raise InputError(f"unknown surface layout {layout!r}")
    _write_text(path, "\n".join(lines) + "\n")
    return path


def read_surface(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(delay_axis, doppler_axis, mag)`` from a matrix-layout surface CSV."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    doppler = np.array([float(v) for v in rows[0][1:]])
    body = np.array([[float(v) for v in r] for r in rows[1:]])
    return body[:, 0], doppler, body[:, 1:]


# -- tables ----------------------------------------------------------------

def table_rows(result: CampaignResult) -> list[dict]:
    rows = []
    for w in result.waveforms:
        d, n = w.delay_metrics, w.doppler_metrics
        row = {
            "waveform": w.label,
            "dtau_3dB": d.width_3db,
            "dnu_3dB": n.width_3db,
            "PSLR_tau": d.pslr_db,
            "ISLR_tau": d.islr_db,
            "PSLR_nu": n.pslr_db,
            "ISLR_nu": n.islr_db,
            "flags_tau": sorted(d.flags),
            "flags_nu": sorted(n.flags),
        }
        T_s = result.config.T_s
        if T_s is not None:
            row["dtau_3dB_s"] = d.width_3db * result.config.N * T_s
            row["dnu_3dB_Hz"] = n.width_3db / T_s
        rows.append(row)
    return rows


def render_table(result: CampaignResult) -> str:
    """Plain-text table, one row per waveform, Table-1 column order."""
    columns = list(TABLE_COLUMNS)
    if result.config.T_s is not None:
        columns += ["dtau_3dB_s", "dnu_3dB_Hz"]
    header = ["Waveform"] + columns
    body = []
    for row in table_rows(result):
        cells = [row["waveform"]]
        for c in columns:
            v = row[c]
            if v is None:
                cells.append("--")
            elif c.endswith("_s") or c.endswith("_Hz"):
                cells.append(f"{v:.4e}")
            else:
                cells.append(f"{v:.4f}")
        body.append(cells)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = [" | ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths)))]
    lines.append("-+-".join("-" * w for w in widths))
    for cells in body:
        lines.append(" | ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))))
    return "\n".join(lines) + "\n"


def table_tree(result: CampaignResult) -> dict:
    rows = []
    for row in table_rows(result):
        rows.append({k: (_json_number(v) if isinstance(v, float) else v) for k, v in row.items()})
    return {"columns": list(TABLE_COLUMNS), "rows": rows}


# -- runs ------------------------------------------------------------------

def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_campaign(result: CampaignResult, out_dir) -> list[Path]:
    """Cuts, metrics, table and surfaces of a campaign; returns the files written."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    for w in result.waveforms:
        stem = w.spec.kind
        written += export_cut(w.delay_cut, w.delay_metrics, out_dir / f"{stem}_zero_doppler.csv")
        written += export_cut(w.doppler_cut, w.doppler_metrics, out_dir / f"{stem}_zero_delay.csv")
        if w.surface is not None:
            written.append(export_surface(w.surface, out_dir / f"{stem}_surface.csv"))
    table_txt = out_dir / "table.txt"
    _write_text(table_txt, render_table(result))
    table_json = out_dir / "table.json"
    _write_text(table_json, json.dumps(table_tree(result), indent=2) + "\n")
    return written + [table_txt, table_json]


def write_manifest(cfg: CampaignConfig, files, out_dir, provenance: dict | None = None) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "tool": "isacaf",
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config_to_tree(cfg),
        "seeds": {"master_seed": cfg.master_seed},
        "provenance": provenance or {},
        "files": [
            {"path": str(Path(f).relative_to(out_dir)), "sha256": sha256(f)} for f in files
        ],
    }
    path = out_dir / "manifest.json"
    _write_text(path, json.dumps(manifest, indent=2) + "\n")
    return path


def recompute_metrics(path) -> CutMetrics:
    return cut_metrics(read_cut(path).normalized())

