"""Run configuration: JSON schema, validation and defaults.

Errors carry the file name and the line of the offending key, e.g.
``run.json:7: unknown key 'kmax' in pipeline``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..ambiguity import SplitRule
from ..dlvt import DlvtConfig
from ..errors import ConfigError
from ..multitarget import PipelineConfig
from ..sigmodel import RadarParams, TargetTruth

DEFAULT_A2_MAX = 61.33
DEFAULT_SNR_GRID = tuple(float(s) for s in range(-44, -29, 2))


# ------------------------------------------------------------ key positions

def key_lines(text: str) -> dict:
    """Map every key path (tuple of keys / array indices) to its line.

    Assumes ``text`` is valid JSON (call after ``json.loads`` succeeded).
    """
    lines = {}
    stack = []  # entries: [kind, current key or index, expecting_key]
    i, line, n = 0, 1, len(text)

    def path():
        return tuple(e[1] for e in stack)

    def read_string(i):
        j = i + 1
        while text[j] != '"':
            j += 2 if text[j] == "\\" else 1
        return json.loads(text[i:j + 1]), j + 1

    def mark_value():
        if stack and stack[-1][0] == "list":
            lines.setdefault(path(), line)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch in " \t\r:":
            i += 1
        elif ch in "{[":
            mark_value()
            stack.append(["dict", None, True] if ch == "{" else ["list", 0, False])
            i += 1
        elif ch in "}]":
            stack.pop()
            i += 1
        elif ch == ",":
            top = stack[-1]
            if top[0] == "list":
                top[1] += 1
            else:
                top[2] = True
            i += 1
        elif ch == '"':
            s, j = read_string(i)
            if stack and stack[-1][0] == "dict" and stack[-1][2]:
                stack[-1][1], stack[-1][2] = s, False
                lines[path()] = line
            else:
                mark_value()
            i = j
        else:
            mark_value()
            while i < n and text[i] not in ",}]\n \t\r":
                i += 1
    return lines


# ---------------------------------------------------------------- sections

@dataclass(frozen=True)
class PipelineSettings:
    """Pipeline section; ``P`` is a power of two or ``"auto"``."""

    P: int | str = 256
    a2_max: float = DEFAULT_A2_MAX
    skt_method: str = "ChirpZ"
    k_max: int = 8
    entropy_margin: float = 0.05
    cell_factor: float = 3.0
    candidate_cells: tuple | None = None
    peak_rel_threshold: float = 0.3
    sidelobe_ratio: float = 0.7
    max_peaks_per_cell: int = 4
    detection_sigmas: float | None = 5.0
    inner_window: int = 2
    marginal: bool = True
    split_edge_energy: float = 0.05
    clean: bool = True
    clean_trigger_db: float = 10.0
    clean_max_iter: int = 5
    clean_stop_fraction: float = 1e-3
    clean_floor: float = 3e-3
    fft_oversample: int = 2

    def pipeline_config(self) -> PipelineConfig:
        cells = None if self.candidate_cells is None else tuple(int(c) for c in self.candidate_cells)
        return PipelineConfig(
            skt_method=self.skt_method, k_max=self.k_max, entropy_margin=self.entropy_margin,
            cell_factor=self.cell_factor, candidate_cells=cells,
            peak_rel_threshold=self.peak_rel_threshold, sidelobe_ratio=self.sidelobe_ratio,
            max_peaks_per_cell=self.max_peaks_per_cell,
            detection_sigmas=self.detection_sigmas, inner_window=self.inner_window,
            marginal=self.marginal, split_rule=SplitRule(edge_energy=self.split_edge_energy),
            clean=self.clean, clean_trigger_db=self.clean_trigger_db,
            clean_max_iter=self.clean_max_iter, clean_stop_fraction=self.clean_stop_fraction,
            clean_floor=self.clean_floor, dlvt=DlvtConfig(fft_oversample=self.fft_oversample))

    @property
    def preferred_P(self):
        return None if self.P == "auto" else int(self.P)


@dataclass(frozen=True)
class NoiseSettings:
    """``snr_db`` is per-sample after range compression unless
    ``snr_reference == "raw"`` (before compression)."""

    snr_db: float | None = None
    seed: int = 0
    snr_reference: str = "compressed"


@dataclass(frozen=True)
class MonteCarloSettings:
    """Monte Carlo study.

    ``snr_reference`` defaults to ``"raw"``: the grid is the SNR before range
    compression, so the per-sample azimuth SNR is ``grid + 10 log10(B Tp)``.
    ``swath_cells`` shrinks the simulated swath to keep trials cheap.
    """

    snr_grid_db: tuple = DEFAULT_SNR_GRID
    trials: int = 50
    seed: int = 0
    snr_reference: str = "raw"
    swath_cells: int = 64
    k_max: int = 2


@dataclass(frozen=True)
class RunConfig:
    radar: RadarParams = field(default_factory=RadarParams)
    targets: tuple = ()
    pipeline: PipelineSettings = field(default_factory=PipelineSettings)
    noise: NoiseSettings = field(default_factory=NoiseSettings)
    montecarlo: MonteCarloSettings = field(default_factory=MonteCarloSettings)
    output_dir: str = "out"
    dump_stages: tuple = ("echo", "skt")
    near_range: float | None = None

    def to_dict(self) -> dict:
        """JSON-ready echo of the configuration (targets in native fields)."""
        d = {
            "radar": {f.name: getattr(self.radar, f.name)
                      for f in dataclasses.fields(RadarParams) if f.name != "light_speed"},
            "targets": [_target_dict(t) for t in self.targets],
            "pipeline": _plain(dataclasses.asdict(self.pipeline)),
            "noise": dataclasses.asdict(self.noise),
            "montecarlo": _plain(dataclasses.asdict(self.montecarlo)),
            "output_dir": self.output_dir,
            "dump_stages": list(self.dump_stages),
            "near_range": self.near_range,
        }
        return d

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(
            self, noise=dataclasses.replace(self.noise, seed=int(seed)),
            montecarlo=dataclasses.replace(self.montecarlo, seed=int(seed)))


def _plain(d):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _target_dict(t: TargetTruth) -> dict:
    r = complex(t.reflectivity)
    return {"nearest_range": t.nearest_range,
            "along_track_velocity": t.along_track_velocity,
            "cross_track_velocity": t.cross_track_velocity,
            "reflectivity": [r.real, r.imag]}


# -------------------------------------------------------------- validation

_TARGET_NATIVE = {"nearest_range", "along_track_velocity", "cross_track_velocity", "reflectivity"}
_TARGET_RADIAL = {"nearest_range", "radial_velocity", "radial_accel", "reflectivity"}
_SKT_METHODS = ("Sinc", "ChirpZ")
_SNR_REFS = ("raw", "compressed")
_TOP = {"radar", "targets", "pipeline", "noise", "montecarlo", "output_dir",
        "dump_stages", "near_range"}
_STAGES = ("echo", "skt")


class _Ctx:
    def __init__(self, source, lines):
        self.source, self.lines = source, lines

    def fail(self, path, msg):
        line = None
        for k in range(len(path), -1, -1):
            line = self.lines.get(tuple(path[:k]))
            if line is not None:
                break
        where = f"{self.source}:{line}" if line is not None else self.source
        raise ConfigError(f"{where}: {msg}")


def _num(ctx, path, v, integer=False, positive=False, nonneg=False):
    ok = isinstance(v, int) if integer else isinstance(v, (int, float))
    if isinstance(v, bool) or not ok:
        ctx.fail(path, f"{'.'.join(map(str, path))} must be {'an integer' if integer else 'a number'}")
    if not integer and not np.isfinite(v):
        ctx.fail(path, f"{'.'.join(map(str, path))} must be finite")
    if positive and not v > 0:
        ctx.fail(path, f"{'.'.join(map(str, path))} must be positive")
    if nonneg and v < 0:
        ctx.fail(path, f"{'.'.join(map(str, path))} must be non-negative")
    return int(v) if integer else float(v)


def _section(ctx, path, d, cls, special=None):
    if not isinstance(d, dict):
        ctx.fail(path, f"{path[-1]} must be an object")
    special = special or {}
    names = {f.name: f for f in dataclasses.fields(cls) if f.name != "light_speed"}
    kw = {}
    for k, v in d.items():
        if k not in names:
            ctx.fail(path + (k,), f"unknown key '{k}' in {path[-1]}")
        p = path + (k,)
        if k in special:
            kw[k] = special[k](ctx, p, v)
            continue
        default = names[k].default
        if isinstance(default, bool):
            if not isinstance(v, bool):
                ctx.fail(p, f"{k} must be true or false")
            kw[k] = v
        elif isinstance(default, int):
            kw[k] = _num(ctx, p, v, integer=True)
        elif isinstance(default, float):
            kw[k] = _num(ctx, p, v)
        elif isinstance(default, str):
            if not isinstance(v, str):
                ctx.fail(p, f"{k} must be a string")
            kw[k] = v
        else:
            kw[k] = v
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        ctx.fail(path, f"invalid {path[-1]}: {exc}")


def _reflectivity(ctx, path, v):
    if isinstance(v, list):
        if len(v) != 2:
            ctx.fail(path, "reflectivity list must be [real, imag]")
        return complex(_num(ctx, path, v[0]), _num(ctx, path, v[1]))
    return complex(_num(ctx, path, v))


def _target(ctx, path, d):
    if not isinstance(d, dict):
        ctx.fail(path, "each target must be an object")
    for k in d:
        if k not in _TARGET_NATIVE | _TARGET_RADIAL:
            ctx.fail(path + (k,), f"unknown key '{k}' in target")
    radial = {"radial_velocity", "radial_accel"} & set(d)
    native = {"along_track_velocity", "cross_track_velocity"} & set(d)
    if radial and native:
        ctx.fail(path, "target mixes radial and native motion keys")
    if "nearest_range" not in d:
        ctx.fail(path, "target needs nearest_range")
    rng = _num(ctx, path + ("nearest_range",), d["nearest_range"], positive=True)
    refl = _reflectivity(ctx, path + ("reflectivity",), d.get("reflectivity", 1.0))
    if radial:
        missing = {"radial_velocity", "radial_accel"} - set(d)
        if missing:
            ctx.fail(path, f"target needs {sorted(missing)[0]}")
        return ("radial", rng, _num(ctx, path + ("radial_velocity",), d["radial_velocity"]),
                _num(ctx, path + ("radial_accel",), d["radial_accel"], nonneg=True), refl)
    return TargetTruth(
        rng, _num(ctx, path + ("along_track_velocity",), d.get("along_track_velocity", 0.0)),
        _num(ctx, path + ("cross_track_velocity",), d.get("cross_track_velocity", 0.0)), refl)


def _choice(options):
    def check(ctx, path, v):
        if v not in options:
            ctx.fail(path, f"{path[-1]} must be one of {list(options)}")
        return v
    return check


def _P(ctx, path, v):
    if v == "auto":
        return v
    p = _num(ctx, path, v, integer=True, positive=True)
    if p & (p - 1):
        ctx.fail(path, "P must be a power of two or \"auto\"")
    return p


def _cells(ctx, path, v):
    if v is None:
        return None
    if not isinstance(v, list) or not v:
        ctx.fail(path, "candidate_cells must be a non-empty list or null")
    return tuple(_num(ctx, path + (i,), c, integer=True, nonneg=True) for i, c in enumerate(v))


def _grid(ctx, path, v):
    if not isinstance(v, list) or not v:
        ctx.fail(path, "snr_grid_db must be a non-empty list")
    return tuple(_num(ctx, path + (i,), s) for i, s in enumerate(v))


def _opt_num(ctx, path, v):
    return None if v is None else _num(ctx, path, v)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate a JSON run configuration.

    Raises
    ------
    ConfigError
        With ``source:line`` of the offending key for unknown keys, wrong
        types and out-of-range values.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: {exc.msg}") from None
    ctx = _Ctx(source, key_lines(text))
    if not isinstance(raw, dict):
        ctx.fail((), "configuration must be a JSON object")
    for k in raw:
        if k not in _TOP:
            ctx.fail((k,), f"unknown key '{k}'")
    kw = {}
    if "radar" in raw:
        kw["radar"] = _section(ctx, ("radar",), raw["radar"], RadarParams)
    radar = kw.get("radar", RadarParams())
    if "targets" in raw:
        if not isinstance(raw["targets"], list):
            ctx.fail(("targets",), "targets must be a list")
        tgs = []
        for i, d in enumerate(raw["targets"]):
            t = _target(ctx, ("targets", i), d)
            if isinstance(t, tuple):
                t = TargetTruth.from_radial(t[1], t[2], t[3], radar.platform_velocity, t[4])
            tgs.append(t)
        kw["targets"] = tuple(tgs)
    if "pipeline" in raw:
        kw["pipeline"] = _section(ctx, ("pipeline",), raw["pipeline"], PipelineSettings, {
            "P": _P, "candidate_cells": _cells, "skt_method": _choice(_SKT_METHODS),
            "detection_sigmas": _opt_num})
        pl = kw["pipeline"]
        for name in ("a2_max", "cell_factor", "detection_sigmas"):
            if getattr(pl, name) is not None and not getattr(pl, name) > 0:
                ctx.fail(("pipeline", name), f"{name} must be positive")
        if pl.k_max < 0:
            ctx.fail(("pipeline", "k_max"), "k_max must be non-negative")
    if "noise" in raw:
        kw["noise"] = _section(ctx, ("noise",), raw["noise"], NoiseSettings, {
            "snr_db": _opt_num, "snr_reference": _choice(_SNR_REFS)})
    if "montecarlo" in raw:
        mc = _section(ctx, ("montecarlo",), raw["montecarlo"], MonteCarloSettings, {
            "snr_grid_db": _grid, "snr_reference": _choice(_SNR_REFS)})
        if mc.trials < 10:
            ctx.fail(("montecarlo", "trials"), "trials must be at least 10")
        kw["montecarlo"] = mc
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            ctx.fail(("output_dir",), "output_dir must be a string")
        kw["output_dir"] = raw["output_dir"]
    if "dump_stages" in raw:
        v = raw["dump_stages"]
        if not isinstance(v, list) or any(s not in _STAGES for s in v):
            ctx.fail(("dump_stages",), f"dump_stages must be a list drawn from {list(_STAGES)}")
        kw["dump_stages"] = tuple(v)
    if "near_range" in raw:
        kw["near_range"] = _opt_num(ctx, ("near_range",), raw["near_range"])
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def default_config(targets=()) -> RunConfig:
    return RunConfig(targets=tuple(targets))
