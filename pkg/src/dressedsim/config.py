"""YAML run-configuration parsing with field-path error diagnostics.

Configs are plain nested key/value YAML.  Every validation error names the
offending field (e.g. ``sweep.truncation.tail_epsilon``) so broken configs
are quick to fix.  A handful of environment variables with the
``DRESSEDSIM_`` prefix override parsed values (SEED, OUT, WORKERS, FRAME,
READOUT).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .experiments import SweepSpec
from .hilbert import TruncationPolicy
from .model import EXACT_DRESSED, LITERAL_FIRST_ORDER, ControlSegment, ModelParams

ENV_PREFIX = "DRESSEDSIM_"

_FRAME_ALIASES = {
    "exact": EXACT_DRESSED,
    "exact_dressed": EXACT_DRESSED,
    "first-order": LITERAL_FIRST_ORDER,
    "first_order": LITERAL_FIRST_ORDER,
    "literal_first_order": LITERAL_FIRST_ORDER,
}


class ConfigError(ValueError):
    """Invalid or missing configuration value; message names the field."""


_REQUIRED = object()


def _get(mapping, key, path, default=_REQUIRED):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path}: expected a mapping")
    if key in mapping:
        return mapping[key]
    if default is _REQUIRED:
        raise ConfigError(f"{path}.{key}: required field is missing")
    return default


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _integer(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _choice(value, options, path) -> str:
    if value not in options:
        raise ConfigError(f"{path}: expected one of {sorted(options)}, got {value!r}")
    return value


def parse_truncation(node, path) -> TruncationPolicy:
    kind = _choice(_get(node, "mode", path), {"fixed", "adaptive"}, f"{path}.mode")
    try:
        if kind == "fixed":
            return TruncationPolicy.fixed(_integer(_get(node, "n_max", path), f"{path}.n_max"))
        return TruncationPolicy.adaptive(
            tail_epsilon=_number(
                _get(node, "tail_epsilon", path, 1e-4), f"{path}.tail_epsilon"
            ),
            headroom=_integer(_get(node, "headroom", path, 8), f"{path}.headroom"),
            hard_cap=_integer(_get(node, "hard_cap", path, 2048), f"{path}.hard_cap"),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_alpha_grid(node, path) -> tuple[float, ...]:
    if isinstance(node, (list, tuple)):
        return tuple(_number(a, f"{path}[{i}]") for i, a in enumerate(node))
    if isinstance(node, dict):
        start = _number(_get(node, "start", path), f"{path}.start")
        stop = _number(_get(node, "stop", path), f"{path}.stop")
        points = _integer(_get(node, "points", path), f"{path}.points")
        if points < 1:
            raise ConfigError(f"{path}.points: must be >= 1")
        return tuple(np.linspace(start, stop, points))
    raise ConfigError(f"{path}: expected a list or a start/stop/points mapping")


def parse_frame(value, path) -> str:
    if value not in _FRAME_ALIASES:
        raise ConfigError(
            f"{path}: expected one of {sorted(set(_FRAME_ALIASES))}, got {value!r}"
        )
    return _FRAME_ALIASES[value]


def parse_sweep(node, path="sweep") -> SweepSpec:
    try:
        return SweepSpec(
            omega0=_number(_get(node, "omega0", path, 2.0), f"{path}.omega0"),
            mode_freqs=tuple(
                _number(w, f"{path}.mode_freqs[{i}]")
                for i, w in enumerate(_get(node, "mode_freqs", path, [0.01, 2.0, 10.0]))
            ),
            alpha_abs_grid=parse_alpha_grid(
                _get(node, "alpha_abs", path, {"start": 0.0, "stop": 0.5, "points": 21}),
                f"{path}.alpha_abs",
            ),
            alpha_phase=_number(_get(node, "alpha_phase", path, 0.0), f"{path}.alpha_phase"),
            t_final=_number(_get(node, "t_final", path, 2.0 * math.pi), f"{path}.t_final"),
            beta=_number(_get(node, "beta", path, 1.0), f"{path}.beta"),
            seed=_integer(_get(node, "seed", path, 6), f"{path}.seed"),
            truncation=parse_truncation(
                _get(node, "truncation", path, {"mode": "adaptive"}), f"{path}.truncation"
            ),
            frame=parse_frame(_get(node, "frame", path, "exact_dressed"), f"{path}.frame"),
            readout=_choice(
                _get(node, "readout", path, "bare"), {"bare", "dressed"}, f"{path}.readout"
            ),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class CircuitConfig:
    params: ModelParams
    segments: tuple[ControlSegment, ...]
    readout: str
    seed: int


def parse_circuit(node, path="circuit") -> CircuitConfig:
    qubit_freqs = tuple(
        _number(w, f"{path}.qubit_freqs[{i}]")
        for i, w in enumerate(_get(node, "qubit_freqs", path))
    )
    mode_freqs = tuple(
        _number(w, f"{path}.mode_freqs[{i}]")
        for i, w in enumerate(_get(node, "mode_freqs", path))
    )
    alpha_abs = _number(_get(node, "alpha_abs", path, 0.0), f"{path}.alpha_abs")
    alpha_phase = _number(_get(node, "alpha_phase", path, 0.0), f"{path}.alpha_phase")
    alpha = alpha_abs * complex(math.cos(alpha_phase), math.sin(alpha_phase))
    try:
        params = ModelParams(
            qubit_freqs=qubit_freqs,
            mode_freqs=mode_freqs,
            couplings=(alpha,) * len(mode_freqs),
            beta=_number(_get(node, "beta", path, 1.0), f"{path}.beta"),
            truncation=parse_truncation(
                _get(node, "truncation", path, {"mode": "adaptive"}), f"{path}.truncation"
            ),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc

    segments = []
    for i, seg_node in enumerate(_get(node, "segments", path, [])):
        seg_path = f"{path}.segments[{i}]"
        jj = {}
        for j, triple in enumerate(_get(seg_node, "jj", seg_path, [])):
            if not isinstance(triple, (list, tuple)) or len(triple) != 3:
                raise ConfigError(f"{seg_path}.jj[{j}]: expected [i, j, amplitude]")
            a = _integer(triple[0], f"{seg_path}.jj[{j}][0]")
            b = _integer(triple[1], f"{seg_path}.jj[{j}][1]")
            if not (0 <= a < len(qubit_freqs)) or not (0 <= b < len(qubit_freqs)):
                raise ConfigError(f"{seg_path}.jj[{j}]: qubit index out of range")
            jj[(a, b)] = _number(triple[2], f"{seg_path}.jj[{j}][2]")
        eta = tuple(
            _number(e, f"{seg_path}.eta[{k}]")
            for k, e in enumerate(_get(seg_node, "eta", seg_path, [0.0] * len(qubit_freqs)))
        )
        if len(eta) != len(qubit_freqs):
            raise ConfigError(f"{seg_path}.eta: expected {len(qubit_freqs)} entries")
        try:
            segments.append(
                ControlSegment(
                    duration=_number(_get(seg_node, "duration", seg_path), f"{seg_path}.duration"),
                    eta=eta,
                    jj=jj,
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{seg_path}: {exc}") from exc

    return CircuitConfig(
        params=params,
        segments=tuple(segments),
        readout=_choice(
            _get(node, "readout", path, "bare"), {"bare", "dressed"}, f"{path}.readout"
        ),
        seed=_integer(_get(node, "seed", path, 6), f"{path}.seed"),
    )


@dataclass
class RunConfig:
    sweep: SweepSpec | None = None
    circuit: CircuitConfig | None = None
    out_dir: str = "out"
    workers: int = 1

    def to_dict(self) -> dict:
        """Semantic round-trip representation (used by the config tests)."""
        out: dict = {"output": self.out_dir, "workers": self.workers}
        if self.sweep is not None:
            s = self.sweep
            out["sweep"] = {
                "omega0": s.omega0,
                "mode_freqs": list(s.mode_freqs),
                "alpha_abs": list(s.alpha_abs_grid),
                "alpha_phase": s.alpha_phase,
                "t_final": s.t_final,
                "beta": s.beta,
                "seed": s.seed,
                "frame": s.frame,
                "readout": s.readout,
                "truncation": _truncation_dict(s.truncation),
            }
        if self.circuit is not None:
            c = self.circuit
            out["circuit"] = {
                "qubit_freqs": list(c.params.qubit_freqs),
                "mode_freqs": list(c.params.mode_freqs),
                "alpha_abs": abs(c.params.couplings[0]) if c.params.couplings else 0.0,
                "beta": c.params.beta,
                "seed": c.seed,
                "readout": c.readout,
                "truncation": _truncation_dict(c.params.truncation),
                "segments": [
                    {
                        "duration": seg.duration,
                        "eta": list(seg.eta),
                        "jj": [[i, j, amp] for (i, j), amp in sorted(seg.jj.items())],
                    }
                    for seg in c.segments
                ],
            }
        return out


def _truncation_dict(t: TruncationPolicy) -> dict:
    if t.kind == "fixed":
        return {"mode": "fixed", "n_max": t.n_max}
    return {
        "mode": "adaptive",
        "tail_epsilon": t.tail_epsilon,
        "headroom": t.headroom,
        "hard_cap": t.hard_cap,
    }


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    cfg = RunConfig()
    if "output" in raw:
        if not isinstance(raw["output"], str):
            raise ConfigError("output: expected a directory path string")
        cfg.out_dir = raw["output"]
    if "workers" in raw:
        cfg.workers = _integer(raw["workers"], "workers")
        if cfg.workers < 1:
            raise ConfigError("workers: must be >= 1")
    if "sweep" in raw:
        cfg.sweep = parse_sweep(raw["sweep"])
    if "circuit" in raw:
        cfg.circuit = parse_circuit(raw["circuit"])
    return apply_env_overrides(cfg)


def apply_env_overrides(cfg: RunConfig, environ=None) -> RunConfig:
    env = os.environ if environ is None else environ

    def lookup(name):
        return env.get(ENV_PREFIX + name)

    if lookup("OUT"):
        cfg.out_dir = lookup("OUT")
    if lookup("WORKERS"):
        try:
            cfg.workers = max(1, int(lookup("WORKERS")))
        except ValueError as exc:
            raise ConfigError(f"{ENV_PREFIX}WORKERS: expected an integer") from exc
    if cfg.sweep is not None:
        updates = {}
        if lookup("SEED"):
            try:
                updates["seed"] = int(lookup("SEED"))
            except ValueError as exc:
                raise ConfigError(f"{ENV_PREFIX}SEED: expected an integer") from exc
        if lookup("FRAME"):
            updates["frame"] = parse_frame(lookup("FRAME"), f"{ENV_PREFIX}FRAME")
        if lookup("READOUT"):
            updates["readout"] = _choice(
                lookup("READOUT"), {"bare", "dressed"}, f"{ENV_PREFIX}READOUT"
            )
        if updates:
            from dataclasses import replace

            cfg.sweep = replace(cfg.sweep, **updates)
    return cfg
