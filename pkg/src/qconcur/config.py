"""Flat key=value run configuration.

One section-prefixed key per line (model.g0=0.1); '#' starts a comment.
Complex values are written as "re im".  parse_config and canonical_text
round-trip exactly: parsing the canonical text reproduces an identical
configuration and identical canonical text.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import ProcessParams
from .errors import ConfigError, InvalidParameters
from .model import ModelParams, coherent_field_amplitudes, fock_field_amplitudes


def _fmt(x):
    return f"{x:.17g}"


def _fmt_complex(z):
    return f"{_fmt(z.real)} {_fmt(z.imag)}"


@dataclass(frozen=True)
class FieldSpec:
    """Initial field state: poisson (amplitudes sqrt of Poisson weights),
    fock n, or a custom amplitude list over photon numbers 0..n_max."""

    kind: str
    n: int = 0
    amplitudes: tuple = ()

    def __post_init__(self):
        if self.kind not in ("poisson", "fock", "custom"):
            raise ConfigError(f"unknown field kind {self.kind!r}")

    def amplitudes_for(self, params):
        if self.kind == "poisson":
            return coherent_field_amplitudes(params.nbar, params.n_max)
        if self.kind == "fock":
            return fock_field_amplitudes(self.n, params.n_max)
        amp = np.array(self.amplitudes, dtype=complex)
        if len(amp) != params.n_max + 1:
            raise ConfigError(
                f"custom field needs {params.n_max + 1} amplitudes, got {len(amp)}"
            )
        return amp


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    process: ProcessParams
    initial: tuple  # four complex atom amplitudes (c00, c01, c10, c11)
    field: FieldSpec
    variant: str
    out_dir: str

    def __post_init__(self):
        if self.variant not in ("printed", "repaired"):
            raise ConfigError(f"variant must be printed or repaired, got {self.variant!r}")
        if len(self.initial) != 4:
            raise ConfigError("initial amplitudes must be four complex numbers")


_S = 1.0 / math.sqrt(2.0)


def default_config():
    """Baseline run: maximally entangled atoms, Poissonian field with
    nbar=4, moderate coupling, unit-width autocorrelation."""
    return RunConfig(
        model=ModelParams(omega0=1.0, Omega=0.05, omega_f=0.1, g0=0.1, k_f=1.0,
                          nbar=4.0, n_max=44),
        process=ProcessParams(alpha0=1.0, dt=0.01, t_max=20.0, n_traj=100, seed=12345),
        initial=(complex(_S), 0j, 0j, complex(_S)),
        field=FieldSpec("poisson"),
        variant="repaired",
        out_dir="out",
    )


_MODEL_KEYS = ("omega0", "Omega", "omega_f", "g0", "k_f", "nbar", "n_max")
_PROCESS_KEYS = ("alpha0", "dt", "t_max", "n_traj", "seed")
_INITIAL_KEYS = ("c00", "c01", "c10", "c11")


def canonical_text(cfg):
    lines = []
    for k in _MODEL_KEYS:
        v = getattr(cfg.model, k)
        lines.append(f"model.{k}={v:d}" if k == "n_max" else f"model.{k}={_fmt(v)}")
    for k in _PROCESS_KEYS:
        v = getattr(cfg.process, k)
        lines.append(f"process.{k}={v:d}" if k in ("n_traj", "seed") else f"process.{k}={_fmt(v)}")
    for k, z in zip(_INITIAL_KEYS, cfg.initial):
        lines.append(f"initial.{k}={_fmt_complex(complex(z))}")
    lines.append(f"field.kind={cfg.field.kind}")
    if cfg.field.kind == "fock":
        lines.append(f"field.n={cfg.field.n:d}")
    if cfg.field.kind == "custom":
        flat = " ".join(_fmt_complex(complex(z)) for z in cfg.field.amplitudes)
        lines.append(f"field.amplitudes={flat}")
    lines.append(f"variant={cfg.variant}")
    lines.append(f"output.dir={cfg.out_dir}")
    return "\n".join(lines) + "\n"


def _parse_complex(raw, key):
    parts = raw.split()
    if len(parts) != 2:
        raise ConfigError(f"{key}: complex values are written as 're im', got {raw!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise ConfigError(f"{key}: cannot parse complex value {raw!r}") from None


def parse_config(text):
    """Parse configuration text; unknown keys and malformed values raise
    ConfigError."""
    entries = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()

    def take(key, conv, default=None):
        if key not in entries:
            if default is None:
                raise ConfigError(f"missing required key {key}")
            return default
        raw = entries.pop(key)
        try:
            return conv(raw)
        except (ValueError, TypeError):
            raise ConfigError(f"cannot parse {key}={raw!r}") from None

    n_max = take("model.n_max", int, default=0) if "model.n_max" in entries else None
    try:
        mp = ModelParams(
            omega0=take("model.omega0", float),
            Omega=take("model.Omega", float),
            omega_f=take("model.omega_f", float),
            g0=take("model.g0", float),
            k_f=take("model.k_f", float),
            nbar=take("model.nbar", float),
            n_max=n_max,
        )
        pp = ProcessParams(
            alpha0=take("process.alpha0", float),
            dt=take("process.dt", float),
            t_max=take("process.t_max", float),
            n_traj=take("process.n_traj", int),
            seed=take("process.seed", int),
        )
    except InvalidParameters as exc:
        raise ConfigError(str(exc)) from exc

    initial = []
    for k in _INITIAL_KEYS:
        if f"initial.{k}" not in entries:
            raise ConfigError(f"missing required key initial.{k}")
        initial.append(_parse_complex(entries.pop(f"initial.{k}"), f"initial.{k}"))
    initial = tuple(initial)

    kind = entries.pop("field.kind", "poisson")
    fock_n = int(entries.pop("field.n", "0"))
    amps_raw = entries.pop("field.amplitudes", "")
    amplitudes = ()
    if kind == "custom":
        toks = amps_raw.split()
        if len(toks) % 2:
            raise ConfigError("field.amplitudes needs an even number of tokens (re im pairs)")
        amplitudes = tuple(
            complex(float(toks[i]), float(toks[i + 1])) for i in range(0, len(toks), 2)
        )
    field = FieldSpec(kind, fock_n, amplitudes)

    variant = entries.pop("variant", "repaired")
    out_dir = entries.pop("output.dir", "out")
    if entries:
        raise ConfigError(f"unknown configuration keys: {sorted(entries)}")
    return RunConfig(mp, pp, initial, field, variant, out_dir)


def with_overrides(cfg, seed=None, variant=None, out_dir=None):
    """CLI flag overrides, returning a new configuration."""
    if seed is not None:
        cfg = replace(cfg, process=replace(cfg.process, seed=seed))
    if variant is not None:
        cfg = replace(cfg, variant=variant)
    if out_dir is not None:
        cfg = replace(cfg, out_dir=out_dir)
    return cfg
