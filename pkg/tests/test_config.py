import math

import numpy as np
import pytest

from qconcur.config import (
    FieldSpec,
    RunConfig,
    canonical_text,
    default_config,
    parse_config,
    with_overrides,
)
from qconcur.errors import ConfigError


def test_default_config_valid():
    cfg = default_config()
    assert cfg.model.nbar == 4.0
    assert cfg.process.dt * math.sqrt(cfg.process.alpha0) <= 0.1
    assert abs(sum(abs(z) ** 2 for z in cfg.initial) - 1.0) < 1e-12


def test_round_trip_identity():
    cfg = default_config()
    text = canonical_text(cfg)
    again = parse_config(text)
    assert again == cfg
    assert canonical_text(again) == text


def test_round_trip_fock_and_custom():
    base = default_config()
    fock = RunConfig(base.model, base.process, base.initial, FieldSpec("fock", n=3),
                     "printed", "elsewhere")
    assert parse_config(canonical_text(fock)) == fock
    amps = tuple(np.ones(base.model.n_max + 1) / math.sqrt(base.model.n_max + 1))
    custom = RunConfig(base.model, base.process, base.initial,
                       FieldSpec("custom", amplitudes=amps), "repaired", "out")
    again = parse_config(canonical_text(custom))
    assert again.field.kind == "custom"
    assert np.allclose(again.field.amplitudes, amps, atol=0)
    assert canonical_text(again) == canonical_text(custom)


def test_parse_errors():
    cfg_text = canonical_text(default_config())
    with pytest.raises(ConfigError):
        parse_config(cfg_text + "model.bogus=1\n")
    with pytest.raises(ConfigError):
        parse_config(cfg_text.replace("model.g0=", "model.g0!"))
    with pytest.raises(ConfigError):
        parse_config(cfg_text.replace("initial.c00=0.70710678118654746 0", "initial.c00=0.7"))
    with pytest.raises(ConfigError):
        parse_config("\n".join(ln for ln in cfg_text.splitlines()
                               if not ln.startswith("process.seed")))
    with pytest.raises(ConfigError):
        parse_config(cfg_text.replace("process.dt=0.01", "process.dt=banana"))
    # physics preconditions surface as config errors
    with pytest.raises(ConfigError):
        parse_config(cfg_text.replace("model.n_max=44", "model.n_max=5"))


def test_comments_and_blank_lines():
    text = "# a comment\n\n" + canonical_text(default_config())
    assert parse_config(text) == default_config()


def test_overrides():
    cfg = default_config()
    out = with_overrides(cfg, seed=777, variant="printed", out_dir="x")
    assert out.process.seed == 777
    assert out.variant == "printed"
    assert out.out_dir == "x"
    # untouched fields survive
    assert out.model == cfg.model
    assert with_overrides(cfg) == cfg


def test_field_amplitudes_dispatch():
    cfg = default_config()
    amp = cfg.field.amplitudes_for(cfg.model)
    assert abs(np.linalg.norm(amp) - 1.0) < 1e-12
    fock = FieldSpec("fock", n=2).amplitudes_for(cfg.model)
    assert fock[2] == 1.0 and np.count_nonzero(fock) == 1
    with pytest.raises(ConfigError):
        FieldSpec("custom", amplitudes=(1.0,)).amplitudes_for(cfg.model)
    with pytest.raises(ConfigError):
        FieldSpec("thermal")
