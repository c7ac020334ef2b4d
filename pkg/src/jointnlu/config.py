"""Run configuration: plain-text ``key = value`` files with one section per
model kind, layered over the published defaults baked into each estimator."""

from __future__ import annotations

import configparser


class ConfigError(ValueError):
    pass


def _coerce(text):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", ""):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def load_config(path, model_kind=None):
    """Read overrides from an INI-style file: [common] applies to every
    model, [<model-kind>] applies to one. Returns a flat dict."""
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    merged = {}
    for section in ("common", model_kind or ""):
        if section and parser.has_section(section):
            for key, value in parser.items(section):
                merged[key] = _coerce(value)
    return merged


def apply_overrides(model, overrides):
    """Set estimator hyperparameters from a config dict; unknown keys are
    usage errors."""
    valid = model.get_params()
    unknown = [k for k in overrides if k not in valid]
    if unknown:
        raise ConfigError(f"unknown config keys for {model.kind}: {unknown}")
    model.set_params(**overrides)
    return model
