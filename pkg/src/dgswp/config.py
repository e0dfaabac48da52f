"""Flat ``dotted.key = value`` experiment configs."""
from __future__ import annotations


class ConfigError(ValueError):
    pass


def parse_value(text: str):
    s = text.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null"):
        return None
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
        return s[1:-1]
    if "," in s:
        return tuple(parse_value(part) for part in s.split(",") if part.strip())
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    return s


def parse_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key or any(c.isspace() for c in key):
            raise ConfigError(f"{source}:{lineno}: invalid key {key!r}")
        if not value.strip():
            raise ConfigError(f"{source}:{lineno}: missing value for {key!r}")
        out[key] = parse_value(value)
    return out


def load(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), str(path))


def parse_overrides(items) -> dict:
    out = {}
    for k, item in enumerate(items or []):
        if "=" not in item:
            raise ConfigError(f"--set #{k + 1}: expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = parse_value(value)
    return out


def resolve(defaults: dict, *layers: dict) -> dict:
    """Merge layers over defaults, rejecting keys the command does not know."""
    cfg = dict(defaults)
    for layer in layers:
        for key, value in layer.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}; known keys: {', '.join(sorted(cfg))}")
            cfg[key] = value
    return cfg


def dump(cfg: dict) -> str:
    def fmt(v):
        if isinstance(v, (tuple, list)):
            return ",".join(fmt(x) for x in v)
        return repr(v) if isinstance(v, float) else str(v)
    return "".join(f"{k} = {fmt(cfg[k])}\n" for k in sorted(cfg))
