"""Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored.  Values stay strings here; each
command coerces them against its own table of defaults.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ValidationError


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        out[key] = value.strip()
    return out


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_render(v) for v in value)
    return "" if value is None else str(value)


def dump_config(values: dict, path: str | Path) -> None:
    """Write keys in sorted order so the file is byte-stable."""
    lines = [f"{k} = {_render(values[k])}" for k in sorted(values)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


_SCALARS = {"int": int, "float": float, "str": str}


def _bool(raw) -> bool:
    low = str(raw).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def coerce(key: str, raw, kind: str):
    """Convert ``raw`` to ``kind``.

    Kinds are ``int``, ``float``, ``str``, ``bool``, a ``?`` suffix for an
    optional value (empty or ``none`` maps to ``None``) and a ``[]`` suffix
    for comma-separated lists.
    """
    if kind.endswith("?"):
        if raw is None or str(raw).strip().lower() in ("", "none"):
            return None
        return coerce(key, raw, kind[:-1])
    if kind.endswith("[]"):
        items = raw if isinstance(raw, (list, tuple)) else [s for s in str(raw).split(",") if s.strip()]
        return [coerce(key, s, kind[:-2]) for s in items]
    try:
        if kind == "bool":
            return raw if isinstance(raw, bool) else _bool(raw)
        value = _SCALARS[kind](raw.strip() if isinstance(raw, str) else raw)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad value for {key}: {raw!r}") from exc
    if kind == "int" and isinstance(raw, float) and raw != int(raw):
        raise ValidationError(f"bad value for {key}: {raw!r}")
    return value
