"""Parsers for raw CSS attribute strings."""

from __future__ import annotations

import re

from ..errors import UnparsableAttribute

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_LENGTH_RE = re.compile(rf"^\s*({_NUM})\s*(px|em|rem|pt|pc|in|cm|mm|%|)\s*$", re.I)
_FUNC_RE = re.compile(r"^\s*(rgba?)\s*\((.*)\)\s*$", re.I)

# conversions to px at the browser default 16px root font size
_UNIT_PX = {"": 1.0, "px": 1.0, "em": 16.0, "rem": 16.0, "pt": 4 / 3, "pc": 16.0,
            "in": 96.0, "cm": 96 / 2.54, "mm": 96 / 25.4, "%": 1.0}

# keywords that mean "use the manifest default"
DEFAULT_KEYWORDS = frozenset({"normal", "auto", "none", "initial", "inherit", "unset", "revert"})

_FONT_WEIGHTS = {"lighter": 300.0, "normal": 400.0, "bold": 700.0, "bolder": 800.0}


def parse_length(value: str) -> float | None:
    """Length in px, or None for a defaulting keyword."""
    v = value.strip().lower()
    if v in DEFAULT_KEYWORDS:
        return None
    m = _LENGTH_RE.match(v)
    if not m:
        raise UnparsableAttribute(f"not a CSS length: {value!r}")
    return float(m.group(1)) * _UNIT_PX[m.group(2).lower()]


def parse_number(value: str, name: str = "") -> float | None:
    v = value.strip().lower()
    if name == "font-weight" and v in _FONT_WEIGHTS:
        return _FONT_WEIGHTS[v]
    return parse_length(v)


def _channel(tok: str) -> float:
    tok = tok.strip()
    if tok.endswith("%"):
        return float(tok[:-1]) * 255 / 100
    return float(tok)


def _alpha(tok: str) -> float:
    tok = tok.strip()
    if tok.endswith("%"):
        return float(tok[:-1]) / 100
    return float(tok)


def parse_color(value: str) -> tuple[float, float, float, float]:
    """(R, G, B, opacity) with channels in 0-255 and opacity in 0-1."""
    v = value.strip()
    if v.lower() == "transparent":
        return (0.0, 0.0, 0.0, 0.0)
    m = _FUNC_RE.match(v)
    if m:
        parts = [p for p in re.split(r"[\s,/]+", m.group(2).strip()) if p]
        try:
            if len(parts) == 3:
                r, g, b = (_channel(p) for p in parts)
                a = 1.0
            elif len(parts) == 4:
                r, g, b = (_channel(p) for p in parts[:3])
                a = _alpha(parts[3])
            else:
                raise ValueError
        except ValueError:
            raise UnparsableAttribute(f"malformed color: {value!r}") from None
        if not all(0 <= c <= 255 for c in (r, g, b)) or not 0 <= a <= 1:
            raise UnparsableAttribute(f"color component out of range: {value!r}")
        return (r, g, b, a)

    from PIL import ImageColor

    try:
        rgb = ImageColor.getrgb(v)
    except ValueError:
        raise UnparsableAttribute(f"unknown color: {value!r}") from None
    a = rgb[3] / 255 if len(rgb) == 4 else 1.0
    return (float(rgb[0]), float(rgb[1]), float(rgb[2]), a)


def parse_box_shorthand(value: str) -> tuple[float | None, ...]:
    """Expand a 1-4 value margin/padding shorthand.

    Returns (top, left, right, bottom); CSS order is top, right, bottom, left.
    """
    toks = value.split()
    if not 1 <= len(toks) <= 4:
        raise UnparsableAttribute(f"box shorthand needs 1-4 values: {value!r}")
    vals = [parse_length(t) for t in toks]
    if len(vals) == 1:
        top = right = bottom = left = vals[0]
    elif len(vals) == 2:
        top = bottom = vals[0]
        right = left = vals[1]
    elif len(vals) == 3:
        top, bottom = vals[0], vals[2]
        right = left = vals[1]
    else:
        top, right, bottom, left = vals
    return (top, left, right, bottom)


def parse_ordinal(value: str, levels: dict[str, int]) -> float | None:
    v = value.strip().lower()
    if v in levels:
        return float(levels[v])
    if v in DEFAULT_KEYWORDS:
        return None
    raise UnparsableAttribute(f"unexpected keyword {value!r}; allowed: {sorted(levels)}")


def parse_flag(value: str) -> float:
    v = value.strip().lower()
    return 0.0 if v in DEFAULT_KEYWORDS or v == "" else 1.0


_GENERIC_FAMILIES = ("serif", "sans-serif", "monospace", "cursive", "fantasy", "system-ui")


def parse_font_family(value: str, levels: dict[str, int]) -> float | None:
    """Ordinal of the first generic family keyword in a font-family list."""
    fams = [f.strip().strip("'\"").lower() for f in value.split(",")]
    for fam in fams:
        if fam in levels:
            return float(levels[fam])
    return None
