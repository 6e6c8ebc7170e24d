"""Regenerate src/attnswap/data/text_manifest.json (the default 70-entry text manifest)."""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "attnswap" / "data" / "text_manifest.json"

ORDINALS = {
    "font-style": ["normal", "italic", "oblique"],
    "font-variant": ["normal", "small-caps"],
    "text-decoration-line": ["none", "underline", "overline", "line-through"],
    "text-transform": ["none", "capitalize", "uppercase", "lowercase"],
    "text-align": ["left", "center", "right", "justify", "start", "end"],
    "vertical-align": ["baseline", "sub", "super", "top", "middle", "bottom", "text-top", "text-bottom"],
    "white-space": ["normal", "nowrap", "pre", "pre-wrap", "pre-line", "break-spaces"],
    "display": ["inline", "block", "inline-block", "flex", "inline-flex", "grid", "table", "list-item", "none"],
    "position": ["static", "relative", "absolute", "fixed", "sticky"],
    "float": ["none", "left", "right"],
    "overflow": ["visible", "hidden", "scroll", "auto", "clip"],
    "visibility": ["visible", "hidden", "collapse"],
    "cursor": ["auto", "default", "pointer", "text", "move", "not-allowed"],
    "list-style-type": ["none", "disc", "circle", "square", "decimal"],
    "border-style": ["none", "solid", "dashed", "dotted", "double", "groove", "ridge", "inset", "outset"],
}

SCALARS = [
    ("font-size", "length", 16.0),
    ("font-weight", "number", 400.0),
    ("line-height", "length", 19.2),
    ("letter-spacing", "length", 0.0),
    ("word-spacing", "length", 0.0),
    ("text-indent", "length", 0.0),
    ("border-top-width", "length", 0.0),
    ("border-right-width", "length", 0.0),
    ("border-bottom-width", "length", 0.0),
    ("border-left-width", "length", 0.0),
    ("border-top-left-radius", "length", 0.0),
    ("border-top-right-radius", "length", 0.0),
    ("border-bottom-right-radius", "length", 0.0),
    ("border-bottom-left-radius", "length", 0.0),
    ("width", "length", 0.0),
    ("height", "length", 0.0),
    ("min-width", "length", 0.0),
    ("min-height", "length", 0.0),
    ("max-width", "length", 0.0),
    ("max-height", "length", 0.0),
    ("opacity", "number", 1.0),
    ("z-index", "number", 0.0),
    ("outline-width", "length", 0.0),
    ("outline-offset", "length", 0.0),
    ("column-count", "number", 1.0),
    ("column-gap", "length", 16.0),
    ("tab-size", "number", 8.0),
]


def build():
    entries = []
    for name in ("dist_top", "dist_left", "dist_right", "dist_bottom", "area"):
        entries.append({"name": name, "kind": "position", "source": name, "default": 0.0})
    color_defaults = {"color": [0, 0, 0, 1], "background-color": [0, 0, 0, 0], "border-color": [0, 0, 0, 1]}
    for attr, dflt in color_defaults.items():
        for comp, d in zip(("r", "g", "b", "a"), dflt):
            entries.append({"name": f"{attr}_{comp}", "kind": "color", "source": attr,
                            "component": comp, "default": float(d)})
    for attr in ("margin", "padding"):
        for side in ("top", "left", "right", "bottom"):
            entries.append({"name": f"{attr}_{side}", "kind": "box", "source": attr,
                            "component": side, "default": 0.0})
    for attr, kind, d in SCALARS:
        entries.append({"name": attr, "kind": kind, "source": attr, "default": d})
    for attr, levels in ORDINALS.items():
        entries.append({"name": attr, "kind": "ordinal", "source": attr, "default": 0.0,
                        "levels": {lv: i for i, lv in enumerate(levels)}})
    entries.append({"name": "font-family-generic", "kind": "font_family", "source": "font-family",
                    "default": 1.0,
                    "levels": {"serif": 0, "sans-serif": 1, "monospace": 2, "cursive": 3,
                               "fantasy": 4, "system-ui": 5}})
    entries.append({"name": "text-shadow", "kind": "flag", "source": "text-shadow", "default": 0.0})
    entries.append({"name": "box-shadow", "kind": "flag", "source": "box-shadow", "default": 0.0})
    assert len(entries) == 70, len(entries)
    return entries


if __name__ == "__main__":
    OUT.write_text(json.dumps(build(), indent=1) + "\n")
    print(f"wrote {OUT}")
