"""The text feature manifest: an ordered, data-driven list of text features."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import SchemaViolation

TEXT_DIM = 70
KINDS = {"position", "color", "box", "length", "number", "ordinal", "flag", "font_family"}
POSITION_SOURCES = ("dist_top", "dist_left", "dist_right", "dist_bottom", "area")
COLOR_COMPONENTS = ("r", "g", "b", "a")
BOX_COMPONENTS = ("top", "left", "right", "bottom")


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    kind: str
    source: str
    default: float
    component: str | None = None
    levels: dict[str, int] = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class FeatureManifest:
    entries: tuple[ManifestEntry, ...]

    def __len__(self):
        return len(self.entries)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def validate(self, expected_len: int = TEXT_DIM) -> "FeatureManifest":
        if len(self.entries) != expected_len:
            raise SchemaViolation(f"text manifest must have {expected_len} entries, has {len(self.entries)}")
        names = self.names
        if len(set(names)) != len(names):
            raise SchemaViolation("manifest feature names must be unique")
        groups: dict[tuple[str, str], list[str]] = defaultdict(list)
        for e in self.entries:
            if e.kind not in KINDS:
                raise SchemaViolation(f"manifest entry {e.name!r}: unknown kind {e.kind!r}")
            if e.kind == "position" and e.source not in POSITION_SOURCES:
                raise SchemaViolation(f"manifest entry {e.name!r}: unknown positional source {e.source!r}")
            if e.kind in ("ordinal", "font_family") and not e.levels:
                raise SchemaViolation(f"manifest entry {e.name!r}: ordinal kinds need levels")
            if e.kind in ("color", "box"):
                groups[(e.kind, e.source)].append(e.component)
        for (kind, src), comps in groups.items():
            want = COLOR_COMPONENTS if kind == "color" else BOX_COMPONENTS
            if sorted(comps) != sorted(want):
                raise SchemaViolation(f"{kind} attribute {src!r} must expand to exactly {want}, got {comps}")
        return self

    def to_json(self) -> list[dict]:
        out = []
        for e in self.entries:
            rec = {"name": e.name, "kind": e.kind, "source": e.source, "default": e.default}
            if e.component is not None:
                rec["component"] = e.component
            if e.levels:
                rec["levels"] = dict(e.levels)
            out.append(rec)
        return out

    @classmethod
    def from_json(cls, data: list[dict]) -> "FeatureManifest":
        if not isinstance(data, list):
            raise SchemaViolation("manifest must be a JSON array")
        try:
            entries = tuple(
                ManifestEntry(r["name"], r["kind"], r["source"], float(r["default"]),
                              r.get("component"), dict(r.get("levels", {})))
                for r in data
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed manifest entry: {exc}") from exc
        return cls(entries)


def load_manifest(path: str | Path | None = None) -> FeatureManifest:
    """Load and validate a manifest; ``None`` gives the packaged default."""
    if path is None:
        text = resources.files("attnswap.data").joinpath("text_manifest.json").read_text()
    else:
        text = Path(path).read_text()
    return FeatureManifest.from_json(json.loads(text)).validate()


def default_manifest() -> FeatureManifest:
    return load_manifest(None)
