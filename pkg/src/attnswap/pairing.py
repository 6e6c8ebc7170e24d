"""Fixation indices and the attention-paired dataset.

Fixation indices are assigned per modality inside each (participant, page)
session, so the k-th fixated text element pairs with the k-th fixated image.
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import SchemaViolation, UnsortedInput
from .ingest import AttendedEvent, Modality


class Dedup(str, enum.Enum):
    # only the first fixation on an element earns an index
    FIRST_FIXATION = "first"
    # every visit (maximal run of consecutive fixations on one element) earns an index
    EVERY_VISIT = "visit"


@dataclass(frozen=True)
class IndexedAttention:
    participant_id: str
    page_id: str
    element_id: str
    modality: Modality
    fixation_index: int


@dataclass(frozen=True)
class PairRow:
    text_element_id: str
    image_element_id: str
    participant_id: str
    page_id: str
    fixation_index: int

    @property
    def session(self) -> tuple[str, str]:
        return (self.participant_id, self.page_id)


PairedDataset = list[PairRow]


def _sessions(events: Iterable[AttendedEvent]) -> dict[tuple[str, str], list[AttendedEvent]]:
    out: dict[tuple[str, str], list[AttendedEvent]] = defaultdict(list)
    for ev in events:
        out[(ev.participant_id, ev.page_id)].append(ev)
    return out


def assign_fixation_indices(
    events: Sequence[AttendedEvent], dedup: Dedup = Dedup.FIRST_FIXATION
) -> list[IndexedAttention]:
    """Rank attended elements 1, 2, ... per (participant, page, modality).

    Raises UnsortedInput when onsets decrease within a session.
    """
    dedup = Dedup(dedup)
    out = []
    for (part, page), evs in _sessions(events).items():
        for a, b in zip(evs, evs[1:]):
            if b.onset_ms < a.onset_ms:
                raise UnsortedInput(f"session ({part}, {page}): onset {b.onset_ms} follows {a.onset_ms}")
        counters = {Modality.TEXT: 0, Modality.IMAGE: 0}
        seen: set[str] = set()
        prev: str | None = None
        for ev in evs:
            if dedup is Dedup.FIRST_FIXATION:
                if ev.element_id in seen:
                    continue
                seen.add(ev.element_id)
            elif ev.element_id == prev:
                continue
            prev = ev.element_id
            counters[ev.modality] += 1
            out.append(IndexedAttention(part, page, ev.element_id, ev.modality, counters[ev.modality]))
    return out


def build_pairs(indexed: Sequence[IndexedAttention]) -> PairedDataset:
    """Pair the text and image holding the same fixation index in a session."""
    by_session: dict[tuple[str, str], dict[Modality, dict[int, str]]] = defaultdict(
        lambda: {Modality.TEXT: {}, Modality.IMAGE: {}}
    )
    for ia in indexed:
        by_session[(ia.participant_id, ia.page_id)][ia.modality][ia.fixation_index] = ia.element_id

    rows = []
    for (part, page) in sorted(by_session):
        streams = by_session[(part, page)]
        texts, images = streams[Modality.TEXT], streams[Modality.IMAGE]
        for k in sorted(texts.keys() & images.keys()):
            rows.append(PairRow(texts[k], images[k], part, page, k))
    return rows


def save_pairs(rows: Sequence[PairRow], path: str | Path) -> None:
    Path(path).write_text(json.dumps([asdict(r) for r in rows], indent=1) + "\n")


def load_pairs(path: str | Path) -> PairedDataset:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise SchemaViolation(f"{path}: pairs file must be a JSON array")
    try:
        return [PairRow(**rec) for rec in data]
    except TypeError as exc:
        raise SchemaViolation(f"{path}: malformed pair row ({exc})") from exc
