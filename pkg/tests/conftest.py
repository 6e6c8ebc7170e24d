import json
from pathlib import Path

import numpy as np
import pytest

from attnswap.synth import SynthSpec, gen_attention_corpus

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; the summary is printed at the end of the run."""

    def record(name: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((name, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    """A small high-signal synthetic corpus with low feature noise."""
    root = tmp_path_factory.mktemp("synth_hi")
    return gen_attention_corpus(SynthSpec(n_pages=22, n_participants=3, seed=11), root)


@pytest.fixture(scope="session")
def clean_corpus(tmp_path_factory):
    """Zero feature noise, so hit-testing and pairing are exact."""
    root = tmp_path_factory.mktemp("synth_clean")
    return gen_attention_corpus(SynthSpec(n_pages=12, n_participants=4, noise_sigma=0.0, seed=5), root)


def write_corpus(root: Path, pages, elements, fixations, rasters=None):
    """Write a hand-built corpus; ``rasters`` maps relative path -> H x W x 3 uint8 array."""
    from PIL import Image

    root.mkdir(parents=True, exist_ok=True)
    for rel, arr in (rasters or {}).items():
        (root / rel).parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(np.asarray(arr, dtype=np.uint8), "RGB").save(root / rel, format="PPM")
    (root / "pages.json").write_text(json.dumps(pages))
    (root / "elements.json").write_text(json.dumps(elements))
    (root / "fixations.json").write_text(json.dumps(fixations))
    return root


def page(pid="w1", shot="shot.ppm", w=1680, h=1050):
    return {"page_id": pid, "viewport": {"width_px": w, "height_px": h}, "screenshot_ref": shot}


def gray(n=4, value=128):
    return np.full((n, n, 3), value, dtype=np.uint8)
