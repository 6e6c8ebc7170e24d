"""Memory-cost and render-time arithmetic for replacing images with text.

Sizes are bytes internally; kB means 1024 bytes.  Bandwidths are in
kilobits per second, so a cost of c kB takes ``c * 8 / kbps`` seconds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import InvalidArgument, UnreadableRaster, ZeroBandwidth, ZeroTextCost
from .ingest import Corpus, Modality, Viewport

KILO = 1024

BANDWIDTH_KBPS = {"ldc": 6.0, "developing": 53.0, "developed": 140.0}

# published inputs and outputs of the cost analysis, kept for report echoes
PUBLISHED = {
    "image_count": 139,
    "page_count": 22,
    "total_image_kB": 8573.05,
    "mean_image_kB": 61.68,
    "mean_page_image_kB": 389.8,
    "text_cost_kB": 33.64,
    "micro_f1": 0.52,
    "bandwidth_kbps": 53.0,
    "min_saving_pct": 83.35,
    "max_saving_pct": 1058.74,
    "achieved_saving_pct": 502.54,
    "render_time_before_s": 30.6,
    "render_time_after_s": 5.07,
    "leading_rho": 0.9948,
    "d": 28,
    "n_pairs": 14330,
}


@dataclass(frozen=True)
class CostParams:
    viewport: Viewport = field(default_factory=Viewport)
    font_px: int = 16
    bytes_per_char: int = 4
    formatting_bytes_per_char: int = 1
    kilo: int = KILO
    bandwidth_kbps: float = BANDWIDTH_KBPS["developing"]

    def __post_init__(self):
        if self.bandwidth_kbps <= 0:
            raise ZeroBandwidth("bandwidth must be positive")
        for name in ("font_px", "bytes_per_char", "kilo"):
            if getattr(self, name) <= 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.formatting_bytes_per_char < 0:
            raise InvalidArgument("formatting_bytes_per_char must be >= 0")


def screen_chars(params: CostParams) -> int:
    area = params.viewport.width_px * params.viewport.height_px
    return math.floor(area / params.font_px ** 2)


def screen_text_bytes(params: CostParams) -> int:
    return screen_chars(params) * (params.bytes_per_char + params.formatting_bytes_per_char)


def screen_text_cost_kB(params: CostParams | None = None) -> float:
    """Cost of a screen filled with text at ``font_px``, including formatting overhead."""
    params = params or CostParams()
    return screen_text_bytes(params) / params.kilo


def saving_pct(replaced_cost_kB: float, text_cost_kB: float) -> float:
    if text_cost_kB <= 0:
        raise ZeroTextCost("text cost must be positive")
    return (replaced_cost_kB - text_cost_kB) * 100 / text_cost_kB


def achieved_saving_pct(avg_page_image_cost_kB: float, micro_f1: float, text_cost_kB: float) -> float:
    if not 0.0 <= micro_f1 <= 1.0:
        raise InvalidArgument("micro_f1 must lie in [0, 1]")
    return saving_pct(avg_page_image_cost_kB * micro_f1, text_cost_kB)


def render_time_s(cost_kB: float, bandwidth_kbps: float) -> float:
    if bandwidth_kbps <= 0:
        raise ZeroBandwidth("bandwidth must be positive")
    return cost_kB * 8 / bandwidth_kbps


@dataclass(frozen=True)
class ImageCosts:
    total_kB: float
    mean_per_image_kB: float
    mean_per_page_kB: float
    image_count: int
    page_count: int


def corpus_image_costs(corpus: Corpus, kilo: int = KILO) -> ImageCosts:
    """On-disk sizes of every image element's raster."""
    total = 0
    images = corpus.elements_of(Modality.IMAGE)
    for el in images:
        try:
            total += corpus.raster_path(el.raster_ref).stat().st_size
        except OSError as exc:
            raise UnreadableRaster(f"cannot stat raster of {el.element_id!r}: {exc}") from exc
    n_img, n_pages = len(images), len(corpus.pages)
    kB = total / kilo
    return ImageCosts(kB, kB / n_img if n_img else 0.0, kB / n_pages if n_pages else 0.0, n_img, n_pages)


@dataclass(frozen=True)
class CostReport:
    text_cost_kB: float
    image_cost_kB: float
    page_image_cost_kB: float
    min_saving_pct: float
    max_saving_pct: float
    achieved_saving_pct: float
    micro_f1: float
    bandwidth_kbps: float
    render_time_before_s: float
    render_time_after_s: float

    def to_dict(self) -> dict:
        return asdict(self)


def cost_report(mean_image_kB: float, mean_page_image_kB: float, micro_f1: float,
                params: CostParams | None = None, text_cost_kB: float | None = None) -> CostReport:
    """Assemble savings and render times.

    ``text_cost_kB`` overrides the computed screen text cost (e.g. with a
    rounded published value).
    """
    params = params or CostParams()
    text = screen_text_cost_kB(params) if text_cost_kB is None else text_cost_kB
    before = mean_page_image_kB * micro_f1
    return CostReport(
        text_cost_kB=text,
        image_cost_kB=mean_image_kB,
        page_image_cost_kB=mean_page_image_kB,
        min_saving_pct=saving_pct(mean_image_kB, text),
        max_saving_pct=saving_pct(mean_page_image_kB, text),
        achieved_saving_pct=achieved_saving_pct(mean_page_image_kB, micro_f1, text),
        micro_f1=micro_f1,
        bandwidth_kbps=params.bandwidth_kbps,
        render_time_before_s=render_time_s(before, params.bandwidth_kbps),
        render_time_after_s=render_time_s(text, params.bandwidth_kbps),
    )


def published_cost_report(params: CostParams | None = None) -> CostReport:
    """The cost analysis recomputed from the published image costs and micro-F1."""
    return cost_report(PUBLISHED["mean_image_kB"], PUBLISHED["mean_page_image_kB"], PUBLISHED["micro_f1"],
                       params, text_cost_kB=PUBLISHED["text_cost_kB"])
