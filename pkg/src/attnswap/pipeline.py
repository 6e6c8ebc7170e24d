"""validate -> features -> pair -> fit -> evaluate -> cost, with on-disk stage caching.

Each stage has a key hashed from its inputs (corpus bytes, upstream key,
the config fields it reads, tool version).  A stage whose key matches the
one recorded in ``<output_dir>/.stages.json`` and whose outputs are intact
is loaded from disk instead of recomputed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .cca import CROSS_MAPS, DEFAULT_D, DEFAULT_LAMBDA, load_model
from .costs import PUBLISHED, CostParams, corpus_image_costs, cost_report
from .errors import AttnError, EmptyDataset, SchemaViolation
from .evaluate import SCHEMES, Protocol, cross_validate, fit_model
from .features.corpus import FeatureTable, corpus_features, sidecar_path
from .features.manifest import load_manifest
from .ingest import DEFAULT_MIN_FIXATION_MS, Modality, attended_events, load_corpus
from .pairing import Dedup, assign_fixation_indices, build_pairs, load_pairs, save_pairs
from .retrieval import RetrievalIndex, TextRef

log = logging.getLogger(__name__)

ARTIFACTS = ("features.bin", "pairs.json", "model.cca", "index.bin", "report.json", "cost.json")


@dataclass
class PipelineConfig:
    corpus_root: str
    output_dir: str = "out"
    manifest_path: str | None = None
    d: int | str = DEFAULT_D
    lam: float = DEFAULT_LAMBDA
    min_fixation_ms: int = DEFAULT_MIN_FIXATION_MS
    dedup: str = Dedup.FIRST_FIXATION.value
    folds: int = 5
    scheme: str = "stratified"
    bandwidth_kbps: float = 53.0
    retrieval_space: str = "text"
    same_page_only: bool = False
    cross_map: str = "identity"
    seed: int = 0

    def validate(self) -> "PipelineConfig":
        if not Path(self.corpus_root).is_dir():
            raise SchemaViolation(f"config.corpus_root: not a directory: {self.corpus_root}")
        if self.manifest_path is not None and not Path(self.manifest_path).is_file():
            raise SchemaViolation(f"config.manifest_path: not a file: {self.manifest_path}")
        if self.d != "auto" and (not isinstance(self.d, int) or self.d < 1):
            raise SchemaViolation("config.d must be a positive integer or 'auto'")
        if self.lam < 0:
            raise SchemaViolation("config.lam must be >= 0")
        if self.min_fixation_ms < 0:
            raise SchemaViolation("config.min_fixation_ms must be >= 0")
        if self.bandwidth_kbps <= 0:
            raise SchemaViolation("config.bandwidth_kbps must be positive")
        if self.retrieval_space not in ("text", "subspace"):
            raise SchemaViolation("config.retrieval_space must be 'text' or 'subspace'")
        if self.scheme not in SCHEMES:
            raise SchemaViolation(f"config.scheme must be one of {SCHEMES}")
        if self.scheme == "stratified" and (not isinstance(self.folds, int) or self.folds < 2):
            raise SchemaViolation("config.folds must be an integer >= 2")
        if self.cross_map not in CROSS_MAPS:
            raise SchemaViolation(f"config.cross_map must be one of {CROSS_MAPS}")
        if self.dedup not in {m.value for m in Dedup}:
            raise SchemaViolation(f"config.dedup must be one of {[m.value for m in Dedup]}")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        # accept "lambda" as an alias since it cannot be a Python field name
        data = {("lam" if k == "lambda" else k): v for k, v in data.items()}
        unknown = set(data) - known
        if unknown:
            raise SchemaViolation(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def echo(self) -> dict:
        """Config as embedded in artifacts (output location excluded)."""
        d = asdict(self)
        d.pop("output_dir")
        return d

    def protocol(self) -> Protocol:
        return Protocol(d=self.d, lam=self.lam, folds=self.folds, scheme=self.scheme,
                        space=self.retrieval_space, same_page_only=self.same_page_only,
                        cross_map=self.cross_map, seed=self.seed)


def _sha(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p if isinstance(p, bytes) else json.dumps(p, sort_keys=True).encode())
        h.update(b"\0")
    return h.hexdigest()


def config_hash(cfg: PipelineConfig) -> str:
    return _sha(cfg.echo())


def corpus_digest(root: Path, corpus) -> str:
    h = hashlib.sha256()
    files = ["pages.json", "elements.json", "fixations.json"]
    files += sorted({p.screenshot_ref for p in corpus.pages.values()})
    files += sorted(e.raster_ref for e in corpus.elements if e.raster_ref)
    for name in files:
        h.update(name.encode() + b"\0")
        h.update(hashlib.sha256((root / name).read_bytes()).digest())
    return h.hexdigest()


def _file_sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def user_error(self) -> bool:
        return isinstance(self.cause, AttnError)


@dataclass
class PipelineResult:
    output_dir: Path
    config_hash: str
    report: dict
    cost: dict
    reused: list[str]


class _Run:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.meta = {"tool": "attnswap", "tool_version": __version__, "config_hash": config_hash(cfg)}
        self.cache_file = self.out / ".stages.json"
        self.cache = json.loads(self.cache_file.read_text()) if self.cache_file.is_file() else {}
        self.written: list[Path] = []
        self.reused: list[str] = []

    def cached(self, stage: str, key: str, outputs: list[str]) -> bool:
        rec = self.cache.get(stage)
        if not rec or rec.get("key") != key:
            return False
        for name in outputs:
            p = self.out / name
            if not p.is_file() or rec["outputs"].get(name) != _file_sha(p):
                return False
        self.reused.append(stage)
        return True

    def write(self, name: str, data: bytes | str) -> Path:
        path = self.out / name
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(data if isinstance(data, bytes) else data.encode())
        os.replace(tmp, path)
        self.written.append(path)
        return path

    def record(self, stage: str, key: str, outputs: list[str]) -> None:
        self.cache[stage] = {"key": key, "outputs": {n: _file_sha(self.out / n) for n in outputs}}

    def save_cache(self) -> None:
        self.cache_file.write_text(dump_json(self.cache))

    def cleanup(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)
        for p in self.out.glob("*.tmp"):
            p.unlink(missing_ok=True)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run every stage; on failure remove this run's artifacts and raise StageError."""
    run = _Run(cfg)
    run.out.mkdir(parents=True, exist_ok=True)
    stage = "config"
    try:
        cfg.validate()
        echo = cfg.echo()

        stage = "validate"
        corpus = load_corpus(cfg.corpus_root)
        manifest = load_manifest(cfg.manifest_path)
        base_key = _sha(__version__, corpus_digest(Path(cfg.corpus_root), corpus))

        stage = "features"
        key = _sha(base_key, manifest.to_json())
        outs = ["features.bin", sidecar_path(Path("features.bin")).name]
        if run.cached(stage, key, outs):
            table = FeatureTable.load(run.out / "features.bin")
        else:
            table = corpus_features(corpus, manifest)
            tmp = run.out / "features.bin.tmp"
            side = table.save(tmp, {**run.meta, "config": echo})
            os.replace(tmp, run.out / "features.bin")
            os.replace(side, run.out / outs[1])
            run.written += [run.out / n for n in outs]
            run.record(stage, key, outs)
        feat_key = key

        stage = "pair"
        key = _sha(base_key, cfg.min_fixation_ms, cfg.dedup)
        if run.cached(stage, key, ["pairs.json"]):
            pairs = load_pairs(run.out / "pairs.json")
        else:
            if not corpus.elements_of(Modality.IMAGE):
                raise EmptyDataset("corpus has no image elements, so no pairs can be formed")
            events = attended_events(corpus, cfg.min_fixation_ms)
            pairs = build_pairs(assign_fixation_indices(events, Dedup(cfg.dedup)))
            if not pairs:
                raise EmptyDataset("no text/image pairs share a fixation index")
            tmp = run.out / "pairs.json.tmp"
            save_pairs(pairs, tmp)
            os.replace(tmp, run.out / "pairs.json")
            run.written.append(run.out / "pairs.json")
            run.record(stage, key, ["pairs.json"])
        pair_key = key

        T, I = table.join(pairs)
        protocol = cfg.protocol()

        stage = "fit"
        key = _sha(feat_key, pair_key, cfg.d, cfg.lam, cfg.cross_map)
        outs = ["model.cca", "model.cca.json", "index.bin", "index.bin.refs.json"]
        if run.cached(stage, key, outs):
            model = load_model(run.out / "model.cca")
        else:
            model = fit_model(T, I, protocol)
            meta = {**run.meta, "config": echo}
            model.save(run.out / "model.cca.tmp", meta)
            os.replace(run.out / "model.cca.tmp", run.out / "model.cca")
            os.replace(run.out / "model.cca.tmp.json", run.out / "model.cca.json")
            refs = [TextRef(p.text_element_id, p.page_id, p.participant_id, p.fixation_index) for p in pairs]
            index = RetrievalIndex.build(model, T, refs)
            index.save(run.out / "index.bin.tmp", meta)
            os.replace(run.out / "index.bin.tmp", run.out / "index.bin")
            os.replace(run.out / "index.bin.tmp.refs.json", run.out / "index.bin.refs.json")
            run.written += [run.out / n for n in outs]
            run.record(stage, key, outs)

        stage = "evaluate"
        key = _sha(feat_key, pair_key, asdict(protocol))
        if run.cached(stage, key, ["report.json"]):
            report = json.loads((run.out / "report.json").read_text())
        else:
            ev = cross_validate(T, I, pairs, protocol)
            report = {**run.meta, "config": echo, "evaluation": ev.to_dict(),
                      "full_fit": model.summary(), "reference": PUBLISHED}
            run.write("report.json", dump_json(report))
            run.record(stage, key, ["report.json"])

        stage = "cost"
        f1 = report["evaluation"]["micro_f1"]
        key = _sha(base_key, f1, cfg.bandwidth_kbps)
        if run.cached(stage, key, ["cost.json"]):
            cost = json.loads((run.out / "cost.json").read_text())
        else:
            img = corpus_image_costs(corpus)
            params = CostParams(bandwidth_kbps=cfg.bandwidth_kbps)
            rep = cost_report(img.mean_per_image_kB, img.mean_per_page_kB, f1, params)
            cost = {**run.meta, "config": echo, "image_costs": asdict(img), "cost": rep.to_dict(),
                    "reference": PUBLISHED}
            run.write("cost.json", dump_json(cost))
            run.record(stage, key, ["cost.json"])

        run.save_cache()
    except Exception as exc:
        run.cleanup()
        raise StageError(stage, exc) from exc
    return PipelineResult(run.out, run.meta["config_hash"], report, cost, run.reused)
