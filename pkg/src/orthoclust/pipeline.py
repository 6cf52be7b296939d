"""Pipeline orchestration: corpus -> mutation -> sets -> clustering -> metrics -> report.

Every stage materializes its outputs in the run directory and is cached by
a key derived from its inputs (file content hashes plus the config values
it consumes), so re-running with one changed setting recomputes only the
downstream stages.  A manifest records every seed, config value, input
checksum, and output hash.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import load_dataset, save_dataset, tag_histogram, truncate_by_char_limit, write_rejections
from .clustering import kmeans_sweep
from .embeddings import (
    DIFF_DIRECTIONS,
    LAYER_STRATEGIES,
    build_absolute_set,
    build_relative_set,
    read_embedding_file,
    write_points_jsonl,
)
from .errors import StageError, ValidationError
from .metrics import (
    dtag_proportions,
    edit_frequency_table,
    ld_profile,
    load_type_vectors,
    mphone_similarity,
    overall_accuracy,
    partial_accuracy,
    purity,
    semantic_coherency,
    so_accuracy,
)
from .mutation import (
    VARIANT_KINDS,
    ConfusionTable,
    build_variant_set,
    default_confusion_table,
    read_variants,
    write_variants,
)
from .phonetics import edit_signature
from .report import emit_figures, write_cluster_table, write_edit_table, write_per_k_csv
from .seeding import derive_seed

log = logging.getLogger(__name__)

STAGES = ("load", "mutate", "build-sets", "cluster", "evaluate", "report")

_FILTERABLE = set(VARIANT_KINDS) - {"std"}


@dataclass
class RunConfig:
    """Everything a run needs; flags on the CLI mirror these fields."""

    dataset: Path
    out: Path
    embeddings: dict[str, Path] = field(default_factory=dict)  # model_id -> file
    confusion_table: Path | None = None
    type_vectors: Path | None = None
    dataset_format: str | None = None
    char_limit: int = 512
    k_min: int = 1
    k_max: int = 20
    seed: int = 0
    layer_agg: str = "concat"
    diff_direction: str = "std-minus-var"
    exclude_kinds: tuple[str, ...] = ("rev", "swp")
    report_k: int | None = None
    restarts: int = 5
    tol: float = 1e-6
    max_iter: int = 300
    cosine: bool = False  # unit-normalize points before clustering
    case_fold: bool = False
    unknown_dtag: str = "register"
    ocr_changes: int = 1

    def __post_init__(self):
        self.dataset = Path(self.dataset)
        self.out = Path(self.out)
        self.embeddings = {m: Path(p) for m, p in self.embeddings.items()}
        if self.confusion_table is not None:
            self.confusion_table = Path(self.confusion_table)
        if self.type_vectors is not None:
            self.type_vectors = Path(self.type_vectors)
        self.exclude_kinds = tuple(self.exclude_kinds)

    def validate(self) -> None:
        if not self.dataset.is_file():
            raise ValidationError(f"dataset file not found: {self.dataset}")
        if not self.embeddings:
            raise ValidationError("at least one embedding file is required (model_id=path)")
        for model, path in self.embeddings.items():
            if not path.is_file():
                raise ValidationError(f"embedding file for {model!r} not found: {path}")
        for label, path in (("confusion table", self.confusion_table), ("type vectors", self.type_vectors)):
            if path is not None and not path.is_file():
                raise ValidationError(f"{label} file not found: {path}")
        if self.char_limit <= 0:
            raise ValidationError("char limit must be positive")
        if not 1 <= self.k_min <= self.k_max:
            raise ValidationError(f"bad k range {self.k_min}..{self.k_max}")
        if self.layer_agg not in LAYER_STRATEGIES:
            raise ValidationError(f"layer-agg must be one of {LAYER_STRATEGIES}")
        if self.diff_direction not in DIFF_DIRECTIONS:
            raise ValidationError(f"diff-direction must be one of {DIFF_DIRECTIONS}")
        bad = set(self.exclude_kinds) - _FILTERABLE
        if bad:
            raise ValidationError(f"cannot exclude kinds {sorted(bad)}; choose from {sorted(_FILTERABLE)}")
        if set(self.exclude_kinds) >= _FILTERABLE:
            raise ValidationError("exclude-kinds would leave the relative set empty")
        if self.report_k is not None and not self.k_min <= self.report_k <= self.k_max:
            raise ValidationError(f"report-k {self.report_k} outside k range")
        if self.restarts < 1 or self.max_iter < 1 or self.tol < 0:
            raise ValidationError("restarts and max-iter must be >= 1 and tol >= 0")
        if self.unknown_dtag not in ("register", "reject"):
            raise ValidationError("unknown-dtag must be 'register' or 'reject'")
        if self.ocr_changes < 1:
            raise ValidationError("ocr-changes must be >= 1")

    def to_dict(self) -> dict:
        raw = asdict(self)
        raw["dataset"] = str(self.dataset)
        raw["out"] = str(self.out)
        raw["embeddings"] = {m: str(p) for m, p in sorted(self.embeddings.items())}
        raw["confusion_table"] = None if self.confusion_table is None else str(self.confusion_table)
        raw["type_vectors"] = None if self.type_vectors is None else str(self.type_vectors)
        raw["exclude_kinds"] = list(self.exclude_kinds)
        return raw


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _key(*parts: object) -> str:
    return hashlib.sha256(":".join(str(p) for p in parts).encode()).hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class _Run:
    """One pipeline invocation over a run directory."""

    def __init__(self, config: RunConfig):
        self.cfg = config
        self.out = config.out
        self.state_path = self.out / ".stage_state.json"
        self.state: dict[str, str] = {}
        self.input_hashes: dict[str, str] = {}
        self.keys: dict[str, str] = {}

    # ---- paths -----------------------------------------------------------
    def p_rejections(self) -> Path:
        return self.out / "rejections.jsonl"

    def p_summary(self) -> Path:
        return self.out / "dataset_summary.json"

    def p_kept(self) -> Path:
        return self.out / "dataset_kept.jsonl"

    def p_variants(self) -> Path:
        return self.out / "variants.jsonl"

    def p_points(self, model: str, which: str) -> Path:
        return self.out / "sets" / model / f"{which}.jsonl"

    def p_clusters(self, model: str, set_name: str) -> Path:
        return self.out / "clusters" / model / f"{set_name}.jsonl"

    def p_metrics(self) -> Path:
        return self.out / "metrics.json"

    def p_signatures(self) -> Path:
        return self.out / "edit_signatures.jsonl"

    def report_dir(self) -> Path:
        return self.out / "report"

    # ---- key derivation ---------------------------------------------------
    def compute_keys(self) -> None:
        cfg = self.cfg
        self.input_hashes["dataset"] = _sha256_file(cfg.dataset)
        for model, path in sorted(cfg.embeddings.items()):
            self.input_hashes[f"embeddings:{model}"] = _sha256_file(path)
        if cfg.confusion_table is not None:
            self.input_hashes["confusion_table"] = _sha256_file(cfg.confusion_table)
        if cfg.type_vectors is not None:
            self.input_hashes["type_vectors"] = _sha256_file(cfg.type_vectors)

        self.keys["load"] = _key(
            "load", __version__, self.input_hashes["dataset"], cfg.dataset_format,
            cfg.char_limit, cfg.case_fold, cfg.unknown_dtag,
        )
        self.keys["mutate"] = _key(
            "mutate", self.keys["load"], self.input_hashes.get("confusion_table", "default"),
            cfg.seed, cfg.ocr_changes,
        )
        emb = ",".join(f"{m}={self.input_hashes[f'embeddings:{m}']}" for m in sorted(cfg.embeddings))
        self.keys["build-sets"] = _key(
            "build-sets", self.keys["load"], emb, cfg.layer_agg, cfg.diff_direction,
        )
        self.keys["cluster"] = _key(
            "cluster", self.keys["build-sets"], cfg.k_min, cfg.k_max, cfg.seed,
            cfg.restarts, cfg.tol, cfg.max_iter, cfg.cosine, ",".join(sorted(cfg.exclude_kinds)),
        )
        self.keys["evaluate"] = _key(
            "evaluate", self.keys["cluster"], self.keys["mutate"],
            self.input_hashes.get("type_vectors", "none"), cfg.report_k,
        )
        self.keys["report"] = _key("report", self.keys["evaluate"])

    # ---- set construction helpers ------------------------------------------
    def set_names(self) -> list[str]:
        names = ["absolute", "relative", "absolute-obv", "relative-obv"]
        if self.cfg.exclude_kinds:
            names.insert(2, "relative-filtered")
        return names

    def build_set(self, model: str, set_name: str) -> list[dict]:
        which = "absolute" if set_name.startswith("absolute") else "relative"
        points = _read_points(self.p_points(model, which))
        if set_name.endswith("-obv"):
            return [p for p in points if p["kind"] == "obv"]
        if set_name == "relative-filtered":
            keep = set(VARIANT_KINDS) - set(self.cfg.exclude_kinds)
            return [p for p in points if p["kind"] in keep]
        return points

    # ---- stages ------------------------------------------------------------
    def stage_load(self) -> None:
        cfg = self.cfg
        datapoints, rejections = load_dataset(
            cfg.dataset,
            cfg.dataset_format,
            unknown_dtag=cfg.unknown_dtag,
            case_fold=cfg.case_fold,
        )
        kept = truncate_by_char_limit(datapoints, cfg.char_limit)
        write_rejections(self.p_rejections(), rejections)
        save_dataset(self.p_kept(), kept)
        _write_json(
            self.p_summary(),
            {
                "loaded": len(datapoints),
                "rejected": len(rejections),
                "char_limit": cfg.char_limit,
                "kept_after_char_limit": len(kept),
                "tag_histogram_loaded": tag_histogram(datapoints),
                "tag_histogram_kept": tag_histogram(kept),
            },
        )
        log.info("load: %d datapoints, %d rejected, %d kept", len(datapoints), len(rejections), len(kept))

    def _load_kept(self) -> list:
        kept, rejections = load_dataset(self.p_kept(), "jsonl", unknown_dtag="register", warn_unknown=False)
        if rejections:
            raise StageError(
                "load", f"kept dataset failed revalidation: {[r.id for r in rejections[:5]]}"
            )
        return kept

    def stage_mutate(self) -> None:
        cfg = self.cfg
        kept = self._load_kept()
        table = (
            default_confusion_table()
            if cfg.confusion_table is None
            else ConfusionTable.from_json(cfg.confusion_table)
        )
        variant_sets = [
            build_variant_set(dp, table, cfg.seed, ocr_changes=cfg.ocr_changes) for dp in kept
        ]
        write_variants(self.p_variants(), variant_sets)
        log.info("mutate: %d variant sets", len(variant_sets))

    def stage_build_sets(self) -> None:
        cfg = self.cfg
        kept = self._load_kept()
        dtags = {dp.id: dp.dtag for dp in kept}
        known_ids = set(dtags)
        for model, path in sorted(cfg.embeddings.items()):
            emb = read_embedding_file(path, known_ids=known_ids)
            spec = emb.header.layer_spec
            expected = 4 if spec == "last4" else (1 if spec in ("final", "last") else None)
            absolute = build_absolute_set(emb.records, cfg.layer_agg, dtags, expected_layers=expected)
            if not absolute:
                raise StageError("build-sets", f"model {model}: no complete datapoints in {path}")
            relative = build_relative_set(absolute, cfg.diff_direction)
            self.p_points(model, "absolute").parent.mkdir(parents=True, exist_ok=True)
            write_points_jsonl(self.p_points(model, "absolute"), absolute)
            write_points_jsonl(self.p_points(model, "relative"), relative)
            log.info(
                "build-sets: %s -> %d absolute, %d relative points", model, len(absolute), len(relative)
            )

    def stage_cluster(self) -> None:
        cfg = self.cfg
        for model in sorted(cfg.embeddings):
            for set_name in self.set_names():
                points = self.build_set(model, set_name)
                if not points:
                    raise StageError("cluster", f"{model}/{set_name}: empty point set")
                matrix = np.asarray([p["vector"] for p in points], dtype=np.float64)
                k_hi = min(cfg.k_max, len(points))
                k_lo = min(cfg.k_min, k_hi)
                if k_hi < cfg.k_max:
                    log.warning(
                        "%s/%s has %d points; clipping k range to %d..%d",
                        model, set_name, len(points), k_lo, k_hi,
                    )
                sweep_seed = derive_seed(cfg.seed, model, set_name)
                results = kmeans_sweep(
                    matrix,
                    range(k_lo, k_hi + 1),
                    seed=sweep_seed,
                    tol=cfg.tol,
                    max_iter=cfg.max_iter,
                    n_init=cfg.restarts,
                    normalize=cfg.cosine,
                )
                out_path = self.p_clusters(model, set_name)
                out_path.parent.mkdir(parents=True, exist_ok=True)
                with open(out_path, "w", encoding="utf-8") as fh:
                    for res in results:
                        fh.write(
                            json.dumps(
                                {
                                    "set": set_name,
                                    "k": res.k,
                                    "seed": res.seed,
                                    "inertia": res.inertia,
                                    "iterations": res.iterations,
                                    "converged": res.converged,
                                    "assignments": [int(a) for a in res.assignments],
                                }
                            )
                            + "\n"
                        )
                log.info("cluster: %s/%s swept k=%d..%d", model, set_name, k_lo, k_hi)

    def stage_evaluate(self) -> None:
        cfg = self.cfg
        kept = self._load_kept()
        variants = read_variants(self.p_variants())
        type_vectors = None if cfg.type_vectors is None else load_type_vectors(cfg.type_vectors)

        signatures = {dp.id: edit_signature(dp.standard, dp.observed) for dp in kept}
        with open(self.p_signatures(), "w", encoding="utf-8") as fh:
            for dp in kept:
                sig = signatures[dp.id]
                fh.write(json.dumps({"id": dp.id, **sig.to_dict()}, ensure_ascii=False) + "\n")

        so_words = {dp.id: (dp.standard, dp.observed) for dp in kept}
        per_k_rows: list[dict] = []
        per_cluster: dict[str, dict] = {}
        sets_meta: dict[str, dict] = {}

        for model in sorted(cfg.embeddings):
            per_cluster[model] = {}
            sets_meta[model] = {}
            for set_name in self.set_names():
                points = self.build_set(model, set_name)
                labels_kind = [p["kind"] for p in points]
                labels_dtag = [p["dtag"] for p in points]
                index = {(p["id"], p["kind"]): i for i, p in enumerate(points)}
                groups, pairs = _grouping(points, index, variants, set_name)

                sweep = _read_cluster_dump(self.p_clusters(model, set_name))
                sets_meta[model][set_name] = {
                    "n_points": len(points),
                    "k_range": [sweep[0]["k"], sweep[-1]["k"]],
                }
                report_k = cfg.report_k if cfg.report_k is not None else sweep[-1]["k"]
                report_k = max(min(report_k, sweep[-1]["k"]), sweep[0]["k"])

                for entry in sweep:
                    assignments = entry["assignments"]
                    row = {
                        "model": model,
                        "set": set_name,
                        "k": entry["k"],
                        "n_points": len(points),
                        "inertia": entry["inertia"],
                        "purity_variant": purity(assignments, labels_kind),
                        "purity_dtag": purity(assignments, labels_dtag),
                        "overall_accuracy": None,
                        "overall_accuracy_partial": None,
                        "so_accuracy": None,
                        "correct_mean_ld": None,
                        "error_mean_ld": None,
                    }
                    if groups:
                        row["overall_accuracy"] = overall_accuracy(assignments, groups)
                        row["overall_accuracy_partial"] = partial_accuracy(assignments, groups)
                    if pairs:
                        row["so_accuracy"] = so_accuracy(assignments, pairs)
                        correctness = {
                            dp_id: assignments[i] == assignments[j]
                            for dp_id, (i, j) in pairs.items()
                        }
                        profile = ld_profile(so_words, correctness)
                        row["correct_mean_ld"] = profile.correct_mean_ld
                        row["error_mean_ld"] = profile.error_mean_ld
                    per_k_rows.append(row)

                    if entry["k"] == report_k:
                        per_cluster[model][set_name] = _cluster_report(
                            entry, points, variants, signatures, type_vectors, cfg.seed
                        )

        # The out path is volatile across otherwise-identical runs; the
        # manifest keeps the full config, metrics.json stays byte-stable.
        cfg_dict = self.cfg.to_dict()
        cfg_dict.pop("out")
        metrics_doc = {
            "metadata": {
                "version": __version__,
                "config": cfg_dict,
                "master_seed": cfg.seed,
                "sets": sets_meta,
                "coherency_available": type_vectors is not None,
            },
            "per_k": per_k_rows,
            "per_cluster": per_cluster,
        }
        _write_json(self.p_metrics(), metrics_doc)
        log.info("evaluate: %d per-k rows", len(per_k_rows))

    def stage_report(self) -> None:
        doc = json.loads(self.p_metrics().read_text(encoding="utf-8"))
        report_dir = self.report_dir()
        report_dir.mkdir(parents=True, exist_ok=True)
        emit_figures(doc["per_k"], report_dir)
        for model, sets in sorted(doc["per_cluster"].items()):
            for set_name, payload in sorted(sets.items()):
                k = payload["k"]
                stem = f"{model}_{set_name}_k{k}".replace("/", "-")
                write_cluster_table(report_dir / f"clusters_{stem}.csv", payload["clusters"])
                edit_rows = [
                    {
                        "cluster": cluster["cluster"],
                        "edit": edit["edit"],
                        "count": edit["count"],
                        "example_standard": edit["example_standard"],
                        "example_observed": edit["example_observed"],
                    }
                    for cluster in payload["clusters"]
                    for edit in cluster.get("edits", [])
                ]
                write_edit_table(report_dir / f"edits_{stem}.csv", edit_rows)
        log.info("report: wrote %s", report_dir)

    # ---- driver -------------------------------------------------------------
    def execute(self, stages: tuple[str, ...]) -> Path:
        cfg = self.cfg
        cfg.validate()
        self.out.mkdir(parents=True, exist_ok=True)
        lock = self.out / ".lock"
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StageError(
                "lock", f"run directory {self.out} is locked by another run (remove {lock} if stale)"
            )
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            self.compute_keys()
            if self.state_path.exists():
                self.state = json.loads(self.state_path.read_text())

            runners = {
                "load": (self.stage_load, [self.p_rejections(), self.p_summary(), self.p_kept()]),
                "mutate": (self.stage_mutate, [self.p_variants()]),
                "build-sets": (
                    self.stage_build_sets,
                    [self.p_points(m, w) for m in sorted(cfg.embeddings) for w in ("absolute", "relative")],
                ),
                "cluster": (
                    self.stage_cluster,
                    [self.p_clusters(m, s) for m in sorted(cfg.embeddings) for s in self.set_names()],
                ),
                "evaluate": (self.stage_evaluate, [self.p_metrics(), self.p_signatures()]),
                "report": (self.stage_report, [self.report_dir() / "per_k.csv"]),
            }

            for stage in STAGES:
                fn, outputs = runners[stage]
                key = self.keys[stage]
                if stage not in stages:
                    # A requested stage's upstream must already be materialized.
                    continue
                upstream = STAGES[: STAGES.index(stage)]
                for dep in upstream:
                    dep_outputs = runners[dep][1]
                    if self.state.get(dep) != self.keys[dep] or not all(p.exists() for p in dep_outputs):
                        if dep in stages:
                            continue  # will have run already (stages execute in order)
                        raise StageError(
                            stage,
                            f"stage {dep!r} outputs are missing or stale for this config; run it first",
                        )
                if self.state.get(stage) == key and all(p.exists() for p in outputs):
                    log.info("stage %s: cached, skipping", stage)
                    continue
                log.info("stage %s: running", stage)
                started = time.monotonic()
                try:
                    fn()
                except (ValidationError, StageError):
                    raise
                except Exception as exc:
                    raise StageError(stage, f"{type(exc).__name__}: {exc}") from exc
                self.state[stage] = key
                _write_json(self.state_path, self.state)
                log.info("stage %s: done in %.2fs", stage, time.monotonic() - started)

            if set(stages) == set(STAGES):
                self.write_manifest()
        finally:
            lock.unlink(missing_ok=True)
        return self.out

    def write_manifest(self) -> None:
        outputs = {}
        skip = {".lock", "manifest.json"}
        for path in sorted(self.out.rglob("*")):
            if path.is_file() and path.name not in skip:
                outputs[str(path.relative_to(self.out))] = _sha256_file(path)
        _write_json(
            self.out / "manifest.json",
            {
                "version": __version__,
                "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                "config": self.cfg.to_dict(),
                "master_seed": self.cfg.seed,
                "derived_seed_rule": "sha256(master:part:...)[:8] per datapoint / model / set / k",
                "inputs": dict(sorted(self.input_hashes.items())),
                "stage_keys": dict(sorted(self.keys.items())),
                "outputs": outputs,
            },
        )


def _read_points(path: Path) -> list[dict]:
    points = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                points.append(json.loads(line))
    return points


def _read_cluster_dump(path: Path) -> list[dict]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(json.loads(line))
    entries.sort(key=lambda e: e["k"])
    return entries


def _grouping(points: list[dict], index: dict, variants: dict, set_name: str):
    """Per-datapoint co-clustering groups and std/obv index pairs.

    Degenerate-flagged variants stay in the clustered set but are excluded
    from accuracy denominators; groups need >= 2 usable points.
    """
    groups: dict[str, list[int]] = {}
    pairs: dict[str, tuple[int, int]] = {}
    if set_name.endswith("-obv"):
        return groups, pairs  # single-kind sets carry no co-clustering info
    ids = sorted({p["id"] for p in points})
    for dp_id in ids:
        flags = variants[dp_id].degenerate_flags if dp_id in variants else frozenset()
        member_kinds = [
            k for k in VARIANT_KINDS if (dp_id, k) in index and k not in flags
        ]
        indices = [index[(dp_id, k)] for k in member_kinds]
        if len(indices) >= 2:
            groups[dp_id] = indices
        if (
            set_name.startswith("absolute")
            and (dp_id, "std") in index
            and (dp_id, "obv") in index
            and "obv" not in flags
        ):
            pairs[dp_id] = (index[(dp_id, "std")], index[(dp_id, "obv")])
    return groups, pairs


def _cluster_report(entry, points, variants, signatures, type_vectors, seed):
    """Per-cluster sizes, dtag mix, phonetic/semantic scores, and top edits."""
    assignments = entry["assignments"]
    k = entry["k"]
    dtags = [p["dtag"] for p in points]
    clusters = []
    for cluster_id in range(k):
        member_idx = [i for i, a in enumerate(assignments) if a == cluster_id]
        members = [points[i] for i in member_idx]
        surfaces = []
        for p in members:
            vs = variants.get(p["id"])
            surfaces.append(vs.forms[p["kind"]] if vs is not None else p["id"])
        proportions = dtag_proportions(assignments, dtags, cluster_id)
        top_dtags = sorted(proportions.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
        mphone = mphone_similarity(surfaces, sample_seed=derive_seed(seed, "mphone", cluster_id))
        coherency = None
        coverage = None
        if type_vectors is not None:
            result = semantic_coherency(
                surfaces, type_vectors, sample_seed=derive_seed(seed, "coh", cluster_id)
            )
            coherency = result.score
            coverage = result.in_vocab / result.total if result.total else None

        obv_dp_ids = sorted(p["id"] for p in members if p["kind"] == "obv")
        cluster_sigs = [signatures[dp_id] for dp_id in obv_dp_ids if dp_id in signatures]
        ranked = edit_frequency_table(cluster_sigs)[:10]
        examples = {}
        for dp_id in obv_dp_ids:
            sig = signatures.get(dp_id)
            if sig is None:
                continue
            for op in sig.ops:
                examples.setdefault(op.merged, (sig.standard, sig.observed))
        edits = [
            {
                "edit": edit,
                "count": count,
                "example_standard": examples[edit][0],
                "example_observed": examples[edit][1],
            }
            for edit, count in ranked
        ]

        clusters.append(
            {
                "cluster": cluster_id,
                "size": len(member_idx),
                "dtag_proportions": proportions,
                "top_dtags": [[tag, frac] for tag, frac in top_dtags],
                "mphone_similarity": mphone,
                "semantic_coherency": coherency,
                "coherency_coverage": coverage,
                "top_edits": [[edit["edit"], edit["count"]] for edit in edits],
                "edits": edits,
            }
        )
    return {"k": k, "clusters": clusters}


def run_pipeline(config: RunConfig, stages: tuple[str, ...] | None = None) -> Path:
    """Run the requested stages (all by default); returns the run directory."""
    chosen = tuple(STAGES) if stages is None else tuple(stages)
    unknown = set(chosen) - set(STAGES)
    if unknown:
        raise ValidationError(f"unknown stages: {sorted(unknown)}")
    return _Run(config).execute(chosen)
