"""Command-line pipeline driver.

Subcommands cover the whole workflow: corpus ingestion, distractor
selection, dataset construction, classifier training and scoring, the
similarity-rank baseline, the annotation service, agreement analysis,
embedding fine-tuning, the selection experiment, and the final report.

A JSON config file (--config) provides shared paths and defaults; flags
override it; relative paths resolve against $INFOLAB_DATA_DIR when set.
Every artifact-producing command writes a manifest with the hash of the
effective configuration, and JSON/TSV artifacts embed the same hash so
`report` can refuse to aggregate artifacts from different runs.

Exit codes: 0 success, 1 usage, 2 data error, 3 integrity error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import DataError, InfolabError, IntegrityError
from .rng import fnv1a64

MODEL_KINDS = ("bag", "lr", "ffnn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here is 1
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------- run config

_CONFIG_PATHS = ("corpus", "ngrams", "unigrams", "relations", "vectors",
                 "arpa", "words", "senses")
_HYPER_GROUPS = {
    "bag": {"buckets": 1 << 21, "dim": 50, "lr0": 0.1, "epochs": 5},
    "lr": {"lr": 0.1, "iters": 500},
    "ffnn": {"h1": 128, "h2": 64, "lr": 0.01, "epochs": 20},
    "sgns": {"window": 5, "negatives": 5, "lr0": 0.025, "lr_min": 1e-4,
             "epochs": 5},
    "dataset": {"n_pos": 1000, "n_per_distractor": 100, "min_len": 1,
                "max_len": None},
}


@dataclass
class RunConfig:
    root: Path
    out: Path
    seed: int
    paths: dict = field(default_factory=dict)  # name -> resolved Path or None
    hyper: dict = field(default_factory=dict)  # group -> {name: value}
    vectors_format: str = "text"

    def hash(self) -> str:
        core = {
            "seed": self.seed,
            "paths": {k: str(v) if v else None for k, v in sorted(self.paths.items())},
            "vectors_format": self.vectors_format,
            "hyper": self.hyper,
        }
        blob = json.dumps(core, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]


def _resolve(root: Path, value) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else root / p


def load_config(args) -> RunConfig:
    raw = {}
    if args.config:
        cfg_path = Path(args.config)
        if not cfg_path.exists():
            raise UsageError(f"config file {cfg_path} does not exist")
        try:
            raw = json.loads(cfg_path.read_text("utf-8"))
        except ValueError as exc:
            raise DataError(f"config file {cfg_path}: {exc}") from None
    root = Path(args.data_dir or raw.get("data_dir")
                or os.environ.get("INFOLAB_DATA_DIR", "."))
    paths = {}
    for name in _CONFIG_PATHS:
        flag = getattr(args, name.replace("-", "_"), None)
        paths[name] = _resolve(root, flag if flag is not None else raw.get(name))
    hyper = {}
    for group, defaults in _HYPER_GROUPS.items():
        merged = dict(defaults)
        merged.update(raw.get(group, {}))
        hyper[group] = merged
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    out = _resolve(root, args.out or raw.get("out") or "runs")
    fmt = args.vectors_format or raw.get("vectors_format", "text")
    return RunConfig(root, out, seed, paths, hyper, fmt)


def _need(cfg: RunConfig, name: str) -> Path:
    path = cfg.paths.get(name)
    if path is None:
        raise UsageError(f"no {name} path given (flag --{name} or config key "
                         f"{name!r})")
    if not path.exists():
        raise UsageError(f"{name} file {path} does not exist")
    return path


def _need_artifact(path: Path, producer: str) -> Path:
    if not path.exists():
        raise UsageError(f"missing upstream artifact {path}; "
                         f"run `infolab {producer}` first")
    return path


def _write_manifest(cfg: RunConfig, command: str, inputs: dict,
                    outputs: list[Path]) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config_hash": cfg.hash(),
        "version": __version__,
        "ts": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "inputs": {k: str(v) for k, v in inputs.items()},
        "outputs": [str(p) for p in outputs],
    }
    path = cfg.out / f"{command}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_json_artifact(cfg: RunConfig, path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    obj = {"config_hash": cfg.hash(), **obj}
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _read_json_artifact(path: Path) -> dict:
    try:
        return json.loads(path.read_text("utf-8"))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


# --------------------------------------------------------------- loaders


def _load_store(cfg):
    from .corpus import parse_tagged_corpus
    with open(_need(cfg, "corpus"), encoding="utf-8") as f:
        return parse_tagged_corpus(f)


def _load_vectors(cfg):
    from .vectors import load_vectors
    return load_vectors(_need(cfg, "vectors"), cfg.vectors_format)


def _load_lm(cfg):
    from .lm import parse_arpa
    with open(_need(cfg, "arpa"), encoding="utf-8") as f:
        return parse_arpa(f)


def _load_words(cfg) -> list[tuple[str, str]]:
    """The target word list: lemma<TAB>POS lines; packaged default."""
    path = cfg.paths.get("words")
    if path is None:
        text = resources.files("infolab").joinpath("data/target_words.txt") \
            .read_text("utf-8")
    else:
        if not path.exists():
            raise UsageError(f"words file {path} does not exist")
        text = path.read_text("utf-8")
    words = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"words file line {line_no}: want lemma<TAB>POS")
        words.append((parts[0], parts[1]))
    return words


def _tag(lemma: str, pos: str) -> str:
    return f"{lemma}_{pos}"


def _distractor_path(cfg, lemma, pos) -> Path:
    return cfg.out / "distractors" / f"{_tag(lemma, pos)}.json"


def _load_distractor_set(cfg, lemma, pos):
    from .distractors import DistractorSet
    path = _need_artifact(_distractor_path(cfg, lemma, pos), "distractors")
    obj = _read_json_artifact(path)
    return DistractorSet((obj["target"], obj["pos"]),
                         tuple(obj["distractors"]), obj["pool_size"],
                         obj["seed"], obj.get("filter_log", {}))


def _dataset_paths(cfg, lemma, pos) -> dict[str, Path]:
    base = cfg.out / "datasets"
    return {split: base / f"{_tag(lemma, pos)}.{split}.jsonl"
            for split in ("train", "dev", "test")}


def _load_dataset(cfg, lemma, pos):
    from .classify import ClozeDataset, read_examples
    dset = _load_distractor_set(cfg, lemma, pos)
    splits = {}
    for split, path in _dataset_paths(cfg, lemma, pos).items():
        _need_artifact(path, "build-dataset")
        with open(path, encoding="utf-8") as f:
            splits[split] = tuple(read_examples(f))
    return ClozeDataset((lemma, pos), dset, splits["train"], splits["dev"],
                        splits["test"], cfg.seed)


def _model_path(cfg, lemma, pos, kind) -> Path:
    return cfg.out / "models" / f"{_tag(lemma, pos)}.{kind}.cilm"


def _pool_path(cfg, lemma, pos) -> Path:
    return cfg.out / "pools" / f"{_tag(lemma, pos)}.jsonl"


def _word_seed(seed: int, lemma: str) -> int:
    # parallel per-word jobs stay deterministic under any scheduling
    return seed ^ fnv1a64(lemma.encode("utf-8"))


def _predict_inputs(kind, cfg, lemma, pos, stores):
    """Extra model inputs for predict/evaluate, loaded at most once."""
    if kind == "bag":
        return {}
    if "vstore" not in stores:
        stores["vstore"] = _load_vectors(cfg)
    if kind == "ffnn":
        return {"vstore": stores["vstore"]}
    if "lm" not in stores:
        stores["lm"] = _load_lm(cfg)
    dset = _load_distractor_set(cfg, lemma, pos)
    return {"vstore": stores["vstore"], "lm": stores["lm"],
            "target": lemma, "distractors": dset.distractors}


# ------------------------------------------------------------- commands


def cmd_convert(cfg, args):
    from .corpus import convert_plain_text
    src = Path(args.input)
    if not src.exists():
        raise UsageError(f"input file {src} does not exist")
    with open(src, encoding="utf-8") as f:
        text = convert_plain_text(f, doc_id=args.doc_id)
    out = Path(args.output) if args.output else cfg.out / "corpus.tagged"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    _write_manifest(cfg, "convert", {"input": src}, [out])
    print(f"wrote {out}")
    return 0


def cmd_ingest(cfg, args):
    from .corpus import serialize_tagged_corpus
    store = _load_store(cfg)
    out = cfg.out / "corpus.tagged"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_tagged_corpus(store), encoding="utf-8")
    _write_manifest(cfg, "ingest", {"corpus": _need(cfg, "corpus")}, [out])
    tokens = sum(len(s) for s in store.sentences)
    print(f"{len(store)} sentences, {tokens} tokens, "
          f"{len(store.vocabulary())} distinct forms -> {out}")
    return 0


def cmd_distractors(cfg, args):
    from .distractors import candidate_fillers, select_distractors
    from .resources import load_ngrams, load_relations, load_unigram_freq
    with open(_need(cfg, "ngrams"), encoding="utf-8") as f:
        ngrams = load_ngrams(f)
    with open(_need(cfg, "unigrams"), encoding="utf-8") as f:
        freqs = load_unigram_freq(f)
    with open(_need(cfg, "relations"), encoding="utf-8") as f:
        relations = load_relations(f)
    target = (args.target, args.pos)
    seed = args.seed if args.seed is not None else cfg.seed
    candidates = candidate_fillers(target, ngrams)
    dset = select_distractors(target, candidates, relations, freqs,
                              k=args.k, seed=seed)
    out = _distractor_path(cfg, args.target, args.pos)
    _write_json_artifact(cfg, out, dset.to_dict(verbose=args.verbose))
    _write_manifest(cfg, "distractors",
                    {k: cfg.paths[k] for k in ("ngrams", "unigrams", "relations")},
                    [out])
    print(json.dumps(dset.to_dict(verbose=args.verbose), indent=2, sort_keys=True))
    return 0


def cmd_build_dataset(cfg, args):
    from .classify import build_dataset, write_examples
    store = _load_store(cfg)
    dset = _load_distractor_set(cfg, args.target, args.pos)
    h = cfg.hyper["dataset"]
    data = build_dataset(
        store, (args.target, args.pos), dset,
        args.n_pos if args.n_pos is not None else h["n_pos"],
        args.n_per_distractor if args.n_per_distractor is not None
        else h["n_per_distractor"],
        seed=args.seed if args.seed is not None else cfg.seed,
        min_len=h["min_len"], max_len=h["max_len"])
    paths = _dataset_paths(cfg, args.target, args.pos)
    outputs = []
    for split, path in paths.items():
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            write_examples(f, getattr(data, split))
        outputs.append(path)
    _write_manifest(cfg, "build-dataset", {"corpus": cfg.paths["corpus"]},
                    outputs)
    print(f"{len(data.train)}/{len(data.dev)}/{len(data.test)} "
          f"train/dev/test examples for {args.target}/{args.pos}")
    return 0


def _train_one(cfg: RunConfig, lemma: str, pos: str, kinds, seed: int):
    """Train the requested model kinds for one word; returns eval rows."""
    from . import classify
    dataset = _load_dataset(cfg, lemma, pos)
    stores: dict = {}
    rows = []
    for kind in kinds:
        if kind == "bag":
            h = cfg.hyper["bag"]
            model = classify.train_bag_ngram(
                dataset, buckets=h["buckets"], dim=h["dim"], lr0=h["lr0"],
                epochs=h["epochs"], seed=seed)
        elif kind == "lr":
            h = cfg.hyper["lr"]
            inputs = _predict_inputs("lr", cfg, lemma, pos, stores)
            model = classify.train_feature_lr(
                dataset, inputs["lm"], inputs["vstore"], lr=h["lr"],
                iters=h["iters"])
        else:
            h = cfg.hyper["ffnn"]
            inputs = _predict_inputs("ffnn", cfg, lemma, pos, stores)
            model = classify.train_context_ffnn(
                dataset, inputs["vstore"], h1=h["h1"], h2=h["h2"],
                lr=h["lr"], epochs=h["epochs"], seed=seed)
        inputs = _predict_inputs(kind, cfg, lemma, pos, stores)
        accuracy = {split: classify.evaluate_accuracy(model, examples, **inputs)
                    for split, examples in dataset.splits.items() if examples}
        mpath = _model_path(cfg, lemma, pos, kind)
        mpath.parent.mkdir(parents=True, exist_ok=True)
        classify.save_model(model, mpath)
        epath = mpath.with_suffix(".eval.json")
        _write_json_artifact(cfg, epath, {
            "word": lemma, "pos": pos, "model": kind, "seed": seed,
            "accuracy": accuracy})
        rows.append((lemma, pos, kind, accuracy, mpath, epath))
    return rows


def _train_worker(payload):
    cfg = RunConfig(**payload["cfg"])
    return _train_one(cfg, payload["lemma"], payload["pos"],
                      payload["kinds"], payload["seed"])


def _cfg_payload(cfg: RunConfig) -> dict:
    return {"root": cfg.root, "out": cfg.out, "seed": cfg.seed,
            "paths": cfg.paths, "hyper": cfg.hyper,
            "vectors_format": cfg.vectors_format}


def cmd_train(cfg, args):
    kinds = MODEL_KINDS if args.model == "all" else (args.model,)
    if args.target:
        words = [(args.target, args.pos)]
    else:
        words = _load_words(cfg)
    jobs = []
    for lemma, pos in words:
        seed = _word_seed(args.seed if args.seed is not None else cfg.seed,
                          lemma)
        jobs.append({"cfg": _cfg_payload(cfg), "lemma": lemma, "pos": pos,
                     "kinds": kinds, "seed": seed})
    if args.jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_train_worker, jobs))
    else:
        results = [_train_worker(j) for j in jobs]
    outputs = []
    for rows in results:
        for lemma, pos, kind, accuracy, mpath, epath in rows:
            outputs.extend([mpath, epath])
            shown = ", ".join(f"{s}={a:.3f}" for s, a in accuracy.items())
            print(f"{lemma}/{pos} {kind}: {shown}")
    _write_manifest(cfg, "train", {"corpus": cfg.paths["corpus"]}, outputs)
    return 0


def cmd_score(cfg, args):
    from .classify import load_model, predict_proba
    from .corpus import mask_at, normalize_numbers
    from .curate import ScoredSentence, write_pool
    store = _load_store(cfg)
    mpath = _need_artifact(_model_path(cfg, args.target, args.pos, args.model),
                           "train")
    model = load_model(mpath)
    stores: dict = {}
    inputs = _predict_inputs(args.model, cfg, args.target, args.pos, stores)
    h = cfg.hyper["dataset"]
    occs = store.occurrences(args.target, args.pos, min_len=h["min_len"],
                             max_len=h["max_len"])
    if not occs:
        raise DataError(f"no occurrences of {args.target}/{args.pos} in corpus")
    scored = []
    for sent, position in occs:
        masked = mask_at(normalize_numbers(sent), position)
        prob = predict_proba(model, masked, **inputs)
        scored.append(ScoredSentence(sent, position, prob))
    out = _pool_path(cfg, args.target, args.pos)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        write_pool(f, scored)
    _write_manifest(cfg, "score", {"corpus": cfg.paths["corpus"],
                                   "model": mpath}, [out])
    print(f"scored {len(scored)} occurrences of {args.target}/{args.pos} "
          f"-> {out}")
    return 0


def cmd_baseline(cfg, args):
    from .corpus import mask_at, normalize_numbers
    from .vectors import context_vector, filler_rank
    dataset = _load_dataset(cfg, args.target, args.pos)
    vstore = _load_vectors(cfg)
    distractors = dataset.distractor_set.distractors
    examples = dataset.splits[args.split]
    if not examples:
        raise DataError(f"{args.split} split is empty")
    hits = 0
    for ex in examples:
        ctx = context_vector(ex.masked, vstore)
        rank = filler_rank(ctx, args.target, distractors, vstore)
        if (rank == 1) == ex.label:
            hits += 1
    accuracy = hits / len(examples)
    out = cfg.out / "baselines" / f"{_tag(args.target, args.pos)}.json"
    _write_json_artifact(cfg, out, {
        "word": args.target, "pos": args.pos, "split": args.split,
        "n": len(examples), "accuracy": accuracy})
    _write_manifest(cfg, "baseline", {"vectors": cfg.paths["vectors"]}, [out])
    print(f"rank-1 baseline accuracy on {args.split}: {accuracy:.3f}")
    return 0


def cmd_annotate_serve(cfg, args):
    import uvicorn

    from .annoserve import AnnotationStore, build_app, load_task_set
    task_path = Path(args.task_set)
    if not task_path.exists():
        raise UsageError(f"task set file {task_path} does not exist")
    with open(task_path, encoding="utf-8") as f:
        tasks = load_task_set(f)
    data_dir = Path(args.anno_data_dir) if args.anno_data_dir else cfg.out / "anno"
    data_dir.mkdir(parents=True, exist_ok=True)
    store = AnnotationStore({task_path.stem: tasks}, data_dir=data_dir)
    app = build_app(store)
    print(f"serving task set {task_path.stem!r} ({len(tasks)} tasks) "
          f"on {args.host}:{args.port}; log in {data_dir}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_agreement(cfg, args):
    from .annoserve import AnnotationStore, import_records, load_task_set
    task_path = Path(args.task_set)
    if not task_path.exists():
        raise UsageError(f"task set file {task_path} does not exist")
    records_path = Path(args.records)
    if not records_path.exists():
        raise UsageError(f"records file {records_path} does not exist")
    with open(task_path, encoding="utf-8") as f:
        tasks = load_task_set(f)
    store = AnnotationStore({task_path.stem: tasks})
    with open(records_path, encoding="utf-8") as f:
        import_records(store, f, task_path.stem)
    result = store.agreement(task_path.stem, args.a, args.b, args.measure)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _sgns_params(cfg, dim, seed):
    from .curate import SGNSParams
    h = cfg.hyper["sgns"]
    return SGNSParams(dim=dim, window=h["window"], negatives=h["negatives"],
                      lr0=h["lr0"], lr_min=h["lr_min"], epochs=h["epochs"],
                      seed=seed)


def _load_pool(cfg, store, lemma, pos):
    from .curate import read_pool
    path = _need_artifact(_pool_path(cfg, lemma, pos), "score")
    with open(path, encoding="utf-8") as f:
        return read_pool(f, store)


def _finetune_worker(payload):
    cfg = RunConfig(**payload["cfg"])
    from .curate import run_regime
    store = _load_store(cfg)
    vstore = _load_vectors(cfg)
    lemma, pos = payload["lemma"], payload["pos"]
    pool = _load_pool(cfg, store, lemma, pos)
    params = _sgns_params(cfg, vstore.dim, payload["seed"])
    sim = run_regime((lemma, pos), pool, payload["regime"], vstore, params,
                     payload["n"], payload["m"])
    return lemma, pos, payload["regime"], sim


def cmd_finetune(cfg, args):
    if args.target:
        words = [(args.target, args.pos)]
    else:
        words = _load_words(cfg)
    base_seed = args.seed if args.seed is not None else cfg.seed
    jobs = [{"cfg": _cfg_payload(cfg), "lemma": lemma, "pos": pos,
             "regime": args.regime, "n": args.n, "m": args.m,
             "seed": base_seed}
            for lemma, pos in words]
    if args.jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_finetune_worker, jobs))
    else:
        results = [_finetune_worker(j) for j in jobs]
    outputs = []
    for lemma, pos, regime, sim in results:
        out = cfg.out / "finetune" / f"{_tag(lemma, pos)}.{regime}.json"
        _write_json_artifact(cfg, out, {
            "word": lemma, "pos": pos, "regime": regime, "similarity": sim,
            "n": args.n, "m": args.m, "seed": base_seed})
        outputs.append(out)
        print(f"{lemma}/{pos} {regime}: similarity {sim:.3f}")
    _write_manifest(cfg, "finetune", {"vectors": cfg.paths["vectors"]}, outputs)
    return 0


def cmd_experiment(cfg, args):
    from .curate import REGIME_COLUMNS, run_selection_experiment
    words = _load_words(cfg)
    store = _load_store(cfg)
    vstore = _load_vectors(cfg)
    if args.regimes == "all":
        regimes = REGIME_COLUMNS
    else:
        regimes = tuple(r.strip() for r in args.regimes.split(","))
        unknown = [r for r in regimes if r not in REGIME_COLUMNS]
        if unknown:
            raise UsageError(f"unknown regimes: {', '.join(unknown)}")
    pools = {(lemma, pos): _load_pool(cfg, store, lemma, pos)
             for lemma, pos in words}
    seed = args.seed if args.seed is not None else cfg.seed
    params = _sgns_params(cfg, vstore.dim, seed)
    report = run_selection_experiment(
        pools, vstore, params, n=args.n, m=args.m, regimes=regimes,
        pool_label=args.pool_label,
        progress=lambda w, c, s: print(f"  {w} {c}: {s:.3f}", flush=True))
    outdir = cfg.out / "experiment"
    outdir.mkdir(parents=True, exist_ok=True)
    tsv = outdir / "report.tsv"
    tsv.write_text(f"# config_hash={cfg.hash()} pool={args.pool_label}\n"
                   + report.to_tsv(), encoding="utf-8")
    js = outdir / "report.json"
    payload = json.loads(report.to_json())
    _write_json_artifact(cfg, js, payload)
    _write_manifest(cfg, "experiment", {"vectors": cfg.paths["vectors"]},
                    [tsv, js])
    print(report.to_tsv(), end="")
    return 0


def _load_senses(path: Path) -> dict[str, int]:
    senses = {}
    for line_no, line in enumerate(path.read_text("utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"senses file line {line_no}: want word<TAB>count")
        senses[parts[0]] = int(parts[1])
    return senses


def cmd_report(cfg, args):
    from .curate import ExperimentReport, frequency_polysemy_analysis
    from .resources import load_unigram_freq
    from .stats import mean_accuracy
    expected = cfg.hash()
    mismatched = []

    def check(path, obj):
        h = obj.get("config_hash")
        if h != expected:
            mismatched.append(f"{path} (hash {h})")

    summary: dict = {"config_hash": expected}
    eval_paths = sorted((cfg.out / "models").glob("*.eval.json"))
    if eval_paths:
        by_kind: dict[str, dict[str, float]] = {}
        for path in eval_paths:
            obj = _read_json_artifact(path)
            check(path, obj)
            test_acc = obj["accuracy"].get("test")
            if test_acc is not None:
                by_kind.setdefault(obj["model"], {})[obj["word"]] = test_acc
        summary["test_accuracy"] = {
            kind: {"mean": mean_accuracy(accs), "per_word": accs}
            for kind, accs in sorted(by_kind.items())}
    base_paths = sorted((cfg.out / "baselines").glob("*.json"))
    if base_paths:
        accs = {}
        for path in base_paths:
            obj = _read_json_artifact(path)
            check(path, obj)
            accs[obj["word"]] = obj["accuracy"]
        summary["baseline_accuracy"] = {"mean": mean_accuracy(accs),
                                        "per_word": accs}
    report_path = cfg.out / "experiment" / "report.json"
    if report_path.exists():
        obj = _read_json_artifact(report_path)
        check(report_path, obj)
        summary["experiment"] = {k: obj[k] for k in ("mean", "diff", "pool")}
        if args.senses or cfg.paths.get("senses"):
            spath = Path(args.senses) if args.senses else cfg.paths["senses"]
            if not spath.exists():
                raise UsageError(f"senses file {spath} does not exist")
            with open(_need(cfg, "unigrams"), encoding="utf-8") as f:
                freqs = load_unigram_freq(f)
            # words dict is word -> {col: sim}; reshape to col -> word -> sim
            cols: dict[str, dict[str, float]] = {}
            for word, row in obj["words"].items():
                for col, sim in row.items():
                    cols.setdefault(col, {})[word] = sim
            rep = ExperimentReport(obj["pool"], tuple(sorted(obj["words"])), cols)
            summary["frequency_polysemy"] = frequency_polysemy_analysis(
                rep, freqs, _load_senses(spath), seed=cfg.seed)
    if mismatched and not args.force:
        raise IntegrityError(
            "artifacts were produced under a different configuration: "
            + "; ".join(mismatched) + " (pass --force to aggregate anyway)")
    if len(summary) == 1:
        raise UsageError(f"no artifacts found under {cfg.out}; run train, "
                         f"baseline, or experiment first")
    out = cfg.out / "report" / "summary.json"
    _write_json_artifact(cfg, out, summary)
    _write_manifest(cfg, "report", {}, [out])
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


# --------------------------------------------------------------- parsing


def build_parser() -> _Parser:
    parser = _Parser(prog="infolab",
                     description="sentence informativeness pipeline")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--data-dir", help="root for relative paths "
                        "(default $INFOLAB_DATA_DIR or .)")
    parser.add_argument("--out", help="output directory (default runs/)")
    parser.add_argument("--seed", type=int, default=None)
    for name in ("corpus", "ngrams", "unigrams", "relations", "vectors",
                 "arpa", "words", "senses"):
        parser.add_argument(f"--{name}", default=None,
                            help=f"path to the {name} file")
    parser.add_argument("--vectors-format", choices=("text", "binary"),
                        default=None)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("convert", help="plain text to tagged corpus format")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--doc-id", default="plain")

    sub.add_parser("ingest", help="validate and normalize a tagged corpus")

    p = sub.add_parser("distractors", help="select distractors for a target")
    p.add_argument("--target", required=True)
    p.add_argument("--pos", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--verbose", action="store_true",
                   help="include the per-candidate filter log")

    p = sub.add_parser("build-dataset", help="sample a labeled cloze dataset")
    p.add_argument("--target", required=True)
    p.add_argument("--pos", required=True)
    p.add_argument("--n-pos", type=int, default=None)
    p.add_argument("--n-per-distractor", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train", help="train classifiers")
    p.add_argument("--model", choices=MODEL_KINDS + ("all",), default="all")
    p.add_argument("--target", default=None)
    p.add_argument("--pos", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("score", help="score target occurrences into a pool")
    p.add_argument("--target", required=True)
    p.add_argument("--pos", required=True)
    p.add_argument("--model", choices=MODEL_KINDS, default="bag")

    p = sub.add_parser("baseline", help="similarity-rank baseline accuracy")
    p.add_argument("--target", required=True)
    p.add_argument("--pos", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")

    p = sub.add_parser("annotate-serve", help="run the annotation service")
    p.add_argument("--task-set", required=True, help="task JSONL file")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--anno-data-dir", default=None,
                   help="record log directory (default <out>/anno)")

    p = sub.add_parser("agreement", help="inter-annotator agreement offline")
    p.add_argument("--task-set", required=True)
    p.add_argument("--records", required=True, help="exported records JSONL")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--measure", choices=("info1", "info2", "info3"),
                   required=True)

    p = sub.add_parser("finetune", help="fine-tune vectors on one regime")
    p.add_argument("--target", default=None)
    p.add_argument("--pos", default=None)
    p.add_argument("--regime", default="sim_inf")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("experiment", help="full selection experiment table")
    p.add_argument("--regimes", default="all",
                   help="'all' or comma-separated column names")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--pool-label", default="corpus")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("report", help="aggregate artifacts into a summary")
    p.add_argument("--force", action="store_true",
                   help="aggregate despite config-hash mismatches")
    p.add_argument("--senses", default=None,
                   help="word<TAB>sense-count file for the polysemy split")

    return parser


_HANDLERS = {
    "convert": cmd_convert,
    "ingest": cmd_ingest,
    "distractors": cmd_distractors,
    "build-dataset": cmd_build_dataset,
    "train": cmd_train,
    "score": cmd_score,
    "baseline": cmd_baseline,
    "annotate-serve": cmd_annotate_serve,
    "agreement": cmd_agreement,
    "finetune": cmd_finetune,
    "experiment": cmd_experiment,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        if args.command in ("train", "baseline", "score", "finetune") \
                and args.target and not args.pos:
            raise UsageError("--pos is required with --target")
        cfg = load_config(args)
        return _HANDLERS[args.command](cfg, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrityError,) as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 3
    except InfolabError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
