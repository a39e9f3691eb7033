"""Command-line driver wiring the corpus generator, the two trainers, the
prior-matching toy, the metric reports, and the gradient self-check.

Every subcommand accepts ``--config FILE`` (flat ``key=value`` lines, keys
matching the long flag names); explicit flags override the file.  Each run
writes its fully resolved configuration next to its outputs, and all runs
are deterministic given ``--seed``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 failed self-check.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import gibbs, metrics, model as wlda_model, nn, simplex
from .corpus import (
    Corpus,
    CorpusFormatError,
    SyntheticSpec,
    generate_synthetic,
    load_corpus,
    load_stopwords,
    load_text,
    save_corpus,
)
from .model import ModelFormatError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CHECK = 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


@dataclass
class Opt:
    parse: Callable[[str], Any]
    default: Any
    help: str
    choices: tuple | None = None


# Option tables per subcommand: key is the long flag name.
_COMMON_TRAIN = {
    "num-topics": Opt(int, 5, "latent topics K"),
    "hidden-units": Opt(_parse_int_list, (100, 100), "encoder hidden layer sizes, comma-separated"),
    "activation": Opt(str, "softplus", "hidden activation", ("softplus", "leaky_relu")),
    "dirichlet-alpha": Opt(float, 0.1, "symmetric Dirichlet prior concentration"),
    "mmd-weight": Opt(float, 1.0, "weight of the MMD term (0 disables distribution matching)"),
    "learning-rate": Opt(float, 0.002, "Adam learning rate"),
    "beta1": Opt(float, 0.99, "Adam first-moment decay"),
    "epochs": Opt(int, 50, "training epochs"),
    "batch-size": Opt(int, 64, "minibatch size (>= 2)"),
    "checkpoint-every": Opt(int, 10, "epochs between metric checkpoints"),
    "top-words": Opt(int, 10, "words per topic in reports"),
    "mmd-on": Opt(str, "raw-theta", "which mixtures feed the MMD term", ("raw-theta", "noised-theta")),
    "seed": Opt(int, 0, "RNG seed"),
}

OPTIONS: dict[str, dict[str, Opt]] = {
    "generate": {
        "out-dir": Opt(str, None, "output directory"),
        "vocab-size": Opt(int, 100, "vocabulary size V"),
        "num-topics": Opt(int, 5, "ground-truth topics K"),
        "doc-topic-alpha": Opt(float, 0.1, "Dirichlet concentration of document mixtures"),
        "topic-word-alpha": Opt(float, 0.05, "Dirichlet concentration of ground-truth topics"),
        "num-docs": Opt(int, 10000, "number of documents"),
        "mean-doc-length": Opt(float, 30.0, "Poisson mean document length (clipped below at 1)"),
        "top-words": Opt(int, 10, "list length in the ground-truth topics file"),
        "seed": Opt(int, 0, "RNG seed"),
    },
    "ingest": {
        "out-dir": Opt(str, None, "output directory"),
        "text": Opt(str, None, "plain-text input, one document per line"),
        "stopwords": Opt(str, "", "optional stopword file, one word per line"),
        "min-count": Opt(int, 1, "drop words occurring fewer times corpus-wide"),
    },
    "train-wlda": {
        "corpus": Opt(str, None, "corpus file"),
        "out-dir": Opt(str, None, "output directory"),
        "noise-alpha": Opt(_parse_float_list, (0.0,), "noise mixing proportions to sweep, comma-separated"),
        **_COMMON_TRAIN,
    },
    "train-gibbs": {
        "corpus": Opt(str, None, "corpus file"),
        "out-dir": Opt(str, None, "output directory"),
        "num-topics": Opt(int, 5, "topics K"),
        "alpha": Opt(float, 0.1, "document-topic smoothing"),
        "eta": Opt(float, 0.01, "topic-word smoothing"),
        "sweeps": Opt(int, 2000, "full Gibbs sweeps"),
        "checkpoint-every": Opt(int, 500, "sweeps between metric checkpoints"),
        "top-words": Opt(int, 10, "words per topic in reports"),
        "seed": Opt(int, 0, "RNG seed"),
    },
    "match-prior": {
        "out-dir": Opt(str, None, "output directory"),
        "dim": Opt(int, 2, "simplex dimension of the target Dirichlet"),
        "alpha": Opt(float, 0.1, "target Dirichlet concentration"),
        "input-dim": Opt(int, 2, "dimension of the spherical Gaussian inputs"),
        "num-inputs": Opt(int, 100000, "number of Gaussian input vectors"),
        "epochs": Opt(int, 20, "training epochs"),
        "batch-size": Opt(int, 256, "minibatch size"),
        "checkpoint-every": Opt(int, 5, "epochs between sample dumps"),
        "eval-samples": Opt(int, 512, "samples per side for checkpoint MMD"),
        "null-resamples": Opt(int, 200, "prior-vs-prior resamples for the null distribution"),
        "learning-rate": Opt(float, 0.002, "Adam learning rate"),
        "beta1": Opt(float, 0.99, "Adam first-moment decay"),
        "activation": Opt(str, "softplus", "hidden activation", ("softplus", "leaky_relu")),
        "seed": Opt(int, 0, "RNG seed"),
    },
    "eval": {
        "topics": Opt(str, "", "topics file (one topic per line of word ids)"),
        "model": Opt(str, "", "model file to extract topics from"),
        "corpus": Opt(str, "", "corpus file for NPMI co-occurrence"),
        "truth": Opt(str, "", "ground-truth topics file for recovery precision"),
        "top-words": Opt(int, 10, "words per topic when extracting from a model"),
        "format": Opt(str, "text", "report format", ("text", "csv", "json")),
        "out-dir": Opt(str, "", "optional directory for the written report"),
    },
    "classify": {
        "model": Opt(str, None, "model file"),
        "corpus": Opt(str, None, "corpus file"),
        "labels": Opt(str, None, "label file, one integer per document line"),
        "test-fraction": Opt(float, 0.2, "held-out fraction"),
        "learning-rate": Opt(float, 0.01, "probe Adam learning rate"),
        "iterations": Opt(int, 100, "probe training iterations"),
        "out-dir": Opt(str, "", "optional output directory"),
        "seed": Opt(int, 0, "RNG seed for the split"),
    },
    "gradcheck": {
        "instances": Opt(int, 10, "random tiny instances to check"),
        "tolerance": Opt(float, 1e-4, "max allowed relative error"),
        "inject-sign-flip": Opt(_parse_bool, False, "debug hook: corrupt one gradient entry"),
        "seed": Opt(int, 0, "RNG seed"),
    },
}

_REQUIRED: dict[str, tuple[str, ...]] = {
    "generate": ("out-dir",),
    "ingest": ("out-dir", "text"),
    "train-wlda": ("corpus", "out-dir"),
    "train-gibbs": ("corpus", "out-dir"),
    "match-prior": ("out-dir",),
    "classify": ("model", "corpus", "labels"),
}


def _load_config_file(path: str) -> dict[str, str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config file: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("_", "-")] = value.strip()
    return out


def resolve_options(command: str, argv: list[str]) -> dict[str, Any]:
    """Merge defaults, config file, and explicit flags (in that order)."""
    table = OPTIONS[command]
    parser = argparse.ArgumentParser(prog=f"wlda {command}", add_help=True)
    parser.add_argument("--config", default=None, help="flat key=value config file")
    for name, opt in table.items():
        kwargs: dict[str, Any] = {"default": argparse.SUPPRESS, "help": opt.help, "type": str}
        parser.add_argument(f"--{name}", **kwargs)
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise UsageError("bad arguments") from None
        raise

    resolved = {name: opt.default for name, opt in table.items()}
    sources: list[dict[str, str]] = []
    if ns.config:
        sources.append(_load_config_file(ns.config))
    explicit = {
        k.replace("_", "-"): v for k, v in vars(ns).items() if k != "config"
    }
    sources.append(explicit)
    for src in sources:
        for key, raw in src.items():
            if key not in table:
                raise UsageError(f"unknown option {key!r} for subcommand {command}")
            opt = table[key]
            try:
                value = opt.parse(raw)
            except ValueError as exc:
                raise UsageError(f"bad value for --{key}: {exc}") from exc
            if opt.choices and value not in opt.choices:
                raise UsageError(f"--{key} must be one of {', '.join(opt.choices)}")
            resolved[key] = value
    for key in _REQUIRED.get(command, ()):
        if resolved[key] in (None, ""):
            raise UsageError(f"--{key} is required for subcommand {command}")
    return resolved


def _format_value(value: Any) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_run_config(out_dir: Path, command: str, resolved: dict[str, Any]) -> None:
    lines = [f"command={command}"]
    lines += [f"{k}={_format_value(v)}" for k, v in sorted(resolved.items())]
    (out_dir / "run-config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _ensure_out_dir(resolved: dict[str, Any]) -> Path:
    out = Path(resolved["out-dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus_checked(path: str) -> Corpus:
    try:
        return load_corpus(path)
    except OSError as exc:
        raise DataError(f"cannot read corpus: {exc}") from exc
    except CorpusFormatError as exc:
        raise DataError(f"bad corpus file {path}: {exc}") from exc


def _load_model_checked(path: str) -> wlda_model.WldaModel:
    try:
        return wlda_model.load_model(path)
    except OSError as exc:
        raise DataError(f"cannot read model: {exc}") from exc
    except ModelFormatError as exc:
        raise DataError(f"bad model file {path}: {exc}") from exc


def write_topics(path: Path, topics: list[list[int]]) -> None:
    path.write_text("".join(" ".join(str(w) for w in t) + "\n" for t in topics), encoding="utf-8")


def read_topics(path) -> list[list[int]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read topics file: {exc}") from exc
    topics = []
    for raw in lines:
        line = raw.split("#")[0].strip()
        if not line:
            continue
        try:
            topics.append([int(tok) for tok in line.split()])
        except ValueError as exc:
            raise DataError(f"bad topics line {raw!r}: {exc}") from exc
    if not topics:
        raise DataError(f"no topics in {path}")
    return topics


def truth_topics(corpus: Corpus, top: int) -> list[list[int]] | None:
    if corpus.truth is None:
        return None
    return [
        [int(w) for w in np.argsort(-row, kind="stable")[:top]]
        for row in corpus.truth.topic_word
    ]


def cmd_generate(resolved: dict[str, Any]) -> int:
    spec = SyntheticSpec(
        vocab_size=resolved["vocab-size"],
        num_topics=resolved["num-topics"],
        doc_topic_alpha=resolved["doc-topic-alpha"],
        num_docs=resolved["num-docs"],
        mean_doc_length=resolved["mean-doc-length"],
        topic_word_alpha=resolved["topic-word-alpha"],
        seed=resolved["seed"],
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    corpus = generate_synthetic(spec)
    out = _ensure_out_dir(resolved)
    save_corpus(corpus, out / "corpus.txt")
    write_topics(out / "truth-topics.txt", truth_topics(corpus, resolved["top-words"]))
    write_run_config(out, "generate", resolved)
    print(f"wrote {len(corpus.docs)} documents over {corpus.vocab_size} words to {out / 'corpus.txt'}")
    return EXIT_OK


def cmd_ingest(resolved: dict[str, Any]) -> int:
    stop = load_stopwords(resolved["stopwords"]) if resolved["stopwords"] else None
    try:
        corpus = load_text(resolved["text"], stopwords=stop, min_count=resolved["min-count"])
    except OSError as exc:
        raise DataError(f"cannot read text file: {exc}") from exc
    except CorpusFormatError as exc:
        raise DataError(str(exc)) from exc
    out = _ensure_out_dir(resolved)
    save_corpus(corpus, out / "corpus.txt")
    write_run_config(out, "ingest", resolved)
    print(f"ingested {len(corpus.docs)} documents, vocabulary {corpus.vocab_size}")
    return EXIT_OK


def _csv_cell(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def _checkpoint_metrics(
    corpus: Corpus,
    topics: list[list[int]],
    truth: list[list[int]] | None,
) -> tuple[float, float, float | None]:
    _, mean_tu = metrics.topic_uniqueness(topics)
    words = sorted({w for t in topics for w in t})
    index = metrics.build_cooccurrence_index(corpus, words)
    _, mean_npmi = metrics.npmi(topics, index)
    precision = metrics.recovery_precision(topics, truth) if truth is not None else None
    return mean_tu, mean_npmi, precision


def cmd_train_wlda(resolved: dict[str, Any]) -> int:
    corpus = _load_corpus_checked(resolved["corpus"])
    out = _ensure_out_dir(resolved)
    top = resolved["top-words"]
    truth = truth_topics(corpus, top)
    sweep = resolved["noise-alpha"]
    if not sweep:
        raise UsageError("--noise-alpha needs at least one value")

    rows = ["noise_alpha,epoch,recon_loss,mmd,tu,npmi,precision"]
    for noise_alpha in sweep:
        config = wlda_model.TrainConfig(
            num_topics=resolved["num-topics"],
            hidden_sizes=resolved["hidden-units"],
            activation=resolved["activation"],
            dirichlet_alpha=resolved["dirichlet-alpha"],
            noise_alpha=noise_alpha,
            mmd_weight=resolved["mmd-weight"],
            learning_rate=resolved["learning-rate"],
            beta1=resolved["beta1"],
            epochs=resolved["epochs"],
            batch_size=resolved["batch-size"],
            seed=resolved["seed"],
            mmd_on=resolved["mmd-on"],
        )
        try:
            config.validate()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        tag = f"-alpha-{noise_alpha:g}" if len(sweep) > 1 else ""
        interval = resolved["checkpoint-every"]

        def checkpoint(epoch: int, mdl: wlda_model.WldaModel, rep: wlda_model.TrainReport) -> None:
            if interval <= 0 or epoch % interval != 0:
                return
            topics = wlda_model.extract_topics(mdl, top)
            write_topics(out / f"topics{tag}-epoch-{epoch:04d}.txt", topics)
            tu, npmi_val, precision = _checkpoint_metrics(corpus, topics, truth)
            rec = rep.epochs[-1]
            rows.append(
                f"{noise_alpha:g},{epoch},{_csv_cell(rec.recon_loss)},{_csv_cell(rec.mmd)},"
                f"{_csv_cell(tu)},{_csv_cell(npmi_val)},{_csv_cell(precision)}"
            )

        mdl, _ = wlda_model.train(corpus, config, checkpoint=checkpoint)
        wlda_model.save_model(mdl, out / f"model{tag}.bin")
    (out / "metrics.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    write_run_config(out, "train-wlda", resolved)
    print(f"trained {len(sweep)} run(s); metrics in {out / 'metrics.csv'}")
    return EXIT_OK


def cmd_train_gibbs(resolved: dict[str, Any]) -> int:
    corpus = _load_corpus_checked(resolved["corpus"])
    out = _ensure_out_dir(resolved)
    top = resolved["top-words"]
    truth = truth_topics(corpus, top)
    sweeps = resolved["sweeps"]
    if sweeps < 0:
        raise UsageError("--sweeps must be non-negative")
    interval = resolved["checkpoint-every"]
    try:
        state = gibbs.init_random(
            corpus,
            resolved["num-topics"],
            resolved["alpha"],
            resolved["eta"],
            np.random.default_rng(resolved["seed"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    rows = ["sweep,tu,npmi,precision"]

    def record(done: int) -> None:
        topics = gibbs.estimate_topics(state, top)
        write_topics(out / f"topics-sweep-{done:05d}.txt", topics)
        tu, npmi_val, precision = _checkpoint_metrics(corpus, topics, truth)
        rows.append(f"{done},{_csv_cell(tu)},{_csv_cell(npmi_val)},{_csv_cell(precision)}")

    for done in range(1, sweeps + 1):
        gibbs.sweep(state)
        if interval > 0 and done % interval == 0 and done != sweeps:
            record(done)
    record(sweeps)
    write_topics(out / "topics.txt", gibbs.estimate_topics(state, top))
    (out / "metrics.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    write_run_config(out, "train-gibbs", resolved)
    print(f"ran {sweeps} sweeps; final topics in {out / 'topics.txt'}")
    return EXIT_OK


def _encoder_params(enc: nn.MlpParams) -> list[np.ndarray]:
    return [a for w, b in zip(enc.weights, enc.biases) for a in (w, b)]


def _set_encoder_params(enc: nn.MlpParams, params: list[np.ndarray]) -> None:
    for i in range(len(enc.weights)):
        enc.weights[i] = params[2 * i]
        enc.biases[i] = params[2 * i + 1]


def _write_samples_csv(path: Path, samples: np.ndarray) -> None:
    dim = samples.shape[1]
    header = ",".join(f"x{i}" for i in range(dim))
    body = "\n".join(",".join(repr(float(v)) for v in row) for row in samples)
    path.write_text(header + "\n" + body + "\n", encoding="utf-8")


def cmd_match_prior(resolved: dict[str, Any]) -> int:
    dim = resolved["dim"]
    alpha = resolved["alpha"]
    if dim < 2:
        raise UsageError("--dim must be at least 2")
    if alpha <= 0:
        raise UsageError("--alpha must be positive")
    if resolved["batch-size"] < 2 or resolved["eval-samples"] < 2:
        raise UsageError("batch and eval sizes must be at least 2")
    out = _ensure_out_dir(resolved)
    rng = np.random.default_rng(resolved["seed"])
    alpha_vec = np.full(dim, alpha)

    inputs = rng.standard_normal((resolved["num-inputs"], resolved["input-dim"]))
    encoder = nn.init_mlp([resolved["input-dim"], dim, dim, dim], resolved["activation"], rng)
    params = _encoder_params(encoder)
    adam = nn.adam_init(params, lr=resolved["learning-rate"], beta1=resolved["beta1"])

    # Fixed evaluation sets keep the checkpoint MMD trajectory comparable
    # across epochs; the null distribution gets its own stream.
    m_eval = resolved["eval-samples"]
    eval_rng = np.random.default_rng(resolved["seed"] + 1)
    eval_inputs = eval_rng.standard_normal((m_eval, resolved["input-dim"]))
    eval_prior = simplex.sample_dirichlet(alpha_vec, eval_rng, size=m_eval)
    null_rng = np.random.default_rng(resolved["seed"] + 2)
    null = [
        simplex.mmd_unbiased(
            simplex.sample_dirichlet(alpha_vec, null_rng, size=m_eval),
            simplex.sample_dirichlet(alpha_vec, null_rng, size=m_eval),
        )
        for _ in range(resolved["null-resamples"])
    ]
    null95 = float(np.quantile(null, 0.95))
    _write_samples_csv(out / "prior-samples.csv", eval_prior)

    def encode_eval() -> np.ndarray:
        logits, _ = nn.mlp_forward(encoder, eval_inputs)
        return nn.softmax(logits)

    rows = ["epoch,mmd,null95"]

    def dump(epoch: int) -> float:
        theta = encode_eval()
        _write_samples_csv(out / f"samples-epoch-{epoch:04d}.csv", theta)
        value = simplex.mmd_unbiased(theta, eval_prior)
        rows.append(f"{epoch},{repr(value)},{repr(null95)}")
        return value

    value = dump(0)
    n = inputs.shape[0]
    interval = resolved["checkpoint-every"]
    epochs = resolved["epochs"]
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, resolved["batch-size"]):
            idx = order[start : start + resolved["batch-size"]]
            if idx.size < 2:
                continue
            logits, cache = nn.mlp_forward(encoder, inputs[idx])
            theta = nn.softmax(logits)
            prior = simplex.sample_dirichlet(alpha_vec, rng, size=idx.size)
            grad_theta = simplex.mmd_grad_q(theta, prior)
            grad_logits = theta * (grad_theta - (grad_theta * theta).sum(axis=1, keepdims=True))
            gw, gb, _ = nn.mlp_backward(encoder, cache, grad_logits)
            grads = [a for w, b in zip(gw, gb) for a in (w, b)]
            params = nn.adam_step(adam, params, grads)
            _set_encoder_params(encoder, params)
        if (interval > 0 and epoch % interval == 0) or epoch == epochs:
            value = dump(epoch)
    (out / "mmd.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    write_run_config(out, "match-prior", resolved)
    print(f"final MMD {value!r} vs prior-vs-prior null 95th percentile {null95!r}")
    return EXIT_OK


def cmd_eval(resolved: dict[str, Any]) -> int:
    if bool(resolved["topics"]) == bool(resolved["model"]):
        raise UsageError("pass exactly one of --topics or --model")
    if resolved["topics"]:
        topics = read_topics(resolved["topics"])
        try:
            metrics.validate_topic_set(topics)
        except ValueError as exc:
            raise DataError(f"bad topics file: {exc}") from exc
    else:
        mdl = _load_model_checked(resolved["model"])
        topics = wlda_model.extract_topics(mdl, resolved["top-words"])

    per_tu, mean_tu = metrics.topic_uniqueness(topics)
    per_npmi = mean_npmi = None
    if resolved["corpus"]:
        corpus = _load_corpus_checked(resolved["corpus"])
        words = sorted({w for t in topics for w in t})
        index = metrics.build_cooccurrence_index(corpus, words)
        per_npmi, mean_npmi = metrics.npmi(topics, index)
    precision = None
    if resolved["truth"]:
        truth = read_topics(resolved["truth"])
        try:
            precision = metrics.recovery_precision(topics, truth)
        except ValueError as exc:
            raise DataError(f"topics/truth mismatch: {exc}") from exc

    report = metrics.MetricsReport(per_tu, mean_tu, per_npmi, mean_npmi, precision)
    rendered = report.render(resolved["format"])
    sys.stdout.write(rendered if rendered.endswith("\n") else rendered + "\n")
    if resolved["out-dir"]:
        out = _ensure_out_dir(resolved)
        ext = {"text": "txt", "csv": "csv", "json": "json"}[resolved["format"]]
        (out / f"report.{ext}").write_text(rendered if rendered.endswith("\n") else rendered + "\n", encoding="utf-8")
        write_run_config(out, "eval", resolved)
    return EXIT_OK


def cmd_classify(resolved: dict[str, Any]) -> int:
    mdl = _load_model_checked(resolved["model"])
    corpus = _load_corpus_checked(resolved["corpus"])
    try:
        label_lines = Path(resolved["labels"]).read_text(encoding="utf-8").split()
        labels = np.array([int(tok) for tok in label_lines], dtype=np.int64)
    except OSError as exc:
        raise DataError(f"cannot read labels: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"labels must be integers: {exc}") from exc
    if labels.shape[0] != len(corpus.docs):
        raise DataError(
            f"{labels.shape[0]} labels for {len(corpus.docs)} documents (files misaligned)"
        )
    if labels.min() < 0:
        raise DataError("labels must be non-negative")
    frac = resolved["test-fraction"]
    if not 0.0 < frac < 1.0:
        raise UsageError("--test-fraction must lie strictly between 0 and 1")

    features = np.vstack(
        [wlda_model.encode_counts(mdl, corpus.dense_rows([i])) for i in range(len(corpus.docs))]
    )
    rng = np.random.default_rng(resolved["seed"])
    order = rng.permutation(len(corpus.docs))
    n_test = max(1, int(round(frac * len(corpus.docs))))
    if n_test >= len(corpus.docs):
        raise DataError("test split would consume every document")
    test_idx, train_idx = order[:n_test], order[n_test:]
    accuracy = metrics.classification_probe(
        features[train_idx],
        labels[train_idx],
        features[test_idx],
        labels[test_idx],
        learning_rate=resolved["learning-rate"],
        iterations=resolved["iterations"],
    )
    print(f"accuracy {accuracy!r}")
    if resolved["out-dir"]:
        out = _ensure_out_dir(resolved)
        (out / "accuracy.txt").write_text(repr(accuracy) + "\n", encoding="utf-8")
        write_run_config(out, "classify", resolved)
    return EXIT_OK


def gradient_check(seed: int, instances: int, tolerance: float, inject_sign_flip: bool = False) -> tuple[bool, float]:
    """Finite-difference validation of the full objective on tiny instances."""
    rng = np.random.default_rng(seed)
    v, k, m = 5, 2, 4
    worst = 0.0
    for i in range(instances):
        mdl = wlda_model.init_model(v, k, (4, 3), "softplus", rng)
        counts = rng.integers(0, 4, size=(m, v)).astype(np.float64)
        counts[counts.sum(axis=1) < 1, 0] = 1.0
        prior = simplex.sample_dirichlet(np.full(k, 0.1), rng, size=m)
        noise = simplex.sample_dirichlet(np.full(k, 0.1), rng, size=m)
        config = wlda_model.TrainConfig(
            num_topics=k, hidden_sizes=(4, 3), noise_alpha=0.3, mmd_weight=1.0, batch_size=m
        )
        _, grads, _ = wlda_model.batch_objective(mdl, counts, prior, config, noise)
        if inject_sign_flip and i == 0:
            grads[0] = grads[0].copy()
            grads[0].flat[0] = -grads[0].flat[0] - 1.0

        template = wlda_model.init_model(v, k, (4, 3), "softplus", np.random.default_rng(0))

        def loss_fn(params):
            template.set_params([p.copy() for p in params])
            loss, _, _ = wlda_model.batch_objective(template, counts, prior, config, noise)
            return loss

        numeric = nn.finite_diff_grad(loss_fn, mdl.params(), h=1e-6)
        worst = max(worst, nn.relative_error(grads, numeric))
    return worst < tolerance, worst


def cmd_gradcheck(resolved: dict[str, Any]) -> int:
    ok, worst = gradient_check(
        resolved["seed"], resolved["instances"], resolved["tolerance"], resolved["inject-sign-flip"]
    )
    print(f"max relative error {worst!r} over {resolved['instances']} instances "
          f"(tolerance {resolved['tolerance']!r}): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK


_COMMANDS = {
    "generate": cmd_generate,
    "ingest": cmd_ingest,
    "train-wlda": cmd_train_wlda,
    "train-gibbs": cmd_train_gibbs,
    "match-prior": cmd_match_prior,
    "eval": cmd_eval,
    "classify": cmd_classify,
    "gradcheck": cmd_gradcheck,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        names = ", ".join(_COMMANDS)
        print(f"usage: wlda <subcommand> [--config FILE] [--flags]\nsubcommands: {names}")
        return EXIT_OK if argv else EXIT_USAGE
    command, rest = argv[0], argv[1:]
    if command not in _COMMANDS:
        print(f"unknown subcommand {command!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        resolved = resolve_options(command, rest)
        return _COMMANDS[command](resolved)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
