"""Command-line front end: simulate -> train -> evaluate/cv, plus digits-prep.

Every command accepts ``--config FILE`` pointing at a single JSON document
with one flat section per subcommand; explicit flags override config values,
which override built-in defaults. Artifact JSON embeds the resolved seed and
a sha256 hash of the resolved configuration, and repeated runs with the same
configuration are byte-identical.

Exit codes: 0 success, 2 validation errors, 3 data errors (missing or
malformed files, all-censored input), 4 numerical errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import dataio, svgplot
from ._backend import backend_name
from .errors import (
    DataError,
    InvalidInputError,
    NumericalError,
    SurvClusterError,
)
from .evaluate import (
    RecoveryReport,
    apply_matching_labels,
    apply_matching_probs,
    apply_standardizer,
    cluster_risk_scores,
    confusion_matrix,
    fit_standardizer,
    make_fold_plan,
    match_clusters,
    predicted_cluster_logrank_p,
    roc_auc_ovr,
    run_cv_experiment,
)
from .network import NetworkSpec, forward, load_checkpoint, save_checkpoint
from .records import as_time_event_arrays
from .simulate import (
    DEFAULT_ADMIN_HORIZON,
    DEFAULT_CENSOR_SCALE,
    THREE_GROUP_WEIBULL,
    CohortSpec,
    digits_to_groups,
    generate_cohort,
    simulate_survival,
    three_group_cohort_spec,
)
from .survival import concordance_index, kaplan_meier
from .training import TrainConfig, train

_REPORT_VERSION = 1
_PRESETS = ("three-group-weibull",)

log = logging.getLogger("survcluster")


def _parse_layers(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in str(text).split(","))
    except ValueError:
        raise InvalidInputError(
            f"layers must be comma-separated integers, got {text!r}"
        ) from None


def _require(args, *names) -> None:
    missing = [name for name in names if getattr(args, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise InvalidInputError(f"missing required option(s): {flags}")


def _resolved_config(args, keys) -> dict:
    return {key: getattr(args, key) for key in sorted(keys)}


def _report_header(args, keys, seed) -> dict:
    return {
        "schema_version": _REPORT_VERSION,
        "seed": seed,
        "config_hash": dataio.config_hash(_resolved_config(args, keys)),
        "kernel_backend": backend_name(),
    }


def _sidecar(path: str) -> str:
    stem, _ = os.path.splitext(path)
    return stem + ".meta.json"


def _km_curves_per_cluster(labels, times, events):
    curves = {}
    for label in np.unique(labels):
        mask = labels == label
        if events[mask].any():
            curves[int(label)] = kaplan_meier((times[mask], events[mask]))
    return curves


def _write_curves(args, labels, times, events) -> None:
    curves = _km_curves_per_cluster(labels, times, events)
    if args.km_csv:
        dataio.write_km_csv(args.km_csv, curves)
    if args.svg:
        svgplot.write_km_svg(args.svg, {l: (c.times, c.survival) for l, c in curves.items()})


# ---------------------------------------------------------------- simulate

# Output paths are excluded from the config hash: the hash identifies the
# computation, not where its artifacts land.
_SIM_KEYS = ("preset", "n", "seed", "censor_scale", "admin_horizon", "triangle_side")


def _cmd_simulate(args) -> int:
    _require(args, "out")
    if args.n < 1:
        raise InvalidInputError("--n must be >= 1")
    if args.preset not in _PRESETS:
        raise InvalidInputError(f"unknown preset {args.preset!r}; options: {_PRESETS}")
    base = three_group_cohort_spec(args.n, args.seed, triangle_side=args.triangle_side)
    spec = CohortSpec(
        groups=base.groups,
        n=args.n,
        seed=args.seed,
        censor_scale=args.censor_scale,
        admin_horizon=args.admin_horizon,
    )
    features, records, truth = generate_cohort(spec)
    times, events = as_time_event_arrays(records)
    dataio.write_cohort_csv(args.out, times, events, features=features, truth=truth)
    meta = _report_header(args, _SIM_KEYS, args.seed)
    meta["cohort_spec"] = spec.to_dict()
    meta["censoring_rate"] = float(1.0 - events.mean())
    dataio.write_json(_sidecar(args.out), meta)
    log.info("wrote %s (%d subjects) and %s", args.out, args.n, _sidecar(args.out))
    return 0


# ------------------------------------------------------------- digits-prep

_DIGITS_KEYS = ("digits_csv", "seed", "censor_scale", "admin_horizon")


def _read_digits_csv(path):
    if not os.path.exists(path):
        raise DataError(f"digits file not found: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise DataError("digits CSV must start with a 'label' column")
        rows = list(reader)
    if not rows:
        raise DataError(f"digits file has no data rows: {path}")
    try:
        data = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"malformed digits row: {exc}") from None
    return data[:, 0].astype(np.int64), data[:, 1:]


def _cmd_digits_prep(args) -> int:
    _require(args, "digits_csv", "out")
    labels, pixels = _read_digits_csv(args.digits_csv)
    keep = labels != 0
    labels, pixels = labels[keep], pixels[keep]
    if labels.size == 0:
        raise DataError("no digits 1-9 present after excluding digit 0")
    truth = digits_to_groups(labels, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    times, events = simulate_survival(
        truth, THREE_GROUP_WEIBULL, args.censor_scale, args.admin_horizon, rng
    )
    mean, scale = fit_standardizer(pixels)
    features = apply_standardizer(pixels, mean, scale)
    dataio.write_cohort_csv(args.out, times, events, features=features, truth=truth)
    meta = _report_header(args, _DIGITS_KEYS, args.seed)
    meta["n"] = int(labels.size)
    meta["digit_counts"] = {str(d): int((labels == d).sum()) for d in range(1, 10)}
    meta["censoring_rate"] = float(1.0 - events.mean())
    dataio.write_json(_sidecar(args.out), meta)
    log.info("wrote %s (%d digits)", args.out, labels.size)
    return 0


# ------------------------------------------------------------------- train

_TRAIN_KEYS = (
    "data",
    "layers",
    "activation",
    "learning_rate",
    "epochs",
    "batch_size",
    "weight_decay",
    "penalty_weight",
    "n_restarts",
    "seed",
)


def _cmd_train(args) -> int:
    _require(args, "data", "checkpoint")
    cohort = dataio.read_cohort_csv(args.data)
    if cohort.features is None:
        raise DataError("training requires feature columns in the cohort CSV")
    spec = NetworkSpec(
        _parse_layers(args.layers), hidden_activation=args.activation, seed=args.seed
    )
    train_cfg = TrainConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        weight_decay=args.weight_decay,
        penalty_weight=args.penalty_weight,
        seed=args.seed,
        n_restarts=args.n_restarts,
    )
    params, history = train(spec, (cohort.times, cohort.events), cohort.features, train_cfg)
    save_checkpoint(args.checkpoint, spec, params, extra=_report_header(args, _TRAIN_KEYS, args.seed))
    if args.history:
        dataio.write_history_csv(args.history, history)
    log.info("final full-dataset objective: %.6g", history[-1].objective)
    return 0


# ---------------------------------------------------------------- evaluate

_EVAL_KEYS = ("data", "checkpoint", "seed")


def _evaluation_report(probs, labels, times, events, truth, k) -> RecoveryReport:
    p_value = predicted_cluster_logrank_p(labels, times, events)
    risk = cluster_risk_scores(probs, times, events)
    c_index = concordance_index(risk, (times, events))
    if truth is None:
        return RecoveryReport(n=labels.size, hard_logrank_p=p_value, c_index=c_index)
    perm = match_clusters(labels, truth, k)
    matched_probs = apply_matching_probs(probs, perm)
    matched_labels = apply_matching_labels(labels, perm)
    return RecoveryReport(
        n=labels.size,
        hard_logrank_p=p_value,
        c_index=c_index,
        matching=tuple(int(p) for p in perm),
        auc_per_class=tuple(float(a) for a in roc_auc_ovr(matched_probs, truth)),
        confusion=tuple(tuple(row) for row in confusion_matrix(matched_labels, truth, k)),
    )


def _cmd_evaluate(args) -> int:
    _require(args, "data", "checkpoint", "report")
    cohort = dataio.read_cohort_csv(args.data)
    if cohort.features is None:
        raise DataError("evaluation requires feature columns in the cohort CSV")
    spec, params = load_checkpoint(args.checkpoint)
    soft = forward(params, cohort.features, spec.hidden_activation)
    labels = np.argmax(soft.probs, axis=1)
    report = _evaluation_report(
        soft.probs, labels, cohort.times, cohort.events, cohort.truth, spec.n_groups
    )
    doc = _report_header(args, _EVAL_KEYS, args.seed)
    doc["k"] = spec.n_groups
    doc["roc_inputs"] = "soft-probabilities"
    doc["report"] = report.to_dict()
    dataio.write_json(args.report, doc)
    _write_curves(args, labels, cohort.times, cohort.events)
    log.info("evaluation report written to %s", args.report)
    return 0


# ---------------------------------------------------------------------- cv

_CV_KEYS = (
    "data",
    "layers",
    "activation",
    "learning_rate",
    "epochs",
    "batch_size",
    "weight_decay",
    "penalty_weight",
    "n_restarts",
    "folds",
    "seed",
)


def cv_report_doc(result, args_like: dict, seed: int) -> dict:
    """Assemble the cross-validation report document (shared with tests)."""
    return {
        "schema_version": _REPORT_VERSION,
        "seed": seed,
        "config_hash": dataio.config_hash(args_like),
        "kernel_backend": backend_name(),
        "k": result.k,
        "n_folds": len(result.folds),
        "matching_basis": "train-partition",
        "roc_inputs": "soft-probabilities",
        "folds": [r.to_dict() for r in result.folds],
        "pooled": result.pooled.to_dict(),
    }


def _cmd_cv(args) -> int:
    _require(args, "data", "report")
    cohort = dataio.read_cohort_csv(args.data)
    if cohort.features is None:
        raise DataError("cross-validation requires feature columns in the cohort CSV")
    spec = NetworkSpec(_parse_layers(args.layers), hidden_activation=args.activation)
    train_cfg = TrainConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        weight_decay=args.weight_decay,
        penalty_weight=args.penalty_weight,
        seed=args.seed,
        n_restarts=args.n_restarts,
    )
    plan = make_fold_plan(cohort.times.size, n_folds=args.folds, seed=args.seed)
    result = run_cv_experiment(
        cohort.features,
        (cohort.times, cohort.events),
        cohort.truth,
        spec,
        train_cfg,
        fold_plan=plan,
    )
    dataio.write_json(args.report, cv_report_doc(result, _resolved_config(args, _CV_KEYS), args.seed))
    _write_curves(args, result.pooled_labels, cohort.times, cohort.events)
    log.info("cross-validation report written to %s", args.report)
    return 0


# -------------------------------------------------------------------- parser


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="survcluster",
        description=(
            "Unsupervised survival clustering: simulate cohorts, train a softmax "
            "clusterer on the differentiable logrank objective, and evaluate "
            "ground-truth recovery. Risk orientation: a higher risk score means "
            "predicted shorter survival."
        ),
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON config file (section per command)")
        p.set_defaults(func=func)
        subparsers[name] = p
        return p

    sim = command("simulate", _cmd_simulate, "generate a synthetic cohort CSV + metadata JSON")
    sim.add_argument("--preset", default="three-group-weibull")
    sim.add_argument("--n", type=int, default=3000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--censor-scale", dest="censor_scale", type=float, default=DEFAULT_CENSOR_SCALE)
    sim.add_argument("--admin-horizon", dest="admin_horizon", type=float, default=DEFAULT_ADMIN_HORIZON)
    sim.add_argument("--triangle-side", dest="triangle_side", type=float, default=None)
    sim.add_argument("--out", default=None, help="cohort CSV path")

    dig = command("digits-prep", _cmd_digits_prep, "build a survival cohort from 8x8 digit images")
    dig.add_argument("--digits-csv", dest="digits_csv", default=None)
    dig.add_argument("--seed", type=int, default=0)
    dig.add_argument("--censor-scale", dest="censor_scale", type=float, default=DEFAULT_CENSOR_SCALE)
    dig.add_argument("--admin-horizon", dest="admin_horizon", type=float, default=DEFAULT_ADMIN_HORIZON)
    dig.add_argument("--out", default=None, help="cohort CSV path")

    def training_flags(p, with_layers_default):
        p.add_argument("--layers", default=with_layers_default, help="comma-separated widths, input..k")
        p.add_argument("--activation", default="relu", choices=("relu", "tanh"))
        p.add_argument("--learning-rate", dest="learning_rate", type=float, default=0.01)
        p.add_argument("--epochs", type=int, default=50)
        p.add_argument("--batch-size", dest="batch_size", type=int, default=32)
        p.add_argument("--weight-decay", dest="weight_decay", type=float, default=0.01)
        p.add_argument("--penalty-weight", dest="penalty_weight", type=float, default=0.1)
        p.add_argument("--restarts", dest="n_restarts", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    tr = command("train", _cmd_train, "train the clusterer; writes checkpoint + history CSV")
    tr.add_argument("--data", default=None, help="cohort CSV")
    training_flags(tr, "3,16,3")
    tr.add_argument("--checkpoint", default=None, help="model JSON output")
    tr.add_argument("--history", default=None, help="per-epoch objective CSV output")

    ev = command("evaluate", _cmd_evaluate, "evaluate a checkpoint on a cohort CSV")
    ev.add_argument("--data", default=None)
    ev.add_argument("--checkpoint", default=None)
    ev.add_argument("--report", default=None, help="report JSON output")
    ev.add_argument("--km-csv", dest="km_csv", default=None, help="per-cluster curves CSV")
    ev.add_argument("--svg", default=None, help="optional step-curve SVG")
    ev.add_argument("--seed", type=int, default=0)

    cv = command("cv", _cmd_cv, "k-fold cross-validated train/evaluate")
    cv.add_argument("--data", default=None)
    training_flags(cv, "3,16,3")
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--report", default=None)
    cv.add_argument("--km-csv", dest="km_csv", default=None)
    cv.add_argument("--svg", default=None)

    return parser, subparsers


def _run(argv) -> int:
    parser, subparsers = _build_parser()
    args = parser.parse_args(argv)
    if args.config:
        section = _load_config_section(args.config, args.command)
        sub = subparsers[args.command]
        known = {action.dest for action in sub._actions}
        unknown = set(section) - known
        if unknown:
            raise InvalidInputError(
                f"unknown config keys for {args.command}: {sorted(unknown)}"
            )
        # Config values become defaults; re-parsing lets explicit flags win.
        sub.set_defaults(**section)
        args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


def _load_config_section(path: str, section: str) -> dict:
    if not os.path.exists(path):
        raise DataError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError("config file must contain a JSON object")
    part = doc.get(section, {})
    if not isinstance(part, dict):
        raise DataError(f"config section {section!r} must be a JSON object")
    return part


def main(argv=None) -> int:
    """Console entry point: run a command, mapping errors onto exit codes."""
    try:
        return _run(argv)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SurvClusterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
