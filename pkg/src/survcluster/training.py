"""Mini-batch training loop for the soft clusterer.

Each step maximizes the total objective (statistic minus weighted balance
penalty) by descending on its negation with AdamW. Shuffling only decides
batch membership; within a batch, subjects are processed in dataset order, so
``batch_size = n`` is exactly full-batch training. Runs are deterministic
given the seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NoEventsError
from .loss import LossConfig, objective_from_logits, row_softmax, total_objective
from .network import NetworkParams, NetworkSpec, backward_from_logits, forward_cached, init_params
from .optimizer import AdamW
from .records import as_time_event_arrays

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization hyperparameters; ``penalty_weight`` seeds the LossConfig.

    ``n_restarts > 1`` trains that many independently seeded runs and keeps
    the one with the highest final full-dataset objective (the selection is
    unsupervised, like k-means' ``n_init``).
    """

    learning_rate: float = 0.01
    epochs: int = 50
    batch_size: int = 32
    weight_decay: float = 0.0
    penalty_weight: float = 0.1
    seed: int = 0
    n_restarts: int = 1

    def __post_init__(self):
        if self.learning_rate < 0.0:
            raise InvalidInputError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise InvalidInputError("epochs must be >= 1")
        if self.batch_size < 2:
            raise InvalidInputError("a logrank batch needs at least 2 subjects")
        if self.weight_decay < 0.0:
            raise InvalidInputError("weight_decay must be >= 0")
        if self.penalty_weight < 0.0:
            raise InvalidInputError("penalty_weight must be >= 0")
        if self.n_restarts < 1:
            raise InvalidInputError("n_restarts must be >= 1")


@dataclass(frozen=True)
class EpochStats:
    """Full-dataset objective after one epoch."""

    epoch: int
    objective: float
    statistic: float
    penalty: float


def _epoch_batches(perm: np.ndarray, batch_size: int, events: np.ndarray) -> list[np.ndarray]:
    # Chunk the shuffled order; sort each chunk so membership is the only
    # stochastic choice. An incomplete tail chunk is kept only when it can
    # carry logrank information (>= 2 subjects, >= 1 event), else merged.
    chunks = [np.sort(perm[i : i + batch_size]) for i in range(0, perm.size, batch_size)]
    if len(chunks) > 1 and chunks[-1].size < batch_size:
        tail = chunks[-1]
        if tail.size < 2 or not events[tail].any():
            chunks[-2] = np.sort(np.concatenate([chunks[-2], tail]))
            chunks.pop()
    return chunks


def train(
    spec: NetworkSpec,
    records,
    features,
    train_cfg: TrainConfig,
    loss_cfg: LossConfig | None = None,
) -> tuple[NetworkParams, list[EpochStats]]:
    """Train the clusterer; returns final params and per-epoch objective history.

    Parameters
    ----------
    spec : architecture; ``spec.seed`` (or ``train_cfg.seed`` when unset)
        drives the initialization.
    records : survival input (SurvivalRecord sequence or (times, events)).
    features : (n, m) matrix aligned with records.
    train_cfg : optimization hyperparameters; ``train_cfg.seed`` drives epoch
        shuffling.
    loss_cfg : objective knobs; defaults to ``LossConfig`` with the train
        config's penalty weight.

    Batches without any event are skipped (no optimizer step); the count is
    logged. Raises ``NoEventsError`` when the whole dataset is censored.
    With ``n_restarts > 1`` both initialization and shuffling are reseeded
    per restart (any explicit ``spec.seed`` is superseded) and the run with
    the highest final objective wins; ties go to the earliest restart.
    """
    times, events = as_time_event_arrays(records)
    x = np.asarray(features, dtype=np.float64)
    n = times.size
    if x.ndim != 2 or x.shape[0] != n:
        raise InvalidInputError("features must be a 2-D matrix aligned with records")
    if x.shape[1] != spec.layer_sizes[0]:
        raise InvalidInputError(
            f"feature width {x.shape[1]} does not match network input {spec.layer_sizes[0]}"
        )
    if n < train_cfg.batch_size:
        raise InvalidInputError("batch_size cannot exceed the number of subjects")
    if not events.any():
        raise NoEventsError("training data contains no observed events")
    if loss_cfg is None:
        loss_cfg = LossConfig(penalty_weight=train_cfg.penalty_weight)

    if train_cfg.n_restarts == 1:
        init_seed = spec.seed if spec.seed is not None else train_cfg.seed
        return _train_once(
            spec, times, events, x, train_cfg, loss_cfg, init_seed, train_cfg.seed
        )
    best = None
    restart_seeds = [
        int(child.generate_state(1)[0])
        for child in np.random.SeedSequence(train_cfg.seed).spawn(train_cfg.n_restarts)
    ]
    for r, seed in enumerate(restart_seeds):
        params, history = _train_once(spec, times, events, x, train_cfg, loss_cfg, seed, seed)
        if best is None or history[-1].objective > best[0]:
            best = (history[-1].objective, r, params, history)
    _log.info("restart %d of %d selected (objective %.6g)", best[1], train_cfg.n_restarts, best[0])
    return best[2], best[3]


def _train_once(spec, times, events, x, train_cfg, loss_cfg, init_seed, shuffle_seed):
    n = times.size
    params = init_params(spec, seed=init_seed)
    opt = AdamW(params.arrays(), train_cfg.learning_rate, train_cfg.weight_decay)
    rng = np.random.default_rng(shuffle_seed)
    activation = spec.hidden_activation
    history: list[EpochStats] = []
    skipped = 0

    for epoch in range(1, train_cfg.epochs + 1):
        perm = rng.permutation(n)
        for idx in _epoch_batches(perm, train_cfg.batch_size, events):
            if not events[idx].any():
                skipped += 1
                continue
            logits, inputs, pre = forward_cached(params, x[idx], activation)
            _, grad_logits = objective_from_logits(logits, (times[idx], events[idx]), loss_cfg)
            grad_w, grad_b = backward_from_logits(params, inputs, pre, -grad_logits, activation)
            grads = []
            for gw, gb in zip(grad_w, grad_b):
                grads.append(gw)
                grads.append(gb)
            opt.step(params.arrays(), grads)
        full_logits, _, _ = forward_cached(params, x, activation)
        value = total_objective(row_softmax(full_logits), (times, events), loss_cfg)
        history.append(EpochStats(epoch, value.total, value.statistic, value.penalty))

    if skipped:
        _log.info("skipped %d event-free batches over %d epochs", skipped, train_cfg.epochs)
    return params, history
