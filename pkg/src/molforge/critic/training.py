"""Critic training: joint classification + affinity regression, AUROC,
and the hyperparameter grid sweep."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import nn
from ..mol import Molecule3D
from .graphs import LigandGraph, PocketGraph, ligand_from_molecule
from .model import AffinityScaler, CriticConfig, CriticModel


@dataclass
class LabeledPair:
    pocket: PocketGraph
    ligand: Molecule3D | LigandGraph
    active: bool
    affinity: float = 0.0

    def ligand_graph(self) -> LigandGraph:
        if isinstance(self.ligand, LigandGraph):
            return self.ligand
        return ligand_from_molecule(self.ligand)


def auroc(labels, scores) -> float:
    """Area under the ROC curve by the rank statistic, ties averaged."""
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(labels.sum())
    n_neg = int((~labels).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC requires both classes")

    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # 1-based average rank
        i = j + 1
    pos_rank_sum = ranks[labels].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class _Prepared:
    """Cached per-pair node/edge arrays; graphs never change mid-training."""

    pocket: tuple[np.ndarray, np.ndarray, np.ndarray]
    ligand: tuple[np.ndarray, np.ndarray, np.ndarray]
    label: int
    affinity: float


def _prepare(pair: LabeledPair) -> _Prepared:
    ligand = pair.ligand_graph()
    p_src, p_dst = pair.pocket.edges()
    l_src, l_dst = ligand.edges()
    return _Prepared(
        pocket=(pair.pocket.node_features(), p_src, p_dst),
        ligand=(ligand.node_features(), l_src, l_dst),
        label=int(pair.active),
        affinity=float(pair.affinity),
    )


def _stack(sides) -> tuple:
    feats, srcs, dsts, gids = [], [], [], []
    offset = 0
    for gid, (f, src, dst) in enumerate(sides):
        feats.append(f)
        srcs.append(src + offset)
        dsts.append(dst + offset)
        gids.append(np.full(f.shape[0], gid, dtype=np.int64))
        offset += f.shape[0]
    return (
        np.concatenate(feats),
        np.concatenate(srcs),
        np.concatenate(dsts),
        np.concatenate(gids),
        len(sides),
    )


def _batch_forward(model: CriticModel, chunk: list[_Prepared]):
    pocket_arrays = _stack([p.pocket for p in chunk])
    ligand_arrays = _stack([p.ligand for p in chunk])
    return model.forward_batch(pocket_arrays, ligand_arrays)


def _predictions(model: CriticModel, prepared: list[_Prepared], batch_size: int):
    """Binding probabilities and raw affinities without recording a tape."""
    probs, raws = [], []
    for start in range(0, len(prepared), batch_size):
        log_probs, raw = _batch_forward(model, prepared[start : start + batch_size])
        probs.extend(np.exp(log_probs.data[:, 1]).tolist())
        raws.extend(raw.data[:, 0].tolist())
    return np.array(probs), np.array(raws)


@dataclass
class TrainResult:
    model: CriticModel
    train_auroc: float
    test_auroc: float
    losses: list[float]
    scaler: AffinityScaler


def train_classifier(
    pairs: list[LabeledPair],
    config: CriticConfig,
    seed: int = 0,
    epochs: int | None = None,
) -> TrainResult:
    labels = [p.active for p in pairs]
    if len(set(labels)) < 2:
        raise ValueError("training data contains a single class")

    rng = np.random.default_rng(seed)
    model = CriticModel(config, rng)
    prepared = [_prepare(p) for p in pairs]

    order = rng.permutation(len(prepared))
    n_test = len(prepared) // 3
    test_idx = order[:n_test] if n_test else order
    train_idx = order[n_test:] if n_test else order

    opt = nn.Adam(model.parameters(), lr=config.lr)
    losses: list[float] = []
    for _ in range(epochs if epochs is not None else config.epochs):
        epoch_order = rng.permutation(train_idx)
        running = 0.0
        for start in range(0, len(epoch_order), config.batch_size):
            chunk = [prepared[i] for i in epoch_order[start : start + config.batch_size]]
            opt.zero_grad()
            with nn.Tape():
                log_probs, raw = _batch_forward(model, chunk)
                picks = np.zeros((len(chunk), 2))
                picks[np.arange(len(chunk)), [p.label for p in chunk]] = 1.0
                loss = -nn.tensor_sum(log_probs * nn.Tensor(picks))
                targets = nn.Tensor(np.array([[p.affinity] for p in chunk]))
                residual = raw - targets
                loss = loss + config.affinity_weight * nn.tensor_sum(residual * residual)
                nn.backward(loss)
            opt.step()
            running += loss.item()
        losses.append(running / len(train_idx))

    train_probs, train_raw = _predictions(model, [prepared[i] for i in train_idx], config.batch_size)
    test_probs, _ = _predictions(model, [prepared[i] for i in test_idx], config.batch_size)
    return TrainResult(
        model=model,
        train_auroc=auroc([prepared[i].label for i in train_idx], train_probs),
        test_auroc=auroc([prepared[i].label for i in test_idx], test_probs),
        losses=losses,
        scaler=AffinityScaler.fit(train_raw),
    )


@dataclass(frozen=True)
class GridRow:
    name: str
    lr: float
    heads: int
    dim: int
    train_auroc: float
    test_auroc: float
    best: bool
    error: str = ""


def _format_lr(lr: float) -> str:
    return np.format_float_positional(lr, trim="-")


def hyperparameter_grid(
    lrs,
    heads_list,
    dims,
    pairs: list[LabeledPair],
    base_config: CriticConfig | None = None,
    seed: int = 0,
    epochs: int | None = None,
) -> list[GridRow]:
    """Train every (lr, heads, dim) combination on one shared split.

    A failing combination is recorded on its row and skipped, never
    fatal to the sweep.
    """
    base = base_config or CriticConfig()
    combos = [(lr, h, d) for lr in lrs for h in heads_list for d in dims]
    if not combos:
        raise ValueError("empty hyperparameter grid")

    draft = []
    for lr, heads, dim in combos:
        name = f"Lr_{_format_lr(lr)}_n{heads}_d{dim}"
        try:
            config = replace(base, lr=lr, heads=heads, dim=dim)
            result = train_classifier(pairs, config, seed=seed, epochs=epochs)
            draft.append((name, lr, heads, dim, result.train_auroc, result.test_auroc, ""))
        except Exception as exc:  # noqa: BLE001 - per-row isolation is the contract
            draft.append((name, lr, heads, dim, float("nan"), float("nan"), str(exc)))

    best_index = -1
    best_test = -np.inf
    for i, row in enumerate(draft):
        if not row[6] and row[5] > best_test:
            best_index, best_test = i, row[5]
    return [
        GridRow(name, lr, heads, dim, tr, te, i == best_index, err)
        for i, (name, lr, heads, dim, tr, te, err) in enumerate(draft)
    ]


def grid_rows_as_csv(rows: list[GridRow]) -> tuple[list[str], list[list]]:
    header = ["hyperparameters", "train_roc", "test_roc", "best", "error"]
    body = [
        [r.name, r.train_auroc, r.test_auroc, int(r.best), r.error]
        for r in rows
    ]
    return header, body
