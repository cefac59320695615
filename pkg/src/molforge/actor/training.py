"""Teacher-forced supervised training of the generator.

Each molecule becomes a fixed sequence of placement steps under a
canonical ordering: scaffold atoms first, then the rest by increasing
distance to the scaffold centroid (ties by element, then index). All
prefixes of one molecule are stacked into a single disjoint-copy batch
so an episode costs one forward pass instead of one per step; the
batches are static, so they are built once and reused every epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nn
from ..elements import ATOMIC_MASS, ELEMENTS, STOP_INDEX, TYPE_VOCAB
from ..mol import Molecule3D, MoleculeError
from .model import ActorConfig, ActorModel, attended_atoms
from .sampling import ground_truth_bins


def teacher_ordering(mol: Molecule3D) -> list[int]:
    """Canonical placement order used for teacher forcing."""
    scaffold = sorted(mol.scaffold_mask)
    if not scaffold:
        raise MoleculeError("training molecule lacks a scaffold mask")
    positions = mol.positions()
    centroid = positions[scaffold].mean(axis=0)
    rest = [i for i in range(len(mol)) if i not in mol.scaffold_mask]
    rest.sort(key=lambda i: (np.linalg.norm(positions[i] - centroid), mol.atoms[i].element, i))
    return scaffold + rest


@dataclass
class EpisodeBatch:
    """One molecule's teacher steps as disjoint prefix copies."""

    species: np.ndarray       # (N,)
    copy_ids: np.ndarray      # (N,)
    n_copies: int
    src: np.ndarray
    dst: np.ndarray
    edge_dist: np.ndarray
    type_targets: np.ndarray  # (n_copies,)
    dist_rows: np.ndarray     # (R,) global feature rows with a distance target
    dist_row_copy: np.ndarray  # (R,) copy owning each row
    dist_targets: np.ndarray  # (R, n_bins)
    n_steps: int


def episode_batch(mol: Molecule3D, config: ActorConfig) -> EpisodeBatch:
    order = teacher_ordering(mol)
    positions = mol.positions()[order]
    species = np.array([ELEMENTS.index(mol.atoms[i].element) for i in order], dtype=np.int64)
    masses = np.array([ATOMIC_MASS[mol.atoms[i].element] for i in order])
    return build_episode_batch(
        positions, species, masses, len(mol.scaffold_mask), config, include_stop=True
    )


def build_episode_batch(
    positions: np.ndarray,
    species: np.ndarray,
    masses: np.ndarray,
    scaffold_size: int,
    config: ActorConfig,
    include_stop: bool = True,
) -> EpisodeBatch:
    """Prefix-copy batch for atoms already arranged in placement order."""
    s, m = scaffold_size, len(species)

    spec_parts, copy_parts = [], []
    src_parts, dst_parts, dist_parts = [], [], []
    type_targets, rows, row_copy, q_rows = [], [], [], []
    offset = 0
    last = m + 1 if include_stop else m
    for copy_idx, t in enumerate(range(s, last)):
        spec_parts.append(species[:t])
        copy_parts.append(np.full(t, copy_idx, dtype=np.int64))
        src, dst, dist = nn.pair_list(positions[:t], config.cutoff)
        src_parts.append(src + offset)
        dst_parts.append(dst + offset)
        dist_parts.append(dist)
        if t < m:
            type_targets.append(species[t])
            local = attended_atoms(positions[:t], masses[:t], config.attend_k)
            true_d = np.linalg.norm(positions[local] - positions[t], axis=1)
            for r, d in zip(local, true_d):
                rows.append(r + offset)
                row_copy.append(copy_idx)
                q_rows.append(ground_truth_bins(float(d), config.n_bins, config.d_max, config.bin_width))
        else:
            type_targets.append(STOP_INDEX)
        offset += t

    n_copies = last - s
    return EpisodeBatch(
        species=np.concatenate(spec_parts),
        copy_ids=np.concatenate(copy_parts),
        n_copies=n_copies,
        src=np.concatenate(src_parts),
        dst=np.concatenate(dst_parts),
        edge_dist=np.concatenate(dist_parts),
        type_targets=np.array(type_targets, dtype=np.int64),
        dist_rows=np.array(rows, dtype=np.int64),
        dist_row_copy=np.array(row_copy, dtype=np.int64),
        dist_targets=np.stack(q_rows) if q_rows else np.zeros((0, config.n_bins)),
        n_steps=n_copies,
    )


def episode_nll(
    model: ActorModel, batch: EpisodeBatch, step_weights: np.ndarray | None = None
) -> nn.Tensor:
    """Summed NLL over one episode; optional per-step weighting."""
    if step_weights is None:
        step_weights = np.ones(batch.n_copies)
    feats = model.atom_features(batch.species, batch.src, batch.dst, batch.edge_dist)

    type_lp = model.type_log_probs(feats, batch.copy_ids, batch.n_copies)
    picks = np.zeros((batch.n_copies, len(TYPE_VOCAB)))
    picks[np.arange(batch.n_copies), batch.type_targets] = step_weights
    loss = -nn.tensor_sum(type_lp * nn.Tensor(picks))

    if batch.dist_rows.size:
        dist_lp = model.distance_log_probs(feats, batch.dist_rows)
        weighted_q = batch.dist_targets * step_weights[batch.dist_row_copy][:, None]
        loss = loss - nn.tensor_sum(dist_lp * nn.Tensor(weighted_q))
    return loss


@dataclass(frozen=True)
class LossPoint:
    epoch: int
    train_nll: float
    val_nll: float
    lr: float


def snapshot_params(model: nn.Module) -> dict[str, np.ndarray]:
    return {name: p.data.copy() for name, p in model.named_parameters()}


def restore_params(model: nn.Module, saved: dict[str, np.ndarray]) -> None:
    for name, p in model.named_parameters():
        p.data = saved[name].copy()
        p.grad = None


def split_corpus(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two-to-one train/validation split; degenerate sizes share the set."""
    order = rng.permutation(n)
    n_val = n // 3
    if n_val == 0:
        return order, order
    return order[n_val:], order[:n_val]


def train_supervised(
    corpus: list[Molecule3D],
    config: ActorConfig,
    seed: int = 0,
    epochs: int | None = None,
    checkpoint_path=None,
    config_hash: str = "",
) -> tuple[ActorModel, list[LossPoint]]:
    if not corpus:
        raise ValueError("empty training corpus")
    rng = np.random.default_rng(seed)
    model = ActorModel(config, rng)
    batches = [episode_batch(mol, config) for mol in corpus]
    train_idx, val_idx = split_corpus(len(corpus), rng)

    opt = nn.Adam(model.parameters(), lr=config.lr)
    sched = nn.PlateauScheduler(opt, config.patience, config.lr_decay, config.min_lr)
    best_val = np.inf
    best = snapshot_params(model)
    curves: list[LossPoint] = []

    for epoch in range(1, (epochs or config.epochs) + 1):
        order = rng.permutation(train_idx)
        running = 0.0
        for start in range(0, len(order), config.batch_size):
            chunk = order[start : start + config.batch_size]
            opt.zero_grad()
            with nn.Tape():
                loss = episode_nll(model, batches[chunk[0]])
                for i in chunk[1:]:
                    loss = loss + episode_nll(model, batches[i])
                nn.backward(loss)
            opt.step()
            running += loss.item()
        train_nll = running / len(order)
        val_nll = float(np.mean([episode_nll(model, batches[i]).item() for i in val_idx]))
        curves.append(LossPoint(epoch, train_nll, val_nll, opt.lr))
        if val_nll < best_val:
            best_val = val_nll
            best = snapshot_params(model)
        sched.step(val_nll)

    restore_params(model, best)
    if checkpoint_path is not None:
        nn.save_checkpoint(checkpoint_path, model, opt, config_hash=config_hash)
    return model, curves
