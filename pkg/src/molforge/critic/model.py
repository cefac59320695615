"""Two-tower graph-attention scorer for (pocket, ligand) pairs.

Each tower stacks multi-head attention layers over its graph, pools by
summation, and projects to a fixed-width vector. The concatenated pair
vector feeds a two-class head (binding probability via softmax) and a
one-output regression head (affinity surrogate). Both final heads are
zero-initialized, so an untrained critic scores exactly 0.5 binding
probability and zero raw affinity for every input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import nn
from ..descriptors import sa_score
from ..mol import Molecule3D
from ..perception import perceive_molecule
from .graphs import (
    LIGAND_FEATURE_DIM,
    POCKET_FEATURE_DIM,
    LigandGraph,
    PocketGraph,
    ligand_from_molecule,
)


@dataclass(frozen=True)
class CriticConfig:
    heads: int = 4
    dim: int = 70
    n_layers: int = 2
    lr: float = 1e-4
    epochs: int = 200
    batch_size: int = 16
    affinity_weight: float = 1.0

    def __post_init__(self):
        for name in ("heads", "dim", "n_layers", "lr", "epochs", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"CriticConfig.{name} must be positive")


@dataclass(frozen=True)
class CriticScores:
    c_bp: float
    c_ea_raw: float
    c_ea: float
    c_sa: float

    def __post_init__(self):
        for name in ("c_bp", "c_ea", "c_sa"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


@dataclass(frozen=True)
class AffinityScaler:
    """Monotone min-max map to [0, 1], clamped outside the fit range."""

    lo: float
    hi: float
    degenerate: bool = False

    @classmethod
    def fit(cls, sample) -> "AffinityScaler":
        values = np.asarray(list(sample), dtype=float)
        if values.size == 0:
            raise ValueError("cannot fit a scaler to an empty sample")
        lo, hi = float(values.min()), float(values.max())
        if hi - lo < 1e-12:
            return cls(lo, lo, degenerate=True)
        return cls(lo, hi)

    def __call__(self, value: float) -> float:
        if self.degenerate:
            return 0.5
        scaled = (value - self.lo) / (self.hi - self.lo)
        return float(min(1.0, max(0.0, scaled)))


def affinity_raw(ki: float, kd: float) -> float:
    """Affinity surrogate from inhibition/dissociation constants."""
    if ki <= 0 or kd <= 0:
        raise ValueError("binding constants must be positive")
    return -math.log10(ki / kd)


class Tower(nn.Module):
    def __init__(self, rng: np.random.Generator, n_in: int, config: CriticConfig):
        self.layers = []
        width = n_in
        for _ in range(config.n_layers):
            layer = nn.GraphAttention(rng, width, config.dim, config.heads)
            self.layers.append(layer)
            width = layer.n_out
        self.project = nn.Dense(rng, width, config.dim)

    def __call__(
        self,
        feats: np.ndarray,
        src: np.ndarray,
        dst: np.ndarray,
        graph_ids: np.ndarray,
        n_graphs: int,
    ) -> nn.Tensor:
        h = nn.Tensor(feats)
        for layer in self.layers:
            h = nn.shifted_softplus(layer(h, src, dst))
        pooled = nn.segment_sum(h, graph_ids, n_graphs)
        return nn.shifted_softplus(self.project(pooled))


class CriticModel(nn.Module):
    def __init__(self, config: CriticConfig, rng: np.random.Generator):
        self.config = config
        self.pocket_tower = Tower(rng, POCKET_FEATURE_DIM, config)
        self.ligand_tower = Tower(rng, LIGAND_FEATURE_DIM, config)
        self.class_head = nn.Dense(rng, 2 * config.dim, 2, zero_init=True)
        self.affinity_head = nn.Dense(rng, 2 * config.dim, 1, zero_init=True)

    def forward_batch(
        self,
        pocket_arrays: tuple,
        ligand_arrays: tuple,
    ) -> tuple[nn.Tensor, nn.Tensor]:
        """Log class probabilities (n, 2) and raw affinities (n, 1)."""
        pocket_vec = self.pocket_tower(*pocket_arrays)
        ligand_vec = self.ligand_tower(*ligand_arrays)
        joint = nn.concat([pocket_vec, ligand_vec], axis=1)
        return nn.log_softmax(self.class_head(joint)), self.affinity_head(joint)


def batch_graphs(graphs) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    """Disjoint union of graphs: features, edges, and graph ids."""
    feats, srcs, dsts, gids = [], [], [], []
    offset = 0
    for gid, graph in enumerate(graphs):
        f = graph.node_features()
        src, dst = graph.edges()
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
        len(graphs),
    )


def scale_sa_value(total: float) -> float:
    """Affine map from the SA range [1, 10] onto [0, 1], clamped."""
    return (min(10.0, max(1.0, total)) - 1.0) / 9.0


def scaled_sa(mol: Molecule3D) -> float:
    """SA score mapped onto [0, 1]; bonds are re-perceived tolerantly.

    Partial molecules are scored as-is: perception may flag the geometry
    as invalid mid-growth, but the bond graph it proposes is still the
    best available description, so the flag is ignored here.
    """
    perceived = perceive_molecule(mol)
    return scale_sa_value(sa_score(perceived.molecule).total)


def score(
    model: CriticModel,
    pocket: PocketGraph,
    mol: Molecule3D,
    scaler: AffinityScaler | None = None,
) -> CriticScores:
    """Score one ligand (possibly partial, bonds optional) against a pocket."""
    ligand = ligand_from_molecule(mol)
    log_probs, raw = model.forward_batch(
        batch_graphs([pocket]), batch_graphs([ligand])
    )
    c_bp = float(np.exp(log_probs.data[0, 1]))
    c_ea_raw = float(raw.data[0, 0])
    if scaler is None:
        scaler = AffinityScaler(0.0, 0.0, degenerate=True)
    return CriticScores(
        c_bp=c_bp,
        c_ea_raw=c_ea_raw,
        c_ea=scaler(c_ea_raw),
        c_sa=scaled_sa(mol),
    )
