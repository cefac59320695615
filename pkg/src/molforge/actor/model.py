"""Autoregressive 3D generator model.

The network reads the partial molecule as a point cloud: an embedding
per element, refined by continuous-filter convolutions over interatomic
distances. Two heads consume the features. A type head pools the whole
state (sum pooling, so molecule size is visible and termination is
learnable) and scores the next atom's element plus a stop token. A
distance head maps each placed atom's feature vector to a distribution
over binned distances between that atom and the atom about to be
placed.

Everything downstream of coordinates uses distances only, so
predictions are invariant under rigid motion of the state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nn
from ..elements import ELEMENTS, TYPE_VOCAB
from ..mol import Molecule3D, MoleculeError


@dataclass(frozen=True)
class ActorConfig:
    dim: int = 32
    n_interactions: int = 6
    cutoff: float = 10.0
    n_gaussians: int = 25
    d_max: float = 15.0
    n_bins: int = 300
    max_atoms: int = 30
    batch_size: int = 2
    epochs: int = 150
    lr: float = 1e-4
    patience: int = 10
    lr_decay: float = 0.5
    min_lr: float = 1e-6
    # distance heads attend to at most this many placed atoms
    attend_k: int = 25
    grid_spacing: float = 0.25
    grid_radius: float = 3.0

    def __post_init__(self):
        for name in (
            "dim", "n_interactions", "cutoff", "n_gaussians", "d_max", "n_bins",
            "max_atoms", "batch_size", "epochs", "lr", "patience", "lr_decay",
            "min_lr", "attend_k", "grid_spacing", "grid_radius",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"ActorConfig.{name} must be positive")

    @property
    def bin_width(self) -> float:
        return self.d_max / self.n_bins


@dataclass
class PartialState:
    """A molecule under construction; the first atoms are the seed."""

    mol: Molecule3D
    scaffold_size: int

    def __post_init__(self):
        if not 0 < self.scaffold_size <= len(self.mol):
            raise MoleculeError("scaffold size must cover a non-empty prefix")
        if not self.mol.has_coordinates():
            raise MoleculeError("partial state requires coordinates")

    @property
    def t(self) -> int:
        return len(self.mol) - self.scaffold_size

    def center(self) -> np.ndarray:
        return self.mol.center_of_mass()


@dataclass(frozen=True)
class PlacementDistributions:
    """Next-atom type distribution plus per-placed-atom distance bins."""

    type_dist: np.ndarray       # (len(TYPE_VOCAB),)
    distance_dists: np.ndarray  # (k, n_bins), row i for atom atom_indices[i]
    atom_indices: np.ndarray    # (k,)

    def __post_init__(self):
        if abs(self.type_dist.sum() - 1.0) > 1e-6:
            raise ValueError("type distribution does not sum to 1")
        if self.distance_dists.shape[0] != self.atom_indices.shape[0]:
            raise ValueError("one distance row per attended atom required")
        if self.distance_dists.size:
            sums = self.distance_dists.sum(axis=1)
            if np.max(np.abs(sums - 1.0)) > 1e-6:
                raise ValueError("distance distributions do not sum to 1")


def species_indices(mol: Molecule3D) -> np.ndarray:
    return np.array([ELEMENTS.index(a.element) for a in mol.atoms], dtype=np.int64)


def attended_atoms(positions: np.ndarray, masses: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k atoms nearest the center of mass, nearest first.

    Distances are quantized before sorting so that symmetry-equivalent
    atoms keep their index order under rigid motion of the coordinates;
    otherwise rotation-level float noise could reshuffle exact ties.
    """
    com = (positions * masses[:, None]).sum(axis=0) / masses.sum()
    dist = np.round(np.linalg.norm(positions - com, axis=1), 8)
    order = np.lexsort((np.arange(len(dist)), dist))
    return order[: min(k, len(dist))].astype(np.int64)


class ActorModel(nn.Module):
    def __init__(self, config: ActorConfig, rng: np.random.Generator):
        self.config = config
        self.embed = nn.Embedding(rng, len(ELEMENTS), config.dim)
        self.interactions = [
            nn.Interaction(rng, config.dim, config.n_gaussians, config.cutoff, config.d_max)
            for _ in range(config.n_interactions)
        ]
        self.type_hidden = nn.Dense(rng, config.dim, config.dim)
        self.type_out = nn.Dense(rng, config.dim, len(TYPE_VOCAB))
        self.dist_hidden = nn.Dense(rng, config.dim, config.dim)
        self.dist_out = nn.Dense(rng, config.dim, config.n_bins)

    # -- feature extraction ------------------------------------------------

    def atom_features(
        self, species: np.ndarray, src: np.ndarray, dst: np.ndarray, distances: np.ndarray
    ) -> nn.Tensor:
        feats = self.embed(species)
        for layer in self.interactions:
            feats = layer(feats, src, dst, distances)
        return feats

    # -- heads ---------------------------------------------------------------

    def type_log_probs(self, feats: nn.Tensor, copy_ids: np.ndarray, n_copies: int) -> nn.Tensor:
        pooled = nn.segment_sum(feats, copy_ids, n_copies)
        hidden = nn.shifted_softplus(self.type_hidden(pooled))
        return nn.log_softmax(self.type_out(hidden))

    def distance_log_probs(self, feats: nn.Tensor, rows: np.ndarray) -> nn.Tensor:
        picked = nn.gather_rows(feats, rows)
        hidden = nn.shifted_softplus(self.dist_hidden(picked))
        return nn.log_softmax(self.dist_out(hidden))


def predict(model: ActorModel, state: PartialState) -> PlacementDistributions:
    """Score the next placement; pure inference, no tape."""
    mol = state.mol
    species = species_indices(mol)
    positions = mol.positions()
    src, dst, dist = nn.pair_list(positions, model.config.cutoff)
    feats = model.atom_features(species, src, dst, dist)

    type_lp = model.type_log_probs(feats, np.zeros(len(species), dtype=np.int64), 1)
    rows = attended_atoms(positions, mol.masses(), model.config.attend_k)
    dist_lp = model.distance_log_probs(feats, rows)
    return PlacementDistributions(
        type_dist=np.exp(type_lp.data[0]),
        distance_dists=np.exp(dist_lp.data),
        atom_indices=rows,
    )
