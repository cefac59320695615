"""Likelihood targets and coordinate realization.

The network predicts distances, not points. A new atom's position is
realized by scoring a candidate grid around the current center of mass
against every predicted distance distribution and sampling from the
softmax over candidate scores; with one-hot distance targets this
reduces to trilateration up to grid resolution.
"""

from __future__ import annotations

import numpy as np

from ..elements import ELEMENTS, STOP_INDEX, TYPE_VOCAB
from ..mol import Atom, Molecule3D, MoleculeError
from .model import ActorModel, PartialState, PlacementDistributions, predict

PROB_FLOOR = 1e-12


def bin_centers(n_bins: int, d_max: float) -> np.ndarray:
    width = d_max / n_bins
    return (np.arange(n_bins) + 0.5) * width


def ground_truth_bins(true_distance: float, n_bins: int, d_max: float, width: float) -> np.ndarray:
    """Gaussian-expanded distance target, normalized over the bins."""
    if true_distance < 0:
        raise ValueError("distance must be non-negative")
    centers = bin_centers(n_bins, d_max)
    # log-space keeps the small-width limit a clean one-hot
    logq = -((centers - true_distance) ** 2) / (2.0 * width**2)
    q = np.exp(logq - logq.max())
    return q / q.sum()


def nll_step(
    pred: PlacementDistributions,
    true_element: str,
    true_distances: np.ndarray,
    d_max: float,
    width: float,
) -> tuple[float, float]:
    """Negative log-likelihood of one teacher step.

    true_distances holds the distance from the true next atom to each
    attended atom, aligned with pred.atom_indices.
    """
    if true_element not in ELEMENTS:
        raise MoleculeError(f"unsupported element {true_element!r}")
    type_idx = TYPE_VOCAB.index(true_element)
    type_loss = -np.log(max(pred.type_dist[type_idx], PROB_FLOOR))

    n_bins = pred.distance_dists.shape[1]
    dist_loss = 0.0
    for row, distance in zip(pred.distance_dists, true_distances):
        q = ground_truth_bins(float(distance), n_bins, d_max, width)
        dist_loss += float(-(q * np.log(np.maximum(row, PROB_FLOOR))).sum())
    return float(type_loss), dist_loss


def stop_nll(pred: PlacementDistributions) -> float:
    return float(-np.log(max(pred.type_dist[STOP_INDEX], PROB_FLOOR)))


def candidate_grid(center: np.ndarray, spacing: float, radius: float) -> np.ndarray:
    steps = np.arange(-radius, radius + spacing / 2, spacing)
    xs, ys, zs = np.meshgrid(steps, steps, steps, indexing="ij")
    offsets = np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)
    offsets = offsets[np.linalg.norm(offsets, axis=1) <= radius]
    return center + offsets


def place_atom(
    state: PartialState,
    dists: PlacementDistributions,
    element: str,
    rng: np.random.Generator,
    *,
    spacing: float = 0.25,
    radius: float = 3.0,
    d_max: float = 15.0,
) -> PartialState:
    """Append one atom at a grid position sampled by distance agreement."""
    if element not in ELEMENTS:
        raise MoleculeError(f"unsupported element {element!r}")
    mol = state.mol
    candidates = candidate_grid(state.center(), spacing, radius)

    n_bins = dists.distance_dists.shape[1]
    width = d_max / n_bins
    anchors = mol.positions()[dists.atom_indices]
    log_probs = np.log(np.maximum(dists.distance_dists, PROB_FLOOR))

    deltas = candidates[:, None, :] - anchors[None, :, :]
    distances = np.sqrt((deltas**2).sum(axis=-1))
    bins = np.clip((distances / width).astype(np.int64), 0, n_bins - 1)
    scores = np.take_along_axis(log_probs.T, bins, axis=0).sum(axis=1)

    shifted = np.exp(scores - scores.max())
    total = shifted.sum()
    if not np.isfinite(total) or total <= 0.0:
        choice = int(np.argmax(scores))
    else:
        choice = int(rng.choice(len(candidates), p=shifted / total))

    atoms = [Atom(a.element, a.position.copy(), a.charge, a.aromatic) for a in mol.atoms]
    atoms.append(Atom(element, candidates[choice]))
    grown = Molecule3D(atoms, [], mol.scaffold_mask, mol.provenance)
    return PartialState(grown, state.scaffold_size)


def generate(
    scaffold: Molecule3D,
    model: ActorModel,
    rng: np.random.Generator,
    max_atoms: int,
) -> Molecule3D:
    """Grow a molecule from the seed until the stop token or the atom bound.

    Bonds are left unset; callers perceive them from geometry afterward.
    Chemically invalid outputs are returned as-is so the validity metric
    can count them.
    """
    if not scaffold.has_coordinates():
        raise MoleculeError("scaffold requires 3D coordinates")
    seed = Molecule3D(
        [Atom(a.element, a.position.copy(), a.charge, a.aromatic) for a in scaffold.atoms],
        [],
        frozenset(range(len(scaffold.atoms))),
        "generated",
    )
    state = PartialState(seed, len(seed.atoms))
    cfg = model.config
    while len(state.mol) < max_atoms:
        dists = predict(model, state)
        p = dists.type_dist / dists.type_dist.sum()
        type_idx = int(rng.choice(len(TYPE_VOCAB), p=p))
        if type_idx == STOP_INDEX:
            break
        state = place_atom(
            state,
            dists,
            ELEMENTS[type_idx],
            rng,
            spacing=cfg.grid_spacing,
            radius=cfg.grid_radius,
            d_max=cfg.d_max,
        )
    return state.mol
