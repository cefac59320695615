from .graphs import (
    LIGAND_CUTOFF,
    LIGAND_FEATURE_DIM,
    N_RESIDUE_CLASSES,
    POCKET_CUTOFF,
    POCKET_FEATURE_DIM,
    LigandGraph,
    PocketGraph,
    ligand_from_molecule,
)
from .model import (
    AffinityScaler,
    CriticConfig,
    CriticModel,
    CriticScores,
    affinity_raw,
    batch_graphs,
    scaled_sa,
    score,
)
from .training import (
    GridRow,
    LabeledPair,
    TrainResult,
    auroc,
    grid_rows_as_csv,
    hyperparameter_grid,
    train_classifier,
)
from .data import load_pairs, save_pairs

__all__ = [
    "AffinityScaler",
    "CriticConfig",
    "CriticModel",
    "CriticScores",
    "GridRow",
    "LIGAND_CUTOFF",
    "LIGAND_FEATURE_DIM",
    "LabeledPair",
    "LigandGraph",
    "N_RESIDUE_CLASSES",
    "POCKET_CUTOFF",
    "POCKET_FEATURE_DIM",
    "PocketGraph",
    "TrainResult",
    "affinity_raw",
    "auroc",
    "batch_graphs",
    "grid_rows_as_csv",
    "hyperparameter_grid",
    "ligand_from_molecule",
    "load_pairs",
    "save_pairs",
    "scaled_sa",
    "score",
    "train_classifier",
]
