from .model import (
    ActorConfig,
    ActorModel,
    PartialState,
    PlacementDistributions,
    attended_atoms,
    predict,
    species_indices,
)
from .sampling import (
    PROB_FLOOR,
    bin_centers,
    candidate_grid,
    generate,
    ground_truth_bins,
    nll_step,
    place_atom,
    stop_nll,
)
from .training import (
    EpisodeBatch,
    LossPoint,
    build_episode_batch,
    episode_batch,
    episode_nll,
    restore_params,
    snapshot_params,
    split_corpus,
    teacher_ordering,
    train_supervised,
)

__all__ = [
    "ActorConfig",
    "ActorModel",
    "EpisodeBatch",
    "LossPoint",
    "PROB_FLOOR",
    "PartialState",
    "PlacementDistributions",
    "attended_atoms",
    "bin_centers",
    "build_episode_batch",
    "candidate_grid",
    "episode_batch",
    "episode_nll",
    "generate",
    "ground_truth_bins",
    "nll_step",
    "place_atom",
    "predict",
    "restore_params",
    "snapshot_params",
    "species_indices",
    "split_corpus",
    "stop_nll",
    "teacher_ordering",
    "train_supervised",
]
