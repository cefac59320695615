from .tensor import (
    Tape,
    Tensor,
    TensorError,
    add,
    backward,
    concat,
    div,
    exp,
    gather_rows,
    log,
    log_softmax,
    matmul,
    mean,
    mul,
    power,
    reshape,
    segment_sum,
    softmax,
    softplus,
    sub,
    tensor_sum,
)
from .layers import (
    Dense,
    Embedding,
    GraphAttention,
    Interaction,
    Module,
    cosine_cutoff,
    gaussian_rbf,
    glorot,
    pair_list,
    segment_softmax,
    shifted_softplus,
)
from .optim import Adam, PlateauScheduler
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "Adam",
    "CheckpointError",
    "Dense",
    "Embedding",
    "GraphAttention",
    "Interaction",
    "Module",
    "PlateauScheduler",
    "Tape",
    "Tensor",
    "TensorError",
    "add",
    "backward",
    "concat",
    "cosine_cutoff",
    "div",
    "exp",
    "gather_rows",
    "gaussian_rbf",
    "glorot",
    "load_checkpoint",
    "log",
    "log_softmax",
    "matmul",
    "mean",
    "mul",
    "pair_list",
    "power",
    "reshape",
    "save_checkpoint",
    "segment_softmax",
    "segment_sum",
    "softmax",
    "softplus",
    "sub",
    "shifted_softplus",
    "tensor_sum",
]
