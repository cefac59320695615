"""Versioned .npz checkpoints.

Layout (format version 1), all under a single .npz archive:

    format_version    int64[1], currently 1
    config_hash       unicode[1], hash of the resolved run config
    param/<name>      one float64 array per named parameter
    optim/<key>       optimizer state arrays (moments, step count, lr);
                      absent when the checkpoint was saved without one

Parameter names come from Module.named_parameters, so loading is an
exact name-and-shape match against a freshly constructed model. Any
mismatch is an error rather than a silent partial restore.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .layers import Module
from .optim import Adam

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(
    path: str | Path,
    model: Module,
    optimizer: Adam | None = None,
    config_hash: str = "",
) -> None:
    arrays: dict[str, np.ndarray] = {
        "format_version": np.array([FORMAT_VERSION], dtype=np.int64),
        "config_hash": np.array([config_hash]),
    }
    for name, param in model.named_parameters():
        arrays[f"param/{name}"] = param.data
    if optimizer is not None:
        for key, value in optimizer.state_arrays().items():
            arrays[f"optim/{key}"] = value
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **arrays)


def load_checkpoint(
    path: str | Path,
    model: Module,
    optimizer: Adam | None = None,
) -> str:
    """Restore parameters in place; returns the stored config hash."""
    with np.load(Path(path), allow_pickle=False) as archive:
        version = int(archive["format_version"][0])
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint format version {version}")
        stored = {k[len("param/"):]: archive[k] for k in archive.files if k.startswith("param/")}
        expected = dict(model.named_parameters())
        if set(stored) != set(expected):
            missing = sorted(set(expected) - set(stored))
            extra = sorted(set(stored) - set(expected))
            raise CheckpointError(f"parameter name mismatch (missing {missing}, extra {extra})")
        for name, param in expected.items():
            if stored[name].shape != param.data.shape:
                raise CheckpointError(
                    f"shape mismatch for '{name}': "
                    f"checkpoint {stored[name].shape}, model {param.data.shape}"
                )
            param.data = np.array(stored[name], dtype=np.float64)
            param.grad = None
        if optimizer is not None:
            optim_state = {
                k[len("optim/"):]: archive[k] for k in archive.files if k.startswith("optim/")
            }
            if optim_state:
                optimizer.load_state_arrays(optim_state)
        return str(archive["config_hash"][0])
