"""Flat key = value run configuration.

Every run resolves to one flat dictionary: typed defaults, overlaid by an
optional config file, overlaid by command-line overrides. Unknown keys are
rejected at every layer so a typo cannot silently fall back to a default.
The resolved mapping has a canonical text form whose sha256 identifies the
run.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .actor import ActorConfig
from .critic import CriticConfig
from .rl import RewardConfig

# One flat namespace. Negative values on *_lr / reward_* keys mean
# "derive from the base setting" (actor_lr, or the reward kind's stock
# weights); valid values for those keys are never negative.
DEFAULTS: dict[str, object] = {
    "seed": 0,
    "scaffold_smiles": "C1CNCOC1",
    "corpus_size": 50,
    "pair_count": 24,
    "n_generate": 200,
    "top_k": 100,
    "hist_bins": 20,
    "lipinski_filter": True,
    "actor_dim": 32,
    "actor_n_interactions": 6,
    "actor_cutoff": 10.0,
    "actor_n_gaussians": 25,
    "actor_d_max": 15.0,
    "actor_n_bins": 300,
    "actor_max_atoms": 30,
    "actor_batch_size": 2,
    "actor_epochs": 150,
    "actor_lr": 1e-4,
    "actor_patience": 10,
    "actor_lr_decay": 0.5,
    "actor_min_lr": 1e-6,
    "actor_attend_k": 25,
    "actor_grid_spacing": 0.25,
    "actor_grid_radius": 3.0,
    "critic_heads": 4,
    "critic_dim": 70,
    "critic_n_layers": 2,
    "critic_lr": 1e-4,
    "critic_epochs": 200,
    "critic_batch_size": 16,
    "critic_affinity_weight": 1.0,
    "reward_kind": "R1",
    "reward_alpha": -1.0,
    "reward_beta": -1.0,
    "reward_gamma": -1.0,
    "rl_epochs": 30,
    "rl_batch_size": 10,
    "rl_lr": -1.0,
    "rl_val_episodes": 4,
    "rl_normalize": False,
    "ablate_kinds": "R1,R2,R3",
    "ablate_n_eval": 30,
    "grid_lrs": "1e-2,3e-3",
    "grid_heads": "2,4",
    "grid_dims": "8,16",
    "grid_epochs": -1,
}


class ConfigError(ValueError):
    pass


def parse_value(key: str, text: str) -> object:
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key: {key}")
    default = DEFAULTS[key]
    text = text.strip()
    if isinstance(default, bool):
        lowered = text.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key} expects a boolean, got {text!r}")
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key} expects an integer, got {text!r}") from None
    if isinstance(default, float):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key} expects a number, got {text!r}") from None
    return text


def load_config(path: str | Path | None = None) -> dict[str, object]:
    """Defaults, then the file's `key = value` lines. Blank lines and
    lines starting with # are skipped."""
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        cfg[key.strip()] = parse_value(key.strip(), value)
    return cfg


def apply_overrides(cfg: dict[str, object], assignments: list[str]) -> None:
    for text in assignments:
        if "=" not in text:
            raise ConfigError(f"--set expects key=value, got {text!r}")
        key, _, value = text.partition("=")
        cfg[key.strip()] = parse_value(key.strip(), value)


def _render(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolved_text(cfg: dict[str, object]) -> str:
    return "".join(f"{key} = {_render(cfg[key])}\n" for key in sorted(cfg))


def config_hash(cfg: dict[str, object]) -> str:
    return hashlib.sha256(resolved_text(cfg).encode()).hexdigest()


def write_resolved(cfg: dict[str, object], path: str | Path) -> str:
    """Canonical config snapshot; the hash comment covers the lines below it."""
    digest = config_hash(cfg)
    Path(path).write_text(f"# sha256: {digest}\n{resolved_text(cfg)}")
    return digest


def actor_config(cfg: dict[str, object]) -> ActorConfig:
    return ActorConfig(
        dim=cfg["actor_dim"],
        n_interactions=cfg["actor_n_interactions"],
        cutoff=cfg["actor_cutoff"],
        n_gaussians=cfg["actor_n_gaussians"],
        d_max=cfg["actor_d_max"],
        n_bins=cfg["actor_n_bins"],
        max_atoms=cfg["actor_max_atoms"],
        batch_size=cfg["actor_batch_size"],
        epochs=cfg["actor_epochs"],
        lr=cfg["actor_lr"],
        patience=cfg["actor_patience"],
        lr_decay=cfg["actor_lr_decay"],
        min_lr=cfg["actor_min_lr"],
        attend_k=cfg["actor_attend_k"],
        grid_spacing=cfg["actor_grid_spacing"],
        grid_radius=cfg["actor_grid_radius"],
    )


def critic_config(cfg: dict[str, object]) -> CriticConfig:
    return CriticConfig(
        heads=cfg["critic_heads"],
        dim=cfg["critic_dim"],
        n_layers=cfg["critic_n_layers"],
        lr=cfg["critic_lr"],
        epochs=cfg["critic_epochs"],
        batch_size=cfg["critic_batch_size"],
        affinity_weight=cfg["critic_affinity_weight"],
    )


def reward_config(cfg: dict[str, object]) -> RewardConfig:
    kind = cfg["reward_kind"]
    alpha, beta, gamma = cfg["reward_alpha"], cfg["reward_beta"], cfg["reward_gamma"]
    explicit = [w for w in (alpha, beta, gamma) if w >= 0]
    if not explicit:
        return RewardConfig.defaults(kind)
    needed = (alpha, beta, gamma) if kind == "R1" else (alpha, beta)
    if any(w < 0 for w in needed):
        raise ConfigError(
            f"reward weights for {kind} must be set together (alpha, beta"
            + (", gamma)" if kind == "R1" else ")")
        )
    if kind == "R1":
        return RewardConfig(kind, alpha, beta, gamma)
    return RewardConfig(kind, alpha, beta)
