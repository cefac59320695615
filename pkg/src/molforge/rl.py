"""Reward shaping and actor fine-tuning against critic feedback.

After every atom the actor places, the critic scores the grown partial
structure and the score is folded into a scalar reward. Fine-tuning
re-weights the likelihood of each realized step by that step's reward,
so the policy drifts toward placements the critic favors. Rewards enter
the update as constants; no gradient ever flows through the critic.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import nn
from .actor import (
    ActorConfig,
    ActorModel,
    PartialState,
    PlacementDistributions,
    build_episode_batch,
    episode_nll,
    generate,
    nll_step,
    place_atom,
    predict,
    restore_params,
    snapshot_params,
)
from .critic import CriticScores
from .descriptors import compute_descriptors, esol, qed, sa_score
from .elements import ATOMIC_MASS, ELEMENTS, STOP_INDEX, TYPE_VOCAB
from .fileio import write_csv
from .mol import Atom, Molecule3D, MoleculeError
from .perception import perceive_molecule

log = logging.getLogger(__name__)

REWARD_KINDS = ("R1", "R2", "R3")

CriticFn = Callable[[Molecule3D], CriticScores]


@dataclass(frozen=True)
class RewardConfig:
    """Weights for one reward formula; R2 and R3 ignore gamma."""

    kind: str
    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in REWARD_KINDS:
            raise ValueError(f"unknown reward kind {self.kind!r}")
        for name in ("alpha", "beta", "gamma"):
            w = getattr(self, name)
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"{name}={w} outside [0, 1]")

    @classmethod
    def defaults(cls, kind: str) -> "RewardConfig":
        if kind == "R1":
            return cls("R1", 0.5, 0.25, 0.25)
        if kind in ("R2", "R3"):
            return cls(kind, 0.75, 0.25)
        raise ValueError(f"unknown reward kind {kind!r}")

    def bounds(self) -> tuple[float, float]:
        """Reachable [lo, hi] of the total for scores in [0, 1]."""
        if self.kind == "R1":
            return 1.0 - self.gamma, 1.0 + self.alpha + self.beta
        return 1.0 - self.beta, 1.0 + self.alpha


@dataclass(frozen=True)
class RewardBreakdown:
    total: float
    bp_term: float
    ea_term: float
    sa_term: float
    step: int
    kind: str


def reward(scores: CriticScores, cfg: RewardConfig, step: int = 0) -> RewardBreakdown:
    """Combine critic scores into one scalar plus its additive terms.

    The synthetic-accessibility term rewards low scores, hence the
    1 - weight*C_SA form; binding probability and affinity reward high
    scores directly. Which terms participate depends on the kind.
    """
    if cfg.kind == "R1":
        bp = cfg.alpha * scores.c_bp
        ea = cfg.beta * scores.c_ea
        sa = 1.0 - cfg.gamma * scores.c_sa
    elif cfg.kind == "R2":
        bp = cfg.alpha * scores.c_bp
        ea = 0.0
        sa = 1.0 - cfg.beta * scores.c_sa
    else:  # R3 swaps affinity in for binding probability
        bp = 0.0
        ea = cfg.alpha * scores.c_ea
        sa = 1.0 - cfg.beta * scores.c_sa
    total = bp + ea + sa
    lo, hi = cfg.bounds()
    if not lo - 1e-12 <= total <= hi + 1e-12:
        raise ValueError(f"reward {total} escaped [{lo}, {hi}] at step {step}")
    return RewardBreakdown(
        total=total, bp_term=bp, ea_term=ea, sa_term=sa, step=step, kind=cfg.kind
    )


def state_digest(state: PartialState) -> str:
    h = hashlib.sha256()
    h.update("".join(a.element for a in state.mol.atoms).encode())
    h.update(np.ascontiguousarray(state.mol.positions()).tobytes())
    return h.hexdigest()[:16]


def distributions_digest(dists: PlacementDistributions) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(dists.type_dist).tobytes())
    h.update(np.ascontiguousarray(dists.distance_dists).tobytes())
    h.update(np.ascontiguousarray(dists.atom_indices).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class StepRecord:
    """One placed atom: what the policy saw, chose, and was paid."""

    step: int
    state_digest: str
    dists_digest: str
    element: str
    type_loss: float
    dist_loss: float
    reward: RewardBreakdown


@dataclass
class EpisodeTrace:
    """Full account of one rollout; stop decisions leave no record."""

    records: list[StepRecord]
    final_mol: Molecule3D
    final_scores: CriticScores

    def digest(self) -> str:
        h = hashlib.sha256()
        for r in self.records:
            h.update(repr(r).encode())
        h.update("".join(a.element for a in self.final_mol.atoms).encode())
        h.update(np.ascontiguousarray(self.final_mol.positions()).tobytes())
        h.update(repr(self.final_scores).encode())
        return h.hexdigest()


def policy_objective(trace: EpisodeTrace) -> float:
    """Summed per-step likelihood cost minus summed reward, over placed atoms."""
    if not trace.records:
        raise ValueError("empty trace")
    nll = sum(r.type_loss + r.dist_loss for r in trace.records)
    rewards = sum(r.reward.total for r in trace.records)
    return float(nll - rewards)


def rollout(
    model: ActorModel,
    critic_fn: CriticFn,
    scaffold: Molecule3D,
    config: ActorConfig,
    reward_cfg: RewardConfig,
    rng: np.random.Generator,
) -> EpisodeTrace | None:
    """Generate one molecule, scoring every intermediate partial state.

    Returns None when the critic raises; the episode is dropped and the
    failure logged, leaving the caller's batch one episode short.
    """
    if not scaffold.has_coordinates():
        raise MoleculeError("scaffold requires 3D coordinates")
    seed_mol = Molecule3D(
        [Atom(a.element, a.position.copy(), a.charge, a.aromatic) for a in scaffold.atoms],
        [],
        frozenset(range(len(scaffold.atoms))),
        "generated",
    )
    state = PartialState(seed_mol, len(seed_mol.atoms))
    records: list[StepRecord] = []
    while len(state.mol) < config.max_atoms:
        dists = predict(model, state)
        p = dists.type_dist / dists.type_dist.sum()
        type_idx = int(rng.choice(len(TYPE_VOCAB), p=p))
        if type_idx == STOP_INDEX:
            break
        element = ELEMENTS[type_idx]
        prev = state
        state = place_atom(
            state,
            dists,
            element,
            rng,
            spacing=config.grid_spacing,
            radius=config.grid_radius,
            d_max=config.d_max,
        )
        new_pos = state.mol.atoms[-1].position
        true_d = np.linalg.norm(prev.mol.positions()[dists.atom_indices] - new_pos, axis=1)
        type_loss, dist_loss = nll_step(dists, element, true_d, config.d_max, config.bin_width)
        try:
            scores = critic_fn(state.mol)
        except Exception as exc:  # noqa: BLE001 -- any critic fault voids the episode
            log.warning("critic failed at step %d, episode dropped: %s", prev.t, exc)
            return None
        rb = reward(scores, reward_cfg, step=prev.t)
        records.append(
            StepRecord(
                step=prev.t,
                state_digest=state_digest(prev),
                dists_digest=distributions_digest(dists),
                element=element,
                type_loss=type_loss,
                dist_loss=dist_loss,
                reward=rb,
            )
        )
    try:
        final_scores = critic_fn(state.mol)
    except Exception as exc:  # noqa: BLE001
        log.warning("critic failed on final molecule, episode dropped: %s", exc)
        return None
    return EpisodeTrace(records=records, final_mol=state.mol, final_scores=final_scores)


def trace_batch(trace: EpisodeTrace, scaffold_size: int, config: ActorConfig):
    """Prefix-copy batch over the realized placement order of a rollout."""
    mol = trace.final_mol
    species = np.array([ELEMENTS.index(a.element) for a in mol.atoms], dtype=np.int64)
    masses = np.array([ATOMIC_MASS[a.element] for a in mol.atoms])
    return build_episode_batch(
        mol.positions(), species, masses, scaffold_size, config, include_stop=False
    )


@dataclass(frozen=True)
class RlCurve:
    epoch: int
    train_nll: float
    val_nll: float
    mean_reward: float
    mean_c_bp: float


def rl_finetune(
    model: ActorModel,
    critic_fn: CriticFn,
    scaffold: Molecule3D,
    config: ActorConfig,
    reward_cfg: RewardConfig | None = None,
    *,
    epochs: int | None = None,
    seed: int = 0,
    batch_size: int = 2,
    n_val_episodes: int = 4,
    lr: float | None = None,
    normalize_rewards: bool = False,
    checkpoint_path=None,
    config_hash: str = "",
) -> tuple[ActorModel, list[RlCurve]]:
    """Tune a pretrained actor by reward-weighted likelihood ascent.

    Each epoch rolls out `batch_size` episodes, weights every realized
    step's NLL by that step's reward total, and takes one optimizer
    step. Validation NLL is measured on a fixed set of episodes drawn
    from the incoming policy, so it moves only when the weights do. The
    returned model is the per-epoch snapshot whose rollouts had the
    highest mean final binding probability.

    lr overrides config.lr; zero freezes the policy so the loop only
    measures. With normalize_rewards the step weights are rescaled by
    the reward kind's own reachable bounds, (total - lo) / (hi - lo),
    which strips the constant floor every step earns regardless of the
    scores; raw totals are the default and what the curves report.
    """
    if reward_cfg is None:
        reward_cfg = RewardConfig.defaults("R1")
    if lr is None:
        lr = config.lr
    if lr < 0:
        raise ValueError("learning rate must be non-negative")
    scaffold_size = len(scaffold.atoms)
    rng = np.random.default_rng(seed)
    val_rng = np.random.default_rng([seed, 9151])

    val_batches = []
    for _ in range(n_val_episodes):
        trace = rollout(model, critic_fn, scaffold, config, reward_cfg, val_rng)
        if trace is not None and trace.records:
            val_batches.append(trace_batch(trace, scaffold_size, config))

    def val_nll() -> float:
        if not val_batches:
            return float("nan")
        return float(np.mean([episode_nll(model, b).item() for b in val_batches]))

    opt = nn.Adam(model.parameters(), lr=lr)
    curves: list[RlCurve] = []
    best_mean = -np.inf
    best = snapshot_params(model)

    for epoch in range(1, (epochs or config.epochs) + 1):
        # snapshot first: this epoch's statistics describe these weights
        pre = snapshot_params(model)
        traces = []
        for _ in range(batch_size):
            trace = rollout(model, critic_fn, scaffold, config, reward_cfg, rng)
            if trace is not None:
                traces.append(trace)
        stepped = [t for t in traces if t.records]

        if traces:
            mean_c_bp = float(np.mean([t.final_scores.c_bp for t in traces]))
        else:
            mean_c_bp = float("nan")
        if stepped:
            train_nll = float(
                np.mean([sum(r.type_loss + r.dist_loss for r in t.records) for t in stepped])
            )
            mean_reward = float(
                np.mean([r.reward.total for t in stepped for r in t.records])
            )
        else:
            train_nll = float("nan")
            mean_reward = float("nan")

        if mean_c_bp > best_mean:
            best_mean = mean_c_bp
            best = pre

        if stepped:
            lo, hi = reward_cfg.bounds()
            opt.zero_grad()
            with nn.Tape():
                loss = None
                for t in stepped:
                    weights = np.array([r.reward.total for r in t.records])
                    if normalize_rewards:
                        weights = (weights - lo) / max(hi - lo, 1e-12)
                    part = episode_nll(model, trace_batch(t, scaffold_size, config), weights)
                    loss = part if loss is None else loss + part
                nn.backward(loss)
            opt.step()

        curves.append(RlCurve(epoch, train_nll, val_nll(), mean_reward, mean_c_bp))

    restore_params(model, best)
    if checkpoint_path is not None:
        nn.save_checkpoint(checkpoint_path, model, opt, config_hash=config_hash)
    return model, curves


def curves_as_csv(curves: list[RlCurve]) -> tuple[list[str], list[list]]:
    header = ["epoch", "train_nll", "val_nll", "mean_reward", "mean_C_BP"]
    rows = [[c.epoch, c.train_nll, c.val_nll, c.mean_reward, c.mean_c_bp] for c in curves]
    return header, rows


def write_curves(path, curves: list[RlCurve]) -> None:
    header, rows = curves_as_csv(curves)
    write_csv(path, header, rows)


DISTRIBUTION_METRICS = ("qed", "esol", "sa", "logp")
ABLATION_METRICS = DISTRIBUTION_METRICS + ("mean_c_bp",)


@dataclass(frozen=True)
class AblationRow:
    kind: str
    metric: str
    value: float


@dataclass
class AblationReport:
    """Per-reward-kind comparison: summary means plus raw distributions."""

    kinds: tuple[str, ...]
    summary: list[AblationRow]
    distributions: list[AblationRow]
    mean_c_bp: dict[str, float]
    errors: dict[str, str]


def _descriptor_values(mol: Molecule3D) -> dict[str, float]:
    perceived = perceive_molecule(mol).molecule
    d = compute_descriptors(perceived)
    return {
        "qed": qed(d),
        "esol": esol(d),
        "sa": sa_score(perceived).total,
        "logp": d.clogP,
    }


def ablation_run(
    model: ActorModel,
    critic_fn: CriticFn,
    scaffold: Molecule3D,
    config: ActorConfig,
    *,
    kinds: tuple[str, ...] = REWARD_KINDS,
    seed: int = 0,
    epochs: int | None = None,
    n_eval: int = 30,
    batch_size: int = 2,
    normalize_rewards: bool = False,
) -> AblationReport:
    """Fine-tune one copy of the model per reward kind and compare outputs.

    Every kind starts from identical weights and identical seeds, so any
    difference in the generated sets is attributable to the reward
    formula alone. A kind that fails is recorded and skipped; its
    summary rows carry NaN so the report shape stays kinds x metrics.
    """
    snap = snapshot_params(model)
    summary: list[AblationRow] = []
    distributions: list[AblationRow] = []
    mean_c_bp: dict[str, float] = {}
    errors: dict[str, str] = {}

    for kind in kinds:
        try:
            clone = ActorModel(config, np.random.default_rng(0))
            restore_params(clone, snap)
            tuned, _ = rl_finetune(
                clone,
                critic_fn,
                scaffold,
                config,
                RewardConfig.defaults(kind),
                epochs=epochs,
                seed=seed,
                batch_size=batch_size,
                normalize_rewards=normalize_rewards,
            )
            gen_rng = np.random.default_rng([seed, 7001])
            values: dict[str, list[float]] = {m: [] for m in DISTRIBUTION_METRICS}
            c_bps: list[float] = []
            for _ in range(n_eval):
                mol = generate(scaffold, tuned, gen_rng, config.max_atoms)
                c_bps.append(critic_fn(mol).c_bp)
                try:
                    per_mol = _descriptor_values(mol)
                except Exception as exc:  # noqa: BLE001 -- skip unparseable geometry
                    log.warning("descriptors skipped for one %s molecule: %s", kind, exc)
                    continue
                for metric, value in per_mol.items():
                    values[metric].append(value)
                    distributions.append(AblationRow(kind, metric, value))
            mean_c_bp[kind] = float(np.mean(c_bps)) if c_bps else float("nan")
            for metric in ABLATION_METRICS:
                if metric == "mean_c_bp":
                    summary.append(AblationRow(kind, metric, mean_c_bp[kind]))
                else:
                    vals = values[metric]
                    mean = float(np.mean(vals)) if vals else float("nan")
                    summary.append(AblationRow(kind, metric, mean))
        except Exception as exc:  # noqa: BLE001 -- one kind must not sink the others
            log.warning("ablation for %s failed: %s", kind, exc)
            errors[kind] = str(exc)
            mean_c_bp[kind] = float("nan")
            for metric in ABLATION_METRICS:
                summary.append(AblationRow(kind, metric, float("nan")))

    return AblationReport(tuple(kinds), summary, distributions, mean_c_bp, errors)


def write_ablation_report(summary_path, distributions_path, report: AblationReport) -> None:
    write_csv(
        summary_path,
        ["kind", "metric", "value"],
        [[r.kind, r.metric, r.value] for r in report.summary],
    )
    write_csv(
        distributions_path,
        ["kind", "metric", "value"],
        [[r.kind, r.metric, r.value] for r in report.distributions],
    )
