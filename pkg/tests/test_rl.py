"""Reward formulas, episode traces, and the fine-tuning loop."""

import logging
import math

import numpy as np
import pytest

import molforge.nn as nn
import molforge.rl as rl
from molforge.actor import (
    ActorConfig,
    ActorModel,
    generate,
    restore_params,
    snapshot_params,
    train_supervised,
)
from molforge.critic import CriticScores
from molforge.fileio import read_csv
from molforge.mol import Atom, Molecule3D

CFG_NRICH = ActorConfig(
    dim=8, n_interactions=2, n_gaussians=8, n_bins=40, max_atoms=10,
    epochs=5, attend_k=6, lr=2e-3,
)
CFG_CDOM = ActorConfig(
    dim=8, n_interactions=2, n_gaussians=8, n_bins=40, max_atoms=10,
    epochs=5, attend_k=6, lr=3e-3,
)


def chair_ring():
    r, h = 1.414, 0.25
    atoms = []
    for i, el in enumerate(["N", "C", "C", "N", "C", "C"]):
        theta = i * math.pi / 3
        atoms.append(Atom(el, [r * math.cos(theta), r * math.sin(theta), h * (-1) ** i]))
    return Molecule3D(atoms, [], frozenset(range(6)), "seeded")


def substituted_corpus(palette, n, seed):
    """Ring molecules with 2-4 substituents drawn from the palette."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n):
        ring = chair_ring()
        atoms = [Atom(a.element, a.position.copy()) for a in ring.atoms]
        for _ in range(rng.integers(2, 5)):
            el = palette[rng.integers(0, len(palette))]
            base = atoms[rng.integers(0, 6)].position
            direction = base / np.linalg.norm(base)
            atoms.append(Atom(el, base + 1.45 * direction + rng.normal(0, 0.1, 3)))
        corpus.append(Molecule3D(atoms, [], frozenset(range(6)), "seeded"))
    return corpus


def n_fraction_critic(mol):
    """Binding probability = nitrogen share of the grown atoms."""
    added = [a for i, a in enumerate(mol.atoms) if i not in mol.scaffold_mask]
    frac = sum(a.element == "N" for a in added) / max(1, len(added))
    return CriticScores(c_bp=frac, c_ea_raw=0.0, c_ea=0.5, c_sa=0.5)


def bp_only_critic(mol):
    # affinity and accessibility pinned so only C_BP carries signal
    added = [a for i, a in enumerate(mol.atoms) if i not in mol.scaffold_mask]
    n_n = sum(a.element == "N" for a in added)
    return CriticScores(c_bp=min(1.0, n_n / 2.0), c_ea_raw=0.0, c_ea=0.0, c_sa=1.0)


@pytest.fixture(scope="module")
def pretrained_nrich():
    corpus = substituted_corpus(("C", "N", "N", "O"), 8, seed=20)
    model, _ = train_supervised(corpus, CFG_NRICH, seed=0, epochs=15)
    return model


@pytest.fixture(scope="module")
def pretrained_cdom():
    corpus = substituted_corpus(("C", "C", "N", "O"), 8, seed=20)
    model, _ = train_supervised(corpus, CFG_CDOM, seed=0, epochs=15)
    return model


def clone_model(model, config):
    fresh = ActorModel(config, np.random.default_rng(0))
    restore_params(fresh, snapshot_params(model))
    return fresh


def mean_generated_cbp(model, critic_fn, scaffold, config, seed, n=25):
    rng = np.random.default_rng(seed)
    return float(
        np.mean([critic_fn(generate(scaffold, model, rng, config.max_atoms)).c_bp for _ in range(n)])
    )


# -- reward formulas -----------------------------------------------------------


def test_reward_r1_upper_fixture():
    scores = CriticScores(c_bp=1.0, c_ea_raw=0.0, c_ea=1.0, c_sa=0.0)
    assert rl.reward(scores, rl.RewardConfig.defaults("R1")).total == 1.75


def test_reward_r1_lower_fixture():
    scores = CriticScores(c_bp=0.0, c_ea_raw=0.0, c_ea=0.0, c_sa=1.0)
    assert rl.reward(scores, rl.RewardConfig.defaults("R1")).total == 0.75


def test_reward_r2_mixed_fixture():
    scores = CriticScores(c_bp=0.8, c_ea_raw=0.0, c_ea=0.0, c_sa=0.4)
    assert abs(rl.reward(scores, rl.RewardConfig.defaults("R2")).total - 1.5) < 1e-9


def test_reward_r3_ignores_binding_probability():
    cfg = rl.RewardConfig.defaults("R3")
    assert (cfg.alpha, cfg.beta) == (0.75, 0.25)
    low = rl.reward(CriticScores(0.0, 0.0, 0.6, 0.3), cfg)
    high = rl.reward(CriticScores(1.0, 0.0, 0.6, 0.3), cfg)
    assert low.total == high.total
    assert low.bp_term == 0.0


def test_reward_config_validation():
    with pytest.raises(ValueError, match="kind"):
        rl.RewardConfig("R9", 0.5, 0.5)
    with pytest.raises(ValueError, match="alpha"):
        rl.RewardConfig("R1", 1.5, 0.25, 0.25)
    with pytest.raises(ValueError, match="gamma"):
        rl.RewardConfig("R1", 0.5, 0.25, -0.1)


def test_reward_terms_sum_to_total():
    rng = np.random.default_rng(3)
    for kind in rl.REWARD_KINDS:
        cfg = rl.RewardConfig.defaults(kind)
        for _ in range(50):
            bp, ea, sa = rng.uniform(0, 1, 3)
            rb = rl.reward(CriticScores(bp, 0.0, ea, sa), cfg)
            assert rb.total == rb.bp_term + rb.ea_term + rb.sa_term
            if kind == "R1":
                formula = 0.5 * bp + 0.25 * ea + (1 - 0.25 * sa)
            elif kind == "R2":
                formula = 0.75 * bp + (1 - 0.25 * sa)
            else:
                formula = 0.75 * ea + (1 - 0.25 * sa)
            assert abs(rb.total - formula) < 1e-12


def test_reward_bounds_under_default_weights():
    rng = np.random.default_rng(9)
    for kind in ("R1", "R2"):
        cfg = rl.RewardConfig.defaults(kind)
        for _ in range(200):
            bp, ea, sa = rng.uniform(0, 1, 3)
            total = rl.reward(CriticScores(bp, 0.0, ea, sa), cfg).total
            assert 0.75 - 1e-12 <= total <= 1.75 + 1e-12


def test_reward_monotone_in_each_score():
    base = CriticScores(0.4, 0.0, 0.4, 0.4)
    for kind in rl.REWARD_KINDS:
        cfg = rl.RewardConfig.defaults(kind)
        ref = rl.reward(base, cfg).total
        up_bp = rl.reward(CriticScores(0.9, 0.0, 0.4, 0.4), cfg).total
        up_ea = rl.reward(CriticScores(0.4, 0.0, 0.9, 0.4), cfg).total
        up_sa = rl.reward(CriticScores(0.4, 0.0, 0.4, 0.9), cfg).total
        assert up_bp >= ref and up_ea >= ref  # non-decreasing in quality scores
        assert up_sa <= ref                   # harder synthesis never helps


# -- policy objective ----------------------------------------------------------


def hand_record(step, type_loss, dist_loss, total):
    rb = rl.RewardBreakdown(total, total, 0.0, 0.0, step, "R1")
    return rl.StepRecord(step, "s", "d", "C", type_loss, dist_loss, rb)


def hand_trace(records):
    mol = chair_ring()
    scores = CriticScores(0.5, 0.0, 0.5, 0.5)
    return rl.EpisodeTrace(records, mol, scores)


def test_objective_without_rewards_is_summed_nll():
    trace = hand_trace([hand_record(0, 1.2, 3.4, 0.0), hand_record(1, 0.5, 2.0, 0.0)])
    assert abs(rl.policy_objective(trace) - (1.2 + 3.4 + 0.5 + 2.0)) < 1e-12


def test_objective_drops_when_rewards_rise_uniformly():
    low = hand_trace([hand_record(0, 1.2, 3.4, 1.0), hand_record(1, 0.5, 2.0, 1.0)])
    high = hand_trace([hand_record(0, 1.2, 3.4, 1.5), hand_record(1, 0.5, 2.0, 1.5)])
    assert rl.policy_objective(high) < rl.policy_objective(low)
    assert abs(rl.policy_objective(low) - rl.policy_objective(high) - 1.0) < 1e-12


def test_objective_two_step_hand_sum():
    trace = hand_trace([hand_record(0, 0.7, 2.3, 1.25), hand_record(1, 0.4, 1.9, 0.9)])
    assert abs(rl.policy_objective(trace) - 3.15) < 1e-12


def test_objective_empty_trace_rejected():
    with pytest.raises(ValueError, match="empty"):
        rl.policy_objective(hand_trace([]))


def test_objective_decomposes_exactly(pretrained_nrich):
    trace = rl.rollout(
        pretrained_nrich, n_fraction_critic, chair_ring(), CFG_NRICH,
        rl.RewardConfig.defaults("R1"), np.random.default_rng(8),
    )
    assert trace.records
    nll = sum(r.type_loss + r.dist_loss for r in trace.records)
    rewards = sum(r.reward.total for r in trace.records)
    assert rl.policy_objective(trace) == nll - rewards


# -- rollout -------------------------------------------------------------------


def test_rollout_records_one_per_placed_atom(pretrained_nrich):
    scaffold = chair_ring()
    trace = rl.rollout(
        pretrained_nrich, n_fraction_critic, scaffold, CFG_NRICH,
        rl.RewardConfig.defaults("R1"), np.random.default_rng(8),
    )
    assert len(trace.records) == len(trace.final_mol) - 6
    assert [r.step for r in trace.records] == list(range(len(trace.records)))
    assert np.allclose(trace.final_mol.positions()[:6], scaffold.positions(), atol=1e-12)


def test_rollout_bit_identical_for_fixed_seed(pretrained_nrich):
    args = (pretrained_nrich, n_fraction_critic, chair_ring(), CFG_NRICH,
            rl.RewardConfig.defaults("R1"))
    a = rl.rollout(*args, np.random.default_rng(8))
    b = rl.rollout(*args, np.random.default_rng(8))
    assert a.records == b.records
    assert a.digest() == b.digest()
    c = rl.rollout(*args, np.random.default_rng(9))
    assert c.digest() != a.digest()


def test_rollout_critic_failure_drops_episode(pretrained_nrich, caplog):
    def broken(mol):
        raise RuntimeError("no scores today")

    with caplog.at_level(logging.WARNING, logger="molforge.rl"):
        trace = rl.rollout(
            pretrained_nrich, broken, chair_ring(), CFG_NRICH,
            rl.RewardConfig.defaults("R1"), np.random.default_rng(8),
        )
    assert trace is None
    assert any("episode dropped" in r.message for r in caplog.records)


def test_rollout_rewards_respect_kind_bounds(pretrained_nrich):
    cfg = rl.RewardConfig.defaults("R2")
    lo, hi = cfg.bounds()
    trace = rl.rollout(
        pretrained_nrich, n_fraction_critic, chair_ring(), CFG_NRICH, cfg,
        np.random.default_rng(8),
    )
    for record in trace.records:
        assert lo - 1e-12 <= record.reward.total <= hi + 1e-12


# -- fine-tuning ---------------------------------------------------------------


def test_finetune_zero_lr_is_noop(pretrained_nrich):
    model = clone_model(pretrained_nrich, CFG_NRICH)
    before = snapshot_params(model)
    tuned, curves_a = rl.rl_finetune(
        model, n_fraction_critic, chair_ring(), CFG_NRICH,
        epochs=3, seed=7, lr=0.0,
    )
    assert all(np.array_equal(p.data, before[name]) for name, p in tuned.named_parameters())
    again = clone_model(pretrained_nrich, CFG_NRICH)
    _, curves_b = rl.rl_finetune(
        again, n_fraction_critic, chair_ring(), CFG_NRICH,
        epochs=3, seed=7, lr=0.0,
    )
    assert [repr(c) for c in curves_a] == [repr(c) for c in curves_b]


def test_finetune_single_epoch_keeps_generating_snapshot(pretrained_nrich):
    """Epoch statistics describe the weights that rolled the episodes out,
    so a one-epoch run hands back the starting parameters."""
    model = clone_model(pretrained_nrich, CFG_NRICH)
    before = snapshot_params(model)
    tuned, curves = rl.rl_finetune(
        model, n_fraction_critic, chair_ring(), CFG_NRICH, epochs=1, seed=7,
    )
    assert all(np.array_equal(p.data, before[name]) for name, p in tuned.named_parameters())
    assert len(curves) == 1


def test_finetune_best_mean_at_least_first_epoch(pretrained_nrich):
    model = clone_model(pretrained_nrich, CFG_NRICH)
    _, curves = rl.rl_finetune(
        model, n_fraction_critic, chair_ring(), CFG_NRICH,
        epochs=6, seed=3, batch_size=4,
    )
    means = [c.mean_c_bp for c in curves]
    assert np.nanmax(means) >= means[0]


def test_finetune_lifts_mean_binding_probability(pretrained_nrich):
    scaffold = chair_ring()
    pre = mean_generated_cbp(pretrained_nrich, n_fraction_critic, scaffold, CFG_NRICH, seed=11)
    model = clone_model(pretrained_nrich, CFG_NRICH)
    tuned, _ = rl.rl_finetune(
        model, n_fraction_critic, scaffold, CFG_NRICH,
        epochs=30, seed=4, batch_size=10,
    )
    post = mean_generated_cbp(tuned, n_fraction_critic, scaffold, CFG_NRICH, seed=11)
    assert post - pre >= 0.15


def test_finetune_survives_critic_failures(pretrained_nrich, caplog):
    def flaky(mol):
        if len(mol) > 8:
            raise RuntimeError("pocket graph exploded")
        return n_fraction_critic(mol)

    model = clone_model(pretrained_nrich, CFG_NRICH)
    with caplog.at_level(logging.WARNING, logger="molforge.rl"):
        _, curves = rl.rl_finetune(
            model, flaky, chair_ring(), CFG_NRICH, epochs=4, seed=2, batch_size=4,
        )
    assert len(curves) == 4
    assert any("episode dropped" in r.message for r in caplog.records)


def test_finetune_writes_checkpoint(pretrained_nrich, tmp_path):
    path = tmp_path / "rl_model.npz"
    model = clone_model(pretrained_nrich, CFG_NRICH)
    rl.rl_finetune(
        model, n_fraction_critic, chair_ring(), CFG_NRICH,
        epochs=2, seed=7, checkpoint_path=path, config_hash="abc123",
    )
    assert path.exists()
    fresh = ActorModel(CFG_NRICH, np.random.default_rng(1))
    assert nn.load_checkpoint(path, fresh) == "abc123"


def test_finetune_curves_report_raw_reward_scale(pretrained_cdom):
    """Normalization changes update weights only; curves keep raw totals."""
    model = clone_model(pretrained_cdom, CFG_CDOM)
    cfg = rl.RewardConfig.defaults("R1")
    lo, hi = cfg.bounds()
    _, curves = rl.rl_finetune(
        model, bp_only_critic, chair_ring(), CFG_CDOM, cfg,
        epochs=2, seed=7, batch_size=4, normalize_rewards=True,
    )
    reported = [c.mean_reward for c in curves if not math.isnan(c.mean_reward)]
    assert reported
    assert all(lo - 1e-12 <= m <= hi + 1e-12 for m in reported)


# -- ablation ------------------------------------------------------------------


def test_ablation_bp_blind_kind_trails(pretrained_cdom):
    """R3 never sees C_BP, so the shared-seed run leaves it at the prior."""
    model = clone_model(pretrained_cdom, CFG_CDOM)
    report = rl.ablation_run(
        model, bp_only_critic, chair_ring(), CFG_CDOM,
        kinds=("R1", "R3"), epochs=12, n_eval=12, seed=1, batch_size=24,
        normalize_rewards=True,
    )
    assert report.mean_c_bp["R1"] - report.mean_c_bp["R3"] >= 0.05
    assert not report.errors


def test_ablation_identical_kind_identical_report(pretrained_nrich):
    model = clone_model(pretrained_nrich, CFG_NRICH)
    report = rl.ablation_run(
        model, n_fraction_critic, chair_ring(), CFG_NRICH,
        kinds=("R2", "R2"), epochs=2, n_eval=4, seed=5, batch_size=2,
    )
    half = len(report.summary) // 2
    for first, second in zip(report.summary[:half], report.summary[half:]):
        assert first.metric == second.metric
        assert repr(first.value) == repr(second.value)  # NaN-tolerant equality
    dist_half = len(report.distributions) // 2
    assert [repr(r.value) for r in report.distributions[:dist_half]] == [
        repr(r.value) for r in report.distributions[dist_half:]
    ]


def test_ablation_report_schema(pretrained_nrich):
    model = clone_model(pretrained_nrich, CFG_NRICH)
    report = rl.ablation_run(
        model, n_fraction_critic, chair_ring(), CFG_NRICH,
        kinds=("R1", "R2", "R3"), epochs=1, n_eval=3, seed=5, batch_size=2,
    )
    assert len(report.summary) == 3 * len(rl.ABLATION_METRICS)
    for kind in ("R1", "R2", "R3"):
        rows = [r for r in report.summary if r.kind == kind]
        assert tuple(r.metric for r in rows) == rl.ABLATION_METRICS
    assert set(r.metric for r in report.distributions) <= set(rl.DISTRIBUTION_METRICS)


def test_ablation_bad_kind_isolated(pretrained_nrich):
    model = clone_model(pretrained_nrich, CFG_NRICH)
    report = rl.ablation_run(
        model, n_fraction_critic, chair_ring(), CFG_NRICH,
        kinds=("R1", "R9"), epochs=1, n_eval=3, seed=5, batch_size=2,
    )
    assert "R9" in report.errors
    assert len(report.summary) == 2 * len(rl.ABLATION_METRICS)
    r9_rows = [r for r in report.summary if r.kind == "R9"]
    assert all(math.isnan(r.value) for r in r9_rows)
    assert math.isfinite(report.mean_c_bp["R1"])


# -- report files --------------------------------------------------------------


def test_write_curves_csv_roundtrip(pretrained_nrich, tmp_path):
    model = clone_model(pretrained_nrich, CFG_NRICH)
    _, curves = rl.rl_finetune(
        model, n_fraction_critic, chair_ring(), CFG_NRICH, epochs=3, seed=7, lr=0.0,
    )
    path = tmp_path / "curves.csv"
    rl.write_curves(path, curves)
    header, rows = read_csv(path)
    assert header == ["epoch", "train_nll", "val_nll", "mean_reward", "mean_C_BP"]
    assert len(rows) == 3
    assert [r[0] for r in rows] == ["1", "2", "3"]


def test_write_ablation_report_files(pretrained_nrich, tmp_path):
    model = clone_model(pretrained_nrich, CFG_NRICH)
    report = rl.ablation_run(
        model, n_fraction_critic, chair_ring(), CFG_NRICH,
        kinds=("R1",), epochs=1, n_eval=3, seed=5, batch_size=2,
    )
    summary_path = tmp_path / "ablation_summary.csv"
    dist_path = tmp_path / "ablation_distributions.csv"
    rl.write_ablation_report(summary_path, dist_path, report)
    header, rows = read_csv(summary_path)
    assert header == ["kind", "metric", "value"]
    assert len(rows) == len(rl.ABLATION_METRICS)
    header, _ = read_csv(dist_path)
    assert header == ["kind", "metric", "value"]
