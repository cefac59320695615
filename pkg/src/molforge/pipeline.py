"""Dataset synthesis, run-directory orchestration, and evaluation reports.

A run directory has a fixed layout:

    config.resolved      canonical config snapshot with its sha256
    data/corpus/         training molecules (XYZ, scaffold atoms first)
    data/pairs/          labeled pocket/ligand pairs for the critic
    checkpoints/         actor.npz, actor_rl.npz, critic.npz, affinity_scaler.csv
    generated/           sampled molecules (XYZ) plus generated.smi
    reports/             every tabular artifact, RFC-4180 CSV

Stage functions (`run_*`) each take the resolved config mapping and the
run directory; they are the bodies of the CLI subcommands. Stages load
their inputs from the run directory when an earlier stage left them there
and otherwise synthesize them in memory from the configured seed, so any
stage can run standalone.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import nn
from .actor import ActorModel, generate, train_supervised
from .critic import (
    CriticModel,
    AffinityScaler,
    LabeledPair,
    PocketGraph,
    N_RESIDUE_CLASSES,
    grid_rows_as_csv,
    hyperparameter_grid,
    load_pairs,
    save_pairs,
    score,
    train_classifier,
)
from .descriptors import (
    SetMetrics,
    compute_descriptors,
    is_valid_molecule,
    lipinski_from_vector,
    sa_score,
    set_metrics,
    qed,
    esol,
)
from .elements import DEFAULT_VALENCE, ELEMENTS
from .fileio import read_csv, read_xyz, write_csv, write_smiles_file, write_xyz
from .mol import Atom, Molecule3D, MoleculeError
from .perception import perceive_molecule
from .rl import ablation_run, rl_finetune, write_ablation_report, write_curves
from .smiles import parse_smiles, write_smiles

log = logging.getLogger(__name__)

RING_SIZE = 6
RING_BOND = 1.5
RING_PUCKER = 0.25

# Single-bond lengths to a ring carbon, in angstroms.
SUBSTITUENT_BOND = {"C": 1.53, "N": 1.47, "O": 1.43, "F": 1.35, "S": 1.81, "Cl": 1.79}

CORPUS_PALETTE = ("C", "N", "O")
INACTIVE_PALETTE = ("C", "O", "F")

# Substituents go on fixed ring sites at staggered distances from the ring
# centroid. Distinct radii make the distance-sorted teacher order identical
# to the construction order for every molecule, so the supervised targets
# are unimodal; equal radii would let coordinate noise shuffle the order.
SITE_ORDER = (0, 3, 1, 5, 2, 4)
SHELL_RADII = (2.0, 2.25, 2.5, 2.75)
CORPUS_NOISE = 0.03


def ring_template(smiles: str) -> Molecule3D:
    """Chair-pucker 3D embedding of a six-membered ring scaffold.

    Only monocyclic six-rings are bundled; the ring is walked from its
    bond graph so the atom order follows the cycle.
    """
    flat = parse_smiles(smiles, add_hydrogens=False)
    n = len(flat.atoms)
    if n != RING_SIZE or len(flat.bonds) != RING_SIZE:
        raise MoleculeError(f"scaffold template needs a single six-ring, got {smiles!r}")
    neighbors = {i: [] for i in range(n)}
    for bond in flat.bonds:
        neighbors[bond.a].append(bond.b)
        neighbors[bond.b].append(bond.a)
    if any(len(v) != 2 for v in neighbors.values()):
        raise MoleculeError(f"scaffold template must be one plain cycle, got {smiles!r}")
    for atom in flat.atoms:
        if atom.element not in SUBSTITUENT_BOND:
            raise MoleculeError(f"scaffold element {atom.element} outside the vocabulary")

    walk = [0, neighbors[0][0]]
    while len(walk) < n:
        prev, here = walk[-2], walk[-1]
        walk.append(neighbors[here][0] if neighbors[here][0] != prev else neighbors[here][1])

    radius = math.sqrt(RING_BOND**2 - 4 * RING_PUCKER**2)
    atoms = []
    for slot, idx in enumerate(walk):
        theta = slot * math.pi / 3
        atoms.append(
            Atom(
                flat.atoms[idx].element,
                [radius * math.cos(theta), radius * math.sin(theta), RING_PUCKER * (-1) ** slot],
            )
        )
    return Molecule3D(atoms, [], frozenset(range(n)), "seeded")


def _shell_position(base: np.ndarray, bond: float, radius: float) -> np.ndarray:
    """Point at `bond` from the ring atom and `radius` from the origin.

    The bond direction is tilted out of the radial line (toward the axial
    side the ring atom puckers to) until the centroid distance comes out
    right; law of cosines in the plane spanned by the radial and axial
    directions.
    """
    r0 = float(np.linalg.norm(base))
    u = base / r0
    w = np.array([0.0, 0.0, 1.0]) - u[2] * u
    w /= np.linalg.norm(w)
    sign = 1.0 if base[2] > 0 else -1.0
    cos_t = float(np.clip((radius**2 - r0**2 - bond**2) / (2.0 * r0 * bond), -1.0, 1.0))
    sin_t = math.sqrt(1.0 - cos_t**2)
    return base + bond * (cos_t * u + sign * sin_t * w)


def _tangential_noise(pos: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # jitter perpendicular to the centroid ray; the radial component would
    # perturb the placement-order radii
    noise = rng.normal(0.0, CORPUS_NOISE, 3)
    ray = pos / np.linalg.norm(pos)
    return noise - (noise @ ray) * ray


def decorate_ring(
    ring: Molecule3D,
    palette: tuple[str, ...],
    rng: np.random.Generator,
    force: str | None = None,
    chains: bool = True,
) -> Molecule3D:
    """One ring plus 3-4 substituents, each optionally extended one atom.

    Substituents occupy ring sites with spare valence in SITE_ORDER at the
    staggered SHELL_RADII; chain atoms stack outward from the first few
    substituents. Fixed sites keep every valence inside its element's limit,
    which is what makes the corpus valid by construction. `force` pins the
    first substituent's element (used by the pair labeling rule).
    """
    atoms = [Atom(a.element, a.position.copy()) for a in ring.atoms]
    sites = [i for i in SITE_ORDER if DEFAULT_VALENCE[atoms[i].element] > 2]
    k = int(rng.integers(3, 5))
    n_chain = int(rng.integers(2, k + 1)) if chains else 0
    tips = []
    for j in range(k):
        element = force if j == 0 and force else palette[rng.integers(0, len(palette))]
        base = atoms[sites[j]].position
        pos = _shell_position(base, SUBSTITUENT_BOND[element], SHELL_RADII[j])
        pos = pos + _tangential_noise(pos, rng)
        atoms.append(Atom(element, pos))
        tips.append(pos)
    for j in range(n_chain):
        element = palette[rng.integers(0, len(palette))]
        outward = tips[j] / np.linalg.norm(tips[j])
        pos = tips[j] + SUBSTITUENT_BOND[element] * outward
        pos = pos + _tangential_noise(pos, rng)
        atoms.append(Atom(element, pos))
    return Molecule3D(atoms, [], frozenset(range(len(ring.atoms))), "seeded")


def random_pocket(rng: np.random.Generator) -> PocketGraph:
    n_res = int(rng.integers(2, 5))
    atoms_per = 3
    centers = rng.normal(size=(n_res, 3)) * 2.0
    positions = np.repeat(centers, atoms_per, axis=0) + rng.normal(size=(n_res * atoms_per, 3)) * 0.5
    return PocketGraph(
        residue_types=rng.integers(0, N_RESIDUE_CLASSES, n_res),
        atom_species=rng.integers(1, 4, n_res * atoms_per),
        atom_positions=positions,
        atom_residue=np.repeat(np.arange(n_res), atoms_per),
    )


def target_pocket(seed: int) -> PocketGraph:
    """The fixed binding target every scoring stage reuses for one seed."""
    return random_pocket(np.random.default_rng([seed, 409]))


@dataclass(frozen=True)
class SynthData:
    scaffold: Molecule3D
    corpus: list[Molecule3D]
    pairs: list[LabeledPair]


def synth_dataset(
    seed: int,
    corpus_size: int,
    pair_count: int,
    scaffold_smiles: str = "C1CNCOC1",
) -> SynthData:
    """Deterministic toy dataset: training molecules and labeled pairs.

    Pair labels follow one synthetic rule: a ligand is active exactly when
    it carries a nitrogen substituent (the forced first substituent),
    alternating so both classes are always present.
    """
    if corpus_size <= 0 or pair_count <= 0:
        raise ValueError("corpus_size and pair_count must be positive")
    ring = ring_template(scaffold_smiles)

    corpus_rng = np.random.default_rng([seed, 101])
    corpus = [decorate_ring(ring, CORPUS_PALETTE, corpus_rng) for _ in range(corpus_size)]
    for i, mol in enumerate(corpus):
        perceived = perceive_molecule(mol).molecule
        perceived.check_valences()
        if not perceived.is_connected():
            raise RuntimeError(f"corpus molecule {i} perceives as disconnected")

    pair_rng = np.random.default_rng([seed, 202])
    pairs = []
    for i in range(pair_count):
        active = i % 2 == 0
        # chains off: F has no spare valence to extend, and the labeling
        # rule only reads the substituent elements anyway
        ligand = decorate_ring(
            ring,
            CORPUS_PALETTE if active else INACTIVE_PALETTE,
            pair_rng,
            force="N" if active else None,
            chains=False,
        )
        if not active:
            assert all(a.element != "N" for a in ligand.atoms[RING_SIZE:])
        pairs.append(
            LabeledPair(
                pocket=random_pocket(pair_rng),
                ligand=ligand,
                active=active,
                affinity=1.0 if active else -1.0,
            )
        )
    return SynthData(ring, corpus, pairs)


# -- run directory ---------------------------------------------------------


def prepare_run_dir(cfg: dict, run_dir: str | Path) -> Path:
    run = Path(run_dir)
    for sub in ("data", "checkpoints", "generated", "reports"):
        (run / sub).mkdir(parents=True, exist_ok=True)
    digest = cfgmod.write_resolved(cfg, run / "config.resolved")
    log.info("run dir %s, seed %s, config sha256 %s", run, cfg["seed"], digest)
    return run


def write_corpus(directory: str | Path, corpus: list[Molecule3D]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, mol in enumerate(corpus):
        write_xyz(mol, directory / f"mol_{i:04d}.xyz")


def load_corpus(directory: str | Path, scaffold_size: int = RING_SIZE) -> list[Molecule3D]:
    """XYZ files drop the mask, so the template prefix is re-marked."""
    paths = sorted(Path(directory).glob("mol_*.xyz"))
    corpus = []
    for path in paths:
        bare = read_xyz(path)
        corpus.append(
            Molecule3D(bare.atoms, [], frozenset(range(scaffold_size)), "seeded")
        )
    return corpus


def _dataset(cfg: dict, run: Path, want_corpus: bool, want_pairs: bool):
    """Corpus/pairs from data/ when present, else rebuilt from the seed."""
    corpus = pairs = None
    corpus_dir = run / "data" / "corpus"
    pairs_dir = run / "data" / "pairs"
    if want_corpus and corpus_dir.exists():
        corpus = load_corpus(corpus_dir)
        log.info("loaded %d corpus molecules from %s", len(corpus), corpus_dir)
    if want_pairs and (pairs_dir / "manifest.csv").exists():
        pairs = load_pairs(pairs_dir)
        log.info("loaded %d pairs from %s", len(pairs), pairs_dir)
    if (want_corpus and corpus is None) or (want_pairs and pairs is None):
        data = synth_dataset(
            cfg["seed"], cfg["corpus_size"], cfg["pair_count"], cfg["scaffold_smiles"]
        )
        if want_corpus and corpus is None:
            corpus = data.corpus
            log.info("synthesized %d corpus molecules in memory", len(corpus))
        if want_pairs and pairs is None:
            pairs = data.pairs
            log.info("synthesized %d pairs in memory", len(pairs))
    return corpus, pairs


def _load_actor(cfg: dict, run: Path, prefer_rl: bool = False) -> ActorModel:
    names = ["actor_rl.npz", "actor.npz"] if prefer_rl else ["actor.npz"]
    for name in names:
        path = run / "checkpoints" / name
        if path.exists():
            model = ActorModel(cfgmod.actor_config(cfg), np.random.default_rng(0))
            nn.load_checkpoint(path, model)
            log.info("loaded actor from %s", path)
            return model
    raise FileNotFoundError(
        f"no actor checkpoint under {run / 'checkpoints'}; run train-actor first"
    )


def _load_critic(cfg: dict, run: Path) -> tuple[CriticModel, AffinityScaler]:
    path = run / "checkpoints" / "critic.npz"
    if not path.exists():
        raise FileNotFoundError(f"{path} missing; run train-critic first")
    model = CriticModel(cfgmod.critic_config(cfg), np.random.default_rng(0))
    nn.load_checkpoint(path, model)
    header, rows = read_csv(run / "checkpoints" / "affinity_scaler.csv")
    lo, hi, degenerate = rows[0]
    return model, AffinityScaler(float(lo), float(hi), degenerate == "1")


def _critic_fn(cfg: dict, run: Path):
    model, scaler = _load_critic(cfg, run)
    pocket = target_pocket(cfg["seed"])
    return lambda mol: score(model, pocket, mol, scaler)


# -- stages ------------------------------------------------------------------


def run_synth_data(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    data = synth_dataset(
        cfg["seed"], cfg["corpus_size"], cfg["pair_count"], cfg["scaffold_smiles"]
    )
    write_corpus(run / "data" / "corpus", data.corpus)
    save_pairs(run / "data" / "pairs", data.pairs)
    write_xyz(data.scaffold, run / "data" / "scaffold.xyz")
    log.info(
        "wrote %d molecules and %d pairs under %s",
        len(data.corpus), len(data.pairs), run / "data",
    )


def run_train_actor(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    corpus, _ = _dataset(cfg, run, want_corpus=True, want_pairs=False)
    _, curves = train_supervised(
        corpus,
        cfgmod.actor_config(cfg),
        seed=cfg["seed"],
        checkpoint_path=run / "checkpoints" / "actor.npz",
        config_hash=cfgmod.config_hash(cfg),
    )
    write_csv(
        run / "reports" / "actor_curves.csv",
        ["epoch", "train_nll", "val_nll", "lr"],
        [[c.epoch, c.train_nll, c.val_nll, c.lr] for c in curves],
    )
    log.info("actor NLL %.4f -> %.4f", curves[0].train_nll, curves[-1].train_nll)


def run_train_critic(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    _, pairs = _dataset(cfg, run, want_corpus=False, want_pairs=True)
    result = train_classifier(pairs, cfgmod.critic_config(cfg), seed=cfg["seed"])
    nn.save_checkpoint(
        run / "checkpoints" / "critic.npz", result.model,
        config_hash=cfgmod.config_hash(cfg),
    )
    scaler = result.scaler
    write_csv(
        run / "checkpoints" / "affinity_scaler.csv",
        ["lo", "hi", "degenerate"],
        [[scaler.lo, scaler.hi, int(scaler.degenerate)]],
    )
    write_csv(
        run / "reports" / "critic_metrics.csv",
        ["metric", "value"],
        [
            ["train_auroc", result.train_auroc],
            ["test_auroc", result.test_auroc],
            ["n_pairs", len(pairs)],
        ],
    )
    write_csv(
        run / "reports" / "critic_losses.csv",
        ["epoch", "loss"],
        [[i + 1, loss] for i, loss in enumerate(result.losses)],
    )
    log.info("critic train/test AUROC %.3f / %.3f", result.train_auroc, result.test_auroc)


def _float_list(text: str) -> list[float]:
    return [float(part) for part in str(text).split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    return [int(part) for part in str(text).split(",") if part.strip()]


def run_grid_search(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    _, pairs = _dataset(cfg, run, want_corpus=False, want_pairs=True)
    rows = hyperparameter_grid(
        _float_list(cfg["grid_lrs"]),
        _int_list(cfg["grid_heads"]),
        _int_list(cfg["grid_dims"]),
        pairs,
        base_config=cfgmod.critic_config(cfg),
        seed=cfg["seed"],
        epochs=None if cfg["grid_epochs"] < 0 else cfg["grid_epochs"],
    )
    header, table = grid_rows_as_csv(rows)
    write_csv(run / "reports" / "grid_search.csv", header, table)
    log.info("grid search wrote %d rows", len(table))


def run_rl_finetune(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    model = _load_actor(cfg, run)
    critic_fn = _critic_fn(cfg, run)
    scaffold = ring_template(cfg["scaffold_smiles"])
    _, curves = rl_finetune(
        model,
        critic_fn,
        scaffold,
        cfgmod.actor_config(cfg),
        cfgmod.reward_config(cfg),
        epochs=cfg["rl_epochs"],
        seed=cfg["seed"],
        batch_size=cfg["rl_batch_size"],
        n_val_episodes=cfg["rl_val_episodes"],
        lr=None if cfg["rl_lr"] < 0 else cfg["rl_lr"],
        normalize_rewards=cfg["rl_normalize"],
        checkpoint_path=run / "checkpoints" / "actor_rl.npz",
        config_hash=cfgmod.config_hash(cfg),
    )
    write_curves(run / "reports" / "rl_curves.csv", curves)
    log.info(
        "rl fine-tune mean C_BP %.3f -> %.3f",
        curves[0].mean_c_bp, curves[-1].mean_c_bp,
    )


def run_generate(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    model = _load_actor(cfg, run, prefer_rl=True)
    scaffold = ring_template(cfg["scaffold_smiles"])
    rng = np.random.default_rng([cfg["seed"], 31])
    smiles_rows = []
    for i in range(cfg["n_generate"]):
        mol = generate(scaffold, model, rng, cfg["actor_max_atoms"])
        write_xyz(mol, run / "generated" / f"gen_{i:04d}.xyz")
        try:
            smiles_rows.append((write_smiles(perceive_molecule(mol).molecule), f"gen_{i:04d}"))
        except MoleculeError:
            pass
    write_smiles_file(run / "generated" / "generated.smi", smiles_rows)
    log.info(
        "generated %d molecules, %d with a canonical SMILES",
        cfg["n_generate"], len(smiles_rows),
    )


def _load_generated(run: Path) -> list[Molecule3D]:
    paths = sorted((run / "generated").glob("gen_*.xyz"))
    return [read_xyz(p) for p in paths]


def run_score(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    mols = _load_generated(run)
    if not mols:
        raise FileNotFoundError(f"no molecules under {run / 'generated'}; run generate first")
    critic_fn = _critic_fn(cfg, run)
    rows = []
    for i, mol in enumerate(mols):
        try:
            scores = critic_fn(mol)
            rows.append([i, scores.c_bp, scores.c_ea, scores.c_sa])
        except Exception as exc:  # one bad molecule must not sink the batch
            log.warning("scoring molecule %d failed: %s", i, exc)
            rows.append([i, math.nan, math.nan, math.nan])
    write_csv(run / "reports" / "scores.csv", ["id", "c_bp", "c_ea", "c_sa"], rows)
    log.info("scored %d molecules", len(rows))


# -- evaluation --------------------------------------------------------------

REPORT_METRICS = ("c_bp", "qed", "esol", "sa", "logp", "mw")


@dataclass(frozen=True)
class MoleculeRow:
    index: int
    smiles: str
    passed_filter: bool
    c_bp: float
    qed: float
    esol: float
    sa: float
    logp: float
    mw: float

    def metric(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class TopCandidate:
    rank: int
    smiles: str
    c_bp: float
    qed: float
    esol: float
    sa: float
    logp: float


@dataclass(frozen=True)
class EvaluationReport:
    n_total: int
    n_valid: int
    n_filtered: int
    rows: list[MoleculeRow]
    metrics: SetMetrics
    aggregates: dict[str, tuple[float, float]]
    top: list[TopCandidate]
    histograms: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


def evaluate(
    mols: list[Molecule3D],
    training_smiles: set[str],
    c_bp: list[float] | None = None,
    top_k: int = 100,
    hist_bins: int = 20,
    apply_filter: bool = True,
) -> EvaluationReport:
    """Perception, drug-likeness filter, set metrics, top-k, plot data.

    Filtering only gates which rows feed the aggregates, the top-k table,
    and the histograms; the per-molecule rows themselves are identical
    with the filter on or off.
    """
    if not mols:
        raise ValueError("no generated molecules to evaluate")
    if c_bp is not None and len(c_bp) != len(mols):
        raise ValueError("c_bp length must match the molecule list")

    perceived: list[Molecule3D] = []
    for mol in mols:
        if mol.bonds:
            perceived.append(mol)
            continue
        try:
            perceived.append(perceive_molecule(mol).molecule)
        except MoleculeError:
            perceived.append(mol)  # counts as invalid downstream
    metrics = set_metrics(perceived, training_smiles)

    rows: list[MoleculeRow] = []
    for i, mol in enumerate(perceived):
        if not is_valid_molecule(mol):
            continue
        try:
            smiles = write_smiles(mol)
            vector = compute_descriptors(mol)
            rows.append(
                MoleculeRow(
                    index=i,
                    smiles=smiles,
                    passed_filter=lipinski_from_vector(vector).passed,
                    c_bp=float(c_bp[i]) if c_bp is not None else 0.0,
                    qed=qed(vector),
                    esol=esol(vector),
                    sa=sa_score(mol).total,
                    logp=vector.clogP,
                    mw=vector.MW,
                )
            )
        except (MoleculeError, ValueError) as exc:
            log.warning("molecule %d excluded from the table: %s", i, exc)

    kept = [r for r in rows if r.passed_filter] if apply_filter else list(rows)

    aggregates = {}
    for name in REPORT_METRICS:
        values = [r.metric(name) for r in kept]
        finite = [v for v in values if math.isfinite(v)]
        if finite:
            aggregates[name] = (float(np.mean(finite)), float(np.std(finite)))
        else:
            aggregates[name] = (math.nan, math.nan)

    # unscored molecules (NaN C_BP) rank below every scored one
    ranked = sorted(
        kept,
        key=lambda r: (
            -(r.c_bp if math.isfinite(r.c_bp) else -math.inf),
            -r.qed,
            r.smiles,
        ),
    )
    top = [
        TopCandidate(rank, r.smiles, r.c_bp, r.qed, r.esol, r.sa, r.logp)
        for rank, r in enumerate(ranked[:top_k], start=1)
    ]

    histograms = {}
    for name in REPORT_METRICS:
        values = [r.metric(name) for r in kept if math.isfinite(r.metric(name))]
        if values:
            density, edges = np.histogram(values, bins=hist_bins, density=True)
        else:
            edges = np.linspace(0.0, 1.0, hist_bins + 1)
            density = np.zeros(hist_bins)
        histograms[name] = (edges, density)

    return EvaluationReport(
        n_total=len(mols),
        n_valid=len(rows),
        n_filtered=len(kept),
        rows=rows,
        metrics=metrics,
        aggregates=aggregates,
        top=top,
        histograms=histograms,
    )


def write_evaluation(reports_dir: str | Path, report: EvaluationReport) -> None:
    reports = Path(reports_dir)
    reports.mkdir(parents=True, exist_ok=True)
    write_csv(
        reports / "per_molecule.csv",
        ["id", "smiles", "lipinski", "c_bp", "qed", "esol", "sa", "logp", "mw"],
        [
            [r.index, r.smiles, int(r.passed_filter), r.c_bp, r.qed, r.esol, r.sa, r.logp, r.mw]
            for r in report.rows
        ],
    )
    write_csv(
        reports / "aggregates.csv",
        ["metric", "mean", "std", "n"],
        [
            [name, mean, std, report.n_filtered]
            for name, (mean, std) in report.aggregates.items()
        ],
    )
    write_csv(
        reports / "set_metrics.csv",
        ["metric", "value"],
        [
            ["validity", report.metrics.validity],
            ["uniqueness", report.metrics.uniqueness],
            ["novelty", report.metrics.novelty],
        ],
    )
    write_csv(
        reports / "top_k.csv",
        ["rank", "smiles", "c_bp", "qed", "esol", "sa", "logp"],
        [[t.rank, t.smiles, t.c_bp, t.qed, t.esol, t.sa, t.logp] for t in report.top],
    )
    for name, (edges, density) in report.histograms.items():
        write_csv(
            reports / f"hist_{name}.csv",
            ["bin_lo", "bin_hi", "density"],
            [[edges[i], edges[i + 1], density[i]] for i in range(len(density))],
        )


def _training_smiles(cfg: dict, run: Path) -> set[str]:
    corpus, _ = _dataset(cfg, run, want_corpus=True, want_pairs=False)
    out = set()
    for mol in corpus:
        try:
            out.add(write_smiles(perceive_molecule(mol).molecule))
        except MoleculeError:
            continue
    return out


def run_evaluate(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    mols = _load_generated(run)
    if not mols:
        raise FileNotFoundError(f"no molecules under {run / 'generated'}; run generate first")
    c_bp = None
    scores_path = run / "reports" / "scores.csv"
    if scores_path.exists():
        _, score_rows = read_csv(scores_path)
        c_bp = [float(row[1]) for row in score_rows]
        log.info("using critic scores from %s", scores_path)
    report = evaluate(
        mols,
        _training_smiles(cfg, run),
        c_bp=c_bp,
        top_k=cfg["top_k"],
        hist_bins=cfg["hist_bins"],
        apply_filter=cfg["lipinski_filter"],
    )
    write_evaluation(run / "reports", report)
    log.info(
        "evaluated %d molecules: validity %.3f, uniqueness %.3f, novelty %.3f, "
        "%d past the filter",
        report.n_total,
        report.metrics.validity,
        report.metrics.uniqueness,
        report.metrics.novelty,
        report.n_filtered,
    )


def run_ablate(cfg: dict, run_dir: str | Path) -> None:
    run = prepare_run_dir(cfg, run_dir)
    model = _load_actor(cfg, run)
    critic_fn = _critic_fn(cfg, run)
    kinds = tuple(part.strip() for part in str(cfg["ablate_kinds"]).split(",") if part.strip())
    report = ablation_run(
        model,
        critic_fn,
        ring_template(cfg["scaffold_smiles"]),
        cfgmod.actor_config(cfg),
        kinds=kinds,
        seed=cfg["seed"],
        epochs=cfg["rl_epochs"],
        n_eval=cfg["ablate_n_eval"],
        batch_size=cfg["rl_batch_size"],
        normalize_rewards=cfg["rl_normalize"],
    )
    write_ablation_report(
        run / "reports" / "ablation_summary.csv",
        run / "reports" / "ablation_distributions.csv",
        report,
    )
    log.info("ablation mean C_BP by kind: %s", report.mean_c_bp)
