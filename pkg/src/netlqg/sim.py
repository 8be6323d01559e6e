"""Closed-loop simulation, regret measurement, and experiment orchestration.

A trajectory runs the Thompson-sampling coordinator against the ground
truth dynamics for T steps and records cumulative cost against the
known-model oracle rate, so regret[t] = cumulative_cost[t] - t * J by
construction. Experiments fan trajectories out over deterministic
per-index seeds and aggregate regret statistics on a halving time grid.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bayes import GaussianPosterior, sample_truncated
from .errors import ConfigError
from .model import NetworkModel, build_model
from .riccati import ParamBlock, gains_for, optimal_average_cost, true_blocks
from .spectral import SpectralBasis, decompose_coupling, project_state
from .tsde import Coordinator, make_actors

#: Frobenius state norm beyond which a trajectory aborts
BLOWUP_NORM = 1e12

CSV_COLUMNS = ["experiment", "n", "T_checkpoint", "mean_regret", "stderr_regret",
               "mean_regret_over_sqrtT", "mean_K_T_aux", "mean_K_T_eigen"]

DEFAULT_PRIOR = {"kind": "gaussian", "mean": 1.0, "cov": 1.0}


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce one Monte-Carlo experiment.

    ``model`` is a model description (see :func:`netlqg.model.build_model`),
    usually a preset name plus overrides. ``mode`` picks how the ground
    truth is set: "fixed" uses the model's own dynamics for every
    trajectory, "bayes" redraws the true parameter blocks from the
    truncated prior per trajectory (the regret is Bayesian either way; the
    figures in the reproduced experiments fix the dynamics).
    """

    name: str = "experiment"
    model: dict = field(default_factory=dict)
    T: int = 2000
    num_trajectories: int = 100
    mode: str = "fixed"
    base_seed: int = 0
    T_min: int = 0
    delta: float = 0.99
    prior: dict = field(default_factory=lambda: dict(DEFAULT_PRIOR))
    max_rejects: int = 1000
    checkpoints: int = 5
    jobs: int = 1
    out_dir: str | None = None
    log_posteriors: bool = False

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.T}")
        if self.num_trajectories < 1:
            raise ConfigError(f"num_trajectories must be >= 1, got {self.num_trajectories}")
        if self.mode not in ("fixed", "bayes"):
            raise ConfigError(f"mode must be 'fixed' or 'bayes', got {self.mode!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")


def checkpoint_grid(T: int, count: int = 5) -> list[int]:
    """Halving grid ending at the horizon: T, T/2, T/4, ... (ascending)."""
    return sorted({max(1, round(T / 2**k)) for k in range(count)})


def trajectory_rng(base_seed: int, index: int) -> np.random.Generator:
    """Deterministic per-trajectory stream, independent of scheduling."""
    return np.random.default_rng(np.random.SeedSequence((base_seed, index)))


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def draw_noise(m: NetworkModel, rng: np.random.Generator) -> np.ndarray:
    """One step of i.i.d. per-agent Gaussian noise, columnwise."""
    return np.sqrt(m.sigma_w2) * rng.standard_normal((m.d_x, m.n))


def transition(m: NetworkModel, x: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Ground-truth global dynamics with explicit noise."""
    return m.A @ x + m.B @ u + m.D @ (x @ m.M) + m.E @ (u @ m.M) + w


def simulate_step(m: NetworkModel, x: np.ndarray, u: np.ndarray,
                  rng: np.random.Generator) -> np.ndarray:
    """One step of the coupled dynamics with freshly drawn noise."""
    return transition(m, x, u, draw_noise(m, rng))


def transition_blocks(aux_block: ParamBlock | None, eigen_blocks: list[ParamBlock],
                      basis: SpectralBasis, x: np.ndarray, u: np.ndarray,
                      w: np.ndarray) -> np.ndarray:
    """Dynamics parameterized directly by the decoupled blocks.

    Used in "bayes" mode, where each block's true parameters are drawn
    independently (matching the prior the learner assumes) and a single
    coupled (A, B, D, E) representative need not exist.
    """
    x_parts, x_aux = project_state(basis, x)
    u_parts, u_aux = project_state(basis, u)
    w_parts, w_aux = project_state(basis, w)
    out = np.zeros_like(x)
    if aux_block is not None:
        out += aux_block.A @ x_aux + aux_block.B @ u_aux
    out += w_aux
    for ell, block in enumerate(eigen_blocks):
        out += block.A @ x_parts[ell] + block.B @ u_parts[ell] + w_parts[ell]
    return out


def initial_state(m: NetworkModel, rng: np.random.Generator) -> np.ndarray:
    """Zero start unless an initial-state covariance was configured."""
    if np.any(m.Xi1):
        evals, evecs = np.linalg.eigh(m.Xi1)
        scale = evecs * np.sqrt(np.clip(evals, 0.0, None))
        return scale @ rng.standard_normal((m.d_x, m.n))
    return np.zeros((m.d_x, m.n))


# ---------------------------------------------------------------------------
# single trajectory
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryResult:
    """Per-trajectory regret trace and diagnostics."""

    index: int
    seed: tuple
    cumulative_cost: np.ndarray
    regret: np.ndarray
    episodes: list
    max_state_norm: np.ndarray
    J: float
    aborted: bool = False
    abort_t: int | None = None


@dataclass(frozen=True)
class _Context:
    """Shared per-experiment pieces: model, basis, ground truth, oracle rate."""

    model: NetworkModel
    basis: SpectralBasis
    true_aux: ParamBlock
    true_eigen: tuple
    J: float


def prepare(spec: ExperimentSpec) -> _Context:
    model = build_model(spec.model)
    basis = decompose_coupling(model, strict_a5=False)
    aux, eigen = true_blocks(model, basis)
    gains = gains_for(aux if basis.has_aux else None, eigen, basis, model)
    J = optimal_average_cost(gains, basis, model)
    return _Context(model=model, basis=basis, true_aux=aux,
                    true_eigen=tuple(eigen), J=J)


def _build_priors(spec: ExperimentSpec, basis: SpectralBasis, model: NetworkModel,
                  aux_true: ParamBlock, eigen_true) -> tuple[GaussianPosterior | None, list]:
    kind = spec.prior.get("kind", "gaussian")
    d = model.d_x + model.d_u
    if kind == "gaussian":
        mean = np.full((d, model.d_x), float(spec.prior.get("mean", 1.0)))
        cov = float(spec.prior.get("cov", 1.0)) * np.eye(d)
        aux_prior = GaussianPosterior.build(mean, cov, "aux") if basis.has_aux else None
        eigen_priors = [GaussianPosterior.build(mean, cov, f"eigen{ell}")
                        for ell in range(basis.rank)]
    elif kind == "oracle":
        # point mass at the truth: the sampler returns the true block forever
        aux_prior = (GaussianPosterior.build(aux_true.stacked(), np.zeros((d, d)), "aux")
                     if basis.has_aux else None)
        eigen_priors = [GaussianPosterior.build(eigen_true[ell].stacked(),
                                                np.zeros((d, d)), f"eigen{ell}")
                        for ell in range(basis.rank)]
    else:
        raise ConfigError(f"unknown prior kind {kind!r}")
    return aux_prior, eigen_priors


def _draw_true_blocks(spec: ExperimentSpec, ctx: _Context,
                      priors: tuple, rng: np.random.Generator):
    """Bayes mode: redraw each block's ground truth from its truncated prior.

    The admissible sets stay anchored at the nominal (configured) dynamics,
    the same sets the learner uses.
    """
    from .tsde import block_uncertainty_sets

    basis = ctx.basis
    aux_prior, eigen_priors = priors
    aux_set, eigen_sets = block_uncertainty_sets(
        ctx.model, basis, spec.delta,
        aux_anchor=ctx.true_aux if basis.has_aux else None,
        eigen_anchors=list(ctx.true_eigen))
    eigen = []
    for ell, prior in enumerate(eigen_priors):
        block, used_fallback = sample_truncated(prior, eigen_sets[ell], rng,
                                                10 * spec.max_rejects, fallback=None)
        if used_fallback:
            raise ConfigError(f"could not draw a true eigen{ell} block from the "
                              f"truncated prior (set empty?)")
        eigen.append(block)
    aux = None
    if basis.has_aux:
        aux, used_fallback = sample_truncated(aux_prior, aux_set, rng,
                                              10 * spec.max_rejects, fallback=None)
        if used_fallback:
            raise ConfigError("could not draw a true auxiliary block from the "
                              "truncated prior (set empty?)")
    return aux, eigen


def run_trajectory(ctx: _Context, spec: ExperimentSpec, index: int) -> TrajectoryResult:
    """One seeded closed-loop run of the learning controller."""
    model, basis = ctx.model, ctx.basis
    rng = trajectory_rng(spec.base_seed, index)

    priors = _build_priors(spec, basis, model, ctx.true_aux, ctx.true_eigen)
    if spec.mode == "bayes":
        sim_aux, sim_eigen = _draw_true_blocks(spec, ctx, priors, rng)
        gains = gains_for(sim_aux, sim_eigen, basis, model)
        J = optimal_average_cost(gains, basis, model)
        if spec.prior.get("kind") == "oracle":
            priors = _build_priors(spec, basis, model, sim_aux, sim_eigen)
    else:
        sim_aux = ctx.true_aux if basis.has_aux else None
        sim_eigen = list(ctx.true_eigen)
        J = ctx.J

    eigen_actors, aux_actor = make_actors(
        model, basis, priors[0], priors[1],
        delta=spec.delta, T_min=spec.T_min, max_rejects=spec.max_rejects,
        aux_anchor=ctx.true_aux if basis.has_aux else None,
        eigen_anchors=list(ctx.true_eigen),
        log_posteriors=spec.log_posteriors)
    coord = Coordinator(model, basis, eigen_actors, aux_actor)

    x = initial_state(model, rng)
    T = spec.T
    cumulative = np.full(T, np.nan)
    max_norm = np.zeros(model.n)
    running = 0.0
    aborted = False
    abort_t = None

    for t in range(1, T + 1):
        max_norm = np.maximum(max_norm, np.sqrt(np.sum(x * x, axis=0)))
        u, record = coord.step(x, t, rng)
        running += record.cost
        cumulative[t - 1] = running

        w = draw_noise(model, rng)
        if spec.mode == "bayes":
            x = transition_blocks(sim_aux, sim_eigen, basis, x, u, w)
        else:
            x = transition(model, x, u, w)
        norm = float(np.linalg.norm(x))
        if not np.isfinite(norm) or norm > BLOWUP_NORM:
            aborted = True
            abort_t = t + 1
            cumulative[t:] = np.nan
            break

    regret = cumulative - np.arange(1, T + 1) * J
    return TrajectoryResult(index=index, seed=(spec.base_seed, index),
                            cumulative_cost=cumulative, regret=regret,
                            episodes=coord.episode_log(), max_state_norm=max_norm,
                            J=J, aborted=aborted, abort_t=abort_t)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    n: int
    J: float
    rows: list
    trajectories: list
    n_completed: int
    n_aborted: int


def _episode_count(episodes: list, tag_prefix: str, upto: int, n_actors: int) -> float:
    """Mean per-actor episode count among actors whose tag starts with
    ``tag_prefix``, counting closes at or before time ``upto``."""
    if n_actors == 0:
        return 0.0
    total = sum(1 for rec in episodes
                if rec["actor"].startswith(tag_prefix) and rec["t_k"] <= upto)
    return total / n_actors


def _run_index(args) -> TrajectoryResult:
    spec, index = args
    return run_trajectory(prepare(spec), spec, index)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run every trajectory of one experiment and aggregate the regret trace.

    Trajectories are embarrassingly parallel; aggregation order is fixed by
    trajectory index, so results do not depend on the worker count. Aborted
    trajectories (blow-up guard) are excluded from the aggregate with a
    warning.
    """
    ctx = prepare(spec)
    indices = list(range(spec.num_trajectories))
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_run_index, [(spec, i) for i in indices],
                                    chunksize=max(1, len(indices) // (4 * spec.jobs))))
    else:
        results = [run_trajectory(ctx, spec, i) for i in indices]

    completed = [r for r in results if not r.aborted]
    n_aborted = len(results) - len(completed)
    if n_aborted:
        warnings.warn(f"{spec.name}: {n_aborted}/{len(results)} trajectories aborted "
                      f"(state blow-up); aggregate uses completed trajectories only")
    if not completed:
        raise RuntimeError(f"{spec.name}: all trajectories aborted")

    grid = checkpoint_grid(spec.T, spec.checkpoints)
    rows = []
    for c in grid:
        values = np.array([r.regret[c - 1] for r in completed])
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        k_aux = float(np.mean([_episode_count(r.episodes, "aux", c, 1 if ctx.basis.has_aux else 0)
                               for r in completed]))
        k_eigen = float(np.mean([_episode_count(r.episodes, "eigen", c, ctx.basis.rank)
                                 for r in completed]))
        rows.append({
            "experiment": spec.name,
            "n": ctx.model.n,
            "T_checkpoint": c,
            "mean_regret": mean,
            "stderr_regret": stderr,
            "mean_regret_over_sqrtT": mean / float(np.sqrt(c)),
            "mean_K_T_aux": k_aux,
            "mean_K_T_eigen": k_eigen,
        })
    return ExperimentResult(spec=spec, n=ctx.model.n, J=ctx.J, rows=rows,
                            trajectories=results, n_completed=len(completed),
                            n_aborted=n_aborted)


def run_batch(specs: list[ExperimentSpec]) -> list[ExperimentResult]:
    return [run_experiment(spec) for spec in specs]


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def format_csv(rows: list[dict]) -> str:
    """Render aggregate rows with shortest-roundtrip floats (byte-stable)."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        cells = []
        for col in CSV_COLUMNS:
            v = row[col]
            if isinstance(v, str):
                cells.append(v)
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(repr(float(v)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as f:
        f.write(format_csv(rows))


def manifest_payload(specs: list[ExperimentSpec], results: list[ExperimentResult]) -> dict:
    """Run manifest: the full spec plus a content hash of it, and per-
    experiment completion stats. Deliberately timestamp-free so reruns of
    the same configuration produce identical files."""
    spec_dump = _jsonable([asdict(s) for s in specs])
    blob = json.dumps(spec_dump, sort_keys=True, separators=(",", ":"))
    return {
        "config_hash": hashlib.sha256(blob.encode()).hexdigest(),
        "specs": spec_dump,
        "experiments": [
            {"name": r.spec.name, "n": r.n, "J": r.J,
             "completed": r.n_completed, "aborted": r.n_aborted}
            for r in results
        ],
    }


def write_manifest(specs, results, path) -> None:
    with open(path, "w") as f:
        json.dump(manifest_payload(specs, results), f, indent=2, sort_keys=True)
        f.write("\n")
