"""Episodic Thompson-sampling control of the decoupled networked system.

One coordinator owns the clock. Per time step it projects the global state,
hands each eigen actor its component (observed at that component's
representative agent) and the auxiliary actor the transition of the agent
selected last step, then sums the per-component feedback controls into the
global control matrix.

Each actor runs its own episode schedule: an episode closes once it has
lasted longer than the minimum length and either outgrew the previous
episode by one step or the posterior covariance determinant halved since
the episode began. At every close the actor redraws its parameter block
from the truncated posterior and refreshes the cached gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bayes import (GaussianPosterior, Observation, UncertaintySet, MAX_REJECTS,
                    posterior_update, sample_truncated, select_agent)
from .errors import DareError
from .model import NetworkModel, per_step_cost
from .riccati import ParamBlock, block_gain
from .spectral import SpectralBasis, project_state


@dataclass
class Actor:
    """Learning state for one parameter block (auxiliary or one eigen).

    Episode bookkeeping follows the dynamic-episode schedule: ``t_start`` is
    the current episode's starting time (initialized to -T_min so the first
    step always opens episode 1), ``T_prev`` the previous episode's length,
    and ``det_at_start`` the posterior covariance determinant when the
    episode opened. ``gain`` is recomputed only when a new block is sampled.
    """

    posterior: GaussianPosterior
    uset: UncertaintySet
    T_min: int = 0
    max_rejects: int = MAX_REJECTS
    k: int = 0
    t_start: int = 0
    T_prev: int = 0
    det_at_start: float = 0.0
    theta: ParamBlock = None
    gain: np.ndarray = None
    episodes: list = field(default_factory=list)
    fallback_count: int = 0
    gain_failure_count: int = 0
    log_posteriors: bool = False

    @property
    def tag(self) -> str:
        return self.posterior.tag

    @classmethod
    def start(cls, posterior: GaussianPosterior, uset: UncertaintySet,
              T_min: int = 0, max_rejects: int = MAX_REJECTS,
              log_posteriors: bool = False) -> "Actor":
        d_x = posterior.d_x
        d_u = posterior.dim - d_x
        theta0 = ParamBlock.zero(d_x, d_u, posterior.tag)
        _, gain0 = block_gain(theta0, uset.Q, uset.R, uset.cost_ratio)
        return cls(posterior=posterior, uset=uset, T_min=T_min,
                   max_rejects=max_rejects, k=0, t_start=-T_min, T_prev=T_min,
                   det_at_start=posterior.cov_det, theta=theta0, gain=gain0,
                   log_posteriors=log_posteriors)

    def episode_should_end(self, t: int, det_now: float) -> bool:
        """Stopping rule: past the minimum length, and either one step longer
        than the previous episode or the determinant halved."""
        elapsed = t - self.t_start
        if elapsed <= self.T_min:
            return False
        return elapsed > self.T_prev or det_now < 0.5 * self.det_at_start

    def step(self, obs: Observation | None, t: int, rng: np.random.Generator) -> np.ndarray:
        """Consume one observation (None at t=1), possibly roll the episode,
        return the gain to apply this step."""
        if obs is not None:
            self.posterior = posterior_update(self.posterior, obs)
        det_now = self.posterior.cov_det
        if self.episode_should_end(t, det_now):
            closed_length = t - self.t_start
            self.T_prev = closed_length
            self.k += 1
            self.t_start = t
            self.det_at_start = det_now
            theta, used_fallback = sample_truncated(
                self.posterior, self.uset, rng, self.max_rejects, fallback=self.theta)
            if used_fallback:
                self.fallback_count += 1
            self.theta = theta
            try:
                _, self.gain = block_gain(theta, self.uset.Q, self.uset.R,
                                          self.uset.cost_ratio)
            except DareError:
                # keep the previous episode's gain; the sample itself is kept
                # so the fallback chain stays consistent
                self.gain_failure_count += 1
            record = {
                "actor": self.tag,
                "k": self.k,
                "t_k": t,
                "T_k": closed_length,
                "det": det_now,
                "theta_k": theta.stacked().tolist(),
            }
            if self.log_posteriors:
                record["posterior"] = self.posterior.snapshot()
            self.episodes.append(record)
        return self.gain


def block_uncertainty_sets(model: NetworkModel, basis: SpectralBasis,
                           delta: float = 0.99,
                           aux_anchor=None, eigen_anchors=None
                           ) -> tuple[UncertaintySet | None, list[UncertaintySet]]:
    """Admissible sets per block, optionally anchored at nominal dynamics."""
    eigen_sets = [
        UncertaintySet(delta=delta, eigenvalue=float(basis.eigenvalues[ell]),
                       cost_ratio=float(basis.r_eigen[ell] / basis.q_eigen[ell]),
                       Q=model.Q, R=model.R,
                       anchor=None if eigen_anchors is None else eigen_anchors[ell])
        for ell in range(basis.rank)
    ]
    aux_set = None
    if basis.has_aux:
        aux_set = UncertaintySet(delta=delta, eigenvalue=0.0,
                                 cost_ratio=basis.r0 / basis.q0,
                                 Q=model.Q, R=model.R, anchor=aux_anchor)
    return aux_set, eigen_sets


def make_actors(model: NetworkModel, basis: SpectralBasis,
                aux_prior: GaussianPosterior | None,
                eigen_priors: list[GaussianPosterior],
                delta: float = 0.99, T_min: int = 0,
                max_rejects: int = MAX_REJECTS,
                aux_anchor=None, eigen_anchors=None,
                log_posteriors: bool = False) -> tuple[list[Actor], Actor | None]:
    """Build one actor per eigen direction plus the auxiliary actor (omitted
    for full-rank coupling, where no auxiliary subsystem exists)."""
    aux_set, eigen_sets = block_uncertainty_sets(model, basis, delta,
                                                 aux_anchor, eigen_anchors)
    eigen_actors = [Actor.start(prior, eigen_sets[ell], T_min, max_rejects,
                                log_posteriors)
                    for ell, prior in enumerate(eigen_priors)]
    aux_actor = None
    if basis.has_aux:
        if aux_prior is None:
            raise ValueError("auxiliary prior required: basis has an auxiliary subsystem")
        aux_actor = Actor.start(aux_prior, aux_set, T_min, max_rejects, log_posteriors)
    return eigen_actors, aux_actor


@dataclass
class StepRecord:
    """Per-step trace entry emitted by the coordinator."""

    t: int
    cost: float
    episode_markers: dict
    selected_agent: int
    sampled: bool


class Coordinator:
    """Runs the actors against a shared clock and synthesizes controls.

    The observation consumed at time t is the transition recorded at t-1
    (no update happens at t=1). The auxiliary agent for the *next*
    transition is selected with the current posterior covariance, after this
    step's controls are known.
    """

    def __init__(self, model: NetworkModel, basis: SpectralBasis,
                 eigen_actors: list[Actor], aux_actor: Actor | None):
        if len(eigen_actors) != basis.rank:
            raise ValueError(f"need {basis.rank} eigen actors, got {len(eigen_actors)}")
        if (aux_actor is None) == basis.has_aux:
            raise ValueError("auxiliary actor must be present exactly when the "
                             "basis has an auxiliary subsystem")
        self.model = model
        self.basis = basis
        self.eigen_actors = eigen_actors
        self.aux_actor = aux_actor
        self._prev_eigen_z: list[np.ndarray] | None = None
        self._prev_aux_z: np.ndarray | None = None
        self._prev_agent: int = -1

    def step(self, x: np.ndarray, t: int, rng: np.random.Generator) -> tuple[np.ndarray, StepRecord]:
        basis = self.basis
        x_parts, x_aux = project_state(basis, x)
        markers = {}
        u = np.zeros((self.model.d_u, self.model.n))

        # zero-variance observations carry no usable regression signal (the
        # noise-free degenerate model); skip the update rather than divide by 0
        noisy = basis.sigma_w2 > 0.0

        eigen_u = []
        for ell, actor in enumerate(self.eigen_actors):
            obs = None
            if self._prev_eigen_z is not None and noisy:
                rep = int(basis.rep_agents[ell])
                obs = Observation(z=self._prev_eigen_z[ell],
                                  x_next=x_parts[ell][:, rep],
                                  sigma2=basis.eigen_sigma2(ell))
            k_before = actor.k
            gain = actor.step(obs, t, rng)
            markers[actor.tag] = actor.k > k_before
            u_ell = gain @ x_parts[ell]
            eigen_u.append(u_ell)
            u += u_ell

        selected = -1
        if self.aux_actor is not None:
            obs = None
            if self._prev_aux_z is not None and noisy:
                obs = Observation(z=self._prev_aux_z,
                                  x_next=x_aux[:, self._prev_agent],
                                  sigma2=float(basis.aux_sigma2[self._prev_agent]))
            k_before = self.aux_actor.k
            gain = self.aux_actor.step(obs, t, rng)
            markers[self.aux_actor.tag] = self.aux_actor.k > k_before
            u_aux = gain @ x_aux
            u += u_aux

            z_all = np.vstack([x_aux, u_aux])
            if noisy:
                selected = select_agent(self.aux_actor.posterior, z_all, basis.aux_sigma2)
            else:
                selected = 0
            self._prev_agent = selected
            self._prev_aux_z = z_all[:, selected].copy()

        self._prev_eigen_z = [
            np.concatenate([x_parts[ell][:, int(basis.rep_agents[ell])],
                            eigen_u[ell][:, int(basis.rep_agents[ell])]])
            for ell in range(basis.rank)
        ]

        cost = per_step_cost(self.model, x, u)
        record = StepRecord(t=t, cost=cost, episode_markers=markers,
                            selected_agent=selected, sampled=any(markers.values()))
        return u, record

    def all_actors(self) -> list[Actor]:
        actors = list(self.eigen_actors)
        if self.aux_actor is not None:
            actors.append(self.aux_actor)
        return actors

    def episode_log(self) -> list[dict]:
        """All actors' episode records, ordered by close time."""
        records = [rec for actor in self.all_actors() for rec in actor.episodes]
        records.sort(key=lambda r: (r["t_k"], r["actor"]))
        return records
