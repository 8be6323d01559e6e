"""Spectral decomposition of the coupling matrix and derived projections.

The symmetric coupling M factors as sum_l lambda_l v_l v_l^T over its
non-zero eigenvalues. Projecting the columnwise state matrix onto each
rank-one eigenspace yields per-eigenvalue components whose dynamics are
decoupled scalar-family LQG systems; the residual ("auxiliary") component
evolves under the local (A, B) alone. This module builds the basis,
validates the positivity assumptions tied to it, and provides the
projection and cost-splitting primitives everything downstream uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionError
from .model import NetworkModel

#: relative eigenvalue cutoff used to decide the numerical rank of M
DEFAULT_RANK_TOL = 1e-9

#: below this, a squared auxiliary component counts as zero for A5 purposes
A5_TOL = 1e-10


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenstructure of the coupling matrix plus derived cost/noise scalars.

    rank        number of non-zero eigenvalues L
    eigenvalues (L,) non-zero eigenvalues, descending
    vectors     (n, L) orthonormal eigenvectors, sign-fixed so the largest
                magnitude entry of each column is positive
    q_eigen     (L,) state-cost polynomial evaluated at each eigenvalue
    r_eigen     (L,) control-cost polynomial evaluated at each eigenvalue
    aux_frac    (n,) per-agent share of variance left to the auxiliary
                component: 1 - sum_l vectors[i, l]^2
    rep_agents  (L,) representative agent per eigen direction (largest
                magnitude eigenvector entry)
    sigma_w2    noise variance scale copied from the model
    """

    n: int
    rank: int
    eigenvalues: np.ndarray
    vectors: np.ndarray
    q0: float
    r0: float
    q_eigen: np.ndarray
    r_eigen: np.ndarray
    aux_frac: np.ndarray
    rep_agents: np.ndarray
    sigma_w2: float

    @property
    def has_aux(self) -> bool:
        """True when an auxiliary (residual) subsystem exists at all."""
        return self.rank < self.n

    @property
    def aux_sigma2(self) -> np.ndarray:
        """(n,) per-agent auxiliary noise variances."""
        return self.aux_frac * self.sigma_w2

    def eigen_sigma2(self, ell: int) -> float:
        """Noise variance of eigen component ell at its representative agent."""
        i = int(self.rep_agents[ell])
        return float(self.vectors[i, ell] ** 2 * self.sigma_w2)


def _poly_at(coeffs, s: float) -> float:
    out = 0.0
    for c in reversed(tuple(coeffs)):
        out = out * s + c
    return float(out)


def decompose_coupling(m: NetworkModel, rank_tol: float = DEFAULT_RANK_TOL,
                       strict_a5: bool = True) -> SpectralBasis:
    """Eigendecompose M and validate the positivity assumptions (A3, A5).

    Eigenvalues with magnitude below ``rank_tol * max(1, ||M||_2)`` are
    treated as zero. Repeated eigenvalues are kept as separate rank-one
    terms; any orthonormal basis of the eigenspace works.

    A5 (every agent keeps a non-degenerate auxiliary noise component) is
    enforced as follows: if only some agents have a vanishing auxiliary
    share the model is rejected outright, since partially disabling agents
    has no defined semantics. If *all* agents have a vanishing share the
    coupling has full rank and the auxiliary subsystem simply does not
    exist; that degenerate case is rejected under ``strict_a5`` (the
    default, used by validation) but permitted with ``strict_a5=False``
    (used by the simulator, which then runs a pure eigen system, e.g. the
    single-agent complete graph).
    """
    M = np.asarray(m.M, dtype=float)
    evals, evecs = np.linalg.eigh(M)
    spectral_norm = float(np.max(np.abs(evals))) if evals.size else 0.0
    cutoff = rank_tol * max(1.0, spectral_norm)
    keep = np.abs(evals) > cutoff

    order = np.argsort(-evals[keep])
    lambdas = evals[keep][order]
    V = evecs[:, keep][:, order]
    L = int(lambdas.size)

    rep = np.zeros(L, dtype=int)
    for ell in range(L):
        i = int(np.argmax(np.abs(V[:, ell])))
        if V[i, ell] < 0:
            V[:, ell] = -V[:, ell]
        rep[ell] = i

    aux_frac = 1.0 - np.sum(V**2, axis=1)
    aux_frac = np.clip(aux_frac, 0.0, 1.0)

    q0 = float(m.q_coeffs[0])
    r0 = float(m.r_coeffs[0])
    q_eigen = np.array([_poly_at(m.q_coeffs, lam) for lam in lambdas])
    r_eigen = np.array([_poly_at(m.r_coeffs, lam) for lam in lambdas])

    if q0 <= 0 or r0 <= 0:
        raise AssumptionError("A3", f"q_0 and r_0 must be strictly positive (q_0={q0}, r_0={r0})")
    bad = [(ell, q_eigen[ell], r_eigen[ell]) for ell in range(L)
           if q_eigen[ell] <= 0 or r_eigen[ell] <= 0]
    if bad:
        ell, qv, rv = bad[0]
        raise AssumptionError(
            "A3", f"cost polynomial non-positive at eigenvalue {lambdas[ell]:.6g} "
                  f"(q={qv:.6g}, r={rv:.6g})")

    degenerate = aux_frac <= A5_TOL
    if degenerate.any():
        if not degenerate.all():
            idx = np.nonzero(degenerate)[0]
            raise AssumptionError(
                "A5", f"agents {idx.tolist()} have no auxiliary noise component "
                      f"while others do; model is unsupported")
        if strict_a5:
            raise AssumptionError(
                "A5", "coupling has full rank: no agent retains an auxiliary "
                      "noise component (pure eigen system)")

    basis = SpectralBasis(
        n=m.n, rank=L,
        eigenvalues=lambdas, vectors=V,
        q0=q0, r0=r0, q_eigen=q_eigen, r_eigen=r_eigen,
        aux_frac=aux_frac, rep_agents=rep,
        sigma_w2=float(m.sigma_w2),
    )
    for arr in (basis.eigenvalues, basis.vectors, basis.q_eigen,
                basis.r_eigen, basis.aux_frac, basis.rep_agents):
        arr.setflags(write=False)
    return basis


def project_state(basis: SpectralBasis, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Split a columnwise matrix into eigen components and the auxiliary rest.

    Returns ([x_1, ..., x_L], x_aux) with x_l = x v_l v_l^T and
    x_aux = x - sum_l x_l. Applies identically to states, controls and
    noise matrices.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[1] != basis.n:
        raise ValueError(f"expected {basis.n} columns, got {x.shape[1]}")
    parts = []
    rest = x.copy()
    for ell in range(basis.rank):
        v = basis.vectors[:, ell]
        comp = np.outer(x @ v, v)
        parts.append(comp)
        rest -= comp
    return parts, rest


def decomposed_cost(basis: SpectralBasis, m: NetworkModel,
                    x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-agent stage costs of the auxiliary and eigen components.

    Returns (aux_costs, eigen_costs): aux_costs[i] is
    x_aux_i^T Q x_aux_i + (r0/q0) u_aux_i^T R u_aux_i, and
    eigen_costs[l, i] the analogue with ratio r_l/q_l on the eigen parts.
    The q-weighted sum q0 * sum_i aux_costs + sum_l q_l * sum_i eigen_costs
    reproduces the coupled stage cost exactly.
    """
    x_parts, x_aux = project_state(basis, x)
    u_parts, u_aux = project_state(basis, u)

    aux_costs = (np.sum(x_aux * (m.Q @ x_aux), axis=0)
                 + (basis.r0 / basis.q0) * np.sum(u_aux * (m.R @ u_aux), axis=0))
    eigen_costs = np.zeros((basis.rank, basis.n))
    for ell in range(basis.rank):
        ratio = basis.r_eigen[ell] / basis.q_eigen[ell]
        eigen_costs[ell] = (np.sum(x_parts[ell] * (m.Q @ x_parts[ell]), axis=0)
                            + ratio * np.sum(u_parts[ell] * (m.R @ u_parts[ell]), axis=0))
    return aux_costs, eigen_costs


def recombined_cost(basis: SpectralBasis, m: NetworkModel,
                    x: np.ndarray, u: np.ndarray) -> float:
    """Stage cost evaluated through the spectral split (cross-check path)."""
    aux_costs, eigen_costs = decomposed_cost(basis, m, x, u)
    return float(basis.q0 * aux_costs.sum() + basis.q_eigen @ eigen_costs.sum(axis=1))
