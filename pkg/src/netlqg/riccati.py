"""Discrete algebraic Riccati equation solving and optimal gain synthesis.

Each decoupled subsystem family (auxiliary, or one per coupling eigenvalue)
has its own DARE with the shared Q and an effective control weight
(cost-ratio * R). The solver is plain fixed-point value iteration started
from Q; dimensions here are small and convergence is geometric whenever the
pair is stabilizable, so non-convergence doubles as the stabilizability
check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DareError
from .model import NetworkModel
from .spectral import SpectralBasis, project_state

DARE_TOL = 1e-12
DARE_MAX_ITER = 10**6
_DIVERGENCE_GUARD = 1e100


def spectral_radius(mat: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a square matrix."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    return float(np.max(np.abs(np.linalg.eigvals(mat))))


def _solve_dare_scalar(a: float, b: float, q: float, r: float,
                       tol: float, max_iter: int) -> float:
    # pure-float loop: runs orders of magnitude faster than tiny-ndarray ops
    s = q
    a2 = a * a
    b2 = b * b
    for _ in range(max_iter):
        s_new = a2 * s * r / (r + b2 * s) + q
        if abs(s_new - s) <= tol * (1.0 + abs(s_new)):
            return s_new
        if s_new > _DIVERGENCE_GUARD:
            raise DareError(f"scalar DARE diverged (a={a:.6g}, b={b:.6g})")
        s = s_new
    raise DareError(f"scalar DARE did not converge in {max_iter} iterations "
                    f"(a={a:.6g}, b={b:.6g})")


def solve_dare(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R_eff: np.ndarray,
               tol: float = DARE_TOL, max_iter: int = DARE_MAX_ITER) -> np.ndarray:
    """Positive semidefinite fixed point of
    S = A^T S A - A^T S B (R_eff + B^T S B)^{-1} B^T S A + Q
    by value iteration from S_0 = Q.

    Raises :class:`DareError` when the iteration diverges or fails to settle
    within ``max_iter`` steps, which in practice flags an unstabilizable
    (A, B) pair.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R_eff = np.atleast_2d(np.asarray(R_eff, dtype=float))

    if A.shape == (1, 1) and B.shape == (1, 1):
        s = _solve_dare_scalar(float(A[0, 0]), float(B[0, 0]),
                               float(Q[0, 0]), float(R_eff[0, 0]), tol, max_iter)
        return np.array([[s]])

    S = Q.copy()
    for _ in range(max_iter):
        SA = S @ A
        SB = S @ B
        gain_term = A.T @ SB @ np.linalg.solve(R_eff + B.T @ SB, SB.T @ A)
        S_new = A.T @ SA - gain_term + Q
        S_new = 0.5 * (S_new + S_new.T)
        diff = np.linalg.norm(S_new - S)
        if diff <= tol * (1.0 + np.linalg.norm(S_new)):
            return S_new
        if not np.isfinite(diff) or np.linalg.norm(S_new) > _DIVERGENCE_GUARD:
            raise DareError("DARE iteration diverged")
        S = S_new
    raise DareError(f"DARE did not converge in {max_iter} iterations")


def dare_residual(S: np.ndarray, A: np.ndarray, B: np.ndarray,
                  Q: np.ndarray, R_eff: np.ndarray) -> float:
    """Frobenius norm of S minus the Riccati right-hand side at S."""
    A = np.atleast_2d(A); B = np.atleast_2d(B)
    Q = np.atleast_2d(Q); R_eff = np.atleast_2d(R_eff)
    S = np.atleast_2d(S)
    SB = S @ B
    rhs = A.T @ S @ A - A.T @ SB @ np.linalg.solve(R_eff + B.T @ SB, SB.T @ A) + Q
    return float(np.linalg.norm(S - rhs))


def gain_from(S: np.ndarray, A: np.ndarray, B: np.ndarray, R_eff: np.ndarray) -> np.ndarray:
    """Stationary feedback gain -(R_eff + B^T S B)^{-1} B^T S A."""
    A = np.atleast_2d(A); B = np.atleast_2d(B)
    S = np.atleast_2d(S); R_eff = np.atleast_2d(R_eff)
    SB = S @ B
    return -np.linalg.solve(R_eff + B.T @ SB, SB.T @ A)


@dataclass(frozen=True)
class ParamBlock:
    """Dynamics parameters (A, B) of one decoupled subsystem family.

    ``tag`` identifies the block: "aux" or "eigen<l>".
    """

    A: np.ndarray
    B: np.ndarray
    tag: str = "aux"

    @classmethod
    def zero(cls, d_x: int, d_u: int, tag: str = "aux") -> "ParamBlock":
        return cls(A=np.zeros((d_x, d_x)), B=np.zeros((d_x, d_u)), tag=tag)

    def stacked(self) -> np.ndarray:
        """(d_x + d_u, d_x) regression parameter: x_next = stacked^T z + w."""
        return np.vstack([self.A.T, self.B.T])

    @classmethod
    def from_stacked(cls, theta: np.ndarray, d_x: int, d_u: int, tag: str) -> "ParamBlock":
        theta = np.asarray(theta, dtype=float)
        return cls(A=theta[:d_x, :].T.copy(), B=theta[d_x:d_x + d_u, :].T.copy(), tag=tag)


def true_blocks(m: NetworkModel, basis: SpectralBasis) -> tuple[ParamBlock, list[ParamBlock]]:
    """Ground-truth parameter blocks: auxiliary (A, B) and per-eigenvalue
    (A + lambda_l D, B + lambda_l E)."""
    aux = ParamBlock(A=m.A.copy(), B=m.B.copy(), tag="aux")
    eigen = [ParamBlock(A=m.A + lam * m.D, B=m.B + lam * m.E, tag=f"eigen{ell}")
             for ell, lam in enumerate(basis.eigenvalues)]
    return aux, eigen


@dataclass(frozen=True)
class GainSet:
    """Riccati solutions and gains for one parameter sample.

    ``S_aux``/``G_aux`` are ``None`` exactly when the basis has no auxiliary
    subsystem (full-rank coupling).
    """

    S_aux: np.ndarray | None
    G_aux: np.ndarray | None
    S_eigen: list[np.ndarray]
    G_eigen: list[np.ndarray]


def block_gain(block: ParamBlock, Q: np.ndarray, R: np.ndarray,
               cost_ratio: float) -> tuple[np.ndarray, np.ndarray]:
    """(S, G) for one block with effective control weight cost_ratio * R."""
    R_eff = cost_ratio * np.atleast_2d(R)
    try:
        S = solve_dare(block.A, block.B, Q, R_eff)
    except DareError as exc:
        raise DareError(f"block {block.tag}: {exc}") from exc
    return S, gain_from(S, block.A, block.B, R_eff)


def gains_for(aux_block: ParamBlock | None, eigen_blocks: list[ParamBlock],
              basis: SpectralBasis, m: NetworkModel) -> GainSet:
    """Solve every block's DARE and assemble the stationary gain set."""
    S_aux = G_aux = None
    if basis.has_aux:
        if aux_block is None:
            raise ValueError("auxiliary block required: basis has an auxiliary subsystem")
        S_aux, G_aux = block_gain(aux_block, m.Q, m.R, basis.r0 / basis.q0)
    S_eigen, G_eigen = [], []
    for ell, block in enumerate(eigen_blocks):
        ratio = float(basis.r_eigen[ell] / basis.q_eigen[ell])
        S, G = block_gain(block, m.Q, m.R, ratio)
        S_eigen.append(S)
        G_eigen.append(G)
    return GainSet(S_aux=S_aux, G_aux=G_aux, S_eigen=S_eigen, G_eigen=G_eigen)


def optimal_policy_step(gains: GainSet, basis: SpectralBasis, x: np.ndarray) -> np.ndarray:
    """Optimal control for the current global state: each agent applies the
    auxiliary gain to its auxiliary component plus each eigen gain to its
    eigen component."""
    x_parts, x_aux = project_state(basis, x)
    d_u = (gains.G_aux if gains.G_aux is not None else gains.G_eigen[0]).shape[0]
    u = np.zeros((d_u, basis.n))
    if gains.G_aux is not None:
        u += gains.G_aux @ x_aux
    for ell in range(basis.rank):
        u += gains.G_eigen[ell] @ x_parts[ell]
    return u


def optimal_average_cost(gains: GainSet, basis: SpectralBasis, m: NetworkModel) -> float:
    """Long-run average cost of the optimal policy under the true model:
    q0 (n - L) sigma_w^2 tr(S_aux) + sum_l q_l sigma_w^2 tr(S_l)."""
    total = 0.0
    if basis.has_aux:
        total += basis.q0 * (basis.n - basis.rank) * m.sigma_w2 * float(np.trace(gains.S_aux))
    for ell in range(basis.rank):
        total += float(basis.q_eigen[ell]) * m.sigma_w2 * float(np.trace(gains.S_eigen[ell]))
    return total
