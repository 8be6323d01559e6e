"""Networked linear-quadratic-Gaussian system definition.

A system of n identical subsystems is coupled through a symmetric matrix M:
each subsystem's next state depends on its own state/control and on the
M-weighted aggregate of everyone else's ("network field"), and the quadratic
cost couples subsystems through polynomial weights in M.

States and controls are stored columnwise: x is d_x-by-n, u is d_u-by-n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AssumptionError, ConfigError

#: absolute eigenvalue floor for "positive definite" checks (A2)
PD_TOL = 1e-10

#: max-abs asymmetry above which symmetrizing M triggers a warning
SYMMETRY_WARN_TOL = 1e-8


def _as_matrix(value, rows: int, cols: int, name: str) -> np.ndarray:
    """Coerce scalars / nested lists to a float matrix of the given shape."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        if rows != cols and rows != 1 and cols != 1:
            raise ConfigError(f"{name}: scalar given for non-square shape {rows}x{cols}")
        if rows == cols:
            arr = arr * np.eye(rows)
        else:
            arr = np.full((rows, cols), float(arr))
    if arr.shape != (rows, cols):
        raise ConfigError(f"{name}: expected shape {rows}x{cols}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name}: non-finite entries")
    return arr


def _check_sym_pd(mat: np.ndarray, name: str) -> np.ndarray:
    sym = 0.5 * (mat + mat.T)
    if np.max(np.abs(mat - mat.T)) > SYMMETRY_WARN_TOL:
        raise AssumptionError("A2", f"{name} must be symmetric")
    min_eig = float(np.linalg.eigvalsh(sym).min())
    if min_eig <= PD_TOL:
        raise AssumptionError("A2", f"{name} must be positive definite (min eigenvalue {min_eig:.3e})")
    return sym


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NetworkModel:
    """Immutable ground-truth description of one networked LQG system.

    Fields follow the columnwise convention above. The dynamics parameters
    (A, B, D, E) form the unknown-to-the-learner part of the model; the
    coupling M, the cost matrices (Q, R) and the cost polynomial
    coefficients are known side information.
    """

    n: int
    d_x: int
    d_u: int
    M: np.ndarray        # n x n, symmetric coupling
    A: np.ndarray        # d_x x d_x local state transition
    B: np.ndarray        # d_x x d_u local control matrix
    D: np.ndarray        # d_x x d_x network-field state coupling
    E: np.ndarray        # d_x x d_u network-field control coupling
    Q: np.ndarray        # d_x x d_x state cost, symmetric positive definite
    R: np.ndarray        # d_u x d_u control cost, symmetric positive definite
    q_coeffs: tuple      # state cost-polynomial coefficients (q_0, q_1, ...)
    r_coeffs: tuple      # control cost-polynomial coefficients (r_0, r_1, ...)
    sigma_w2: float      # per-coordinate noise variance (noise cov = sigma_w2 * I)
    Xi1: np.ndarray = field(default=None)  # d_x x d_x initial-state covariance

    @cached_property
    def cost_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """(H_x, H_u): the n-by-n cost coupling weights, polynomials in M."""
        return (_poly_of_matrix(self.q_coeffs, self.M),
                _poly_of_matrix(self.r_coeffs, self.M))

    def theta(self) -> np.ndarray:
        """Stacked dynamics parameter [A, B, D, E]^T, shape (2 d_x + 2 d_u, d_x)."""
        return np.vstack([self.A.T, self.B.T, self.D.T, self.E.T])


def _poly_of_matrix(coeffs, M: np.ndarray) -> np.ndarray:
    """Evaluate sum_k c_k M^k with M^0 = I (Horner form)."""
    n = M.shape[0]
    out = np.zeros((n, n))
    for c in reversed(tuple(coeffs)):
        out = out @ M + c * np.eye(n)
    return out


def build_model(config: dict) -> NetworkModel:
    """Validate a model description and construct the immutable model.

    ``config`` either names a preset (``preset`` plus override keys) or
    supplies every field explicitly: n, d_x, d_u, M, A, B, D, E, Q, R,
    q_coeffs, r_coeffs, sigma_w2 and optionally Xi1. Scalars are accepted
    wherever a matrix is expected and are promoted to scaled identities.

    M is symmetrized as (M + M^T)/2; asymmetry beyond 1e-8 warns.
    """
    cfg = dict(config)
    preset = cfg.pop("preset", None)
    if preset is not None:
        base = preset_config(preset, cfg)
        base.update({k: v for k, v in cfg.items() if k not in base or v is not None})
        cfg = base

    try:
        n = int(cfg["n"])
        d_x = int(cfg.get("d_x", 1))
        d_u = int(cfg.get("d_u", 1))
    except KeyError as exc:
        raise ConfigError(f"missing required model key: {exc.args[0]}") from None
    if n < 1 or d_x < 1 or d_u < 1:
        raise ConfigError(f"dimensions must be positive (n={n}, d_x={d_x}, d_u={d_u})")

    missing = [k for k in ("M", "A", "B", "D", "E", "Q", "R", "q_coeffs", "r_coeffs", "sigma_w2")
               if k not in cfg]
    if missing:
        raise ConfigError(f"missing required model keys: {', '.join(missing)}")

    M = _as_matrix(cfg["M"], n, n, "M")
    asym = float(np.max(np.abs(M - M.T))) if n > 0 else 0.0
    if asym > SYMMETRY_WARN_TOL:
        warnings.warn(f"coupling matrix symmetrized; asymmetry {asym:.3e} exceeds {SYMMETRY_WARN_TOL:g}")
    M = 0.5 * (M + M.T)

    A = _as_matrix(cfg["A"], d_x, d_x, "A")
    B = _as_matrix(cfg["B"], d_x, d_u, "B")
    D = _as_matrix(cfg["D"], d_x, d_x, "D")
    E = _as_matrix(cfg["E"], d_x, d_u, "E")
    Q = _check_sym_pd(_as_matrix(cfg["Q"], d_x, d_x, "Q"), "Q")
    R = _check_sym_pd(_as_matrix(cfg["R"], d_u, d_u, "R"), "R")

    q_coeffs = tuple(float(c) for c in np.atleast_1d(cfg["q_coeffs"]))
    r_coeffs = tuple(float(c) for c in np.atleast_1d(cfg["r_coeffs"]))
    if not q_coeffs or not r_coeffs:
        raise ConfigError("q_coeffs and r_coeffs must be non-empty")

    sigma_w2 = float(cfg["sigma_w2"])
    if sigma_w2 < 0:
        raise ConfigError(f"sigma_w2 must be non-negative, got {sigma_w2}")

    Xi1 = cfg.get("Xi1")
    if Xi1 is None:
        Xi1 = np.zeros((d_x, d_x))
    else:
        Xi1 = _as_matrix(Xi1, d_x, d_x, "Xi1")
        if float(np.linalg.eigvalsh(0.5 * (Xi1 + Xi1.T)).min()) < -PD_TOL:
            raise ConfigError("Xi1 must be positive semidefinite")

    return NetworkModel(
        n=n, d_x=d_x, d_u=d_u,
        M=_freeze(M), A=_freeze(A), B=_freeze(B), D=_freeze(D), E=_freeze(E),
        Q=_freeze(Q), R=_freeze(R),
        q_coeffs=q_coeffs, r_coeffs=r_coeffs,
        sigma_w2=sigma_w2, Xi1=_freeze(Xi1),
    )


def cost_weight_matrices(m: NetworkModel) -> tuple[np.ndarray, np.ndarray]:
    """H_x = sum_k q_k M^k and H_u = sum_k r_k M^k."""
    return m.cost_weights


def per_step_cost(m: NetworkModel, x: np.ndarray, u: np.ndarray) -> float:
    """Quadratic stage cost trace(Q x H_x x^T) + trace(R u H_u u^T).

    Equals the double sum over subsystem pairs weighted by H_x / H_u entries;
    the trace form avoids the O(n^2 d^2) pairwise expansion.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (m.d_x, m.n) or u.shape != (m.d_u, m.n):
        raise ValueError(f"state/control shape mismatch: x {x.shape}, u {u.shape}, "
                         f"expected ({m.d_x},{m.n}) and ({m.d_u},{m.n})")
    H_x, H_u = m.cost_weights
    return float(np.sum((m.Q @ x) * (x @ H_x)) + np.sum((m.R @ u) * (u @ H_u)))


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

# scalar dynamics shared by both experiment families
_SCALAR_DYNAMICS = {"d_x": 1, "d_u": 1, "A": 1.0, "B": 0.3, "D": 0.5, "E": 0.2,
                    "Q": 1.0, "R": 1.0, "sigma_w2": 1.0}


def mean_field_config(n: int = 10, kappa: float = 0.5, **overrides) -> dict:
    """Complete-graph coupling with edge weight 1/n and per-agent cost scaling.

    Cost polynomial degree 1: q_0 = r_0 = 1/n, q_1 = r_1 = kappa/n.
    """
    n = int(n)
    cfg = dict(_SCALAR_DYNAMICS)
    cfg.update({
        "n": n,
        "M": np.full((n, n), 1.0 / n),
        "q_coeffs": [1.0 / n, kappa / n],
        "r_coeffs": [1.0 / n, kappa / n],
    })
    cfg.update(overrides)
    return cfg


def low_rank_config(a: float = 0.05, b: float = 0.05, n_rep: int = 1, **overrides) -> dict:
    """Rank-2 ring-of-four base graph replicated over complete blocks.

    The 4-node base adjacency (weights a and b on alternating edges) is
    Kronecker-multiplied with the (1/n_rep)-weighted complete graph, giving
    4*n_rep agents and exactly two non-zero coupling eigenvalues
    +/- sqrt(2(a^2+b^2)). Cost polynomial: q(s) = 1 - 2s + s^2, r(s) = 1
    (not normalized per agent).
    """
    n_rep = int(n_rep)
    base = np.array([
        [0.0, a, 0.0, b],
        [a, 0.0, a, 0.0],
        [0.0, a, 0.0, b],
        [b, 0.0, b, 0.0],
    ])
    cfg = dict(_SCALAR_DYNAMICS)
    cfg.update({
        "n": 4 * n_rep,
        "M": np.kron(base, np.full((n_rep, n_rep), 1.0 / n_rep)),
        "q_coeffs": [1.0, -2.0, 1.0],
        "r_coeffs": [1.0],
    })
    cfg.update(overrides)
    return cfg


_PRESETS = {
    "meanfield": mean_field_config,
    "lowrank": low_rank_config,
}


def preset_config(name: str, overrides: dict | None = None) -> dict:
    """Resolve a named model preset, applying preset-specific override keys.

    Preset parameters (``n``/``kappa`` for meanfield, ``a``/``b``/``n_rep``
    for lowrank) are consumed here; remaining keys pass through to
    :func:`build_model` verbatim.
    """
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(_PRESETS)}")
    overrides = dict(overrides or {})
    factory = _PRESETS[name]
    import inspect

    params = {}
    for key in list(overrides):
        if key in inspect.signature(factory).parameters:
            params[key] = overrides.pop(key)
    return factory(**params)
