import numpy as np
import pytest

from netlqg.model import build_model, mean_field_config


def scalar_dare_oracle(a: float, b: float, q: float, r: float) -> float:
    """Closed-form positive root of the scalar Riccati quadratic
    b^2 S^2 + (r - a^2 r - q b^2) S - q r = 0; independent of the
    value-iteration solver under test."""
    if b == 0.0:
        if abs(a) >= 1.0:
            raise ValueError("scalar DARE oracle: unstabilizable (b=0, |a|>=1)")
        return q / (1.0 - a * a)
    c2 = b * b
    c1 = r - a * a * r - q * b * b
    c0 = -q * r
    return (-c1 + np.sqrt(c1 * c1 - 4.0 * c2 * c0)) / (2.0 * c2)


def scalar_gain_oracle(a: float, b: float, q: float, r: float) -> float:
    """Feedback gain -(b S a)/(r + b^2 S) with S from the quadratic oracle."""
    s = scalar_dare_oracle(a, b, q, r)
    return -(b * s * a) / (r + b * b * s)


def random_low_rank_coupling(rng: np.random.Generator, n: int, rank: int) -> np.ndarray:
    """Random symmetric matrix with the exact requested rank (< n), built
    from a Haar-ish orthonormal basis."""
    basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lams = rng.uniform(0.3, 2.0, rank) * rng.choice([-1.0, 1.0], rank)
    V = basis[:, :rank]
    return (V * lams) @ V.T


def random_model_config(rng: np.random.Generator, n: int | None = None,
                        d_x: int | None = None, d_u: int | None = None,
                        max_n: int = 20, max_d: int = 3) -> dict:
    """Random structurally valid model: rank-deficient coupling, positive
    cost polynomial on the spectrum, PD costs. Dynamics are arbitrary
    (bounded), which is enough for the algebraic-identity tests."""
    n = int(n if n is not None else rng.integers(2, max_n + 1))
    d_x = int(d_x if d_x is not None else rng.integers(1, max_d + 1))
    d_u = int(d_u if d_u is not None else rng.integers(1, max_d + 1))
    rank = int(rng.integers(0, n))
    M = random_low_rank_coupling(rng, n, rank)

    lams = np.linalg.eigvalsh(M)
    for _ in range(200):
        deg = int(rng.integers(0, 3))
        q_coeffs = np.concatenate([rng.uniform(0.2, 1.0, 1), rng.uniform(-0.2, 0.3, deg)])
        r_coeffs = np.concatenate([rng.uniform(0.2, 1.0, 1), rng.uniform(-0.2, 0.3, deg)])
        ok = all(np.polyval(q_coeffs[::-1], lam) > 1e-3
                 and np.polyval(r_coeffs[::-1], lam) > 1e-3 for lam in lams)
        if ok:
            break
    else:
        q_coeffs = np.array([1.0])
        r_coeffs = np.array([1.0])

    def pd(d):
        W = rng.standard_normal((d, d))
        return W @ W.T + 0.5 * np.eye(d)

    return {
        "n": n, "d_x": d_x, "d_u": d_u, "M": M,
        "A": 0.6 * rng.standard_normal((d_x, d_x)),
        "B": rng.standard_normal((d_x, d_u)),
        "D": 0.3 * rng.standard_normal((d_x, d_x)),
        "E": 0.3 * rng.standard_normal((d_x, d_u)),
        "Q": pd(d_x), "R": pd(d_u),
        "q_coeffs": q_coeffs.tolist(), "r_coeffs": r_coeffs.tolist(),
        "sigma_w2": float(rng.uniform(0.2, 2.0)),
    }


@pytest.fixture
def meanfield10():
    return build_model(mean_field_config(10))
