"""Continuous-time LQR synthesis: Riccati solution and feedback gain.

solve_care extracts the stable invariant subspace of the Hamiltonian

    H = [[A, -B R^-1 B^T],
         [-Q, -A^T]]

with an ordered real Schur decomposition and recovers P from its basis.
The solver accepts any n x n / n x m pair so small analytic cases can be
checked by hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllConditioned, NotStabilizable

# residual contract: ||A'P + PA - PBR^-1B'P + Q||_F <= RESIDUAL_RTOL * max(1, ||Q||_F)
RESIDUAL_RTOL = 1e-8
_SYM_TOL = 1e-12


def _symmetric(mat: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(mat, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    if float(np.abs(m - m.T).max()) > _SYM_TOL * scale:
        raise ValueError(f"{name} must be symmetric to {_SYM_TOL}")
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class CostWeights:
    """State weight Q (symmetric PSD) and input weight R (symmetric PD)."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        q = _symmetric(self.Q, "Q")
        r = _symmetric(self.R, "R")
        q_eigs = np.linalg.eigvalsh(q)
        if q_eigs.min() < -1e-10 * max(1.0, q_eigs.max()):
            raise ValueError(f"Q must be positive semidefinite (min eig {q_eigs.min()})")
        r_eigs = np.linalg.eigvalsh(r)
        if r_eigs.min() <= 0.0:
            raise ValueError(f"R must be positive definite (min eig {r_eigs.min()})")
        q.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "R", r)

    @classmethod
    def from_diagonals(cls, q_diag, r_diag) -> "CostWeights":
        return cls(np.diag(np.asarray(q_diag, dtype=float)),
                   np.diag(np.asarray(r_diag, dtype=float)))


def _check_system(A, B, weights):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"A must be square, got {A.shape}")
    if B.shape[0] != n:
        raise ValueError(f"B must have {n} rows, got {B.shape}")
    if weights.Q.shape != (n, n):
        raise ValueError(f"Q must be {n}x{n}, got {weights.Q.shape}")
    m = B.shape[1]
    if weights.R.shape != (m, m):
        raise ValueError(f"R must be {m}x{m}, got {weights.R.shape}")
    return A, B


def solve_care(A, B, weights: CostWeights) -> np.ndarray:
    """Solve A'P + PA - P B R^-1 B' P + Q = 0 for the stabilizing P.

    Returns the symmetric PSD solution.  Raises NotStabilizable when no
    stabilizing solution exists (wrong stable-subspace dimension, singular
    basis, indefinite P, or a non-Hurwitz closed loop) and IllConditioned
    when the residual contract is not met.
    """
    A, B = _check_system(A, B, weights)
    n = A.shape[0]
    r_chol = scipy.linalg.cho_factor(weights.R)
    G = B @ scipy.linalg.cho_solve(r_chol, B.T)

    H = np.block([[A, -G], [-weights.Q, -A.T]])
    _, Z, sdim = scipy.linalg.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise NotStabilizable(
            f"stable invariant subspace has dimension {sdim}, expected {n}"
        )
    Z11 = Z[:n, :n]
    Z21 = Z[n:, :n]
    try:
        P = np.linalg.solve(Z11.T, Z21.T).T
    except np.linalg.LinAlgError as exc:
        raise NotStabilizable(f"singular subspace basis: {exc}") from exc

    scale = max(1.0, float(np.abs(P).max()))
    if float(np.abs(P - P.T).max()) > 1e-10 * scale:
        raise IllConditioned("Riccati solution lost symmetry")
    P = 0.5 * (P + P.T)

    eigs = np.linalg.eigvalsh(P)
    if eigs.min() < -1e-8 * max(1.0, eigs.max()):
        raise NotStabilizable(f"Riccati solution not PSD (min eig {eigs.min()})")

    residual = A.T @ P + P @ A - P @ G @ P + weights.Q
    limit = RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(weights.Q)))
    if float(np.linalg.norm(residual)) > limit:
        raise IllConditioned(
            f"CARE residual {np.linalg.norm(residual):.3e} exceeds {limit:.3e}"
        )

    K = scipy.linalg.cho_solve(r_chol, B.T @ P)
    closed = np.linalg.eigvals(A - B @ K)
    if closed.real.max() >= 0.0:
        raise NotStabilizable(
            f"closed loop not Hurwitz (max Re eig {closed.real.max():.3e})"
        )
    return P


def lqr_gain(A, B, weights: CostWeights) -> np.ndarray:
    """Optimal state-feedback gain K = R^-1 B' P for u = -K x."""
    A, B = _check_system(A, B, weights)
    P = solve_care(A, B, weights)
    return scipy.linalg.cho_solve(scipy.linalg.cho_factor(weights.R), B.T @ P)
