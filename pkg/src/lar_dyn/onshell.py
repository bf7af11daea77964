"""Amplitude dynamics on the zero-residual leaf: ``d/dt rho_tilde = V rho_tilde``.

Trajectories are sampled exactly by matrix exponentials at the grid times.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateSpectrumError, DomainError, OrthogonalStartError
from .linalg import EigenDecomposition, expm, sym_eig, sym_skew_split
from .simplex import as_lottery, readout_many

UNIT_TOL = 1e-12
GAP_TOL = 1e-8
OVERLAP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PreferenceOperator:
    """Latent generator ``V = S + F`` with cached split and spectrum of S."""

    V: np.ndarray
    S: np.ndarray = field(init=False)
    F: np.ndarray = field(init=False)
    s_eigs: EigenDecomposition = field(init=False)
    lambda_min: float = field(init=False)

    def __post_init__(self):
        V = np.array(self.V, dtype=float)
        S, F = sym_skew_split(V)
        V.setflags(write=False)
        S.setflags(write=False)
        F.setflags(write=False)
        eig = sym_eig(S)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "s_eigs", eig)
        object.__setattr__(self, "lambda_min", float(eig.eigenvalues[0]))

    @classmethod
    def from_split(cls, S, F):
        return cls(np.asarray(S, dtype=float) + np.asarray(F, dtype=float))

    @property
    def n(self):
        return self.V.shape[0]


def as_operator(V):
    return V if isinstance(V, PreferenceOperator) else PreferenceOperator(V)


def _nonzero(v, name="rho_tilde"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise DomainError(f"{name} must be a finite vector")
    if not np.any(v):
        raise DomainError(f"{name} is the zero vector")
    return v


def times_grid(times):
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise DomainError("time grid must be a non-empty 1-d array")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return t


def propagate(G, x0, times):
    """Sample ``expm(t G) x0`` with a fresh exponential at each grid time."""
    times = times_grid(times)
    x0 = np.asarray(x0)
    out = np.empty((times.size,) + x0.shape, dtype=np.result_type(G, x0, float))
    for k, t in enumerate(times):
        out[k] = expm(G, t) @ x0
    return out


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def r(self):
        return np.linalg.norm(self.states, axis=1)

    @property
    def Z(self):
        return np.sum(self.states ** 2, axis=1)

    @property
    def q(self):
        return readout_many(self.states)


def lar_field(rho, V, tol=UNIT_TOL):
    """Tangential projection ``(I - rho rho^T) V rho`` at a unit amplitude."""
    V = as_operator(V)
    rho = _nonzero(rho, "rho")
    if abs(rho @ rho - 1.0) > tol:
        raise DomainError("lar_field needs a unit amplitude")
    Vr = V.V @ rho
    return Vr - (rho @ Vr) * rho


def lar_field_polar(rho, V):
    """Same field written as ``(F + S - <rho, S rho> I) rho``."""
    V = as_operator(V)
    rho = np.asarray(rho, dtype=float)
    return V.F @ rho + V.S @ rho - (rho @ V.S @ rho) * rho


def onshell_flow(V, rho0, times):
    V = as_operator(V)
    rho0 = _nonzero(rho0, "rho0")
    if rho0.size != V.n:
        raise DomainError("rho0 and V dimensions differ")
    times = times_grid(times)
    return AmplitudeTrajectory(times, propagate(V.V, rho0, times))


def polar_rates(rho_tilde, V):
    """Radial and directional rates of the on-shell flow at ``rho_tilde``.

    Returns ``(rdot, rhodot)`` with ``rdot = <rho, S rho> r`` and
    ``rhodot = (F + S - <rho, S rho> I) rho`` for ``rho = rho_tilde / r``.
    """
    V = as_operator(V)
    x = _nonzero(rho_tilde)
    r = float(np.linalg.norm(x))
    rho = x / r
    s = float(rho @ V.S @ rho)
    return s * r, V.F @ rho + V.S @ rho - s * rho


def clock_rate(rho_tilde, V):
    """Production rate ``<rho, (S - lambda_min I) rho>`` of the welfare clock."""
    V = as_operator(V)
    x = _nonzero(rho_tilde)
    rho = x / np.linalg.norm(x)
    return float(rho @ V.S @ rho) - V.lambda_min


def entropic_clock(traj, V):
    """``sigma_plus(t) = log ||rho_tilde(t)|| - lambda_min t`` and its rate."""
    V = as_operator(V)
    sigma = np.log(traj.r) - V.lambda_min * traj.times
    prod = np.array([clock_rate(x, V) for x in traj.states])
    return sigma, prod


def free_energy_check(rho_tilde):
    """Compare ``log Z`` with ``sum q phi + H(q)`` where ``phi = log rho_tilde**2``.

    Components with ``rho_tilde_i = 0`` carry zero weight and are dropped.
    Returns ``(logZ, dual, defect)``.
    """
    x = _nonzero(rho_tilde)
    Z = float(x @ x)
    logZ = math.log(Z)
    nz = x != 0
    q = x[nz] ** 2 / Z
    phi = np.log(x[nz] ** 2)
    dual = float(q @ phi - q @ np.log(q))
    return logZ, dual, abs(logZ - dual)


def logit_posterior(q0, theta, T):
    """Closed form ``q0 exp(2 T theta) / sum``; inverse temperature is ``2T``."""
    q0 = as_lottery(q0, interior=True, name="q0")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != q0.shape:
        raise DomainError("theta and q0 dimensions differ")
    logw = np.log(q0) + 2.0 * T * theta
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def peu_limit(S, rho0, gap_tol=GAP_TOL, overlap_tol=OVERLAP_TOL):
    """Long-horizon readout of the flow generated by symmetric ``S``.

    Returns ``(q_star, gap)`` where ``q_star`` is the squared dominant
    eigenvector. Raises when the top eigenvalue is not simple or when
    ``rho0`` has no overlap with the dominant eigenvector.
    """
    eig = sym_eig(S)
    rho0 = _nonzero(rho0, "rho0")
    lam = eig.eigenvalues
    gap = float(lam[-1] - lam[-2]) if lam.size > 1 else math.inf
    if gap <= gap_tol:
        raise DegenerateSpectrumError(f"top eigenvalue gap {gap:.3e} is not above {gap_tol:.1e}")
    w = eig.eigenvectors[:, -1]
    overlap = abs(w @ rho0) / np.linalg.norm(rho0)
    if overlap <= overlap_tol:
        raise OrthogonalStartError(f"start overlap {overlap:.3e} with the dominant eigenvector")
    return w * w / (w @ w), gap
