"""Linear Hamiltonian flow on the lifted phase space of pairs ``(rho_tilde, y)``.

``d/dt rho_tilde = V rho_tilde + y`` and ``d/dt y = -V^T y``. The residual
``y`` measures departure from the on-shell flow; ``y = 0`` is invariant.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import DomainError
from .linalg import expm
from .onshell import as_operator, propagate, times_grid

BISECT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PhaseState:
    rho_tilde: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rho_tilde)
        y = np.asarray(self.y)
        if r.ndim != 1 or r.shape != y.shape:
            raise DomainError("rho_tilde and y must be vectors of equal length")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(y))):
            raise DomainError("phase state has non-finite entries")
        object.__setattr__(self, "rho_tilde", r)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.rho_tilde.size

    def stacked(self):
        return np.concatenate([self.rho_tilde, self.y])

    @classmethod
    def from_stacked(cls, z):
        z = np.asarray(z)
        n = z.size // 2
        return cls(z[:n], z[n:])


@dataclass(frozen=True, eq=False)
class LiftedTrajectory:
    times: np.ndarray
    rho_tilde: np.ndarray     # (m, n)
    y: np.ndarray             # (m, n)

    @property
    def Lambda(self):
        return 2.0 * np.sum(self.rho_tilde * self.y, axis=1)

    @property
    def y_sq(self):
        return np.sum(self.y * self.y, axis=1)

    @property
    def Z(self):
        return np.sum(self.rho_tilde * self.rho_tilde, axis=1)

    @property
    def sigma(self):
        return 0.5 * np.log(self.Z)

    def state(self, k):
        return PhaseState(self.rho_tilde[k], self.y[k])


def symplectic_form(n):
    I = np.eye(n)
    O = np.zeros((n, n))
    return np.block([[O, I], [-I, O]])


def product_structure(n):
    """``K = diag(I, -I)``."""
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def lifted_generator(V):
    """``[[V, I], [0, -V^T]]``."""
    V = as_operator(V)
    n = V.n
    return np.block([[V.V, np.eye(n)], [np.zeros((n, n)), -V.V.T]])


def hamiltonian_defect(A):
    """``||A^T J + J A||`` for a 2n x 2n matrix ``A``."""
    J = symplectic_form(A.shape[0] // 2)
    return float(np.linalg.norm(A.T @ J + J @ A))


def lifted_flow(V, Z0, times):
    V = as_operator(V)
    if Z0.n != V.n:
        raise DomainError("phase state and V dimensions differ")
    times = times_grid(times)
    X = propagate(lifted_generator(V), Z0.stacked(), times)
    n = V.n
    return LiftedTrajectory(times, X[:, :n], X[:, n:])


def symplectic_defect(V, t):
    """Spectral norm of ``Phi^T J Phi - J`` for ``Phi = expm(t A)``."""
    A = lifted_generator(V)
    Phi = expm(A, t)
    J = symplectic_form(A.shape[0] // 2)
    return float(np.linalg.norm(Phi.T @ J @ Phi - J, 2))


def witt_shear_split(V):
    """``(A_pu, A_sh)``: block-diagonal part ``diag(V, -V^T)`` and the nilpotent
    shear ``[[0, I], [0, 0]]``. They sum to the lifted generator."""
    V = as_operator(V)
    n = V.n
    O = np.zeros((n, n))
    A_pu = np.block([[V.V, O], [O, -V.V.T]])
    A_sh = np.block([[O, np.eye(n)], [O, O]])
    return A_pu, A_sh


def hamiltonian(Z, V):
    """``||y||^2 / 2 + <y, V rho_tilde>``."""
    V = as_operator(V)
    return 0.5 * float(Z.y @ Z.y) + float(Z.y @ V.V @ Z.rho_tilde)


def _uniform_step(times):
    h = np.diff(times)
    if np.max(np.abs(h - h[0])) <= 1e-12 * max(1.0, abs(times[-1])):
        return float(h[0])
    return None


def _cumulative(times, f):
    """Running integral of ``f`` on the grid, zero at the first point.

    On uniform grids even nodes use composite Simpson and odd nodes close
    the last three intervals with the 3/8 rule, so every node is fourth
    order. Non-uniform grids fall back to scipy's cumulative Simpson.
    """
    m = times.size
    if m < 3:
        raise DomainError("quadrature needs at least 3 grid points")
    h = _uniform_step(times)
    if h is None or m < 4:
        return np.concatenate([[0.0], cumulative_simpson(f, x=times)])
    out = np.zeros(m)
    out[2::2] = np.cumsum(h / 3.0 * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2]))
    k = np.arange(3, m, 2)
    out[k] = out[k - 3] + 3.0 * h / 8.0 * (f[k - 3] + 3.0 * f[k - 2] + 3.0 * f[k - 1] + f[k])
    # first interval from the cubic through the first four nodes
    out[1] = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
    return out


def neutral_index(traj):
    """Return ``(Lambda, balance_defect)``.

    The defect is the largest gap between ``Lambda(t) - Lambda(t0)`` and
    ``2 * int_{t0}^t ||y||^2`` along the grid (see ``_cumulative``).
    """
    lam = traj.Lambda
    acc = _cumulative(traj.times, traj.y_sq)
    defect = float(np.max(np.abs(lam - lam[0] - 2.0 * acc)))
    return lam, defect


def accumulation_series(traj):
    """Running ``int_{t0}^t ||y||^2`` on the trajectory grid."""
    return _cumulative(traj.times, traj.y_sq)


def action_accumulation(traj, t0=None, t=None):
    """``int_{t0}^{t} ||y||^2`` with both ends snapped to grid points.

    Returns ``(value, error_estimate)``; the estimate compares with Simpson
    on every other grid point when the interval count allows it, and with
    the trapezoid rule otherwise.
    """
    times = traj.times
    i0 = 0 if t0 is None else int(np.argmin(np.abs(times - t0)))
    i1 = times.size - 1 if t is None else int(np.argmin(np.abs(times - t)))
    if i1 < i0:
        raise DomainError("t must not precede t0")
    if i1 == i0:
        return 0.0, 0.0
    ts = times[i0:i1 + 1]
    f = traj.y_sq[i0:i1 + 1]
    if ts.size < 3:
        value = float(0.5 * np.sum((f[1:] + f[:-1]) * np.diff(ts)))
        return value, abs(value)
    value = float(_cumulative(ts, f)[-1])
    if ts.size >= 5 and (ts.size - 1) % 2 == 0:
        coarse = float(_cumulative(ts[::2], f[::2])[-1])
    else:
        coarse = float(0.5 * np.sum((f[1:] + f[:-1]) * np.diff(ts)))
    err = abs(value - coarse)
    return value, err


def _lambda_at(A, z0, n, t):
    z = expm(A, t) @ z0
    return 2.0 * float(z[:n] @ z[n:])


def cone_crossing_time(V, Z0, horizon, tol=BISECT_TOL):
    """First time ``Lambda`` reaches zero, or ``None``.

    ``Lambda`` is nondecreasing, so it crosses at most once. A start with
    ``Lambda(0) = 0`` and nonzero residual counts as crossing at ``t = 0``.
    A start with ``Lambda(0) > 0`` has already crossed and returns ``None``.
    """
    V = as_operator(V)
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    A = lifted_generator(V)
    z0 = Z0.stacked().astype(float)
    n = V.n
    lam0 = 2.0 * float(Z0.rho_tilde @ Z0.y)
    if lam0 > 0:
        return None
    if lam0 == 0:
        return 0.0 if np.any(Z0.y) else None
    if _lambda_at(A, z0, n, horizon) < 0:
        return None
    lo, hi = 0.0, float(horizon)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _lambda_at(A, z0, n, mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def offshell_sigma_rate(Z, V):
    """``<rho, S rho> + <rho_tilde, y> / Z``: growth rate of ``log ||rho_tilde||``."""
    V = as_operator(V)
    r = np.asarray(Z.rho_tilde, dtype=float)
    zz = float(r @ r)
    if zz == 0:
        raise DomainError("rho_tilde is the zero vector")
    return float(r @ V.S @ r) / zz + float(r @ Z.y) / zz
