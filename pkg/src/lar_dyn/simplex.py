"""Geometry of the probability simplex under the square-root lift.

The lift ``q -> sqrt(q)`` sends the simplex into the unit sphere. The
Fisher-Rao metric is four times the pulled-back round metric. Preferences
enter as a linear operator V acting on amplitudes; the induced 1-form on the
simplex is ``beta_q(v) = sum_i (V sqrt(q))_i v_i / (2 sqrt(q_i))``.
"""

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from .errors import DomainError
from .linalg import SYMMETRY_TOL, is_skew, is_symmetric

INTERIOR_EPS = 1e-9
SUM_TOL = 1e-12
CLOSURE_TOL = 1e-12
GL_NODES = 64


def as_lottery(q, interior=False, eps=INTERIOR_EPS, name="q"):
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise DomainError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(q)):
        raise DomainError(f"{name} has non-finite entries")
    if np.any(q < 0):
        raise DomainError(f"{name} has negative entries")
    if abs(q.sum() - 1.0) > SUM_TOL * max(1, q.size):
        raise DomainError(f"{name} does not sum to one (sum={float(q.sum())!r})")
    if interior and np.min(q) <= eps:
        raise DomainError(f"{name} is not in the interior (min={np.min(q):.3e})")
    return q


def as_tangent(v, n, name="v"):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise DomainError(f"{name} must have length {n}")
    if abs(v.sum()) > SUM_TOL * max(1.0, np.abs(v).sum()):
        raise DomainError(f"{name} is not zero-sum (sum={v.sum()!r})")
    return v


def lift(q):
    """Positive square roots of an interior lottery."""
    return np.sqrt(as_lottery(q, interior=True))


def readout(rho_tilde):
    """``rho_tilde**2 / ||rho_tilde||**2``; sign-blind and scale invariant."""
    r = np.asarray(rho_tilde, dtype=float)
    z = r @ r
    if not z > 0:
        raise DomainError("readout of a zero amplitude")
    return r * r / z


def readout_many(states):
    """Row-wise readout for a stack of amplitude vectors."""
    X = np.asarray(states, dtype=float)
    Z = np.sum(X * X, axis=-1, keepdims=True)
    if np.any(Z <= 0):
        raise DomainError("readout of a zero amplitude")
    return X * X / Z


def fisher_rao_inner(q, v, w):
    q = as_lottery(q, interior=True)
    v = as_tangent(v, q.size, "v")
    w = as_tangent(w, q.size, "w")
    return float(np.sum(v * w / q))


def perceptual_distance(q, q2, c=1.0):
    """``c * arccos(sum sqrt(q q2))``: the great-circle angle between lifts."""
    if not c > 0:
        raise DomainError("distance scale c must be positive")
    q = as_lottery(q, name="q")
    q2 = as_lottery(q2, name="q2")
    if q.shape != q2.shape:
        raise DomainError("lotteries have different dimensions")
    bc = float(np.sum(np.sqrt(q * q2)))
    return c * math.acos(min(1.0, max(-1.0, bc)))


def utility_potential(q, S, tol=SYMMETRY_TOL):
    """``U(q) = sqrt(q)^T S sqrt(q) / 2``."""
    S = np.asarray(S, dtype=float)
    if not is_symmetric(S, tol):
        raise DomainError("utility potential needs a symmetric S")
    r = lift(q)
    return 0.5 * float(r @ S @ r)


def beta_eval(q, v, V):
    """Preference 1-form at ``q`` applied to the zero-sum vector ``v``."""
    r = lift(q)
    v = as_tangent(v, r.size)
    V = np.asarray(V, dtype=float)
    return float(np.sum((V @ r) * v / (2.0 * r)))


def ssb_regret(rho, rho2, F, tol=SYMMETRY_TOL):
    """Skew-symmetric bilinear regret ``rho^T F rho2``."""
    F = np.asarray(F, dtype=float)
    if not is_skew(F, tol):
        raise DomainError("regret form needs a skew F")
    return float(np.asarray(rho, dtype=float) @ F @ np.asarray(rho2, dtype=float))


def simplex_drift(q, V):
    """Velocity on the simplex induced by the amplitude field ``Q_rho V rho``.

    ``qdot_i = 2 sqrt(q_i) (Q_rho V rho)_i`` with ``rho = sqrt(q)``. It is
    Fisher-Rao dual to four times the preference form:
    ``g_F(qdot, w) = 4 beta_q(w)`` for every zero-sum ``w``.
    """
    r = lift(q)
    V = np.asarray(V, dtype=float)
    Vr = V @ r
    x = Vr - (r @ Vr) * r
    return 2.0 * r * x


def trace_normalize(V):
    """Return ``V - tr(V)/n I``; the readout dynamics do not see the shift."""
    V = np.asarray(V, dtype=float)
    return V - np.trace(V) / V.shape[0] * np.eye(V.shape[0])


# ---------------------------------------------------------------------------
# loop holonomy
# ---------------------------------------------------------------------------

def _beta_along(Q, Qdot, V):
    # beta_q(qdot) at many points; qdot need not be exactly zero-sum here
    R = np.sqrt(Q)
    VR = R @ V.T
    return np.sum(VR * Qdot / (2.0 * R), axis=1)


def _loop_integral(spline, V, segments, nodes, weights):
    edges = np.linspace(0.0, 1.0, segments + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    Q = spline(s)
    if np.min(Q) <= INTERIOR_EPS:
        raise DomainError("interpolated loop leaves the interior of the simplex")
    Qdot = spline(s, 1)
    return float(w @ _beta_along(Q, Qdot, V))


def loop_holonomy(loop, V, nodes=GL_NODES, segments=None):
    """Integral of the preference 1-form around a closed loop.

    ``loop`` is an (m, n) array of lotteries with ``loop[0] == loop[-1]``.
    The loop is interpolated by a periodic cubic spline over a uniform
    parameter and integrated with composite Gauss-Legendre quadrature
    (``nodes`` per segment, one segment per sample interval by default).
    Returns ``(value, error_estimate)``; the estimate compares against a
    run with every segment halved.
    """
    P = np.asarray(loop, dtype=float)
    V = np.asarray(V, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2:
        raise DomainError("loop must be an (m, n) array with m >= 2")
    if V.shape != (P.shape[1], P.shape[1]):
        raise DomainError("V and loop dimensions differ")
    if np.max(np.abs(P[0] - P[-1])) > CLOSURE_TOL:
        raise DomainError("loop is not closed")
    if np.min(P) <= INTERIOR_EPS:
        raise DomainError("loop leaves the interior of the simplex")
    if np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-9:
        raise DomainError("loop samples are not lotteries")
    if np.max(np.abs(P - P[0])) == 0.0:
        return 0.0, 0.0
    P = P.copy()
    P[-1] = P[0]
    m = P.shape[0] - 1
    if m < 3:
        raise DomainError("a non-constant loop needs at least 3 distinct samples")
    spline = CubicSpline(np.linspace(0.0, 1.0, m + 1), P, bc_type="periodic")
    x, w = leggauss(nodes)
    seg = m if segments is None else int(segments)
    coarse = _loop_integral(spline, V, seg, x, w)
    fine = _loop_integral(spline, V, 2 * seg, x, w)
    return fine, abs(fine - coarse)


def fisher_rao_circle(center, radius, samples=256, plane=None):
    """Closed loop of lotteries at Fisher-Rao distance ``radius`` from ``center``.

    On the sphere this is a small circle of angular radius ``radius/2`` about
    ``sqrt(center)``. ``plane`` optionally supplies two vectors spanning the
    tangent plane; by default the first two tangent directions from a QR of
    ``[rho0, e_1, e_2, ...]`` are used, oriented so ``(rho0, u1, u2)`` is
    right-handed when n = 3.
    """
    rho0 = lift(center)
    n = rho0.size
    if n < 3 and plane is None:
        raise DomainError("a circle needs n >= 3")
    if plane is None:
        Qm, _ = np.linalg.qr(np.column_stack([rho0, np.eye(n)[:, : n - 1]]))
        Qm = Qm * np.sign(Qm[:, 0] @ rho0)
        u1, u2 = Qm[:, 1], Qm[:, 2]
        if n == 3 and np.linalg.det(np.column_stack([rho0, u1, u2])) < 0:
            u2 = -u2
    else:
        u1, u2 = (np.asarray(p, dtype=float) for p in plane)
    a = 0.5 * radius
    th = np.linspace(0.0, 2 * np.pi, samples + 1)
    R = (math.cos(a) * rho0[None, :]
         + math.sin(a) * (np.cos(th)[:, None] * u1 + np.sin(th)[:, None] * u2))
    Q = R * R
    Q /= Q.sum(axis=1, keepdims=True)
    Q[-1] = Q[0]
    return Q
