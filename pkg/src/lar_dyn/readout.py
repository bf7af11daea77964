"""Readouts of amplitudes in orthonormal contexts, and the modal interference split."""

from dataclasses import dataclass
import warnings

import numpy as np

from .errors import DomainError, IllConditionedError
from .linalg import EIGVEC_COND_LIMIT, expm, general_eig, linear_solve
from .onshell import as_operator
from .simplex import readout

ORTHO_TOL = 1e-10
UNIT_TOL = 1e-12
HYPERBOLA_TOL = 1e-12

# Sequential readouts collapse onto the observed basis vector before the
# second context is applied. This rule is a modelling choice; reports carry
# this tag so downstream users can tell it apart from the other outputs.
SEQUENTIAL_PROVENANCE = "modeling-convention:rank-1-collapse"


@dataclass(frozen=True, eq=False)
class ReadoutContext:
    """Orthogonal matrix whose columns are the readout basis."""

    B: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise DomainError("context must be a square matrix")
        if np.linalg.norm(B.T @ B - np.eye(B.shape[0])) > ORTHO_TOL:
            raise DomainError("context matrix is not orthogonal")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    @classmethod
    def rotation(cls, angle):
        c, s = np.cos(angle), np.sin(angle)
        return cls(np.array([[c, -s], [s, c]]))

    @property
    def n(self):
        return self.B.shape[0]


def as_context(B):
    return B if isinstance(B, ReadoutContext) else ReadoutContext(B)


def _unit(rho, n):
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (n,):
        raise DomainError("amplitude and context dimensions differ")
    if abs(rho @ rho - 1.0) > UNIT_TOL:
        raise DomainError("readout needs a unit amplitude")
    return rho


def context_readout(rho, B):
    """``pi_B(rho)_k = <b_k, rho>**2``."""
    B = as_context(B)
    rho = _unit(rho, B.n)
    return (B.B.T @ rho) ** 2


def hyperbolic_born_check(rho_tilde, u_a, u_b, tol=HYPERBOLA_TOL):
    """Born form with split-complex phases against the plain readout.

    Each phase ``u_i = u_a[i] + u_b[i] j`` must satisfy ``u_a**2 - u_b**2 = 1``.
    Forms ``psi_i = rho_tilde_i u_i`` and compares ``psi^# psi / sum`` with
    ``readout(rho_tilde)``. Returns the max absolute difference.
    """
    r = np.asarray(rho_tilde, dtype=float)
    ua = np.asarray(u_a, dtype=float)
    ub = np.asarray(u_b, dtype=float)
    if ua.shape != r.shape or ub.shape != r.shape:
        raise DomainError("phase and amplitude dimensions differ")
    if np.max(np.abs(ua * ua - ub * ub - 1.0)) > tol:
        raise DomainError("split phase is off the unit hyperbola")
    pa = r * ua
    pb = r * ub
    m = pa * pa - pb * pb
    born = m / m.sum()
    return float(np.max(np.abs(born - readout(r))))


@dataclass(frozen=True, eq=False)
class InterferenceReport:
    t: float
    diagonal: np.ndarray
    cross: np.ndarray
    total: np.ndarray
    eigen_residual: float
    condition: float
    imag_residue: float

    @property
    def consistency(self):
        return float(np.max(np.abs(self.diagonal + self.cross - self.total)))


def interference_decomposition(V, rho_tilde0, t, cond_limit=EIGVEC_COND_LIMIT):
    """Split ``rho_tilde_i(t)**2`` into same-mode and cross-mode terms.

    With ``V = P diag(lam) P^{-1}`` and ``c = P^{-1} rho_tilde0`` the amplitude
    is ``sum_a P_ia c_a exp(lam_a t)``. Its square has diagonal terms
    ``a = b`` and cross terms ``a != b``. All three are computed independently
    of one another.
    """
    V = as_operator(V)
    r0 = np.asarray(rho_tilde0, dtype=float)
    if r0.shape != (V.n,):
        raise DomainError("rho_tilde0 and V dimensions differ")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eig = general_eig(V.V, cond_limit=cond_limit)
    if eig.ill_conditioned:
        raise IllConditionedError(
            f"eigenvector condition {eig.condition:.3e} exceeds {cond_limit:.1e}")
    P = eig.eigenvectors
    c = linear_solve(P, r0.astype(complex))
    modes = P * (c * np.exp(eig.eigenvalues * t))[None, :]   # (i, a)
    diag_c = np.sum(modes * modes, axis=1)
    cross_c = _cross_terms(modes)
    total = expm(V.V, t) @ r0
    total = total * total
    imag = float(max(np.max(np.abs(diag_c.imag)), np.max(np.abs(cross_c.imag))))
    return InterferenceReport(float(t), diag_c.real, cross_c.real, total,
                              eig.residual_norm, eig.condition, imag)


def _cross_terms(modes):
    n_out, n_modes = modes.shape
    out = np.zeros(n_out, dtype=complex)
    for a in range(n_modes):
        for b in range(n_modes):
            if a != b:
                out += modes[:, a] * modes[:, b]
    return out


def sequential_readout(rho, B1, B2):
    """Joint table ``p[k, j]`` for reading ``B1`` then ``B2``.

    ``p[k, j] = pi_B1(rho)_k <b2_j, b1_k>**2``.
    """
    B1 = as_context(B1)
    B2 = as_context(B2)
    p1 = context_readout(rho, B1)
    overlap = (B1.B.T @ B2.B) ** 2     # [k, j] = <b1_k, b2_j>^2
    return p1[:, None] * overlap


def order_effect_defect(rho, B1, B2):
    """``max |p_{B1 B2}(k, j) - p_{B2 B1}(j, k)|``."""
    p12 = sequential_readout(rho, B1, B2)
    p21 = sequential_readout(rho, B2, B1)
    return float(np.max(np.abs(p12 - p21.T)))


def elliptic_context_readout(psi, B):
    """``|<b_k, psi>|**2 / ||psi||**2`` for a complex state."""
    B = as_context(B)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (B.n,):
        raise DomainError("state and context dimensions differ")
    nrm = float(np.real(np.vdot(psi, psi)))
    if not nrm > 0:
        raise DomainError("readout of a zero state")
    return np.abs(B.B.T @ psi) ** 2 / nrm
