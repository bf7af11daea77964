"""Complex packagings of the lifted flow.

``z = rho_tilde + i y`` turns the lifted flow into a non-Hermitian equation
that mixes ``z`` and its conjugate. Restricting to the complex Lagrangian
graph ``{(u, M u)}`` of a symmetric ``M`` with invertible imaginary part gives
projected dynamics; for ``M = (1 - i) I`` these are a unitary Schrodinger
flow with Hermitian generator ``S + i F``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lifted import PhaseState, lifted_generator
from .linalg import SYMMETRY_TOL, expm, linear_solve
from .onshell import as_operator, propagate, times_grid

GRAPH_SYM_TOL = 1e-12
IM_DET_TOL = 1e-12


def complexify(Z):
    return np.asarray(Z.rho_tilde) + 1j * np.asarray(Z.y)


def decomplexify(z):
    z = np.asarray(z, dtype=complex)
    return PhaseState(z.real.copy(), z.imag.copy())


def bogoliubov_rhs(z, V):
    """``(F - i/2 I) z + (S + i/2 I) conj(z)``."""
    V = as_operator(V)
    z = np.asarray(z, dtype=complex)
    return V.F @ z - 0.5j * z + V.S @ np.conj(z) + 0.5j * np.conj(z)


def real_field(Z, V):
    """Lifted vector field ``(V rho_tilde + y, -V^T y)`` as a PhaseState."""
    V = as_operator(V)
    return PhaseState(V.V @ Z.rho_tilde + Z.y, -V.V.T @ Z.y)


def hermitian_norm_rate(z, V):
    """``d/dt ||z||^2 = 2 Re(z^H (S + i/2 I) conj(z))``."""
    V = as_operator(V)
    z = np.asarray(z, dtype=complex)
    zb = np.conj(z)
    return float(2.0 * np.real(np.conj(z) @ (V.S @ zb + 0.5j * zb)))


def complex_hamiltonian(V):
    """``H_C = i V``: the generator of ``z`` on the real leaf, ``z' = -i H_C z``."""
    return 1j * as_operator(V).V


def hermiticity_defect(H):
    """Spectral norm of ``H - H^H``."""
    H = np.asarray(H, dtype=complex)
    return float(np.linalg.norm(H - H.conj().T, 2))


def clar_hamiltonian(V):
    """``S + i F``; Hermitian for every real ``V``."""
    V = as_operator(V)
    return V.S + 1j * V.F


@dataclass(frozen=True, eq=False)
class Polarization:
    """Complex symmetric ``M`` with invertible ``Im M``.

    ``R`` is set when ``M = R - i I`` (the normalised class).
    """

    M: np.ndarray
    R: np.ndarray = None

    def __post_init__(self):
        M = np.asarray(self.M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DomainError("polarization matrix must be square")
        if np.max(np.abs(M - M.T), initial=0.0) > GRAPH_SYM_TOL * max(1.0, np.max(np.abs(M))):
            raise DomainError("polarization matrix must be complex symmetric")
        imM = M.imag
        scale = max(1.0, np.max(np.abs(imM)))
        if abs(np.linalg.det(imM / scale)) <= IM_DET_TOL:
            raise DomainError("Im M is singular")
        n = M.shape[0]
        R = None
        if np.allclose(imM, -np.eye(n), rtol=0, atol=GRAPH_SYM_TOL):
            R = M.real.copy()
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "R", R)

    @classmethod
    def normalized(cls, R):
        R = np.asarray(R, dtype=float)
        return cls(R - 1j * np.eye(R.shape[0]))

    @classmethod
    def distinguished(cls, n):
        """``M* = (1 - i) I``."""
        return cls.normalized(np.eye(n))

    @property
    def n(self):
        return self.M.shape[0]

    def projector_matrix(self):
        """2n x 2n matrix of ``(a, b) -> (u, M u)``."""
        n = self.n
        W = linear_solve(2j * self.M.imag, np.eye(n, dtype=complex))
        top = np.hstack([-W @ np.conj(self.M), W])
        return np.vstack([top, self.M @ top])


def polarization_projector(P, a, b):
    """Split ``(a, b)`` along the graph of ``M`` and of ``conj(M)``.

    Returns ``(u, (u, M u))`` with ``u = (2i Im M)^{-1} (b - conj(M) a)``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    u = linear_solve(2j * P.M.imag, b - np.conj(P.M) @ a)
    return u, (u, P.M @ u)


def _check_R(R, n=None):
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DomainError("R must be square")
    if np.linalg.norm(R - R.T) > SYMMETRY_TOL * max(1.0, np.linalg.norm(R)):
        raise DomainError("R must be symmetric")
    if n is not None and R.shape[0] != n:
        raise DomainError("R and state dimensions differ")
    return R


def psi_phi_coords(Z, R):
    """``psi = (I - iR) rho_tilde + i y`` and ``phi = (I + iR) rho_tilde - i y``.

    ``Z`` may carry complex entries (points of the complexified space).
    """
    r = np.asarray(Z.rho_tilde, dtype=complex)
    y = np.asarray(Z.y, dtype=complex)
    R = _check_R(R, r.size)
    psi = r - 1j * (R @ r) + 1j * y
    phi = r + 1j * (R @ r) - 1j * y
    return psi, phi


def psi_phi_inverse(psi, phi, R):
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    R = _check_R(R, psi.size)
    r = 0.5 * (psi + phi)
    y = -1j * (psi - r + 1j * (R @ r))
    return PhaseState(r, y)


def clar_propagator(V, t):
    """``expm(-i t (I + S + i F))``."""
    V = as_operator(V)
    n = V.n
    return expm(-1j * (np.eye(n) + V.S + 1j * V.F), t)


def clar_flow(V, psi0, times):
    """Return ``(psi, Psi)`` sampled on the grid, ``Psi(t) = exp(i t) psi(t)``.

    ``Psi`` follows ``i Psi' = (S + i F) Psi`` and keeps its norm.
    """
    V = as_operator(V)
    times = times_grid(times)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (V.n,):
        raise DomainError("psi0 and V dimensions differ")
    n = V.n
    G = -1j * (np.eye(n) + V.S + 1j * V.F)
    psi = propagate(G, psi0, times)
    Psi = np.exp(1j * times)[:, None] * psi
    return psi, Psi


def unitarity_defect(V, t):
    """Spectral norm of ``G^H G - I`` for ``G = expm(-i t (S + i F))``."""
    G = expm(-1j * clar_hamiltonian(V), t)
    return float(np.linalg.norm(G.conj().T @ G - np.eye(G.shape[0]), 2))


def projected_generator(V, P):
    """Projection of the lifted field onto the graph of ``M``."""
    return P.projector_matrix() @ lifted_generator(V).astype(complex)


def clar_leaf_defect(V, Z0, times, P=None, projected=True):
    """Largest drift of ``phi`` along the flow started at ``Z0``.

    With ``projected=True`` the state follows the projected generator, whose
    ``phi`` coordinate is constant; ``projected=False`` runs the plain lifted
    flow from the same point for contrast.
    """
    V = as_operator(V)
    P = Polarization.distinguished(V.n) if P is None else P
    if P.R is None:
        raise DomainError("leaf defect needs a normalized polarization M = R - iI")
    times = times_grid(times)
    G = projected_generator(V, P) if projected else lifted_generator(V).astype(complex)
    z0 = np.concatenate([np.asarray(Z0.rho_tilde, dtype=complex),
                         np.asarray(Z0.y, dtype=complex)])
    X = propagate(G, z0, times)
    n = V.n
    _, phi0 = psi_phi_coords(Z0, P.R)
    worst = 0.0
    for x in X:
        _, phi = psi_phi_coords(PhaseState(x[:n], x[n:]), P.R)
        worst = max(worst, float(np.linalg.norm(phi - phi0)))
    return worst


def graph_state(rho_tilde, P=None):
    """Phase point ``(rho_tilde, M rho_tilde)`` on the graph of ``M``."""
    r = np.asarray(rho_tilde, dtype=complex)
    P = Polarization.distinguished(r.size) if P is None else P
    return PhaseState(r, P.M @ r)
