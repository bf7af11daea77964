"""Split-complex numbers a + b j with j**2 = +1, and the para-Schrodinger flow.

Vectors over the algebra are stored as a pair of real arrays ``(a, b)``.
Operators ``S + j F`` are stored as the real pair ``(S, F)``. The idempotents
``e_plus = (1 + j)/2`` and ``e_minus = (1 - j)/2`` diagonalise everything, so
each propagation reduces to two real matrix exponentials.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import SYMMETRY_TOL, expm, is_skew, is_symmetric


@dataclass(frozen=True)
class SplitScalar:
    a: float
    b: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise DomainError("split scalar must be finite")

    def __add__(self, other):
        other = _as_split(other)
        return SplitScalar(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_split(other)
        return SplitScalar(self.a - other.a, self.b - other.b)

    def __mul__(self, other):
        other = _as_split(other)
        return SplitScalar(self.a * other.a + self.b * other.b,
                           self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def conj(self):
        return SplitScalar(self.a, -self.b)

    def modulus_sq(self):
        """``x^# x = a**2 - b**2``; may be negative or zero."""
        return self.a * self.a - self.b * self.b

    def idem_decompose(self):
        """Return ``(lam_plus, lam_minus) = (a + b, a - b)``."""
        return self.a + self.b, self.a - self.b

    @staticmethod
    def idem_reconstruct(lam_plus, lam_minus):
        return SplitScalar(0.5 * (lam_plus + lam_minus), 0.5 * (lam_plus - lam_minus))


E_PLUS = SplitScalar(0.5, 0.5)
E_MINUS = SplitScalar(0.5, -0.5)
J = SplitScalar(0.0, 1.0)


def _as_split(x):
    if isinstance(x, SplitScalar):
        return x
    return SplitScalar(float(x), 0.0)


def split_arith(x, y=None, op="add"):
    """Dispatch form of the scalar operations, for table-driven callers."""
    x = _as_split(x)
    if op == "add":
        return x + _as_split(y)
    if op == "mul":
        return x * _as_split(y)
    if op == "conj":
        return x.conj()
    if op == "idem_decompose":
        return x.idem_decompose()
    if op == "idem_reconstruct":
        return SplitScalar.idem_reconstruct(x.a, x.b)
    raise DomainError(f"unknown split-complex op {op!r}")


def unit_hyperbolic_phase(s):
    """``cosh(s) + j sinh(s)`` componentwise: the identity component of the
    unit hyperbola ``a**2 - b**2 = 1`` with ``a > 0``."""
    s = np.asarray(s, dtype=float)
    return np.cosh(s), np.sinh(s)


def to_idempotent(a, b):
    """Vector ``a + b j`` to idempotent coordinates ``(z_plus, z_minus)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a + b, a - b


def from_idempotent(z_plus, z_minus):
    """``z_plus e_plus + z_minus e_minus`` back to ``(a, b)``."""
    z_plus = np.asarray(z_plus, dtype=float)
    z_minus = np.asarray(z_minus, dtype=float)
    return 0.5 * (z_plus + z_minus), 0.5 * (z_plus - z_minus)


def krein_pairing(psi, phi):
    """``sum_i psi_i^# phi_i`` as a SplitScalar; arguments are ``(a, b)`` pairs.

    In idempotent coordinates conjugation swaps the channels, so the result
    is ``(psi_minus . phi_plus) e_plus + (psi_plus . phi_minus) e_minus``.
    """
    pp, pm = to_idempotent(*psi)
    fp, fm = to_idempotent(*phi)
    lam_plus = float(pm @ fp)
    lam_minus = float(pp @ fm)
    return SplitScalar.idem_reconstruct(lam_plus, lam_minus)


def check_para_hermitian(S, F, tol=SYMMETRY_TOL):
    S = np.asarray(S, dtype=float)
    F = np.asarray(F, dtype=float)
    if S.shape != F.shape or S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError("S and F must be square matrices of equal shape")
    if not is_symmetric(S, tol):
        raise DomainError("para-Hermitian operator needs a symmetric S part")
    if not is_skew(F, tol):
        raise DomainError("para-Hermitian operator needs a skew F part")
    return S, F


@dataclass(frozen=True)
class SplitTrajectory:
    times: np.ndarray
    a: np.ndarray          # shape (len(times), n)
    b: np.ndarray
    z_plus: np.ndarray
    z_minus: np.ndarray


def para_propagate(S, F, psi0, times):
    """Evolve ``d/dt Psi = j (S + j F) Psi`` from ``psi0 = (a0, b0)``.

    In idempotent coordinates the flow decouples into
    ``z_plus' = (F + S) z_plus`` and ``z_minus' = (F - S) z_minus``.
    """
    S, F = check_para_hermitian(S, F)
    times = np.asarray(times, dtype=float)
    zp0, zm0 = to_idempotent(*psi0)
    if zp0.shape != (S.shape[0],):
        raise DomainError("initial split vector has the wrong dimension")
    Gp = F + S
    Gm = F - S
    zp = np.array([expm(Gp, t) @ zp0 for t in times])
    zm = np.array([expm(Gm, t) @ zm0 for t in times])
    a, b = from_idempotent(zp, zm)
    return SplitTrajectory(times, a, b, zp, zm)


def para_unitarity_defect(S, F, t):
    """Spectral norm of ``U(t)^# U(t) - I`` for ``U(t) = exp(j (S + jF) t)``."""
    S, F = check_para_hermitian(S, F)
    n = S.shape[0]
    Up = expm(F + S, t)
    Um = expm(F - S, t)
    return float(np.linalg.norm(Um.T @ Up - np.eye(n), 2))
