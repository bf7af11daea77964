"""Dense real/complex linear algebra used throughout the package.

All routines are written for small matrices (n up to a few dozen) and favour
determinism over speed: fixed sweep orders, fixed eigenvalue ordering, and
no dependence on LAPACK for any result the rest of the package consumes.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    RangeError,
    SingularMatrixError,
)

SYMMETRY_TOL = 1e-10
PIVOT_TOL = 1e-14
EIGVEC_COND_LIMIT = 1e6
JACOBI_MAX_SWEEPS = 100
QR_MAX_ITER_PER_EIG = 40

_EPS = np.finfo(float).eps

# Pade(13,13) numerator coefficients and the 1-norm bound under which it
# reaches double precision without scaling.
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
    16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs sorted by (real part, imaginary part).

    ``residual_norm`` is the Frobenius norm of ``A @ P - P @ diag(lam)``;
    ``condition`` is the 1-norm condition number of the eigenvector matrix.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norm: float
    condition: float = 1.0
    ill_conditioned: bool = False


def _square(A, name="matrix"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    return A


def sym_skew_split(V):
    """Return ``(S, F)`` with ``S = (V + V.T)/2`` and ``F = (V - V.T)/2``."""
    V = _square(V, "V").astype(float)
    S = 0.5 * (V + V.T)
    F = 0.5 * (V - V.T)
    return S, F


def is_symmetric(S, tol=SYMMETRY_TOL):
    S = np.asarray(S)
    scale = max(np.linalg.norm(S), 1.0)
    return np.linalg.norm(S - S.T) <= tol * scale


def is_skew(F, tol=SYMMETRY_TOL):
    F = np.asarray(F)
    scale = max(np.linalg.norm(F), 1.0)
    return np.linalg.norm(F + F.T) <= tol * scale


# ---------------------------------------------------------------------------
# LU with partial pivoting
# ---------------------------------------------------------------------------

def _lu_factor(A, tol):
    A = np.array(A, dtype=np.result_type(A, float), copy=True)
    n = A.shape[0]
    piv = np.arange(n)
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero")
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) <= tol * scale:
            raise SingularMatrixError(
                f"pivot {abs(A[p, k]):.3e} below tolerance at column {k}")
        if p != k:
            A[[k, p]] = A[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        if k + 1 < n:
            A[k + 1:, k] /= A[k, k]
            A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return A, piv


def _lu_solve(LU, piv, b):
    n = LU.shape[0]
    x = np.array(b[piv], dtype=np.result_type(LU, b), copy=True)
    for i in range(1, n):
        x[i] -= LU[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - LU[i, i + 1:] @ x[i + 1:]) / LU[i, i]
    return x


def linear_solve(A, b, tol=PIVOT_TOL):
    """Solve ``A x = b`` by LU with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides. Raises
    ``SingularMatrixError`` when a pivot falls below ``tol * max|A|``.
    """
    A = _square(A, "A")
    b = np.asarray(b)
    if b.shape[0] != A.shape[0]:
        raise DomainError(f"right-hand side has {b.shape[0]} rows, expected {A.shape[0]}")
    LU, piv = _lu_factor(A, tol)
    return _lu_solve(LU, piv, b)


# ---------------------------------------------------------------------------
# Matrix exponential
# ---------------------------------------------------------------------------

def expm(A, t=1.0):
    """``exp(t A)`` by Pade(13) scaling and squaring.

    Works for real or complex ``A``. The scaling exponent is driven by the
    1-norm of ``t A``. Raises ``RangeError`` when the result overflows.
    """
    A = _square(A, "A")
    tA = t * np.asarray(A, dtype=np.result_type(A, float))
    n = tA.shape[0]
    ident = np.eye(n, dtype=tA.dtype)
    if not np.any(tA):
        return ident
    norm1 = np.max(np.sum(np.abs(tA), axis=0))
    if not np.isfinite(norm1):
        raise RangeError("t*A has non-finite 1-norm")
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA13)))) if norm1 > _THETA13 else 0
    if s > 1100:
        raise RangeError(f"scaling exponent {s} exceeds representable range")
    X = tA / (2.0 ** s)
    b = _PADE13
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    W = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
         + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident)
    R = linear_solve(W - U, W + U)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise RangeError("matrix exponential overflowed")
    return R


# ---------------------------------------------------------------------------
# Symmetric eigenproblem: cyclic Jacobi
# ---------------------------------------------------------------------------

def _normalise_sign(Q):
    # first component above round-off made positive, column by column
    Q = Q.copy()
    for k in range(Q.shape[1]):
        col = Q[:, k]
        big = np.max(np.abs(col))
        idx = int(np.argmax(np.abs(col) > 1e-8 * big))
        if col[idx].real < 0:
            Q[:, k] = -col
    return Q


def sym_eig(S, tol=SYMMETRY_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Eigenvalues are returned ascending with orthonormal eigenvectors in the
    columns; each eigenvector's first significant component is positive.
    """
    S = _square(S, "S").astype(float)
    n = S.shape[0]
    norm = np.linalg.norm(S)
    if np.linalg.norm(S - S.T) > tol * max(norm, 1e-300):
        raise DomainError("sym_eig requires a symmetric matrix")
    A = 0.5 * (S + S.T)
    Q = np.eye(n)
    stop = (_EPS * 1e-2 * norm) ** 2
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sum(A[offmask] ** 2)
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-3 * _EPS * min(abs(A[p, p]), abs(A[q, q])):
                    A[p, q] = A[q, p] = 0.0
                    continue
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    tt = 0.5 / tau
                else:
                    tt = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + tt * tt)
                s = tt * c
                ap = A[:, p].copy()
                aq = A[:, q]
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :]
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                qp = Q[:, p].copy()
                Q[:, p] = c * qp - s * Q[:, q]
                Q[:, q] = s * qp + c * Q[:, q]
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    Q = _normalise_sign(Q[:, order])
    resid = float(np.linalg.norm(S @ Q - Q * lam))
    return EigenDecomposition(lam, Q, resid)


# ---------------------------------------------------------------------------
# General eigenproblem: Hessenberg + Francis double-shift QR
# ---------------------------------------------------------------------------

def _householder(x):
    """Return ``(v, beta)`` with ``(I - beta v v^T) x = -+||x|| e1``."""
    v = np.array(x, dtype=float)
    alpha = np.linalg.norm(v)
    if alpha == 0.0:
        return v, 0.0
    v[0] += math.copysign(alpha, v[0])
    return v, 2.0 / (v @ v)


def hessenberg(A):
    """Orthogonal reduction ``A = Q H Q^T`` with ``H`` upper Hessenberg."""
    H = np.array(A, dtype=float)
    n = H.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        v, beta = _householder(H[k + 1:, k])
        if beta == 0.0:
            continue
        H[k + 1:, k:] -= beta * np.outer(v, v @ H[k + 1:, k:])
        H[:, k + 1:] -= beta * np.outer(H[:, k + 1:] @ v, v)
        Q[:, k + 1:] -= beta * np.outer(Q[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H, Q


def _split_real_block(H, Z, k):
    # triangularise a 2x2 diagonal block with real eigenvalues by a rotation
    a, b, c, d = H[k, k], H[k, k + 1], H[k + 1, k], H[k + 1, k + 1]
    if c == 0.0:
        return
    p = 0.5 * (a - d)
    disc = p * p + b * c
    if disc < 0.0:
        return
    # eigenvector (lam - d, c) for the eigenvalue farther from the midpoint;
    # the first entry is p + sign(p) sqrt(disc), free of cancellation
    x0 = p + math.copysign(math.sqrt(disc), p)
    r = math.hypot(x0, c)
    cs, sn = x0 / r, c / r
    G = np.array([[cs, -sn], [sn, cs]])
    H[k:k + 2, k:] = G.T @ H[k:k + 2, k:]
    H[: k + 2, k:k + 2] = H[: k + 2, k:k + 2] @ G
    Z[:, k:k + 2] = Z[:, k:k + 2] @ G
    H[k + 1, k] = 0.0


def real_schur(A, max_iter_per_eig=QR_MAX_ITER_PER_EIG):
    """Real Schur form ``A = Z T Z^T`` by Francis double-shift QR.

    ``T`` is quasi upper triangular with 1x1 and 2x2 diagonal blocks.
    """
    A = _square(A, "A").astype(float)
    n = A.shape[0]
    H, Z = hessenberg(A)
    hi = n - 1
    its = 0
    total = 0
    limit = max_iter_per_eig * max(n, 1)
    while hi >= 1:
        # locate the start of the active unreduced block
        lo = hi
        while lo > 0:
            scale = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if scale == 0.0:
                scale = np.linalg.norm(H[: hi + 1, : hi + 1], 1)
            if abs(H[lo, lo - 1]) <= _EPS * scale:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            _split_real_block(H, Z, hi - 1)
            hi -= 2
            its = 0
            continue
        if total >= limit:
            raise ConvergenceError(f"QR iteration did not converge after {total} steps")
        m = hi
        if its in (10, 20):
            ex = abs(H[m, m - 1]) + abs(H[m - 1, m - 2])
            s = 1.5 * ex
            t = ex * ex
        else:
            s = H[m - 1, m - 1] + H[m, m]
            t = H[m - 1, m - 1] * H[m, m] - H[m - 1, m] * H[m, m - 1]
        x = H[lo, lo] ** 2 + H[lo, lo + 1] * H[lo + 1, lo] - s * H[lo, lo] + t
        y = H[lo + 1, lo] * (H[lo, lo] + H[lo + 1, lo + 1] - s)
        z = H[lo + 1, lo] * H[lo + 2, lo + 1]
        for k in range(lo, hi - 1):
            v, beta = _householder([x, y, z])
            if beta != 0.0:
                r = max(lo, k - 1)
                H[k:k + 3, r:] -= beta * np.outer(v, v @ H[k:k + 3, r:])
                rr = min(k + 3, hi)
                H[: rr + 1, k:k + 3] -= beta * np.outer(H[: rr + 1, k:k + 3] @ v, v)
                Z[:, k:k + 3] -= beta * np.outer(Z[:, k:k + 3] @ v, v)
            x = H[k + 1, k]
            y = H[k + 2, k]
            if k < hi - 2:
                z = H[k + 3, k]
        v, beta = _householder([x, y])
        if beta != 0.0:
            H[hi - 1:hi + 1, hi - 2:] -= beta * np.outer(v, v @ H[hi - 1:hi + 1, hi - 2:])
            H[: hi + 1, hi - 1:hi + 1] -= beta * np.outer(H[: hi + 1, hi - 1:hi + 1] @ v, v)
            Z[:, hi - 1:hi + 1] -= beta * np.outer(Z[:, hi - 1:hi + 1] @ v, v)
        its += 1
        total += 1
    T = np.triu(H, -1)
    return T, Z


def _block_eigenvalues(T):
    n = T.shape[0]
    lam = np.zeros(n, dtype=complex)
    i = 0
    while i < n:
        if i < n - 1 and T[i + 1, i] != 0.0:
            a, b, c, d = T[i, i], T[i, i + 1], T[i + 1, i], T[i + 1, i + 1]
            p = 0.5 * (a - d)
            disc = p * p + b * c
            mid = 0.5 * (a + d)
            if disc >= 0.0:
                r = math.copysign(math.sqrt(disc), p) if p != 0.0 else math.sqrt(disc)
                l1 = mid + r
                l2 = (a * d - b * c) / l1 if l1 != 0.0 else mid - r
                lam[i], lam[i + 1] = l1, l2
            else:
                w = math.sqrt(-disc)
                lam[i], lam[i + 1] = complex(mid, w), complex(mid, -w)
            i += 2
        else:
            lam[i] = T[i, i]
            i += 1
    return lam


def _to_complex_schur(T, Z):
    # unitary 2x2 rotations triangularise each remaining 2x2 block
    T = T.astype(complex)
    Z = Z.astype(complex)
    n = T.shape[0]
    for m in range(n - 1, 0, -1):
        if abs(T[m, m - 1]) > _EPS * (abs(T[m - 1, m - 1]) + abs(T[m, m])):
            blk = T[m - 1:m + 1, m - 1:m + 1]
            tr = blk[0, 0] + blk[1, 1]
            det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
            root = np.sqrt(tr * tr / 4 - det)
            mu = tr / 2 + root - T[m, m]
            r = math.hypot(abs(mu), abs(T[m, m - 1]))
            c = mu / r
            s = T[m, m - 1] / r
            G = np.array([[np.conj(c), s], [-s, c]])
            T[m - 1:m + 1, m - 1:] = G @ T[m - 1:m + 1, m - 1:]
            T[: m + 1, m - 1:m + 1] = T[: m + 1, m - 1:m + 1] @ G.conj().T
            Z[:, m - 1:m + 1] = Z[:, m - 1:m + 1] @ G.conj().T
        T[m, m - 1] = 0.0
    return T, Z


def _triangular_eigenvectors(T):
    n = T.shape[0]
    X = np.zeros((n, n), dtype=complex)
    smin = max(_EPS * np.linalg.norm(T), np.finfo(float).tiny)
    for k in range(n):
        lam = T[k, k]
        x = np.zeros(n, dtype=complex)
        x[k] = 1.0
        for i in range(k - 1, -1, -1):
            d = T[i, i] - lam
            if abs(d) < smin:
                d = smin
            x[i] = -(T[i, i + 1:k + 1] @ x[i + 1:k + 1]) / d
        X[:, k] = x
    return X


def _condition_1(P):
    n = P.shape[0]
    try:
        Pinv = linear_solve(P, np.eye(n, dtype=P.dtype), tol=1e-300)
    except SingularMatrixError:
        return math.inf
    return float(np.linalg.norm(P, 1) * np.linalg.norm(Pinv, 1))


def general_eig(V, cond_limit=EIGVEC_COND_LIMIT):
    """Eigenpairs of a real square matrix via its real Schur form.

    Eigenvalues come from the 1x1/2x2 Schur blocks, so complex ones appear
    in exact conjugate pairs; eigenvectors are unit 2-norm, with conjugate
    vectors for conjugate eigenvalues. A nearly defective matrix triggers an
    ``IllConditionedWarning`` and ``ill_conditioned=True`` but still returns.
    """
    V = _square(V, "V").astype(float)
    n = V.shape[0]
    T, Z = real_schur(V)
    lam_blocks = _block_eigenvalues(T)
    Tc, Zc = _to_complex_schur(T, Z)
    X = Zc @ _triangular_eigenvectors(Tc)
    X /= np.linalg.norm(X, axis=0)
    diag = np.diag(Tc).copy()

    # match each triangular eigenvector to a block eigenvalue (same ordering
    # up to rounding); greedy nearest matching keeps conjugate structure
    remaining = list(range(n))
    lam = np.zeros(n, dtype=complex)
    for k in range(n):
        j = min(remaining, key=lambda i: abs(lam_blocks[i] - diag[k]))
        remaining.remove(j)
        lam[k] = lam_blocks[j]
    order = sorted(range(n), key=lambda k: (lam[k].real, lam[k].imag))
    lam = lam[order]
    X = X[:, order]

    # phase normalisation: largest-modulus component real positive
    for k in range(n):
        j = int(np.argmax(np.abs(X[:, k])))
        X[:, k] *= abs(X[j, k]) / X[j, k]
    # conjugate pairs: (a - ib) sorts just before (a + ib)
    k = 0
    while k < n:
        if lam[k].imag < 0 and k + 1 < n and abs(lam[k + 1] - np.conj(lam[k])) <= 1e-12 * max(1.0, abs(lam[k])):
            X[:, k] = np.conj(X[:, k + 1])
            k += 2
        else:
            if lam[k].imag == 0.0:
                X[:, k] = X[:, k].real
            k += 1
    resid = float(np.linalg.norm(V @ X - X * lam))
    cond = _condition_1(X)
    ill = not (cond <= cond_limit)
    if ill:
        warnings.warn(
            f"eigenvector matrix condition {cond:.3e} exceeds {cond_limit:.1e}",
            IllConditionedWarning, stacklevel=2)
    return EigenDecomposition(lam, X, resid, cond, ill)
