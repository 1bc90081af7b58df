"""Dense complex linear algebra kernel.

Hermitian eigendecomposition by cyclic complex Jacobi rotations, the matrix
exponential by scaling and squaring of a truncated Taylor series, and the
column-stacking vectorization used for superoperators:

    vec(A X B) = (B^T kron A) vec(X)
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import policy
from .errors import NonFinite, NotHermitian, NotSquare


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _square(M, name="matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSquare(f"{name} must be square, got shape {M.shape}")
    return M


def hermiticity_error(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.conj().T)))


def _offdiag_norm(A) -> float:
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def _rotate(A, V, p, q):
    """Annihilate A[p, q] with one complex Jacobi rotation, in place."""
    c = A[p, q]
    mag = abs(c)
    if mag == 0.0:
        return
    a = A[p, p].real
    b = A[q, q].real
    phase = c / mag
    tau = (b - a) / (2.0 * mag)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    cs = 1.0 / np.sqrt(1.0 + t * t)
    sn = t * cs
    # J = diag(1, conj(phase)) @ [[cs, sn], [-sn, cs]]
    J = np.array([[cs, sn], [-sn * np.conj(phase), cs * np.conj(phase)]])
    idx = [p, q]
    A[:, idx] = A[:, idx] @ J
    A[idx, :] = J.conj().T @ A[idx, :]
    V[:, idx] = V[:, idx] @ J
    A[p, q] = A[q, p] = 0.0
    A[p, p] = a - t * mag
    A[q, q] = b + t * mag


def hermitian_eigh(M, *, hermitian_tol=None) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues are returned sorted non-increasing, eigenvectors as the
    matching columns of a unitary matrix. Ties keep the order in which the
    rotation sweep left them (stable sort).
    """
    pol = policy.current()
    tol = pol.hermitian_tol if hermitian_tol is None else hermitian_tol
    M = _square(M)
    if not np.all(np.isfinite(M)):
        raise NonFinite("matrix has NaN or Inf entries")
    err = hermiticity_error(M)
    if err > tol:
        raise NotHermitian(f"max |M - M^dagger| = {err:.3e} exceeds {tol:.1e}")

    n = M.shape[0]
    A = 0.5 * (M + M.conj().T).astype(complex)
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    threshold = pol.eigh_offdiag_rel * scale

    for _ in range(pol.eigh_max_sweeps):
        off = _offdiag_norm(A)
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(A, V, p, q)
    else:
        off = _offdiag_norm(A)
        if off > threshold:
            raise ArithmeticError(f"Jacobi sweep did not converge (off-diagonal {off:.3e})")

    w = np.diag(A).real.copy()
    order = np.argsort(-w, kind="stable")
    return EigenSystem(w[order], V[:, order])


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with an order-18 Taylor kernel.

    Real input is exponentiated in real arithmetic.
    """
    pol = policy.current()
    M = _square(M)
    if not np.all(np.isfinite(M)):
        raise NonFinite("matrix has NaN or Inf entries")
    if np.iscomplexobj(M) and not np.any(M.imag):
        M = M.real
    M = M.astype(complex if np.iscomplexobj(M) else float)
    n = M.shape[0]
    if n == 0:
        return M.copy()

    norm = np.linalg.norm(M, 1)
    s = 0
    if norm > pol.expm_norm_target:
        s = int(np.ceil(np.log2(norm / pol.expm_norm_target)))
    X = M / (2.0**s)

    E = _taylor(X, pol.expm_taylor_order)
    for _ in range(s):
        E = E @ E
    return E


def _taylor(X, order):
    """sum_{k<=order} X^k / k! by Paterson-Stockmeyer (blocks of size ~sqrt(order))."""
    n = X.shape[0]
    b = max(1, int(np.ceil(np.sqrt(order))))
    coef = [1.0 / math.factorial(k) for k in range(order + 1)]
    powers = [np.eye(n, dtype=X.dtype), X]
    for _ in range(2, b + 1):
        powers.append(powers[-1] @ X)
    Xb = powers[b]

    def block(j):
        out = np.zeros_like(X)
        for i in range(b):
            k = j * b + i
            if k <= order:
                out = out + coef[k] * powers[i]
        return out

    m = order // b
    P = block(m)
    for j in range(m - 1, -1, -1):
        P = P @ Xb + block(j)
    return P


def kron(*factors) -> np.ndarray:
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f))
    return out


def vec(X) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def left_mul(A) -> np.ndarray:
    """Superoperator of X -> A X."""
    A = np.asarray(A)
    return np.kron(np.eye(A.shape[0]), A)


def right_mul(B) -> np.ndarray:
    """Superoperator of X -> X B."""
    B = np.asarray(B)
    return np.kron(B.T, np.eye(B.shape[0]))


def sandwich(A, B) -> np.ndarray:
    """Superoperator of X -> A X B."""
    return np.kron(np.asarray(B).T, np.asarray(A))
