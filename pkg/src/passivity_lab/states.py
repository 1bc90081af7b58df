"""Density matrices, Hamiltonians, spectra and passive rearrangements.

States are plain complex ndarrays; the ``validate_*`` / ``as_*`` helpers
enforce the invariants at module boundaries. Indices follow the energy
eigenbasis: level 0 is the ground state.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Sequence

import numpy as np

from . import policy
from .errors import (
    AmbiguousRearrangement,
    DegenerateHamiltonian,
    DimMismatch,
    InvalidOrder,
    InvalidState,
    RangeError,
)
from .linalg import hermitian_eigh, hermiticity_error


@dataclasses.dataclass(frozen=True)
class Hamiltonian:
    """Diagonal Hamiltonian, energies listed in basis order.

    By default the energies must be strictly increasing. With
    ``degenerate=True`` ties are allowed (non-decreasing).
    """

    energies: tuple
    degenerate: bool = False

    def __post_init__(self):
        E = np.asarray(self.energies, dtype=float)
        if E.ndim != 1 or E.size == 0:
            raise ValueError("energies must be a non-empty 1-d sequence")
        steps = np.diff(E)
        if self.degenerate:
            if np.any(steps < 0):
                raise ValueError("energies must be non-decreasing")
        elif np.any(steps <= 0):
            raise DegenerateHamiltonian(
                "energies must be strictly increasing; pass degenerate=True to allow ties"
            )
        object.__setattr__(self, "energies", tuple(float(e) for e in E))

    @property
    def dim(self) -> int:
        return len(self.energies)

    def matrix(self) -> np.ndarray:
        return np.diag(np.asarray(self.energies, dtype=complex))

    def levels(self) -> list[list[int]]:
        """Groups of basis indices sharing one energy, in increasing energy."""
        E = self.energies
        groups = [[0]]
        for i in range(1, len(E)):
            if E[i] == E[i - 1]:
                groups[-1].append(i)
            else:
                groups.append([i])
        return groups


def validate_density(rho, *, tol=None) -> np.ndarray:
    """Return ``rho`` as a complex array after checking the state invariants."""
    pol = policy.current()
    tol = pol.hermitian_tol if tol is None else tol
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidState(f"density matrix must be square, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidState("density matrix has non-finite entries")
    herr = hermiticity_error(rho)
    if herr > tol:
        raise InvalidState(f"not Hermitian (max asymmetry {herr:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > pol.trace_tol:
        raise InvalidState(f"trace {tr.real:.12g} differs from 1")
    w = hermitian_eigh(rho, hermitian_tol=tol).eigenvalues
    if w[-1] < -pol.psd_tol:
        raise InvalidState(f"negative eigenvalue {w[-1]:.3e}")
    return rho


def as_spectrum(values, *, tol=None) -> np.ndarray:
    """Validate a probability vector and return it sorted non-increasing."""
    pol = policy.current()
    tol = pol.trace_tol if tol is None else tol
    p = np.asarray(values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidState("spectrum must be a non-empty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise InvalidState("spectrum has non-finite entries")
    eps = pol.spectrum_entry_tol
    if np.any(p < -eps) or np.any(p > 1 + eps):
        raise InvalidState("spectrum entries must lie in [0, 1]")
    if abs(p.sum() - 1.0) > tol:
        raise InvalidState(f"spectrum sums to {p.sum():.12g}, not 1")
    return np.sort(p)[::-1].copy()


def spectrum_of(rho) -> np.ndarray:
    """Eigenvalues of a state, sorted non-increasing."""
    pol = policy.current()
    rho = np.asarray(rho, dtype=complex)
    herr = hermiticity_error(rho)
    if herr > pol.hermitian_tol:
        raise InvalidState(f"not Hermitian (max asymmetry {herr:.3e})")
    w = hermitian_eigh(rho).eigenvalues
    if w[-1] < -pol.psd_tol or w[0] > 1 + pol.psd_tol:
        raise InvalidState(f"eigenvalues outside [0, 1]: [{w[-1]:.3e}, {w[0]:.3e}]")
    total = w.sum()
    if abs(total - 1.0) > pol.trace_tol:
        raise InvalidState(f"trace {total:.12g} differs from 1")
    w = np.clip(w, 0.0, 1.0)
    return w / w.sum()


def _degenerate_assignment(p, H: Hamiltonian, order):
    """Populations in basis order for a degenerate Hamiltonian.

    Within each energy level the assigned values must coincide (up to the tie
    tolerance) unless ``order`` fixes which basis state gets which value.
    """
    tie = policy.current().tie_tol
    if order is not None:
        order = [int(i) for i in order]
        if sorted(order) != list(range(H.dim)):
            raise ValueError("order must be a permutation of the basis indices")
        energies = np.asarray(H.energies)
        if np.any(np.diff(energies[order]) < 0):
            raise ValueError("order must list basis states by non-decreasing energy")
        out = np.empty(H.dim)
        out[order] = p
        return out
    out = np.empty(H.dim)
    k = 0
    for group in H.levels():
        block = p[k : k + len(group)]
        if block.max() - block.min() > tie:
            raise AmbiguousRearrangement(
                f"degenerate level {group} would receive unequal populations {block.tolist()}"
            )
        out[group] = block
        k += len(group)
    return out


def passive_rearrangement(rho, H: Hamiltonian, *, order=None) -> np.ndarray:
    """The passive state with the spectrum of ``rho``.

    The largest eigenvalue goes to the ground state, the next to the first
    excited state and so on.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (H.dim, H.dim):
        raise DimMismatch(f"state is {rho.shape}, Hamiltonian has dim {H.dim}")
    p = spectrum_of(rho)
    if H.degenerate and len(H.levels()) < H.dim:
        pops = _degenerate_assignment(p, H, order)
    else:
        pops = p
    return np.diag(pops.astype(complex))


def is_passive(rho, *, tol=None) -> bool:
    """Diagonal in the energy basis with populations non-increasing in energy."""
    pol = policy.current()
    tol = pol.diagonal_tol if tol is None else tol
    rho = np.asarray(rho)
    off = rho - np.diag(np.diag(rho))
    if rho.size and np.max(np.abs(off)) > tol:
        return False
    return bool(np.all(np.diff(np.diag(rho).real) <= tol))


def ky_fan_sum(X, n: int) -> float:
    """Sum of the ``n`` largest eigenvalues of a Hermitian matrix."""
    X = np.asarray(X)
    d = X.shape[0]
    if not 1 <= n <= d:
        raise RangeError(f"n={n} outside 1..{d}")
    w = hermitian_eigh(X).eigenvalues
    return float(np.sum(w[:n]))


def average_energy(rho, H: Hamiltonian) -> float:
    rho = np.asarray(rho)
    if rho.shape != (H.dim, H.dim):
        raise DimMismatch(f"state is {rho.shape}, Hamiltonian has dim {H.dim}")
    e = np.sum(np.asarray(H.energies) * np.diag(rho))
    if abs(e.imag) > policy.current().hermitian_tol:
        raise InvalidState(f"energy has imaginary part {e.imag:.3e}")
    return float(e.real)


@dataclasses.dataclass(frozen=True)
class Renyi:
    order: float

    def __post_init__(self):
        if not self.order > 0 or self.order == 1:
            raise InvalidOrder(f"Renyi order must be > 0 and != 1, got {self.order}")


@dataclasses.dataclass(frozen=True)
class TraceFunctional:
    """Entropy-like functional -Tr f(rho) for a convex f on [0, 1].

    The sign makes it Schur-concave, like the von Neumann and Renyi entropies.
    """

    f: Callable[[np.ndarray], np.ndarray]


VON_NEUMANN = "vonNeumann"


def entropy_of_spectrum(p, functional=VON_NEUMANN) -> float:
    p = np.asarray(p, dtype=float)
    if isinstance(functional, str):
        if functional != VON_NEUMANN:
            raise ValueError(f"unknown functional {functional!r}")
        nz = p[p > 0]
        return float(-np.sum(nz * np.log(nz)))
    if isinstance(functional, Renyi):
        a = functional.order
        return float(math.log(np.sum(p[p > 0] ** a)) / (1.0 - a))
    if isinstance(functional, TraceFunctional):
        return float(-np.sum(functional.f(p)))
    raise TypeError(f"unsupported functional {functional!r}")


def entropy(rho, functional=VON_NEUMANN) -> float:
    """von Neumann (natural log), Renyi or Tr f entropy of a state."""
    return entropy_of_spectrum(spectrum_of(validate_density(rho)), functional)


def diagonal_state(populations: Sequence[float]) -> np.ndarray:
    return np.diag(np.asarray(populations, dtype=complex))


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d
