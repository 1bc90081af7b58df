"""Lindblad generators of single-jump lossy dynamics and their channels.

A structured generator on C^d (basis ordered by increasing energy, index 0
the ground state) consists of

* a diagonal phase term ``H = diag(lamb_shift + energies)``,
* dephasing operators ``diag(a^alpha)``,
* jump operators ``sum_i b_i^alpha |i><i+1|`` lowering the energy by one level,

and is valid when the summed jump profile ``r_i = sum_alpha |b_i^alpha|^2``
(with ``r_0 = r_d = 0``) is concave in ``i``. Arbitrary Lindblad operators go
through :class:`RawLindbladGenerator` instead.

Superoperators act on column-stacked density matrices.
"""

from __future__ import annotations

import dataclasses
from typing import Union

import numpy as np

from . import policy
from .errors import (
    ConcavityViolated,
    DimMismatch,
    InvalidGenerator,
    InvalidState,
    NegativeTime,
    StateInvariantViolated,
)
from .linalg import expm, hermiticity_error, sandwich, unvec, vec
from .states import validate_density


def _frozen(a, dtype, shape=None):
    arr = np.array(a, dtype=dtype)
    if shape is not None:
        arr = arr.reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclasses.dataclass(frozen=True, eq=False)
class LindbladGenerator:
    dim: int
    lamb_shift: np.ndarray
    dephasing: np.ndarray  # (n_dephasing, dim)
    jumps: np.ndarray  # (n_jump, dim - 1)
    energies: np.ndarray | None = None

    @property
    def r_profile(self) -> np.ndarray:
        """r_0, ..., r_d with the zero endpoints included."""
        r = np.zeros(self.dim + 1)
        if self.jumps.size:
            r[1 : self.dim] = np.sum(np.abs(self.jumps) ** 2, axis=0)
        return r

    def phase_diagonal(self) -> np.ndarray:
        diag = np.asarray(self.lamb_shift, dtype=float).copy()
        if self.energies is not None:
            diag = diag + self.energies
        return diag

    def lindblad_operators(self) -> list[np.ndarray]:
        ops = [np.diag(a) for a in self.dephasing]
        for b in self.jumps:
            ops.append(np.diag(b, k=1))
        return ops

    def to_raw(self) -> "RawLindbladGenerator":
        return RawLindbladGenerator(
            self.dim,
            np.diag(self.phase_diagonal()).astype(complex),
            tuple(self.lindblad_operators()),
        )

    def __eq__(self, other):
        if not isinstance(other, LindbladGenerator):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if (self.energies is None) != (other.energies is None):
            return False
        pairs = [
            (self.lamb_shift, other.lamb_shift),
            (self.dephasing, other.dephasing),
            (self.jumps, other.jumps),
        ]
        if self.energies is not None:
            pairs.append((self.energies, other.energies))
        return all(a.shape == b.shape and np.array_equal(a, b) for a, b in pairs)

    __hash__ = None


@dataclasses.dataclass(frozen=True, eq=False)
class RawLindbladGenerator:
    dim: int
    hamiltonian_part: np.ndarray
    lindblad_ops: tuple

    def __post_init__(self):
        H = np.asarray(self.hamiltonian_part, dtype=complex)
        if H.shape != (self.dim, self.dim):
            raise DimMismatch(f"Hamiltonian part has shape {H.shape}, expected dim {self.dim}")
        herr = hermiticity_error(H)
        if herr > policy.current().hermitian_tol:
            raise InvalidGenerator(f"Hamiltonian part not Hermitian (asymmetry {herr:.3e})")
        ops = []
        for k, L in enumerate(self.lindblad_ops):
            L = np.asarray(L, dtype=complex)
            if L.shape != (self.dim, self.dim):
                raise DimMismatch(f"Lindblad operator {k} has shape {L.shape}")
            ops.append(_frozen(L, complex))
        object.__setattr__(self, "hamiltonian_part", _frozen(H, complex))
        object.__setattr__(self, "lindblad_ops", tuple(ops))

    def to_raw(self) -> "RawLindbladGenerator":
        return self


Generator = Union[LindbladGenerator, RawLindbladGenerator]


def concavity_violation(r, tol=None):
    """First 1-based index i with r_{i+1} - 2 r_i + r_{i-1} > tol, or None."""
    tol = policy.current().concavity_tol if tol is None else tol
    r = np.asarray(r, dtype=float)
    second = r[2:] - 2 * r[1:-1] + r[:-2]
    bad = np.nonzero(second > tol)[0]
    if bad.size == 0:
        return None
    i = int(bad[0])
    return i + 1, float(second[i])


def build_generator(
    dim: int,
    *,
    lamb_shift=None,
    dephasing=None,
    jumps=None,
    energies=None,
    check_concavity: bool = True,
) -> LindbladGenerator:
    """Validated single-jump generator.

    ``dephasing`` rows have length ``dim``, ``jumps`` rows length ``dim - 1``
    (``jumps[alpha][i]`` is the amplitude of ``|i><i+1|``).
    """
    if dim < 1:
        raise DimMismatch("dim must be positive")
    lamb = np.zeros(dim) if lamb_shift is None else np.asarray(lamb_shift, dtype=float)
    if lamb.shape != (dim,):
        raise DimMismatch(f"lamb_shift has shape {lamb.shape}, expected ({dim},)")
    deph = np.zeros((0, dim), complex) if dephasing is None else np.asarray(dephasing, complex)
    if deph.size == 0:
        deph = np.zeros((0, dim), complex)
    deph = np.atleast_2d(deph)
    if deph.shape[1] != dim:
        raise DimMismatch(f"dephasing rows must have length {dim}, got {deph.shape[1]}")
    jmp = np.zeros((0, dim - 1), complex) if jumps is None else np.asarray(jumps, complex)
    if jmp.size == 0:
        jmp = np.zeros((0, dim - 1), complex)
    jmp = np.atleast_2d(jmp)
    if jmp.shape[1] != dim - 1:
        raise DimMismatch(f"jump rows must have length {dim - 1}, got {jmp.shape[1]}")
    E = None
    if energies is not None:
        E = np.asarray(energies, dtype=float)
        if E.shape != (dim,):
            raise DimMismatch(f"energies has shape {E.shape}, expected ({dim},)")
        E = _frozen(E, float)

    L = LindbladGenerator(
        dim, _frozen(lamb, float), _frozen(deph, complex), _frozen(jmp, complex), E
    )
    if check_concavity:
        bad = concavity_violation(L.r_profile)
        if bad is not None:
            raise ConcavityViolated(*bad)
    return L


def build_generator_from_raw(raw: RawLindbladGenerator, **kwargs) -> LindbladGenerator:
    """Recognize a raw generator as a structured single-jump one.

    Every Lindblad operator must be either diagonal (dephasing) or supported
    on the first superdiagonal only (a one-level jump), and the Hamiltonian
    part must be diagonal. Anything else raises :class:`InvalidGenerator`.
    """
    d = raw.dim
    H = raw.hamiltonian_part
    if np.any(H - np.diag(np.diag(H))):
        raise InvalidGenerator("Hamiltonian part is not diagonal in the energy basis")
    diag_mask = np.eye(d, dtype=bool)
    super_mask = np.eye(d, k=1, dtype=bool)
    dephasing, jumps = [], []
    for k, L in enumerate(raw.lindblad_ops):
        nz = L != 0
        if not nz.any():
            continue
        if not (nz & ~diag_mask).any():
            dephasing.append(np.diag(L))
        elif not (nz & ~super_mask).any():
            jumps.append(np.diag(L, k=1))
        else:
            rows, cols = np.nonzero(nz & ~diag_mask & ~super_mask)
            raise InvalidGenerator(
                f"Lindblad operator {k} couples non-consecutive levels "
                f"(entry |{rows[0]}><{cols[0]}|)"
            )
    return build_generator(
        d,
        lamb_shift=np.diag(H).real,
        dephasing=dephasing or None,
        jumps=jumps or None,
        **kwargs,
    )


def apply(L: Generator, rho) -> np.ndarray:
    """L(rho) = -i[H, rho] + sum_a (L_a rho L_a^+ - {L_a^+ L_a, rho}/2)."""
    raw = L.to_raw()
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (raw.dim, raw.dim):
        raise DimMismatch(f"operator has shape {rho.shape}, generator dim {raw.dim}")
    H = raw.hamiltonian_part
    out = -1j * (H @ rho - rho @ H)
    for A in raw.lindblad_ops:
        Ad = A.conj().T
        AdA = Ad @ A
        out = out + A @ rho @ Ad - 0.5 * (AdA @ rho + rho @ AdA)
    return out


def superoperator(L: Generator) -> np.ndarray:
    """Matrix of L acting on column-stacked operators."""
    raw = L.to_raw()
    d = raw.dim
    eye = np.eye(d)
    H = raw.hamiltonian_part
    S = -1j * (sandwich(H, eye) - sandwich(eye, H))
    for A in raw.lindblad_ops:
        AdA = A.conj().T @ A
        S = S + sandwich(A, A.conj().T) - 0.5 * (sandwich(AdA, eye) + sandwich(eye, AdA))
    return S


def identity_image(L: Generator, tol=None) -> tuple[np.ndarray, bool]:
    """L(I) together with a flag telling whether it is a passive operator."""
    tol = policy.current().passive_tol if tol is None else tol
    d = L.dim
    X = apply(L, np.eye(d))
    off = X - np.diag(np.diag(X))
    diag = np.diag(X).real
    passive = bool(np.max(np.abs(off), initial=0.0) <= tol and np.all(np.diff(diag) <= tol))
    return X, passive


def lambdas(L: Generator) -> np.ndarray:
    """lambda_n = Tr[Pi_n L(I)] for n = 1..d-1, Pi_n the projector on the n lowest levels."""
    X, _ = identity_image(L)
    return np.cumsum(np.diag(X).real)[:-1]


def channel_superoperator(L: Generator, t: float) -> np.ndarray:
    if t < 0:
        raise NegativeTime(f"t={t} is negative")
    return expm(t * superoperator(L))


def apply_channel(S, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return unvec(S @ vec(rho), rho.shape[0])


def _revalidate(out) -> np.ndarray:
    out = 0.5 * (out + out.conj().T)
    try:
        return validate_density(out)
    except InvalidState as exc:
        raise StateInvariantViolated(f"evolved state is not a density matrix: {exc}") from exc


def evolve(L: Generator, rho, t: float) -> np.ndarray:
    """e^{tL}(rho)."""
    if t < 0:
        raise NegativeTime(f"t={t} is negative")
    rho = validate_density(rho)
    if rho.shape[0] != L.dim:
        raise DimMismatch(f"state dim {rho.shape[0]} != generator dim {L.dim}")
    out = apply_channel(channel_superoperator(L, t), rho)
    # the check before symmetrizing catches a broken propagator
    herr = hermiticity_error(out)
    if herr > policy.current().hermitian_tol:
        raise StateInvariantViolated(f"evolved state lost hermiticity ({herr:.3e})")
    return _revalidate(out)


def evolve_with(S, rho) -> np.ndarray:
    """Apply a precomputed channel superoperator and revalidate the result."""
    out = apply_channel(S, rho)
    herr = hermiticity_error(out)
    if herr > policy.current().hermitian_tol:
        raise StateInvariantViolated(f"evolved state lost hermiticity ({herr:.3e})")
    return _revalidate(out)


def concave_profile(d: int, rng, *, integer_steps: bool = False) -> np.ndarray:
    """Random concave r_0..r_d with r_0 = r_d = 0 and r_i >= 0.

    Increments are drawn, sorted decreasing and centred so they sum to zero;
    their cumulative sum is then a concave bridge.
    """
    if integer_steps:
        steps = rng.integers(0, 3, size=d).astype(float)
    else:
        steps = rng.exponential(size=d)
    steps = np.sort(steps)[::-1]
    steps -= steps.mean()
    r = np.concatenate([[0.0], np.cumsum(steps)])
    r[-1] = 0.0
    return np.clip(r, 0.0, None)


def random_generator(
    d: int,
    rng,
    *,
    n_jump_rows: int | None = None,
    n_dephasing: int | None = None,
    lamb_scale: float = 1.0,
) -> LindbladGenerator:
    """Random member of the valid single-jump class.

    A quarter of the draws use integer increments so that flat stretches of
    the r-profile (concavity holding with equality) are sampled too.
    """
    rng = np.random.default_rng(rng)
    r = concave_profile(d, rng, integer_steps=rng.uniform() < 0.25)
    m = int(rng.integers(1, 3)) if n_jump_rows is None else n_jump_rows
    k = int(rng.integers(0, 3)) if n_dephasing is None else n_dephasing
    inner = r[1:d]
    if m > 0 and d > 1:
        weights = rng.dirichlet(np.ones(m), size=d - 1).T  # (m, d-1), columns sum to 1
        phases = np.exp(2j * np.pi * rng.uniform(size=(m, d - 1)))
        jumps = np.sqrt(weights * inner) * phases
    else:
        jumps = None
    deph = None
    if k:
        deph = (rng.normal(size=(k, d)) + 1j * rng.normal(size=(k, d))) / np.sqrt(2)
    lamb = lamb_scale * rng.normal(size=d)
    return build_generator(d, lamb_shift=lamb, dephasing=deph, jumps=jumps)
