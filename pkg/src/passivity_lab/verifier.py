"""Seeded Monte-Carlo verification of passive-state optimality.

For a valid generator L and any input rho, the output spectrum of the
passive rearrangement must majorize the output spectrum of rho at every
time, and passive inputs must stay passive. The checks below evaluate these
statements on time grids, together with the partial-sum differential
inequality that drives the argument:

    d/dt s_n(t) <= lambda_n (s_{n+1}(t) - s_n(t)),   lambda_n = Tr[Pi_n L(I)].

Each trial draws from its own generator seeded by ``trial_seed(master, i)``,
so trials can run in any order or in parallel and still produce identical
reports.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import logging
import os
import time
from typing import NamedTuple, Sequence

import numpy as np

from . import lindblad, policy
from .errors import (
    ConcavityViolated,
    DegenerateSpectrumAtT,
    DimMismatch,
    InvalidGenerator,
    RangeError,
)
from .states import Hamiltonian, as_spectrum, is_passive, passive_rearrangement, spectrum_of

log = logging.getLogger(__name__)

THREADS_ENV = "PASSIVITY_LAB_THREADS"


class GapRecord(NamedTuple):
    seed: int
    t: float
    n: int
    gap: float


@dataclasses.dataclass(frozen=True)
class VerificationReport:
    trials: int
    violations: tuple
    min_gap: float
    runtime_seconds: float
    tol: float
    records: tuple = ()  # worst (seed, t, n, gap) per trial and time

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        """JSON-ready summary. Wall-clock runtime is left out so reports are reproducible."""
        return {
            "trials": self.trials,
            "tol": self.tol,
            "min_gap": self.min_gap,
            "n_violations": len(self.violations),
            "violations": [r._asdict() for r in self.violations],
        }


@dataclasses.dataclass(frozen=True)
class SnTrajectory:
    times: np.ndarray
    s: np.ndarray  # (len(times), d)
    s_passive: np.ndarray


class SdotRecord(NamedTuple):
    t: float
    lhs: np.ndarray
    rhs: np.ndarray
    holds: bool


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        return 1


def _map(fn, items, threads=None):
    threads = default_threads() if threads is None else max(1, threads)
    if threads == 1:
        return [fn(x) for x in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def trial_seed(master: int, index: int) -> int:
    """Deterministic per-trial seed hashed from the master seed and a counter."""
    return int(np.random.SeedSequence([int(master), int(index)]).generate_state(1)[0])


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary from a Ginibre draw, QR with a positive-diagonal R."""
    if d < 1:
        raise RangeError("d must be >= 1")
    rng = np.random.default_rng(seed)
    Z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_density(d: int, rank: int | None = None, seed=None, *, min_gap=1e-6, max_attempts=100):
    """Haar-rotated state whose ``rank`` non-zero eigenvalues are flat on the simplex.

    Draws with two eigenvalues closer than ``min_gap`` are rejected.
    """
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise RangeError(f"rank={rank} outside 1..{d}")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        w = np.zeros(d)
        w[:rank] = rng.dirichlet(np.ones(rank))
        distinct = np.sort(w[: rank + 1] if rank < d else w)
        if rank == 1 or np.min(np.diff(distinct)) >= min_gap:
            break
    else:
        raise RangeError(f"no non-degenerate draw in {max_attempts} attempts")
    if attempt > 1:
        log.debug("random_density: %d rejected draws (d=%d, rank=%d)", attempt - 1, d, rank)
    U = haar_unitary(d, rng)
    rho = (U * w) @ U.conj().T
    return 0.5 * (rho + rho.conj().T)


def _basis_hamiltonian(d):
    return Hamiltonian(tuple(range(d)))


def passive_of(rho) -> np.ndarray:
    """Passive rearrangement with basis index order as energy order."""
    return passive_rearrangement(rho, _basis_hamiltonian(np.asarray(rho).shape[0]))


def _worst(seed, t, p_ref, p):
    """Most negative partial-sum gap of p_ref over p, n = 1..d-1."""
    gaps = np.cumsum(p_ref - p)[:-1]
    if gaps.size == 0:
        return GapRecord(seed, float(t), 0, 0.0)
    n = int(np.argmin(gaps))
    return GapRecord(seed, float(t), n + 1, float(gaps[n]))


def _check_valid(L):
    if isinstance(L, lindblad.LindbladGenerator):
        bad = lindblad.concavity_violation(L.r_profile)
        if bad is not None:
            raise InvalidGenerator(str(ConcavityViolated(*bad)))


def _assemble(records, violations, tol, trials, started):
    records = tuple(sorted(records))
    violations = tuple(sorted(violations))
    min_gap = min((r.gap for r in records), default=0.0)
    return VerificationReport(
        trials=trials,
        violations=violations,
        min_gap=float(min_gap),
        runtime_seconds=time.perf_counter() - started,
        tol=tol,
        records=records,
    )


def verify_main_theorem(
    L,
    d: int | None = None,
    trials: int = 100,
    t_grid: Sequence[float] = (0.25, 0.5, 1.0, 2.0),
    tol: float | None = None,
    *,
    seed: int = 42,
    rank: int | None = None,
    threads: int | None = None,
    allow_raw: bool = False,
) -> VerificationReport:
    """Check e^{tL}(rho) is majorized by e^{tL}(rho^passive) on random inputs.

    Structured generators must satisfy the concavity hypothesis. Raw
    generators are refused unless ``allow_raw`` is set, which is how
    counterexample channels are probed.
    """
    tol = policy.current().theorem_tol if tol is None else tol
    if isinstance(L, lindblad.RawLindbladGenerator) and not allow_raw:
        raise InvalidGenerator("raw generator given; pass allow_raw=True to probe it")
    _check_valid(L)
    d = L.dim if d is None else d
    if d != L.dim:
        raise DimMismatch(f"d={d} but generator has dim {L.dim}")
    started = time.perf_counter()
    channels = [(float(t), lindblad.channel_superoperator(L, t)) for t in t_grid]

    def trial(i):
        s = trial_seed(seed, i)
        rho = random_density(d, rank, s)
        rho_p = passive_of(rho)
        recs = []
        for t, S in channels:
            p = spectrum_of(lindblad.evolve_with(S, rho))
            p_ref = spectrum_of(lindblad.evolve_with(S, rho_p))
            recs.append(_worst(s, t, p_ref, p))
        return recs

    records = [r for recs in _map(trial, range(trials), threads) for r in recs]
    violations = [r for r in records if r.gap < -tol]
    return _assemble(records, violations, tol, trials, started)


def verify_passive_preservation(
    L,
    spectrum,
    t_grid: Sequence[float] = (0.25, 0.5, 1.0, 2.0),
    tol: float | None = None,
    *,
    seed: int = 0,
) -> VerificationReport:
    """Evolve the passive state with the given spectrum and check it stays passive.

    A record's ``gap`` is the smallest population step p_n - p_{n+1}; an
    off-diagonal excess is reported with ``n = 0`` and ``gap = -|offdiag|``.
    """
    tol = policy.current().diagonal_tol if tol is None else tol
    _check_valid(L)
    started = time.perf_counter()
    p = as_spectrum(spectrum)
    if p.size != L.dim:
        raise DimMismatch(f"spectrum has {p.size} entries, generator dim {L.dim}")
    rho0 = np.diag(p.astype(complex))
    records, violations = [], []
    for t in t_grid:
        rho = lindblad.evolve(L, rho0, t)
        rec = _passivity_record(seed, t, rho)
        records.append(rec)
        if rec.gap < -tol or not is_passive(rho, tol=tol):
            violations.append(rec)
    return _assemble(records, violations, tol, 1, started)


def _passivity_record(seed, t, rho) -> GapRecord:
    off = np.max(np.abs(rho - np.diag(np.diag(rho))), initial=0.0)
    steps = -np.diff(np.diag(rho).real)
    if off > 0 and (steps.size == 0 or -off < steps.min()):
        return GapRecord(seed, float(t), 0, float(-off))
    if steps.size == 0:
        return GapRecord(seed, float(t), 0, 0.0)
    n = int(np.argmin(steps))
    return GapRecord(seed, float(t), n + 1, float(steps[n]))


def partial_sums(rho) -> np.ndarray:
    return np.cumsum(spectrum_of(rho))


def sn_trajectory(L, rho, times) -> SnTrajectory:
    times = np.asarray(times, dtype=float)
    rho_p = passive_of(rho)
    s, s_p = [], []
    for t in times:
        S = lindblad.channel_superoperator(L, t)
        s.append(partial_sums(lindblad.evolve_with(S, rho)))
        # the passive output is diagonal; its partial sums run in energy order
        s_p.append(np.cumsum(np.diag(lindblad.evolve_with(S, rho_p)).real))
    return SnTrajectory(times, np.array(s), np.array(s_p))


def verify_sdot_inequality(
    L,
    rho,
    t: float,
    h: float = 1e-5,
    slack: float = 1e-6,
    *,
    require_nondegenerate: bool = True,
) -> SdotRecord:
    """Finite-difference check of d/dt s_n <= lambda_n (s_{n+1} - s_n).

    Uses a central difference, or a second-order forward difference when
    ``t < h``. Raises :class:`DegenerateSpectrumAtT` when two eigenvalues of
    rho(t) are closer than ``10 h``.
    """
    lam = lindblad.lambdas(L)

    def s_at(tau):
        return partial_sums(lindblad.evolve(L, rho, tau))

    s_t = s_at(t)
    if require_nondegenerate:
        p = np.diff(np.concatenate([[0.0], s_t]))
        if p.size > 1 and np.min(-np.diff(p)) <= 10 * h:
            raise DegenerateSpectrumAtT(f"spectrum of rho({t}) has a gap below {10 * h:g}")
    if t >= h:
        ds = (s_at(t + h) - s_at(t - h)) / (2 * h)
    else:
        ds = (-3 * s_t + 4 * s_at(t + h) - s_at(t + 2 * h)) / (2 * h)
    lhs = ds[:-1]
    rhs = lam * (s_t[1:] - s_t[:-1])
    return SdotRecord(float(t), lhs, rhs, bool(np.all(lhs <= rhs + slack)))


def verify_random_generators(
    dims: Sequence[int] = (2, 3, 4, 5, 6),
    trials: int = 500,
    t_grid: Sequence[float] = (0.1, 0.3, 1.0, 3.0),
    tol: float | None = None,
    *,
    seed: int = 42,
    passive_tol: float | None = None,
    threads: int | None = None,
) -> tuple[VerificationReport, VerificationReport]:
    """Main-theorem sweep where every trial draws its own valid generator.

    Returns the majorization report and the passivity-preservation report
    (the latter tracks the passive rearrangement of each trial's input).
    """
    pol = policy.current()
    tol = pol.theorem_tol if tol is None else tol
    passive_tol = pol.diagonal_tol if passive_tol is None else passive_tol
    dims = list(dims)
    started = time.perf_counter()

    def trial(i):
        s = trial_seed(seed, i)
        rng = np.random.default_rng(s)
        d = dims[i % len(dims)]
        G = lindblad.random_generator(d, rng)
        rho = random_density(d, None, rng)
        rho_p = passive_of(rho)
        maj, pas = [], []
        for t in t_grid:
            S = lindblad.channel_superoperator(G, t)
            out_p = lindblad.evolve_with(S, rho_p)
            p = spectrum_of(lindblad.evolve_with(S, rho))
            maj.append(_worst(s, t, spectrum_of(out_p), p))
            pas.append(_passivity_record(s, t, out_p))
        return maj, pas

    results = _map(trial, range(trials), threads)
    maj = [r for m, _ in results for r in m]
    pas = [r for _, p in results for r in p]
    maj_report = _assemble(maj, [r for r in maj if r.gap < -tol], tol, trials, started)
    pas_report = _assemble(
        pas, [r for r in pas if r.gap < -passive_tol], passive_tol, trials, started
    )
    return maj_report, pas_report
