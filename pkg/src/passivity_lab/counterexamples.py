"""Channels outside the hypothesis class where passive inputs stop being optimal.

* Two-mode quantum-limited attenuator on Fock space truncated at N
  (degenerate Hamiltonian).
* Two-qubit lossy channel with a jump skipping an energy level, or with a
  degenerate Hamiltonian.
* Qubit coupled to a finite-temperature bath, where the optimal input is a
  coherent superposition of the two energy eigenstates.

Each case pairs closed-form expressions with evolution through the generic
Lindblad engine.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from . import lindblad
from .errors import ClosedFormMismatch, CutoffTooSmall, InvalidState, NegativeTime
from .linalg import expm
from .majorization import MajorizationVerdict, Relation, compare
from .states import Hamiltonian, diagonal_state, is_passive, spectrum_of

CLOSED_FORM_TOL = 1e-8
T0_ATTENUATOR = math.log(2 + math.sqrt(2))


def _check_time(t):
    if t < 0:
        raise NegativeTime(f"t={t} is negative")


# -- two-mode attenuator ------------------------------------------------------


def ladder_operator(N: int) -> np.ndarray:
    """Annihilation operator on span{|0>, ..., |N>}."""
    return np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), k=1).astype(complex)


def attenuator_generator(N: int) -> lindblad.LindbladGenerator:
    """Single-mode attenuator: one jump row b_i = sqrt(i), harmonic energies."""
    return lindblad.build_generator(
        N + 1, jumps=[np.sqrt(np.arange(1, N + 1))], energies=np.arange(N + 1.0)
    )


def two_mode_attenuator(N: int) -> lindblad.RawLindbladGenerator:
    """Lindblad operators a (x) I and I (x) a on the product of two truncated modes."""
    a = ladder_operator(N)
    eye = np.eye(N + 1)
    d = (N + 1) ** 2
    return lindblad.RawLindbladGenerator(d, np.zeros((d, d)), (np.kron(a, eye), np.kron(eye, a)))


def two_mode_energies(N: int) -> np.ndarray:
    """Energy i + j of |i, j> in Kronecker order."""
    n = np.arange(N + 1)
    return (n[:, None] + n[None, :]).ravel().astype(float)


def two_mode_energy_order(N: int) -> np.ndarray:
    """Permutation listing Kronecker indices by non-decreasing energy."""
    return np.argsort(two_mode_energies(N), kind="stable")


def two_mode_hamiltonian(N: int) -> Hamiltonian:
    """Degenerate Hamiltonian in the energy-sorted basis of :func:`two_mode_energy_order`."""
    return Hamiltonian(tuple(np.sort(two_mode_energies(N))), degenerate=True)


def attenuator_inputs(N: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """(rho, sigma): uniform on {i + j <= 2} and uniform on {|0, i>, i <= 5}."""
    if N < 5:
        raise CutoffTooSmall(f"N={N}; the non-passive input needs N >= 5")
    k = N + 1
    rho = np.zeros(k * k)
    for i in range(3):
        for j in range(3 - i):
            rho[i * k + j] = 1 / 6
    sigma = np.zeros(k * k)
    sigma[:6] = 1 / 6
    return diagonal_state(rho), diagonal_state(sigma)


class AttenuatorClosedForms(NamedTuple):
    s3: float
    s3_tilde: float
    p1: float
    p1_tilde: float


def attenuator_closed_forms(t: float) -> AttenuatorClosedForms:
    _check_time(t)
    e = math.exp(-t)
    s3 = 1 - e**2 / 2
    s3_tilde = 1 - e**3 * (5 - 6 * e + 2 * e**2) / 2
    p1 = (6 - 8 * e + 3 * e**2) / 6
    p1_tilde = (2 - e) * (3 - 3 * e + e**2) * (1 - e + e**2) / 6
    return AttenuatorClosedForms(s3, s3_tilde, p1, p1_tilde)


@functools.lru_cache(maxsize=4)
def _two_mode_superoperator(N: int) -> np.ndarray:
    S = lindblad.superoperator(two_mode_attenuator(N))
    S.setflags(write=False)
    return S


def _attenuator_channel(t: float, N: int) -> np.ndarray:
    return expm(t * _two_mode_superoperator(N))


@dataclasses.dataclass(frozen=True)
class AttenuatorResult:
    t: float
    spectrum_rho: np.ndarray
    spectrum_sigma: np.ndarray
    numeric: AttenuatorClosedForms
    closed: AttenuatorClosedForms
    verdict: MajorizationVerdict

    @property
    def max_deviation(self) -> float:
        return max(abs(a - b) for a, b in zip(self.numeric, self.closed))


def attenuator_numeric(t: float, N: int = 5, *, check: bool = True, tol: float = 1e-10):
    """Evolve both inputs through the two-mode channel and read off s3, p1.

    With ``check`` set, a disagreement with the closed forms above 1e-8
    raises :class:`ClosedFormMismatch`.
    """
    _check_time(t)
    rho, sigma = attenuator_inputs(N)
    S = _attenuator_channel(t, N)
    p = spectrum_of(lindblad.evolve_with(S, rho))
    q = spectrum_of(lindblad.evolve_with(S, sigma))
    numeric = AttenuatorClosedForms(*(float(v) for v in (p[:3].sum(), q[:3].sum(), p[0], q[0])))
    res = AttenuatorResult(
        float(t), p, q, numeric, attenuator_closed_forms(t), compare(p, q, tol)
    )
    if check and res.max_deviation > CLOSED_FORM_TOL:
        raise ClosedFormMismatch(
            f"attenuator at t={t}: numeric {numeric} vs closed {res.closed}"
        )
    return res


def attenuator_crossing_time(
    N: int = 5, bracket=(1.0, 1.5), xtol: float = 1e-9, *, numeric: bool = True
) -> float:
    """Root of s3(t) - s3_tilde(t) by bisection, from evolved spectra or closed forms."""
    if numeric:
        def f(t):
            r = attenuator_numeric(t, N, check=False).numeric
            return r.s3 - r.s3_tilde
    else:
        def f(t):
            r = attenuator_closed_forms(t)
            return r.s3 - r.s3_tilde
    return float(optimize.bisect(f, *bracket, xtol=xtol))


def attenuator_series(times, N: int = 5):
    """Rows (t, s3, s3_tilde, p1, p1_tilde, closed-form values, verdict) on a grid.

    A uniform grid starting at 0 is propagated with one precomputed step
    channel; other grids exponentiate per time.
    """
    times = np.asarray(times, dtype=float)
    rho, sigma = attenuator_inputs(N)
    rows = []
    steps = np.diff(times)
    uniform = times.size > 1 and times[0] == 0 and np.allclose(steps, steps[0], rtol=0, atol=1e-12)
    if uniform:
        S = _attenuator_channel(float(steps[0]), N)
        r, s = rho, sigma
        for k, t in enumerate(times):
            if k:
                r, s = lindblad.evolve_with(S, r), lindblad.evolve_with(S, s)
            rows.append(_attenuator_row(t, r, s))
    else:
        for t in times:
            S = _attenuator_channel(t, N)
            rows.append(_attenuator_row(t, lindblad.evolve_with(S, rho), lindblad.evolve_with(S, sigma)))
    return rows


def _attenuator_row(t, r, s):
    p, q = spectrum_of(r), spectrum_of(s)
    cf = attenuator_closed_forms(t)
    return {
        "t": float(t),
        "s3": float(p[:3].sum()),
        "s3_tilde": float(q[:3].sum()),
        "p1": float(p[0]),
        "p1_tilde": float(q[0]),
        "s3_closed": cf.s3,
        "s3_tilde_closed": cf.s3_tilde,
        "p1_closed": cf.p1,
        "p1_tilde_closed": cf.p1_tilde,
        "verdict": compare(p, q).relation.value,
    }


# -- two-qubit lossy channel --------------------------------------------------

TWO_QUBIT_VARIANTS = ("multijump", "degenerate")


def two_qubit_generator() -> lindblad.RawLindbladGenerator:
    """L1 = |00><10|, L2 = |00><01| + sqrt(2)|01><11|, basis |00>, |01>, |10>, |11>."""
    L1 = np.zeros((4, 4), complex)
    L1[0, 2] = 1
    L2 = np.zeros((4, 4), complex)
    L2[0, 1] = 1
    L2[1, 3] = math.sqrt(2)
    return lindblad.RawLindbladGenerator(4, np.zeros((4, 4)), (L1, L2))


def two_qubit_hamiltonian(variant: str, E1: float = 1.0, E2: float = 0.5) -> Hamiltonian:
    """Energies of |00>, |01>, |10>, |11> for E1 |1><1| (x) I + E2 I (x) |1><1|."""
    if variant == "multijump":
        if not 0 < E2 < E1:
            raise ValueError("multijump variant needs 0 < E2 < E1")
        return Hamiltonian((0.0, E2, E1, E1 + E2))
    if variant == "degenerate":
        return Hamiltonian((0.0, E1, E1, 2 * E1), degenerate=True)
    raise ValueError(f"unknown variant {variant!r}; expected one of {TWO_QUBIT_VARIANTS}")


def two_qubit_inputs() -> dict[str, np.ndarray]:
    return {
        "rho0": diagonal_state([0.25, 0.25, 0.25, 0.25]),
        "rho1": diagonal_state([1 / 3, 1 / 3, 1 / 3, 0]),
        "rho2": diagonal_state([1 / 3, 1 / 3, 0, 1 / 3]),
    }


def two_qubit_closed_forms(t: float, variant: str = "multijump") -> dict[str, np.ndarray]:
    """Populations (p00, p01, p10, p11) of the three evolved inputs.

    Both variants share the generator, so ``variant`` only gets validated.
    """
    _check_time(t)
    if variant not in TWO_QUBIT_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    e = math.exp(-t)
    p0 = [1 - e + e**2 / 4, e * (3 - 2 * e) / 4, e / 4, e**2 / 4]
    p1 = [1 - 2 * e / 3, e / 3, e / 3, 0.0]
    p2 = [1 - e + e**2 / 3, e * (1 - 2 * e / 3), 0.0, e**2 / 3]
    return {"rho0": np.array(p0), "rho1": np.array(p1), "rho2": np.array(p2)}


def two_qubit_evolved(t: float) -> dict[str, np.ndarray]:
    _check_time(t)
    S = lindblad.channel_superoperator(two_qubit_generator(), t)
    return {k: lindblad.evolve_with(S, v) for k, v in two_qubit_inputs().items()}


def two_qubit_populations(t: float) -> dict[str, np.ndarray]:
    return {k: np.diag(v).real.copy() for k, v in two_qubit_evolved(t).items()}


def two_qubit_verdict(t: float, variant: str = "multijump", tol: float = 1e-10) -> MajorizationVerdict:
    """Majorization relation of rho1(t) (passive input) relative to rho2(t)."""
    two_qubit_hamiltonian(variant)
    out = two_qubit_evolved(t)
    return compare(spectrum_of(out["rho1"]), spectrum_of(out["rho2"]), tol)


def two_qubit_series(times, variant: str = "multijump"):
    names = ("00", "01", "10", "11")
    rows = []
    for t in times:
        out = two_qubit_evolved(t)
        closed = two_qubit_closed_forms(t, variant)
        row = {"t": float(t)}
        for key in ("rho0", "rho1", "rho2"):
            pops = np.diag(out[key]).real
            for name, v, c in zip(names, pops, closed[key]):
                row[f"{key}_p{name}"] = float(v)
                row[f"{key}_p{name}_closed"] = float(c)
        row["rho0_passive"] = is_passive(out["rho0"])
        row["rho1_passive"] = is_passive(out["rho1"])
        row["verdict"] = compare(spectrum_of(out["rho1"]), spectrum_of(out["rho2"])).relation.value
        rows.append(row)
    return rows


# -- finite-temperature qubit -------------------------------------------------

# basis (|0>, |1>), |0> the ground state; sigma_- = |0><1|
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T


@dataclasses.dataclass(frozen=True)
class FiniteTempParams:
    gamma0: float = 1.0
    nbar: float = 0.5
    E0: float = 1.0

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        if not self.nbar > 0:
            raise ValueError("mean bath occupation must be positive")
        if not self.E0 > 0:
            raise ValueError("E0 must be positive")

    @property
    def gamma(self) -> float:
        return self.gamma0 * (2 * self.nbar + 1)

    @property
    def z_inf(self) -> float:
        return -1.0 / (2 * self.nbar + 1)

    @property
    def beta(self) -> float:
        """Inverse temperature with z_inf = -tanh(beta E0 / 2)."""
        return 2 * math.atanh(-self.z_inf) / self.E0


@dataclasses.dataclass(frozen=True)
class BlochState:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.x**2 + self.y**2 + self.z**2 > 1 + 1e-12:
            raise InvalidState(f"Bloch vector ({self.x}, {self.y}, {self.z}) outside the unit ball")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def purity(self) -> float:
        return (1 + self.x**2 + self.y**2 + self.z**2) / 2

    def density(self) -> np.ndarray:
        return (np.eye(2) + self.x * SIGMA_X + self.y * SIGMA_Y + self.z * SIGMA_Z) / 2

    @classmethod
    def from_density(cls, rho) -> "BlochState":
        rho = np.asarray(rho)
        comps = [float(np.trace(rho @ s).real) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
        return cls(*comps)


def qubit_generator(params: FiniteTempParams) -> lindblad.RawLindbladGenerator:
    """Quantum optical master equation: decay at gamma0 (N+1), excitation at gamma0 N."""
    ops = (
        math.sqrt(params.gamma0 * (params.nbar + 1)) * SIGMA_MINUS,
        math.sqrt(params.gamma0 * params.nbar) * SIGMA_PLUS,
    )
    return lindblad.RawLindbladGenerator(2, np.zeros((2, 2)), ops)


def bloch_evolve(params: FiniteTempParams, b0: BlochState, t: float) -> BlochState:
    _check_time(t)
    g = params.gamma
    shrink = math.exp(-g * t / 2)
    zi = params.z_inf
    return BlochState(shrink * b0.x, shrink * b0.y, zi + math.exp(-g * t) * (b0.z - zi))


def purity_closed_form(params: FiniteTempParams, b0: BlochState, t: float) -> float:
    _check_time(t)
    e = math.exp(-params.gamma * t)
    zi = params.z_inf
    r2 = b0.x**2 + b0.y**2 + b0.z**2
    return (1 + e * r2) / 2 + (1 - e) / 2 * (zi**2 - e * (b0.z - zi) ** 2)


def optimal_coherent_state(params: FiniteTempParams) -> tuple[BlochState, Callable[[float], float]]:
    """Pure input with the asymptotic energy, phases fixed so that y = 0, x > 0."""
    zi = params.z_inf
    b = BlochState(math.sqrt(1 - zi**2), 0.0, zi)
    return b, functools.partial(purity_closed_form, params, b)


def coherent_state_vector(params: FiniteTempParams) -> np.ndarray:
    zi = params.z_inf
    return np.array([math.sqrt((1 - zi) / 2), math.sqrt((1 + zi) / 2)], dtype=complex)


def random_bloch(rng) -> BlochState:
    """Uniform draw from the Bloch ball."""
    v = rng.normal(size=3)
    v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
    return BlochState(*map(float, v))


def finite_temp_series(params: FiniteTempParams, times, n_random: int = 500, seed: int = 42):
    """Per time: closed-form vs numeric Bloch vectors of the optimal state and
    the margin of its purity over ``n_random`` random inputs."""
    rng = np.random.default_rng(seed)
    others = [random_bloch(rng) for _ in range(n_random)]
    b_opt, purity = optimal_coherent_state(params)
    G = qubit_generator(params)
    rows = []
    for t in times:
        S = lindblad.channel_superoperator(G, t)
        num = BlochState.from_density(lindblad.evolve_with(S, b_opt.density()))
        cf = bloch_evolve(params, b_opt, t)
        best_other = max(bloch_evolve(params, b, t).purity for b in others)
        rows.append(
            {
                "t": float(t),
                "x": num.x,
                "y": num.y,
                "z": num.z,
                "x_closed": cf.x,
                "y_closed": cf.y,
                "z_closed": cf.z,
                "purity_optimal": purity(t),
                "purity_best_random": best_other,
                "verdict": Relation.MAJORIZES.value if purity(t) >= best_other - 1e-10 else Relation.INCOMPARABLE.value,
            }
        )
    return rows
