"""Majorization order on probability spectra.

``p`` majorizes ``q`` when every leading partial sum of the sorted ``p``
dominates that of the sorted ``q``. A majorization relation is witnessed
constructively by a chain of T-transforms, i.e. two-coordinate mixings
``(p_i, p_j) -> (lam p_i + (1-lam) p_j, lam p_j + (1-lam) p_i)``.
"""

from __future__ import annotations

import dataclasses
import enum

import numpy as np

from . import policy
from .errors import DimMismatch, NotMajorizing, RangeError
from .states import as_spectrum


class Relation(str, enum.Enum):
    MAJORIZES = "Majorizes"
    MAJORIZED_BY = "MajorizedBy"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"


@dataclasses.dataclass(frozen=True)
class MajorizationVerdict:
    relation: Relation
    gaps: tuple  # gaps[n-1] = sum_{i<=n} (p_i - q_i)
    tol: float

    @property
    def min_gap(self) -> float:
        return min(self.gaps)

    @property
    def max_gap(self) -> float:
        return max(self.gaps)

    def holds(self) -> bool:
        """True when the first argument majorizes (or equals) the second."""
        return self.relation in (Relation.MAJORIZES, Relation.EQUAL)


@dataclasses.dataclass(frozen=True)
class TTransformChain:
    steps: tuple = ()  # ((i, j), lam) with 0-based indices

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def partial_sum_gaps(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimMismatch(f"spectra have dims {p.size} and {q.size}")
    return np.cumsum(np.sort(p)[::-1] - np.sort(q)[::-1])


def compare(p, q, tol=None) -> MajorizationVerdict:
    """Classify the majorization relation of ``p`` relative to ``q``."""
    tol = policy.current().verdict_tol if tol is None else tol
    p = as_spectrum(p)
    q = as_spectrum(q)
    if p.size != q.size:
        raise DimMismatch(f"spectra have dims {p.size} and {q.size}")
    gaps = np.cumsum(p - q)
    if np.all(np.abs(gaps) <= tol):
        rel = Relation.EQUAL
    elif np.all(gaps >= -tol):
        rel = Relation.MAJORIZES
    elif np.all(gaps <= tol):
        rel = Relation.MAJORIZED_BY
    else:
        rel = Relation.INCOMPARABLE
    return MajorizationVerdict(rel, tuple(float(g) for g in gaps), tol)


def majorizes(p, q, tol=None) -> bool:
    return compare(p, q, tol).holds()


def t_transform_witness(p, q, tol=None) -> TTransformChain:
    """Chain of at most d-1 T-transforms carrying ``p`` to ``q``.

    At each step take the last coordinate j where p still exceeds q and the
    first k > j where it falls short, then move min(p_j - q_j, q_k - p_k)
    from j to k. Every step settles at least one coordinate.
    """
    tol = policy.current().verdict_tol if tol is None else tol
    verdict = compare(p, q, tol)
    if not verdict.holds():
        raise NotMajorizing(f"p does not majorize q (relation {verdict.relation.value})")
    x = as_spectrum(p)
    y = as_spectrum(q)
    d = x.size
    eps = 1e-15
    steps = []
    for _ in range(d - 1):
        above = np.nonzero(x - y > eps)[0]
        if above.size == 0:
            break
        j = int(above[-1])
        below = np.nonzero(y[j + 1 :] - x[j + 1 :] > eps)[0]
        if below.size == 0:
            break
        k = j + 1 + int(below[0])
        delta = min(x[j] - y[j], y[k] - x[k])
        lam = 1.0 - delta / (x[j] - x[k])
        steps.append(((j, k), float(lam)))
        if x[j] - y[j] <= y[k] - x[k]:
            x[k] += x[j] - y[j]
            x[j] = y[j]
        else:
            x[j] -= y[k] - x[k]
            x[k] = y[k]
    return TTransformChain(tuple(steps))


def apply_t_transforms(p, chain: TTransformChain) -> np.ndarray:
    x = np.array(p, dtype=float)
    d = x.size
    for (i, j), lam in chain:
        if not (0 <= i < d and 0 <= j < d):
            raise RangeError(f"step indices ({i}, {j}) outside 0..{d - 1}")
        if not 0.0 <= lam <= 1.0:
            raise RangeError(f"mixing weight {lam} outside [0, 1]")
        xi, xj = x[i], x[j]
        x[i] = lam * xi + (1.0 - lam) * xj
        x[j] = lam * xj + (1.0 - lam) * xi
    return np.sort(x)[::-1]


def random_majorized(p, rng, n_steps=None) -> np.ndarray:
    """A random vector majorized by ``p``, obtained by random T-transforms."""
    x = np.array(as_spectrum(p))
    d = x.size
    if d < 2:
        return x
    n_steps = d if n_steps is None else n_steps
    for _ in range(n_steps):
        i, j = rng.choice(d, size=2, replace=False)
        lam = rng.uniform()
        xi, xj = x[i], x[j]
        x[i] = lam * xi + (1 - lam) * xj
        x[j] = lam * xj + (1 - lam) * xi
    return np.sort(x)[::-1]
