"""Numeric tolerances used across the package.

Every module reads its defaults from ``POLICY`` so a test (or a user) can
tighten or loosen them in one place via :func:`use_policy`.
"""

from __future__ import annotations

import contextlib
import dataclasses


@dataclasses.dataclass(frozen=True)
class NumericPolicy:
    hermitian_tol: float = 1e-10
    trace_tol: float = 1e-10
    psd_tol: float = 1e-10
    spectrum_entry_tol: float = 1e-12
    eigh_offdiag_rel: float = 1e-13
    eigh_max_sweeps: int = 64
    expm_norm_target: float = 0.5
    expm_taylor_order: int = 18
    tie_tol: float = 1e-12
    concavity_tol: float = 1e-12
    passive_tol: float = 1e-12
    verdict_tol: float = 1e-10
    theorem_tol: float = 1e-9
    diagonal_tol: float = 1e-10


POLICY = NumericPolicy()


@contextlib.contextmanager
def use_policy(**overrides):
    """Temporarily replace fields of the global policy."""
    global POLICY
    saved = POLICY
    POLICY = dataclasses.replace(saved, **overrides)
    try:
        yield POLICY
    finally:
        POLICY = saved


def current() -> NumericPolicy:
    return POLICY
