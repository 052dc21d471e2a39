"""Reduced-state purities and the balanced-bipartition average.

This is the ground-truth side of every identity check in the package: it
reshapes the amplitude vector and works with Gram matrices, never touching
the Pauli kernel.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable

import numpy as np

from .states import QState, StateError

PURITY_TOL = 1e-10


def reduced_purity(state: QState, part_a: Iterable[int]) -> float:
    """Tr[rho_A^2] for the marginal on the qubit positions in part_a.

    Reshapes the amplitudes into a 2^|A| x 2^(n-|A|) matrix and takes the
    squared Frobenius norm of the Gram matrix built on the smaller side
    (identical spectra, half the work of forming rho_A at |A| > n/2).
    """
    positions = sorted(set(part_a))
    n = state.n
    if not positions or len(positions) == n:
        raise StateError(f"part_a must be a proper nonempty subset of 1..{n}")
    if positions[0] < 1 or positions[-1] > n:
        raise StateError(f"positions {positions} out of range for n={n}")
    axes = [p - 1 for p in positions]
    rest = [q for q in range(n) if q not in axes]
    a = len(axes)
    mat = (
        state.amplitudes.reshape((2,) * n)
        .transpose(axes + rest)
        .reshape(1 << a, 1 << (n - a))
    )
    if a <= n - a:
        gram = mat @ mat.conj().T
    else:
        gram = mat.conj().T @ mat
    purity = float(np.sum(np.abs(gram) ** 2))
    if purity > 1.0 + PURITY_TOL or purity < -PURITY_TOL:
        raise StateError(f"purity {purity!r} outside [0, 1] beyond tolerance")
    return min(max(purity, 0.0), 1.0)


@dataclass(frozen=True)
class PurityReport:
    """All balanced-bipartition purities of one state, plus summary stats."""

    n: int
    n_a: int
    subsets: tuple[tuple[int, ...], ...]
    purities: tuple[float, ...]
    mean: float
    min: float
    max: float

    @property
    def count(self) -> int:
        return len(self.subsets)


def average_balanced_purity(state: QState) -> PurityReport:
    """pi_ME: the mean purity over all C(n, floor(n/2)) balanced marginals.

    For even n every unordered bipartition appears twice (once per side);
    purities coincide for pure states so the mean is unaffected.  The
    report lists every subset in lexicographic order.
    """
    n = state.n
    if n < 2:
        raise StateError(f"balanced bipartitions need n >= 2, got {n}")
    n_a = n // 2
    subsets = tuple(combinations(range(1, n + 1), n_a))
    purities = tuple(reduced_purity(state, s) for s in subsets)
    assert len(subsets) == comb(n, n_a)
    return PurityReport(
        n=n,
        n_a=n_a,
        subsets=subsets,
        purities=purities,
        mean=float(np.mean(purities)),
        min=min(purities),
        max=max(purities),
    )
