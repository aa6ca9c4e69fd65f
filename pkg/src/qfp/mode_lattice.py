"""Truncated frequency-bin lattices and the transfer matrices acting on them.

A comb of discrete frequency bins is indexed by integers n, with the bin n
centered at omega_0 + n * spacing.  All linear optics in this package is
expressed as dense complex matrices on a finite, inclusive index window
[n_min, n_max]; physically infinite operators are truncated to such a window,
which makes them slightly sub-unitary.  Windows are chosen wide enough that
the central entries of any cascade are converged to well below the tolerances
used elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SPACING_HZ = 25e9

# Margin beyond ceil(depth) by which a window must exceed the populated bins.
# Sideband amplitudes fall off super-exponentially past the modulation depth,
# so this leaves truncation error far below every tolerance in the package.
TRUNCATION_PAD = 15

SUBUNITARITY_EPS = 1e-9


@dataclass(frozen=True)
class ModeWindow:
    """Inclusive range [n_min, n_max] of frequency-bin indices.

    ``spacing`` is carried as metadata only; it never enters the linear
    algebra.
    """

    n_min: int
    n_max: int
    spacing: float = DEFAULT_SPACING_HZ

    def __post_init__(self):
        if self.n_min > self.n_max:
            raise ValueError(
                f"empty window: n_min={self.n_min} > n_max={self.n_max}"
            )

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1

    def bins(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def __contains__(self, bin_index) -> bool:
        return self.n_min <= bin_index <= self.n_max

    def index_of(self, bin_index: int) -> int:
        """Array index of a bin; raises IndexError outside the window."""
        if bin_index not in self:
            raise IndexError(
                f"bin {bin_index} outside window [{self.n_min}, {self.n_max}]"
            )
        return int(bin_index) - self.n_min

    def padded(self, margin: int) -> "ModeWindow":
        return ModeWindow(self.n_min - margin, self.n_max + margin, self.spacing)


def truncation_margin(depth: float) -> int:
    """Window margin for a cascade with maximum modulation depth ``depth``."""
    return math.ceil(max(depth, 0.0)) + TRUNCATION_PAD


def recommended_window(populated, depth: float,
                       spacing: float = DEFAULT_SPACING_HZ) -> ModeWindow:
    """Window extending ``truncation_margin(depth)`` beyond the populated bins."""
    bins = list(populated)
    if not bins:
        raise ValueError("no populated bins given")
    m = truncation_margin(depth)
    return ModeWindow(min(bins) - m, max(bins) + m, spacing)


@dataclass(frozen=True)
class TransferMatrix:
    """Dense complex mode-coupling matrix.

    ``entries[i, j]`` couples input bin ``window_in.bins()[j]`` to output bin
    ``window_out.bins()[i]``.  Instances are immutable; the entry array is
    copied and frozen at construction.
    """

    window_in: ModeWindow
    window_out: ModeWindow
    entries: np.ndarray

    def __post_init__(self):
        ent = np.array(self.entries, dtype=complex)
        if ent.shape != (self.window_out.size, self.window_in.size):
            raise ValueError(
                f"entry shape {ent.shape} does not match windows "
                f"({self.window_out.size}, {self.window_in.size})"
            )
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @classmethod
    def identity(cls, window: ModeWindow) -> "TransferMatrix":
        return cls(window, window, np.eye(window.size, dtype=complex))

    def entry(self, m: int, n: int) -> complex:
        """Coupling amplitude from input bin n to output bin m."""
        return complex(
            self.entries[self.window_out.index_of(m), self.window_in.index_of(n)]
        )

    def block(self, out_bins, in_bins) -> np.ndarray:
        """Submatrix for explicit lists of output and input bins."""
        rows = [self.window_out.index_of(b) for b in out_bins]
        cols = [self.window_in.index_of(b) for b in in_bins]
        return np.array(self.entries[np.ix_(rows, cols)])

    def submatrix(self, window_out: ModeWindow, window_in: ModeWindow) -> "TransferMatrix":
        return TransferMatrix(
            window_in, window_out, self.block(window_out.bins(), window_in.bins())
        )

    def column_norms(self) -> np.ndarray:
        """Squared column norms, indexed like window_in.bins()."""
        return np.sum(np.abs(self.entries) ** 2, axis=0)


def compose(first: TransferMatrix, second: TransferMatrix) -> TransferMatrix:
    """Chain two transfer matrices; ``first`` is adjacent to the input.

    Result entries are ``second.entries @ first.entries`` with
    ``window_in = first.window_in`` and ``window_out = second.window_out``.
    """
    if second.window_in != first.window_out:
        raise ValueError(
            f"window mismatch: cannot chain output window "
            f"[{first.window_out.n_min}, {first.window_out.n_max}] into input "
            f"window [{second.window_in.n_min}, {second.window_in.n_max}]"
        )
    return TransferMatrix(
        first.window_in, second.window_out, second.entries @ first.entries
    )


def unitarity_defect(V: TransferMatrix, central: ModeWindow | None = None) -> float:
    """Max-norm of (V^dag V - I), a diagnostic for truncation loss.

    With ``central`` given, only the rows/columns of V^dag V belonging to that
    sub-window of ``window_in`` are inspected; bins near the window edge are
    expected to lose norm under truncation, central ones are not.
    """
    if V.entries.shape[0] != V.entries.shape[1]:
        raise ValueError(
            f"unitarity defect requires a square matrix, got {V.entries.shape}"
        )
    gram = V.entries.conj().T @ V.entries
    defect = gram - np.eye(gram.shape[0])
    if central is not None:
        idx = [V.window_in.index_of(b) for b in central.bins()]
        defect = defect[np.ix_(idx, idx)]
    return float(np.max(np.abs(defect)))
