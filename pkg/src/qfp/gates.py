"""Closed-form beamsplitter coefficients and gate-quality figures of merit.

For the beamsplitter processor the 2x2 block on the computational bins has
the closed forms (phase step alpha, depth theta, J = Bessel-J)

    V00 = J_0^2 + (1 + e^{i alpha})(1 - J_0^2)/2
    V11 = e^{i alpha} J_0^2 + (1 + e^{i alpha})(1 - J_0^2)/2
    V01 = V10 = (1 - e^{i alpha}) * sum_{k>=1} J_k J_{k-1}

so the mode-hopping probability R = |V10|^2 and the frequency-preserving
probability T = |V00|^2 share a single reflection/transmission pair for both
bins, and R + T is the probability of staying in the computational subspace.
These expressions are cross-validated against the numerically composed
cascade in :func:`alpha_scan`.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from . import elements
from .mode_lattice import TransferMatrix, recommended_window
from ._threads import map_grid

# Modulation depth of the balanced (Hadamard) working point used as the
# package-wide default wherever a beamsplitter depth is needed.
HADAMARD_DEPTH = 0.8169

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)

_TWO_PI = 2.0 * math.pi

DEFAULT_KMAX = 30


@dataclass(frozen=True)
class BeamsplitterPoint:
    """Reflectivity/transmissivity of the tunable beamsplitter at one phase."""

    alpha: float
    reflectivity: float
    transmissivity: float
    f_vs_hadamard: float | None = None

    def __post_init__(self):
        if self.reflectivity < 0 or self.transmissivity < 0:
            raise ValueError("probabilities must be nonnegative")
        if self.reflectivity + self.transmissivity > 1.0 + 1e-9:
            raise ValueError(
                f"R + T = {self.reflectivity + self.transmissivity} exceeds 1"
            )

    @property
    def success(self) -> float:
        return self.reflectivity + self.transmissivity


@dataclass(frozen=True)
class GateMetrics:
    """Success-probability-normalized gate fidelity and related figures."""

    fidelity: float
    success: float

    @property
    def leakage(self) -> float:
        return 1.0 - self.success


def _bessel_cross_sum(theta: float, k_max: int) -> float:
    """sum_{k=1}^{k_max} J_k(theta) J_{k-1}(theta)."""
    row = elements._bessel_row(k_max, abs(theta))
    return float(np.sum(row[1:] * row[:-1]))


def analytic_block(theta: float, alpha: float, k_max: int = DEFAULT_KMAX) -> np.ndarray:
    """Closed-form 2x2 beamsplitter block on the computational bins."""
    if k_max < math.ceil(theta) + 10:
        raise ValueError(
            f"k_max = {k_max} too small for depth {theta}; "
            f"need at least {math.ceil(theta) + 10}"
        )
    # Reduce alpha mod 2*pi so the phase factor vanishes identically at the
    # scan endpoints instead of leaving ~1e-16 residue.
    phase = cmath.exp(1j * math.fmod(alpha, _TWO_PI))
    j0sq = bessel_j0_squared(theta)
    s = _bessel_cross_sum(theta, k_max)
    v00 = j0sq + (1.0 + phase) * (1.0 - j0sq) / 2.0
    v11 = phase * j0sq + (1.0 + phase) * (1.0 - j0sq) / 2.0
    v01 = (1.0 - phase) * s
    return np.array([[v00, v01], [v01, v11]])


def bessel_j0_squared(theta: float) -> float:
    return elements.bessel_j(0, theta) ** 2


def analytic_rt(theta: float, alpha: float, k_max: int = DEFAULT_KMAX) -> BeamsplitterPoint:
    """Closed-form reflectivity and transmissivity at one shaper phase."""
    block = analytic_block(theta, alpha, k_max)
    r = abs(block[1, 0]) ** 2
    t = abs(block[0, 0]) ** 2
    return BeamsplitterPoint(alpha=alpha, reflectivity=r, transmissivity=t)


def gate_metrics(V: TransferMatrix, target: np.ndarray,
                 bins: tuple[int, int]) -> GateMetrics:
    """Fidelity and success probability of the block of V on two bins.

    With W the extracted block and d = 2, the success probability is
    P = tr(W^dag W)/d and the fidelity F = |tr(target^dag W)|^2 / (d tr(W^dag W)),
    which is insensitive to the block's global phase.
    """
    W = V.block(bins, bins)
    return _metrics_from_block(W, target)


def _metrics_from_block(W: np.ndarray, target: np.ndarray = HADAMARD) -> GateMetrics:
    gram = float(np.trace(W.conj().T @ W).real)
    success = gram / 2.0
    fid = abs(np.trace(target.conj().T @ W)) ** 2 / (2.0 * gram)
    return GateMetrics(fidelity=min(fid, 1.0), success=success)


def alpha_scan(theta: float, alphas, k_max: int = DEFAULT_KMAX,
               cross_check_tol: float = 1e-6) -> list[BeamsplitterPoint]:
    """Closed-form R/T over a phase grid, cross-checked against the cascade.

    For every grid point the numerically composed processor block is compared
    entrywise in probability against the closed forms; disagreement beyond
    ``cross_check_tol`` raises, since it indicates an inconsistency between
    the element conventions and the analytic expressions.
    """
    alphas = list(alphas)
    if not alphas:
        raise ValueError("empty phase grid")

    window = recommended_window([0, 1], theta)
    e1 = elements.eom_matrix(elements.EomSpec(theta, 1), window)
    e2 = elements.eom_matrix(elements.EomSpec(theta, -1), window)
    i0, i1 = window.index_of(0), window.index_of(1)

    def point(alpha: float) -> BeamsplitterPoint:
        pt = analytic_rt(theta, alpha, k_max)
        s = elements.shaper_matrix(
            elements.step_phases(window, [(0, alpha)]), window
        )
        W = (e1.entries @ s.entries @ e2.entries)[np.ix_([i0, i1], [i0, i1])]
        probs = np.abs(W) ** 2
        expect = np.array(
            [[pt.transmissivity, pt.reflectivity],
             [pt.reflectivity, pt.transmissivity]]
        )
        err = float(np.max(np.abs(probs - expect)))
        if err > cross_check_tol:
            raise RuntimeError(
                f"cascade/closed-form mismatch {err:.3e} at "
                f"theta={theta}, alpha={alpha}"
            )
        metrics = _metrics_from_block(W)
        return BeamsplitterPoint(
            alpha=pt.alpha,
            reflectivity=pt.reflectivity,
            transmissivity=pt.transmissivity,
            f_vs_hadamard=metrics.fidelity,
        )

    return list(map_grid(point, alphas))


def scan_to_csv(points, path) -> None:
    """Write a scan as CSV with columns alpha, R, T, P, F_vs_hadamard."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "R", "T", "P", "F_vs_hadamard"])
        for pt in points:
            writer.writerow(
                [f"{pt.alpha:.12g}", f"{pt.reflectivity:.12g}",
                 f"{pt.transmissivity:.12g}", f"{pt.success:.12g}",
                 "" if pt.f_vs_hadamard is None else f"{pt.f_vs_hadamard:.12g}"]
            )


def hadamard_metrics(theta: float, k_max: int = DEFAULT_KMAX) -> GateMetrics:
    """Gate metrics of the closed-form block at the Hadamard phase (alpha = pi)."""
    return _metrics_from_block(analytic_block(theta, math.pi, k_max))


def optimize_hadamard_depth(search_interval: tuple[float, float] = (0.0, 2.0),
                            tol: float = 1e-6,
                            fidelity_floor: float = 0.9999,
                            k_max: int = DEFAULT_KMAX) -> dict:
    """Locate the Hadamard working-point depth within ``search_interval``.

    The fidelity at alpha = pi rises with depth, saturates at 1 slightly past
    the working point, and falls again, while the success probability R + T
    decreases monotonically through that region.  The working point is
    therefore the smallest depth whose fidelity reaches ``fidelity_floor``:
    beyond it fidelity gains are negligible but success keeps dropping.
    Golden-section search locates the fidelity peak; bisection then finds the
    floor crossing on the rising branch.  Both are resolved to ``tol``.
    """
    lo, hi = search_interval
    if not lo < hi:
        raise ValueError(f"empty search interval {search_interval}")

    def fid(theta: float) -> float:
        return hadamard_metrics(theta, k_max).fidelity

    # Golden-section maximization of the fidelity.
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fid(c), fid(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fid(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fid(d)
    theta_peak = (a + b) / 2.0

    theta_star = theta_peak
    if fid(theta_peak) >= fidelity_floor:
        # Walk back along the rising branch to the floor crossing.
        left, right = lo, theta_peak
        if fid(left) < fidelity_floor:
            while right - left > tol:
                mid = (left + right) / 2.0
                if fid(mid) >= fidelity_floor:
                    right = mid
                else:
                    left = mid
            theta_star = right

    return {"theta_star": theta_star, "metrics": hadamard_metrics(theta_star, k_max)}
