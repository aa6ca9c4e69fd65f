"""Photon-pair states on the bin lattice and their counting statistics.

A biphoton frequency-comb state is a normalized superposition of photon-pair
terms c_n |1_p> |1_q> with all mode indices distinct across terms (disjoint
support).  Propagated through a transfer matrix V, the two-photon coincidence
amplitude between output bins m != m' is

    B_{m m'} = sum_n c_n (V_{m p_n} V_{m' q_n} + V_{m' p_n} V_{m q_n}),

with probability |B|^2, while both photons bunching into bin m occurs with
probability 2 |sum_n c_n V_{m p_n} V_{m q_n}|^2 (the factor 2 is the bosonic
|2> amplitude squared).  Singles are photon-number expectations per bin; the
disjoint-support restriction removes all cross terms so that
S_m = sum_n |c_n|^2 (|V_{m p_n}|^2 + |V_{m q_n}|^2).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import elements, gates
from .mode_lattice import TransferMatrix
from ._threads import map_grid

NORMALIZATION_TOL = 1e-12

HOM_TRACKED_BINS = (-1, 0, 1, 2)


@dataclass(frozen=True)
class PairTerm:
    mode_a: int
    mode_b: int
    amp: complex


@dataclass(frozen=True)
class BiphotonState:
    """Normalized sum of photon-pair terms with disjoint mode support."""

    terms: tuple[PairTerm, ...]

    def __post_init__(self):
        terms = tuple(
            t if isinstance(t, PairTerm) else PairTerm(int(t[0]), int(t[1]), complex(t[2]))
            for t in self.terms
        )
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("state needs at least one pair term")
        seen: set[int] = set()
        for t in terms:
            if t.mode_a == t.mode_b:
                raise ValueError(f"pair term occupies bin {t.mode_a} twice")
            for m in (t.mode_a, t.mode_b):
                if m in seen:
                    raise ValueError(
                        f"mode {m} appears in more than one term; "
                        "disjoint support is required"
                    )
                seen.add(m)
        norm = sum(abs(t.amp) ** 2 for t in terms)
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"state not normalized: sum |c|^2 = {norm}")

    @classmethod
    def normalized(cls, pairs) -> "BiphotonState":
        """Build from (mode_a, mode_b, amp) triples, rescaling to unit norm."""
        terms = [PairTerm(int(a), int(b), complex(c)) for a, b, c in pairs]
        norm = math.sqrt(sum(abs(t.amp) ** 2 for t in terms))
        if norm == 0:
            raise ValueError("all amplitudes vanish")
        return cls(tuple(PairTerm(t.mode_a, t.mode_b, t.amp / norm) for t in terms))

    def modes(self) -> list[int]:
        out = []
        for t in self.terms:
            out.extend((t.mode_a, t.mode_b))
        return out


def hom_input_state() -> BiphotonState:
    """One photon in bin 0 and one in bin 1."""
    return BiphotonState((PairTerm(0, 1, 1.0),))


def entangled_pair_state(pair_a: tuple[int, int] = (-4, -3),
                         pair_b: tuple[int, int] = (4, 5)) -> BiphotonState:
    """Equal superposition anticorrelated across two bin pairs.

    (|1_{a_hi}> |1_{b_lo}> + |1_{a_lo}> |1_{b_hi}>) / sqrt(2), the maximally
    entangled two-qubit input of the rotation experiments.
    """
    c = 1.0 / math.sqrt(2.0)
    return BiphotonState(
        (PairTerm(pair_a[1], pair_b[0], c), PairTerm(pair_a[0], pair_b[1], c))
    )


@dataclass(frozen=True)
class CoincidenceTable:
    """Coincidence probabilities per bin pair plus same-bin bunching."""

    probabilities: dict[tuple[int, int], float]
    bunching: dict[int, float] = field(default_factory=dict)

    def total(self) -> float:
        return sum(self.probabilities.values()) + sum(self.bunching.values())


def _term_arrays(state: BiphotonState, V: TransferMatrix):
    p_idx = np.array([V.window_in.index_of(t.mode_a) for t in state.terms])
    q_idx = np.array([V.window_in.index_of(t.mode_b) for t in state.terms])
    amps = np.array([t.amp for t in state.terms])
    return p_idx, q_idx, amps


def coincidences(state: BiphotonState, V: TransferMatrix, pairs,
                 bunching_bins=()) -> CoincidenceTable:
    """Coincidence probabilities for the listed output bin pairs.

    Pairs are unordered; (m, m') and (m', m) give the same probability.
    ``bunching_bins`` selects bins for which the both-photons-in-one-bin
    probability is also evaluated.
    """
    p_idx, q_idx, amps = _term_arrays(state, V)
    A = V.entries
    probs: dict[tuple[int, int], float] = {}
    for m, mp in pairs:
        if m == mp:
            raise ValueError(
                f"pair ({m}, {mp}) is a single bin; ask for bunching instead"
            )
        i = V.window_out.index_of(m)
        j = V.window_out.index_of(mp)
        amp = np.sum(amps * (A[i, p_idx] * A[j, q_idx] + A[j, p_idx] * A[i, q_idx]))
        probs[(int(m), int(mp))] = float(abs(amp) ** 2)
    bunch: dict[int, float] = {}
    for m in bunching_bins:
        i = V.window_out.index_of(m)
        amp = np.sum(amps * A[i, p_idx] * A[i, q_idx])
        bunch[int(m)] = float(2.0 * abs(amp) ** 2)
    return CoincidenceTable(probabilities=probs, bunching=bunch)


def full_coincidence_table(state: BiphotonState, V: TransferMatrix) -> CoincidenceTable:
    """All unordered output pairs and all bunching bins in one table.

    For unitary (well-truncated) V the table total is the full two-photon
    probability and sums to 1.
    """
    p_idx, q_idx, amps = _term_arrays(state, V)
    A = V.entries
    M1 = A[:, p_idx] * amps
    M2 = A[:, q_idx]
    amp_matrix = M1 @ M2.T
    amp_matrix = amp_matrix + amp_matrix.T  # symmetrized two-photon amplitude
    prob = np.abs(amp_matrix) ** 2
    bins = V.window_out.bins()
    probs: dict[tuple[int, int], float] = {}
    size = len(bins)
    for i in range(size):
        for j in range(i + 1, size):
            probs[(int(bins[i]), int(bins[j]))] = float(prob[i, j])
    # Diagonal of the symmetrized amplitude is twice the bunching amplitude;
    # the physical probability is 2 |amp|^2 = |diag|^2 / 2.
    bunch = {int(bins[i]): float(prob[i, i] / 2.0) for i in range(size)}
    return CoincidenceTable(probabilities=probs, bunching=bunch)


def singles(state: BiphotonState, V: TransferMatrix, bins) -> dict[int, float]:
    """Photon-number expectation per output bin."""
    p_idx, q_idx, amps = _term_arrays(state, V)
    A = V.entries
    w = np.abs(amps) ** 2
    out: dict[int, float] = {}
    for m in bins:
        i = V.window_out.index_of(m)
        out[int(m)] = float(
            np.sum(w * (np.abs(A[i, p_idx]) ** 2 + np.abs(A[i, q_idx]) ** 2))
        )
    return out


@dataclass(frozen=True)
class HomCurve:
    """Coincidence and singles curves over a shaper-phase grid."""

    alphas: np.ndarray
    c01: np.ndarray
    singles: dict[int, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "c01", np.asarray(self.c01, dtype=float))
        if len(self.alphas) != len(self.c01):
            raise ValueError("alpha grid and c01 lengths differ")
        for m, arr in self.singles.items():
            if len(arr) != len(self.alphas):
                raise ValueError(f"singles curve for bin {m} has wrong length")


def hom_scan(theta: float, alphas, tracked_bins=HOM_TRACKED_BINS) -> HomCurve:
    """Two-photon interference scan of the tunable beamsplitter.

    For each phase the processor is rebuilt, the pair state |1_0>|1_1> is
    propagated, and the 0-1 coincidence plus singles on the tracked bins are
    recorded.
    """
    alphas = np.asarray(list(alphas), dtype=float)
    if alphas.size == 0:
        raise ValueError("empty phase grid")
    state = hom_input_state()

    def point(alpha: float):
        config = elements.beamsplitter_processor(theta, alpha)
        V = elements.processor_matrix(config)
        table = coincidences(state, V, [(0, 1)])
        s = singles(state, V, tracked_bins)
        return table.probabilities[(0, 1)], s

    results = map_grid(point, alphas)
    c01 = np.array([r[0] for r in results])
    singles_curves = {
        int(m): np.array([r[1][m] for r in results]) for m in tracked_bins
    }
    return HomCurve(alphas=alphas, c01=c01, singles=singles_curves)


def model_c01(theta: float, alpha: float, k_max: int = gates.DEFAULT_KMAX) -> float:
    """Theoretical 0-1 coincidence probability (R - T)^2 at one phase."""
    pt = gates.analytic_rt(theta, alpha, k_max)
    return (pt.reflectivity - pt.transmissivity) ** 2


def model_g2(theta: float, alpha: float, k_max: int = gates.DEFAULT_KMAX) -> float:
    """Theoretical normalized cross-correlation C01 / (S0 * S1)."""
    pt = gates.analytic_rt(theta, alpha, k_max)
    return (pt.reflectivity - pt.transmissivity) ** 2 / pt.success ** 2


@dataclass(frozen=True)
class VisibilityFit:
    """Weighted linear fit of counts to the interference model."""

    k0: float
    k1: float
    visibility: float
    std_error: float
    used_g2: bool = False

    def to_dict(self) -> dict:
        return {
            "K0": self.k0,
            "K1": self.k1,
            "visibility": self.visibility,
            "std_error": self.std_error,
            "used_g2": self.used_g2,
        }


def visibility_fit(alphas, counts, theta: float = gates.HADAMARD_DEPTH,
                   weights=None, use_g2: bool = False,
                   singles_counts=None,
                   k_max: int = gates.DEFAULT_KMAX) -> VisibilityFit:
    """Fit f(alpha) = K0 + K1 * model(alpha) and extract the dip visibility.

    ``counts`` are observed coincidences per grid point; ``weights`` are
    per-point variances (Poisson proxy max(count, 1) when omitted).  With
    ``use_g2`` the fit runs on counts / (S0 * S1) against the normalized
    cross-correlation model, which requires ``singles_counts`` as a pair of
    arrays for bins 0 and 1.  The visibility is

        V = K1 [m(0) - m(pi)] / (2 K0 + K1 [m(0) + m(pi)])

    with its standard error propagated from the 2x2 least-squares covariance.
    """
    alphas = np.asarray(list(alphas), dtype=float)
    counts = np.asarray(counts, dtype=float)
    if alphas.shape != counts.shape:
        raise ValueError("alpha grid and counts have different lengths")

    if use_g2:
        if singles_counts is None:
            raise ValueError("use_g2 requires singles_counts for bins 0 and 1")
        s0 = np.asarray(singles_counts[0], dtype=float)
        s1 = np.asarray(singles_counts[1], dtype=float)
        if s0.shape != alphas.shape or s1.shape != alphas.shape:
            raise ValueError("singles_counts length mismatch")
        y = counts / (s0 * s1)
        model = np.array([model_g2(theta, a, k_max) for a in alphas])
        m0 = model_g2(theta, 0.0, k_max)
        mpi = model_g2(theta, math.pi, k_max)
        if weights is None:
            c_eff = np.maximum(counts, 1.0)
            weights = (c_eff / (s0 * s1)) ** 2 * (
                1.0 / c_eff + 1.0 / np.maximum(s0, 1.0) + 1.0 / np.maximum(s1, 1.0)
            )
    else:
        y = counts
        model = np.array([model_c01(theta, a, k_max) for a in alphas])
        m0 = model_c01(theta, 0.0, k_max)
        mpi = model_c01(theta, math.pi, k_max)
        if weights is None:
            weights = np.maximum(counts, 1.0)

    var = np.asarray(weights, dtype=float)
    if np.any(var <= 0):
        raise ValueError("weights (variances) must be positive")
    w = 1.0 / var

    X = np.column_stack([np.ones_like(model), model])
    normal = X.T @ (w[:, None] * X)
    rhs = X.T @ (w * y)
    det = normal[0, 0] * normal[1, 1] - normal[0, 1] * normal[1, 0]
    if not np.isfinite(det) or abs(det) <= 1e-12 * normal[0, 0] * max(normal[1, 1], 1e-300):
        raise ValueError("singular normal equations: model column has no variation")
    cov = np.linalg.inv(normal)
    k0, k1 = cov @ rhs

    denom = 2.0 * k0 + k1 * (m0 + mpi)
    vis = k1 * (m0 - mpi) / denom
    # First-order propagation through V(K0, K1).
    dv_dk0 = -2.0 * k1 * (m0 - mpi) / denom ** 2
    dv_dk1 = (m0 - mpi) * (denom - k1 * (m0 + mpi)) / denom ** 2
    grad = np.array([dv_dk0, dv_dk1])
    std = float(math.sqrt(max(grad @ cov @ grad, 0.0)))
    return VisibilityFit(k0=float(k0), k1=float(k1), visibility=float(vis),
                         std_error=std, used_g2=use_g2)


def hom_curve_to_csv(curve: HomCurve, path) -> None:
    """Write a HOM scan as CSV: alpha, c01, s_<bin> per tracked bin."""
    bins = sorted(curve.singles)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "c01"] + [f"s_{m}" for m in bins])
        for i, alpha in enumerate(curve.alphas):
            row = [f"{alpha:.12g}", f"{curve.c01[i]:.12g}"]
            row += [f"{curve.singles[m][i]:.12g}" for m in bins]
            writer.writerow(row)


def ideal_rotation_tables() -> dict[str, np.ndarray]:
    """Ideal normalized 2x2 coincidence tables for the four gate cases.

    Rows index photon A's bin (low, high), columns photon B's (low, high).
    Matched gates give perfect anticorrelation (II) or correlation (HH);
    mismatched gates populate all four cells uniformly.
    """
    anti = np.array([[0.0, 0.5], [0.5, 0.0]])
    corr = np.array([[0.5, 0.0], [0.0, 0.5]])
    flat = np.full((2, 2), 0.25)
    return {"II": anti, "IH": flat, "HI": flat, "HH": corr}


def rotation_case_table(state: BiphotonState, V: TransferMatrix,
                        pair_a: tuple[int, int], pair_b: tuple[int, int]) -> dict:
    """Two-qubit subspace coincidence table plus leakage for one gate case.

    Returns the raw 2x2 probabilities (photon A bin x photon B bin), their
    sum (subspace success), the success-renormalized table, and the fraction
    of all distinct-bin coincidence probability falling outside the subspace.
    """
    pairs = [(a, b) for a in pair_a for b in pair_b]
    table = coincidences(state, V, pairs)
    raw = np.array(
        [[table.probabilities[(a, b)] for b in pair_b] for a in pair_a]
    )
    success = float(raw.sum())
    full = full_coincidence_table(state, V)
    total_pairs = sum(full.probabilities.values())
    leakage = 1.0 - success / total_pairs if total_pairs > 0 else 0.0
    return {
        "raw": raw,
        "success": success,
        "normalized": raw / success if success > 0 else raw,
        "leakage_fraction": float(leakage),
    }
