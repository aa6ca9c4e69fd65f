"""Transfer matrices for the two physical element types.

An electro-optic phase modulator (EOM) driven by a single sinusoid at the bin
spacing applies the temporal phase ``sign * depth * sin(spacing * t)``; on the
bin lattice it couples input bin n to output bin m with the Bessel amplitude
``J_{m-n}(sign * depth)``, i.e. a banded Toeplitz matrix.  A line-by-line
pulse shaper applies an independent complex weight
``amplitude_n * exp(i * phase_n)`` to each bin, i.e. a diagonal matrix.

The standard processor is a pulse shaper sandwiched between two EOMs of equal
depth and opposite drive sign.  With a flat shaper the two modulators cancel
exactly; a step of pi in the shaper phase between two adjacent bins turns the
cascade into a balanced frequency beamsplitter on those bins.  The element
sign conventions here are pinned by tests that check the beamsplitter block
sign structure against the closed-form reflection/transmission amplitudes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .mode_lattice import ModeWindow, TransferMatrix, compose, recommended_window

BESSEL_MAX_ARG = 50.0


def _bessel_row(n_max: int, x: float) -> np.ndarray:
    """J_0(x) .. J_{n_max}(x) for x >= 0 by Miller's backward recurrence.

    The downward recurrence f_{k-1} = (2k/x) f_k - f_{k+1} is seeded far above
    max(n_max, x) with an arbitrary tiny value; the whole sequence is then
    normalized with J_0 + 2*(J_2 + J_4 + ...) = 1.  Running the recurrence
    downward keeps it stable for orders above the argument, where the upward
    direction blows up.
    """
    if x < 0:
        raise ValueError("_bessel_row requires x >= 0")
    out_len = n_max + 1
    if x == 0.0:
        out = np.zeros(out_len)
        out[0] = 1.0
        return out
    start = max(n_max, int(x))
    m = start + 20 + int(math.sqrt(40.0 * (start + 1)))
    vals = np.zeros(m + 2)
    vals[m] = 1e-30
    for k in range(m, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1:] *= 1e-250
    norm = vals[0] + 2.0 * vals[2:-1:2].sum()
    return vals[:out_len] / norm


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind at integer order.

    Accurate to ~1e-12 absolute for |x| <= 50.  Negative orders and arguments
    use J_{-k}(x) = (-1)^k J_k(x) and J_k(-x) = (-1)^k J_k(x).
    """
    if abs(x) > BESSEL_MAX_ARG:
        raise ValueError(f"|x| = {abs(x)} outside supported domain <= {BESSEL_MAX_ARG}")
    k = abs(int(order))
    sign = 1.0
    if order < 0 and k % 2 == 1:
        sign = -sign
    if x < 0 and k % 2 == 1:
        sign = -sign
    return sign * float(_bessel_row(k, abs(x))[k])


@dataclass(frozen=True)
class EomSpec:
    """Single-sine phase modulator: depth in radians, drive sign +1 or -1."""

    depth: float
    sign: int = 1

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError(f"modulation depth must be >= 0, got {self.depth}")
        if self.sign not in (1, -1):
            raise ValueError(f"drive sign must be +1 or -1, got {self.sign}")


@dataclass(frozen=True)
class ShaperSpec:
    """Per-bin phase (rad) and amplitude weights; unlisted bins get (0, 1)."""

    phases: Mapping[int, float] = field(default_factory=dict)
    amplitudes: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "phases", dict(self.phases))
        object.__setattr__(self, "amplitudes", dict(self.amplitudes))
        for n, a in self.amplitudes.items():
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"amplitude for bin {n} outside [0, 1]: {a}")

    def phase(self, n: int) -> float:
        return self.phases.get(n, 0.0)

    def amplitude(self, n: int) -> float:
        return self.amplitudes.get(n, 1.0)


def step_phases(window: ModeWindow, steps: Sequence[tuple[int, float]],
                phi0: float = 0.0) -> ShaperSpec:
    """Shaper with cumulative phase steps.

    Each ``(boundary, alpha)`` adds ``alpha`` to every bin above ``boundary``,
    i.e. the jump sits between bins ``boundary`` and ``boundary + 1``.  The
    overall offset ``phi0`` has no physical significance and defaults to 0.
    """
    phases = {}
    for n in window.bins():
        phi = phi0 + sum(alpha for boundary, alpha in steps if n > boundary)
        phases[int(n)] = phi
    return ShaperSpec(phases=phases)


@dataclass(frozen=True)
class ProcessorConfig:
    """EOM - shaper - EOM cascade on a common window."""

    eom1: EomSpec
    shaper: ShaperSpec
    eom2: EomSpec
    window: ModeWindow

    def __post_init__(self):
        # The window must leave room for sidebands of the deeper modulator.
        need = 2 * max(self.eom1.depth, self.eom2.depth)
        if self.window.size < need + 1:
            raise ValueError(
                f"window of {self.window.size} bins too small for depth "
                f"{max(self.eom1.depth, self.eom2.depth)}"
            )


def eom_matrix(spec: EomSpec, window: ModeWindow) -> TransferMatrix:
    """Banded Toeplitz matrix of Bessel-J sideband amplitudes."""
    size = window.size
    row = _bessel_row(size - 1, spec.depth)
    orders = np.arange(-(size - 1), size)
    vals = row[np.abs(orders)]
    parity = np.where(np.abs(orders) % 2 == 1, -1.0, 1.0)
    vals = np.where(orders < 0, vals * parity, vals)
    if spec.sign == -1:
        vals = vals * parity
    idx = np.arange(size)
    entries = vals[(idx[:, None] - idx[None, :]) + (size - 1)].astype(complex)
    return TransferMatrix(window, window, entries)


def shaper_matrix(spec: ShaperSpec, window: ModeWindow) -> TransferMatrix:
    """Diagonal matrix of per-bin complex weights."""
    weights = np.array(
        [spec.amplitude(int(n)) * np.exp(1j * spec.phase(int(n))) for n in window.bins()]
    )
    return TransferMatrix(window, window, np.diag(weights))


def processor_matrix(config: ProcessorConfig) -> TransferMatrix:
    """Full transfer matrix of the EOM - shaper - EOM cascade."""
    e1 = eom_matrix(config.eom1, config.window)
    s = shaper_matrix(config.shaper, config.window)
    e2 = eom_matrix(config.eom2, config.window)
    return compose(e2, compose(s, e1))


def beamsplitter_processor(theta: float, alpha: float,
                           boundary: int = 0,
                           window: ModeWindow | None = None) -> ProcessorConfig:
    """Tunable-beamsplitter configuration on bins (boundary, boundary + 1).

    Equal-depth opposite-sign EOMs plus a single shaper phase step of
    ``alpha`` at the boundary; ``alpha = pi`` gives the Hadamard working
    point, ``alpha = 0`` the identity.
    """
    if window is None:
        window = recommended_window([boundary, boundary + 1], theta)
    return ProcessorConfig(
        eom1=EomSpec(theta, 1),
        shaper=step_phases(window, [(boundary, alpha)]),
        eom2=EomSpec(theta, -1),
        window=window,
    )


def rotation_processor(theta: float, basis_a: str, basis_b: str,
                       pair_a: tuple[int, int] = (-4, -3),
                       pair_b: tuple[int, int] = (4, 5),
                       window: ModeWindow | None = None) -> ProcessorConfig:
    """Processor applying independent identity/Hadamard gates to two bin pairs.

    ``basis_a``/``basis_b`` select "I" or "H" per pair.  An "H" adds a pi
    step at that pair's internal boundary; a constant phase over the other
    pair's neighborhood is a global phase there and leaves it untouched.
    """
    steps = []
    for basis, pair in ((basis_a, pair_a), (basis_b, pair_b)):
        if pair[1] != pair[0] + 1:
            raise ValueError(f"gate pair must be adjacent bins, got {pair}")
        if basis == "H":
            steps.append((pair[0], math.pi))
        elif basis != "I":
            raise ValueError(f"basis must be 'I' or 'H', got {basis!r}")
    if window is None:
        window = recommended_window([*pair_a, *pair_b], theta)
    return ProcessorConfig(
        eom1=EomSpec(theta, 1),
        shaper=step_phases(window, steps),
        eom2=EomSpec(theta, -1),
        window=window,
    )


def processor_to_dict(config: ProcessorConfig) -> dict:
    return {
        "eom1": {"depth": config.eom1.depth, "sign": config.eom1.sign},
        "shaper": {
            "phases": {str(n): p for n, p in config.shaper.phases.items()},
            "amplitudes": {str(n): a for n, a in config.shaper.amplitudes.items()},
        },
        "eom2": {"depth": config.eom2.depth, "sign": config.eom2.sign},
        "window": {"n_min": config.window.n_min, "n_max": config.window.n_max},
    }


def processor_from_dict(doc: Mapping) -> ProcessorConfig:
    shaper = doc.get("shaper", {})
    return ProcessorConfig(
        eom1=EomSpec(float(doc["eom1"]["depth"]), int(doc["eom1"].get("sign", 1))),
        shaper=ShaperSpec(
            phases={int(n): float(p) for n, p in shaper.get("phases", {}).items()},
            amplitudes={int(n): float(a) for n, a in shaper.get("amplitudes", {}).items()},
        ),
        eom2=EomSpec(float(doc["eom2"]["depth"]), int(doc["eom2"].get("sign", -1))),
        window=ModeWindow(int(doc["window"]["n_min"]), int(doc["window"]["n_max"])),
    )


def processor_to_json(config: ProcessorConfig) -> str:
    return json.dumps(processor_to_dict(config), indent=2, sort_keys=True)


def processor_from_json(text: str) -> ProcessorConfig:
    return processor_from_dict(json.loads(text))
