"""Double-slit-in-time probability distributions.

A single spatial slit opened at two moments t1, t2 (for durations T1, T2)
interferes in the frequency domain. For instantaneous openings the detection
probability is

    P = A1^2 + A2^2 + 2 A1 A2 cos(omega (t2 - t1))

and for finite open durations each slit's spectrum picks up a sinc envelope:

    P(x, omega) = A1^2 sinc^2(omega T1 / 2)
                + A2^2 sinc^2(omega T2 / 2)
                + 2 A1 A2 sinc(omega T1 / 2) sinc(omega T2 / 2)
                  * cos(2 k x - omega (t1 - t2))

with the unnormalized convention sinc(u) = sin(u)/u, sinc(0) = 1. The two
expressions agree at x = 0 in the T -> 0 limit; away from x = 0 the
instantaneous form omits the 2kx phase by construction, which this module
preserves as written rather than reconciling.

Everything here is a pure function; grid evaluation reuses the same scalar
kernel for every cell so grid values match direct calls bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._fsio import write_bytes_atomic, write_text_atomic
from .errors import InvalidRange, IoFailure, TooFewMaxima

_TAYLOR_CUTOFF = 1e-4


def sinc(u: float) -> float:
    """Unnormalized sinc: sin(u)/u, with sinc(0) = 1.

    Below |u| = 1e-4 the series 1 - u^2/6 + u^4/120 is used to avoid the
    0/0 corner; the truncation error there is below 1e-18. Evaluated on
    |u| so the evenness of sinc is exact in floating point.
    """
    if not math.isfinite(u):
        raise ValueError(f"sinc argument must be finite, got {u!r}")
    u = abs(u)
    if u < _TAYLOR_CUTOFF:
        u2 = u * u
        return 1.0 - u2 / 6.0 + (u2 * u2) / 120.0
    return math.sin(u) / u


def delta_slit_probability(a1: float, a2: float, omega: float, t1: float, t2: float) -> float:
    """Detection probability for two instantaneous slit openings."""
    return a1 * a1 + a2 * a2 + 2.0 * (a1 * a2) * math.cos(abs(omega * (t2 - t1)))


@dataclass(frozen=True)
class SlitConfig:
    """Amplitudes, opening times/durations, wavenumber and detector position."""

    A1: float = 1.0
    A2: float = 1.0
    t1: float = 0.0
    t2: float = 0.0
    T1: float = 1.0
    T2: float = 1.0
    k: float = 2.0 * math.pi
    x: float = 0.0

    def __post_init__(self):
        for name in ("A1", "A2", "t1", "t2", "T1", "T2", "k", "x"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"SlitConfig.{name} must be finite")
        if self.T1 < 0 or self.T2 < 0:
            raise ValueError("slit durations must be nonnegative")


def _probability(x, omega, t1, t2, big_t1, big_t2, a1, a2, k) -> float:
    # Symmetrized evaluation order keeps the slit-swap identity
    # P(x; slit1, slit2) == P(-x; slit2, slit1) exact in floating point.
    s1 = sinc(omega * big_t1 / 2.0)
    s2 = sinc(omega * big_t2 / 2.0)
    phase = 2.0 * k * x - omega * (t1 - t2)
    cross = 2.0 * (a1 * a2) * (s1 * s2) * math.cos(abs(phase))
    p = (a1 * a1 * (s1 * s1) + a2 * a2 * (s2 * s2)) + cross
    # cancellation can land a hair below zero; the contract is P >= 0
    return p if p > 0.0 else 0.0


def finite_slit_probability(x: float, omega: float, cfg: SlitConfig) -> float:
    """P(x, omega) for finite slit-open durations. Always >= 0."""
    return _probability(x, omega, cfg.t1, cfg.t2, cfg.T1, cfg.T2, cfg.A1, cfg.A2, cfg.k)


@dataclass
class DiffractionGrid:
    """P evaluated over a (delay, frequency) mesh.

    ``values[i][j]`` is the probability at ``frequencies[i]``,
    ``delays[j]``, where the delay axis carries t1 - t2 (t1 pinned to 0,
    t2 = -delay).
    """

    delays: np.ndarray
    frequencies: np.ndarray
    values: np.ndarray  # shape (n_freq, n_delay)
    config: SlitConfig


def evaluate_grid(
    cfg_base: SlitConfig,
    delay_min: float,
    delay_max: float,
    freq_min: float,
    freq_max: float,
    n_delay: int,
    n_freq: int,
) -> DiffractionGrid:
    """Evaluate the finite-slit probability over a rectangular mesh.

    Axes are linearly spaced and include both endpoints. Every cell comes
    from the same scalar kernel as finite_slit_probability, so cells equal
    direct calls exactly.
    """
    if n_delay < 2 or n_freq < 2:
        raise InvalidRange("need at least 2 points per axis")
    if not (delay_min < delay_max) or not (freq_min < freq_max):
        raise InvalidRange("axis minimum must be below maximum")
    delays = np.linspace(delay_min, delay_max, n_delay)
    frequencies = np.linspace(freq_min, freq_max, n_freq)
    values = np.empty((n_freq, n_delay), dtype=float)
    a1, a2 = cfg_base.A1, cfg_base.A2
    big_t1, big_t2 = cfg_base.T1, cfg_base.T2
    k, x = cfg_base.k, cfg_base.x
    freq_list = [float(w) for w in frequencies]
    for j, d in enumerate(delays):
        t2 = -float(d)
        for i, w in enumerate(freq_list):
            values[i, j] = _probability(x, w, 0.0, t2, big_t1, big_t2, a1, a2, k)
    return DiffractionGrid(delays=delays, frequencies=frequencies, values=values, config=cfg_base)


def fringe_spacing(grid: DiffractionGrid, delay: float) -> float:
    """Mean spacing of interference maxima along omega at one delay column.

    Maxima are 3-point local peaks within the central half of the frequency
    axis, away from the sinc envelope edges.
    """
    delays = np.asarray(grid.delays, dtype=float)
    if delay == 0:
        raise InvalidRange("delay must be nonzero")
    if not (delays.min() <= delay <= delays.max()):
        raise InvalidRange(f"delay {delay} outside grid range")
    j = int(np.argmin(np.abs(delays - delay)))
    column = np.asarray(grid.values, dtype=float)[:, j]
    freqs = np.asarray(grid.frequencies, dtype=float)
    span = freqs[-1] - freqs[0]
    lo = freqs[0] + span / 4.0
    hi = freqs[-1] - span / 4.0
    # ">=" on the right so a maximum falling exactly between two equal
    # samples (parity makes those ties exact) is still counted, once.
    peaks = [
        freqs[i]
        for i in range(1, len(column) - 1)
        if column[i] > column[i - 1] and column[i] >= column[i + 1] and lo <= freqs[i] <= hi
    ]
    if len(peaks) < 2:
        raise TooFewMaxima(f"found {len(peaks)} maxima in the central window")
    return float(np.mean(np.diff(peaks)))


def matrix_text(grid: DiffractionGrid) -> str:
    """Delimited-text matrix: delay axis, frequency axis, then one row per frequency.

    Values are rendered with 17 significant digits, so equal grids yield
    byte-identical files.
    """
    lines = [
        ",".join(format(float(v), ".17g") for v in grid.delays),
        ",".join(format(float(v), ".17g") for v in grid.frequencies),
    ]
    for row in np.asarray(grid.values):
        lines.append(",".join(format(float(v), ".17g") for v in row))
    return "\n".join(lines) + "\n"


def heatmap_ppm(grid: DiffractionGrid) -> bytes:
    """Binary PPM heatmap, grayscale ramp, delay horizontal / frequency vertical.

    Brightness is linear in (P - min) / (max - min); the top image row is the
    highest frequency so the orientation matches a conventional plot.
    """
    values = np.asarray(grid.values, dtype=float)
    vmin = float(values.min())
    vmax = float(values.max())
    if vmax > vmin:
        scale = (values - vmin) / (vmax - vmin)
    else:
        scale = np.zeros_like(values)
    gray = np.rint(scale * 255.0).astype(np.uint8)[::-1, :]
    height, width = gray.shape
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    return header + rgb.tobytes()


def render_outputs(grid: DiffractionGrid, csv_path=None, image_path=None) -> dict:
    """Write the matrix text and/or heatmap image atomically; returns paths written."""
    written = {}
    try:
        if csv_path is not None:
            write_text_atomic(csv_path, matrix_text(grid))
            written["csv"] = str(csv_path)
        if image_path is not None:
            write_bytes_atomic(image_path, heatmap_ppm(grid))
            written["image"] = str(image_path)
    except OSError as err:
        raise IoFailure(str(err)) from err
    return written
