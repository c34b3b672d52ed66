"""Constellations and modulation-domain equalizers.

Square QAM alphabets use per-axis Gray labeling; the 128-point alphabet is
the usual cross layout with a documented quasi-Gray map (it only feeds peak
power statistics, where the bit map is irrelevant).  Equalizers operate on
the modulation-domain vector: a per-bin scalar stage for diagonal effective
channels, a regularized least-squares block stage for coupled ones, and an
exhaustive search oracle for tiny instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

_SUPPORTED_ORDERS = (4, 16, 64, 128)


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _square_qam_points(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and integer labels of a Gray-mapped square constellation."""
    side = int(round(np.sqrt(order)))
    bits_axis = side.bit_length() - 1
    levels = 2 * np.arange(side) - (side - 1)  # ..., -3, -1, 1, 3, ...
    points = np.empty(order, dtype=complex)
    labels = np.empty(order, dtype=int)
    idx = 0
    for i in range(side):
        for q in range(side):
            points[idx] = levels[i] + 1j * levels[q]
            labels[idx] = (_gray(i) << bits_axis) | _gray(q)
            idx += 1
    return points, labels


def _cross_128_points() -> tuple[np.ndarray, np.ndarray]:
    """128-point cross constellation: 12x12 lattice minus the 2x2 corners.

    Labels simply enumerate the surviving lattice points row-major with
    per-axis Gray codes on the underlying lattice, a quasi-Gray assignment.
    """
    side = 12
    levels = 2 * np.arange(side) - (side - 1)
    pts = []
    for i in range(side):
        for q in range(side):
            corner = (i < 2 or i >= side - 2) and (q < 2 or q >= side - 2)
            if not corner:
                pts.append(levels[i] + 1j * levels[q])
    points = np.array(pts, dtype=complex)
    labels = np.arange(points.size)
    return points, labels


@dataclass(frozen=True)
class Constellation:
    """A unit-average-energy symbol alphabet with a bijective bit map.

    ``points[i]`` is the symbol whose bit label is ``labels[i]`` read as a
    ``bits_per_symbol``-wide word, most significant bit first.
    """

    order: int
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        energy = float(np.mean(np.abs(self.points) ** 2))
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"alphabet not unit energy: {energy}")
        if sorted(self.labels.tolist()) != list(range(self.order)):
            raise ValueError("bit labels are not a bijection")

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    def index_of_label(self) -> np.ndarray:
        """Map bit-label -> point index."""
        inv = np.empty(self.order, dtype=int)
        inv[self.labels] = np.arange(self.order)
        return inv


def qam_constellation(order: int) -> Constellation:
    """Unit-energy QAM alphabet of the given order (4, 16, 64 or 128)."""
    if order not in _SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order {order}; pick from {_SUPPORTED_ORDERS}")
    if order == 128:
        points, labels = _cross_128_points()
    else:
        points, labels = _square_qam_points(order)
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    return Constellation(order=order, points=points, labels=labels)


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Group bits (MSB first) into labels and map them to symbols."""
    bits = np.asarray(bits, dtype=int)
    k = constellation.bits_per_symbol
    if bits.ndim != 1 or bits.size % k:
        raise ValueError(f"bit count must be a multiple of {k}")
    words = bits.reshape(-1, k)
    labels = words @ (1 << np.arange(k - 1, -1, -1))
    return constellation.points[constellation.index_of_label()[labels]]


def hard_decide(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Nearest-neighbor point indices; ties break toward the lowest index."""
    symbols = np.asarray(symbols, dtype=complex)
    d2 = np.abs(symbols[:, None] - constellation.points[None, :]) ** 2
    return np.argmin(d2, axis=1)


def demap_hard(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Hard-decision bits (MSB first) for a symbol vector."""
    idx = hard_decide(symbols, constellation)
    labels = constellation.labels[idx]
    k = constellation.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).reshape(-1)


def bits_for_indices(indices: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Bits (MSB first) labeling the given point indices."""
    labels = constellation.labels[np.asarray(indices, dtype=int)]
    k = constellation.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).reshape(-1)


@dataclass(frozen=True)
class EqualizerOutput:
    """Soft symbol estimates plus optional hard decisions and diagnostics."""

    soft: np.ndarray
    hard: np.ndarray | None = None
    post_snr: np.ndarray | None = None


def single_tap_equalize(
    y: np.ndarray,
    h_diag: np.ndarray,
    sigma2: float,
    constellation: Constellation | None = None,
) -> EqualizerOutput:
    """Per-bin scalar Wiener equalizer for a diagonal effective channel.

    x_hat_k = conj(h_k) y_k / (|h_k|^2 + sigma2).  ``h_diag`` may be the full
    matrix, in which case it must actually be diagonal.
    """
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h_diag, dtype=complex)
    if h.ndim == 2:
        off = h - np.diag(np.diag(h))
        peak = np.max(np.abs(h)) or 1.0
        if np.max(np.abs(off)) > 1e-9 * peak:
            raise ValueError("effective channel is not diagonal")
        h = np.diag(h)
    soft = np.conj(h) * y / (np.abs(h) ** 2 + sigma2)
    hard = hard_decide(soft, constellation) if constellation is not None else None
    snr = np.abs(h) ** 2 / sigma2 if sigma2 > 0 else None
    return EqualizerOutput(soft=soft, hard=hard, post_snr=snr)


def mmse_equalize(
    y: np.ndarray,
    h_eff: np.ndarray,
    sigma2: float,
    constellation: Constellation | None = None,
) -> EqualizerOutput:
    """Block linear MMSE over the whole modulation-domain vector.

    Solves (H^H H + sigma2 I) x = H^H y; with sigma2 = 0 and a singular
    channel the solver error propagates rather than being regularized away.
    """
    y = np.asarray(y, dtype=complex)
    H = np.asarray(h_eff, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"effective channel must be square, got {H.shape}")
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    gram = H.conj().T @ H + sigma2 * np.eye(H.shape[0])
    soft = np.linalg.solve(gram, H.conj().T @ y)
    hard = hard_decide(soft, constellation) if constellation is not None else None
    return EqualizerOutput(soft=soft, hard=hard)


_ML_MAX_SYMBOLS = 8
_ML_MAX_CANDIDATES = 1 << 20


def ml_oracle(
    y: np.ndarray, h_eff: np.ndarray, constellation: Constellation
) -> np.ndarray:
    """Exact maximum-likelihood point indices by exhaustive enumeration.

    Minimizes ||y - H x||^2 over every candidate symbol vector; candidates
    are visited in ascending lexicographic index order so ties resolve to
    the lowest indices.  Refuses instances beyond the enumeration budget.
    """
    y = np.asarray(y, dtype=complex)
    H = np.asarray(h_eff, dtype=complex)
    n = H.shape[1]
    if n > _ML_MAX_SYMBOLS or constellation.order**n > _ML_MAX_CANDIDATES:
        raise ValueError(
            f"instance too large for exhaustive search ({constellation.order}^{n})"
        )
    best = None
    best_metric = np.inf
    pts = constellation.points
    for cand in itertools.product(range(constellation.order), repeat=n):
        x = pts[list(cand)]
        metric = float(np.sum(np.abs(y - H @ x) ** 2))
        if metric < best_metric:  # strict: ties keep the earlier (lower) indices
            best_metric = metric
            best = cand
    return np.array(best, dtype=int)
