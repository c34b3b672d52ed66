"""Unitary transform matrices and structured permutations.

Everything here is built densely as a ``complex128`` matrix; fast
factorizations (FFT paths) are deliberately not the primary implementation,
so these constructions double as the correctness reference for everything
downstream.  All builders are pure functions of their arguments.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "dft_matrix",
    "daft_matrix",
    "dfrft_matrix",
    "dfnt_matrix",
    "wht_matrix",
    "random_interleaver",
    "permutation_matrix",
    "dzt",
    "structured_permutation",
    "unitarity_defect",
]


def _check_size(M: int, name: str = "M") -> int:
    M = int(M)
    if M < 1:
        raise ValueError(f"{name} must be >= 1, got {M}")
    return M


def unitarity_defect(A: np.ndarray) -> float:
    """Return max |A A^H - I|, the worst-case deviation from unitarity."""
    A = np.asarray(A)
    n = A.shape[0]
    return float(np.max(np.abs(A @ A.conj().T - np.eye(n))))


def dft_matrix(M: int) -> np.ndarray:
    """Forward DFT matrix with entries exp(-2j*pi*k*l/M)/sqrt(M).

    The inverse transform is the conjugate transpose.
    """
    M = _check_size(M)
    k = np.arange(M)
    return np.exp(-2j * np.pi * np.outer(k, k) / M) / np.sqrt(M)


def daft_matrix(M: int, c1: float, c2: float) -> np.ndarray:
    """Forward discrete affine Fourier transform ``A = L_c2 @ F @ L_c1``.

    ``L_c = diag(exp(-2j*pi*c*l^2))`` for l = 0..M-1.  With c1 = c2 = 0 the
    result reduces to :func:`dft_matrix`.  The inverse transform is ``A^H``.
    """
    M = _check_size(M)
    l = np.arange(M)
    lam1 = np.exp(-2j * np.pi * c1 * l**2)
    lam2 = np.exp(-2j * np.pi * c2 * l**2)
    return lam2[:, None] * dft_matrix(M) * lam1[None, :]


def dfrft_matrix(M: int, p: float) -> np.ndarray:
    """Discrete fractional Fourier kernel of order ``p`` (rotation p*pi/2).

    The sampling intervals of the fractional and time axes are only
    constrained through their product ``du * ts = 2*pi*|sin(a)| / M``; the
    symmetric split ``du = ts = sqrt(2*pi*|sin(a)|/M)`` is used so the kernel
    has a single free parameter.  ``p = 1`` reproduces :func:`dft_matrix`.

    Raises:
        ValueError: if the rotation is degenerate (p*pi/2 in {0, pi}), where
            the chirp factor cot(a) is undefined.
    """
    M = _check_size(M)
    alpha = p * np.pi / 2.0
    if not 0.0 < alpha < np.pi:
        raise ValueError(
            f"rotation alpha=p*pi/2 must lie strictly inside (0, pi); got p={p}"
        )
    if alpha == np.pi / 2.0:
        cot = 0.0
    else:
        cot = np.cos(alpha) / np.sin(alpha)
    du_sq = 2.0 * np.pi * abs(np.sin(alpha)) / M  # = ts_sq (symmetric split)
    scale = np.sqrt((np.sin(alpha) - 1j * np.cos(alpha)) / M)
    k = np.arange(M)
    chirp = np.exp(0.5j * k**2 * cot * du_sq)
    return scale * chirp[:, None] * np.exp(-2j * np.pi * np.outer(k, k) / M) * chirp[None, :]


def dfnt_matrix(M: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Discrete Fresnel transform as the factorization ``Phi = T2 @ F @ T1``.

    Returns ``(T1, T2, Phi)`` where T1 and T2 are unit-modulus diagonal
    matrices whose entries depend on the parity of M, F is the DFT matrix and
    Phi is the (unitary) Fresnel transform used by the chirp-multiplexed
    waveform.  The modulator applies ``Phi^H``.
    """
    M = _check_size(M)
    k = np.arange(M)
    if M % 2 == 0:
        t1 = np.exp(-1j * np.pi / 4) * np.exp(1j * np.pi * k**2 / M)
        t2 = np.exp(1j * np.pi * k**2 / M)
    else:
        t1 = (
            np.exp(-1j * np.pi / 4)
            * np.exp(1j * np.pi / (4 * M))
            * np.exp(1j * np.pi * (k**2 + k) / M)
        )
        t2 = np.exp(1j * np.pi * (k**2 - k) / M)
    T1 = np.diag(t1)
    T2 = np.diag(t2)
    return T1, T2, T2 @ dft_matrix(M) @ T1


def wht_matrix(N: int, ordering: str = "sequency") -> np.ndarray:
    """Orthonormal Walsh-Hadamard matrix of size N (N a power of two).

    ``ordering="sequency"`` sorts rows by their number of sign changes
    (0, 1, ..., N-1), matching the sampled continuous Walsh functions; this
    ordering is symmetric, so the matrix is its own inverse.
    ``ordering="natural"`` returns the Sylvester (Hadamard) ordering.
    """
    N = _check_size(N, "N")
    if N & (N - 1) != 0:
        raise ValueError(f"N must be a power of two, got {N}")
    H = np.array([[1.0]])
    while H.shape[0] < N:
        H = np.block([[H, H], [H, -H]])
    if ordering == "natural":
        return H / np.sqrt(N)
    if ordering != "sequency":
        raise ValueError(f"unknown ordering {ordering!r}")
    bits = max(N.bit_length() - 1, 0)
    rows = np.empty(N, dtype=int)
    for k in range(N):
        gray = k ^ (k >> 1)
        rows[k] = int(format(gray, f"0{bits}b")[::-1], 2) if bits else 0
    return H[rows] / np.sqrt(N)


def random_interleaver(M: int, seed: int) -> np.ndarray:
    """Deterministic pseudo-random permutation of 0..M-1.

    Fisher-Yates shuffle driven by a counter-based (Philox) stream keyed on
    ``seed``, so the same (M, seed) pair always yields the same permutation
    on any platform.
    """
    M = _check_size(M)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return rng.permutation(M)


def permutation_matrix(perm: np.ndarray) -> np.ndarray:
    """Matrix P with P[i, perm[i]] = 1, i.e. (P @ x)[i] = x[perm[i]]."""
    perm = np.asarray(perm, dtype=int)
    M = perm.size
    if sorted(perm.tolist()) != list(range(M)):
        raise ValueError("perm is not a permutation of 0..M-1")
    P = np.zeros((M, M))
    P[np.arange(M), perm] = 1.0
    return P


def dzt(x: np.ndarray, M: int, N: int, direction: str = "forward") -> np.ndarray:
    """Discrete Zak transform between time samples and a delay-Doppler grid.

    The length-M*N grid vector is laid out column-major with the delay index
    fastest: element ``l + k*M`` holds delay bin l, Doppler bin k.  The
    inverse map synthesizes time samples as

        s[n] = (1/sqrt(N)) * sum_k x[(n mod M) + k*M] * exp(2j*pi*floor(n/M)*k/N)

    and ``direction="forward"`` is its exact inverse.
    """
    x = np.asarray(x, dtype=complex)
    M = _check_size(M)
    N = _check_size(N, "N")
    if x.shape != (M * N,):
        raise ValueError(f"expected a length-{M * N} vector, got shape {x.shape}")
    grid = x.reshape((N, M)).T  # (M, N), delay x Doppler
    k = np.arange(N)
    kernel = np.exp(2j * np.pi * np.outer(k, k) / N) / np.sqrt(N)  # IDFT along Doppler
    if direction == "inverse":
        out = grid @ kernel.T
    elif direction == "forward":
        out = grid @ kernel.conj().T
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return out.T.reshape(M * N)


def structured_permutation(kind: str, M: int, N: int) -> np.ndarray:
    """Structured MN x MN permutation matrices used by the 2D waveforms.

    ``kind="oddm"``: [P]_{k,k'} = 1 iff k' = (k mod M)*N + floor(k/M), the
    interleaver that turns delay-major staggered blocks into time order.

    ``kind="shuffle"``: the perfect shuffle, stacked row blocks
    ``I_N kron e_M(m)^T`` for m = 0..M-1; it maps a delay-fastest vector to
    its slot-fastest reordering.
    """
    M = _check_size(M)
    N = _check_size(N, "N")
    L = M * N
    P = np.zeros((L, L))
    if kind == "oddm":
        k = np.arange(L)
        P[k, (k % M) * N + k // M] = 1.0
    elif kind == "shuffle":
        for m in range(M):
            for n in range(N):
                P[m * N + n, n * M + m] = 1.0
    else:
        raise ValueError(f"unknown permutation kind {kind!r}")
    return P
