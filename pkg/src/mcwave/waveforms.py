"""Waveform bundles: modulation operator chains, prefixes and path precoding.

Every scheme is materialized as a pair of dense operators (``a_tx`` maps the
modulation-domain symbol vector to core time samples, ``a_rx`` maps received
core samples back) plus a prefix rule.  All bundles are exactly unitary
except the filter-bank scheme, whose orthogonality holds in the real field
only.  2D delay-Doppler grids are vectorized delay-fastest (column-major)
except where a scheme's canonical chain stacks delay blocks; the per-scheme
builders note the layout they use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermval

from . import transforms
from .channel import ChannelRealization, _as_generator, channel_matrix_full

SCHEMES = (
    "scm",
    "ofdm",
    "dft-s-ofdm",
    "frft-ofdm",
    "ocdm",
    "ifdm",
    "afdm",
    "fbmc",
    "mc-otfs",
    "zak-otfs",
    "oddm",
    "otsm",
)

_DOMAIN_LABELS = {
    "scm": "time",
    "ofdm": "frequency",
    "dft-s-ofdm": "frequency",
    "frft-ofdm": "fractional-frequency",
    "ocdm": "chirp",
    "ifdm": "interleave-frequency",
    "afdm": "daft",
    "fbmc": "time-frequency",
    "mc-otfs": "delay-doppler",
    "zak-otfs": "delay-doppler",
    "oddm": "delay-doppler",
    "otsm": "delay-sequency",
}


class ConfigurationError(ValueError):
    """Raised for inconsistent waveform / frame / channel configurations."""


@dataclass(frozen=True)
class FrameGeometry:
    """Frame dimensions shared by every waveform.

    ``m`` subcarriers (or delay bins), ``n`` slots (1 for 1D schemes),
    subcarrier spacing ``delta_f_hz`` and prefix length in samples.  The
    baseband sample rate is m * delta_f and a core frame holds m * n samples.
    """

    m: int
    n: int = 1
    delta_f_hz: float = 15e3
    prefix_len: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ConfigurationError("frame dimensions must be >= 1")
        if self.prefix_len < 0:
            raise ConfigurationError("prefix length must be >= 0")
        if self.delta_f_hz <= 0:
            raise ConfigurationError("subcarrier spacing must be positive")

    @property
    def sample_rate_hz(self) -> float:
        return self.m * self.delta_f_hz

    @property
    def core_samples(self) -> int:
        return self.m * self.n

    @property
    def frame_samples(self) -> int:
        return self.core_samples + self.prefix_len


@dataclass(frozen=True)
class WaveformBundle:
    """A scheme's modulation/demodulation operators plus its prefix rule."""

    scheme: str
    geometry: FrameGeometry
    a_tx: np.ndarray
    a_rx: np.ndarray
    prefix_rule: str  # "cp" | "cpp" | "none"
    domain: str
    cpp_c1: float = 0.0
    real_field: bool = False
    params: dict = field(default_factory=dict)

    @property
    def n_symbols(self) -> int:
        return self.a_tx.shape[1]

    @property
    def core_len(self) -> int:
        return self.a_tx.shape[0]

    def modulate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.n_symbols,):
            raise ConfigurationError(
                f"{self.scheme} expects {self.n_symbols} symbols, got {x.shape}"
            )
        return self.a_tx @ x

    def demodulate(self, r_core: np.ndarray) -> np.ndarray:
        r_core = np.asarray(r_core)
        if r_core.shape != (self.core_len,):
            raise ConfigurationError(
                f"{self.scheme} expects {self.core_len} core samples, got {r_core.shape}"
            )
        return self.a_rx @ r_core

    def transmit(self, x: np.ndarray) -> np.ndarray:
        """Modulate and attach the scheme's prefix."""
        return add_prefix(
            self.modulate(x), self.prefix_rule, self.geometry.prefix_len, self.cpp_c1
        )

    def receive(self, frame: np.ndarray) -> np.ndarray:
        """Strip the prefix and demodulate."""
        return self.demodulate(remove_prefix(frame, self.geometry.prefix_len))


def add_prefix(core: np.ndarray, rule: str, prefix_len: int, c1: float = 0.0) -> np.ndarray:
    """Prepend a guard prefix to a core frame.

    "cp" copies the last ``prefix_len`` samples verbatim; "cpp" copies them
    with the chirp phase exp(-2j*pi*c1*(L^2 + 2*L*l)) for l = -prefix_len..-1
    (L the core length), which reduces to a plain copy when c1 = 0; "none"
    requires prefix_len = 0.
    """
    core = np.asarray(core)
    L = core.shape[0]
    if prefix_len > L:
        raise ConfigurationError(f"prefix {prefix_len} longer than core {L}")
    if rule == "none":
        if prefix_len:
            raise ConfigurationError("prefix_len must be 0 for rule 'none'")
        return core.copy()
    if prefix_len == 0:
        return core.copy()
    if rule == "cp":
        return np.concatenate([core[-prefix_len:], core])
    if rule == "cpp":
        l = np.arange(-prefix_len, 0)
        phase = np.exp(-2j * np.pi * c1 * (L**2 + 2.0 * L * l))
        return np.concatenate([core[L + l] * phase, core])
    raise ConfigurationError(f"unknown prefix rule {rule!r}")


def remove_prefix(frame: np.ndarray, prefix_len: int) -> np.ndarray:
    """Drop the first ``prefix_len`` samples of a frame."""
    frame = np.asarray(frame)
    if prefix_len >= frame.shape[0]:
        raise ConfigurationError("prefix removal would consume the whole frame")
    return frame[prefix_len:]


def prefix_operator(rule: str, core_len: int, prefix_len: int, c1: float = 0.0) -> np.ndarray:
    """Matrix form of :func:`add_prefix`: (core_len + prefix_len) x core_len."""
    R = np.zeros((core_len + prefix_len, core_len), dtype=complex)
    R[prefix_len:, :] = np.eye(core_len)
    if prefix_len:
        if rule == "cp":
            phase = np.ones(prefix_len)
        elif rule == "cpp":
            l = np.arange(-prefix_len, 0)
            phase = np.exp(-2j * np.pi * c1 * (core_len**2 + 2.0 * core_len * l))
        elif rule == "none":
            raise ConfigurationError("prefix_len must be 0 for rule 'none'")
        else:
            raise ConfigurationError(f"unknown prefix rule {rule!r}")
        for j in range(prefix_len):
            R[j, core_len - prefix_len + j] = phase[j]
    return R


def afdm_default_c1(m: int, alpha_max_int: int) -> float:
    """Default first chirp rate: (2*a + 1) / (2*M) for integer Doppler span a.

    This makes each propagation path occupy a distinct shift in the chirp
    domain, giving the P-entries-per-row effective channel structure.
    """
    if alpha_max_int < 0:
        raise ConfigurationError("alpha_max_int must be >= 0")
    return (2 * alpha_max_int + 1) / (2.0 * m)


def _require_1d(scheme: str, geometry: FrameGeometry):
    if geometry.n != 1:
        raise ConfigurationError(f"{scheme} is a 1D scheme; use n=1 (got n={geometry.n})")


def _check_params(scheme: str, params: dict, allowed: set):
    unknown = set(params) - allowed
    if unknown:
        raise ConfigurationError(f"unknown {scheme} parameters: {sorted(unknown)}")


def build_waveform(scheme: str, geometry: FrameGeometry, params: dict | None = None) -> WaveformBundle:
    """Assemble the operator bundle for one scheme.

    Scheme-specific ``params``:

    * ``dft-s-ofdm``: ``width`` (data size <= m, default m) and ``mapping``
      ("block-centered" places the data on a contiguous band starting at
      ``offset``, default (m - width) // 2, which is the identity for full
      allocation; "dc-centered" wraps the band around bin 0).
    * ``frft-ofdm``: fractional order ``p``.
    * ``ifdm``: interleaver ``seed``.
    * ``afdm``: chirp rates ``c1``/``c2``, or ``alpha_max_int`` from which the
      default c1 is derived; c2 defaults to 0.
    * ``fbmc``: ``overlap`` factor for the prototype truncation.

    Rectangular pulses are used throughout (identity pulse matrices); the
    filter-bank scheme's prototype is the one exception, and its bundle is
    orthogonal in the real field only.
    """
    params = dict(params or {})
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    M, N = geometry.m, geometry.n
    domain = _DOMAIN_LABELS[scheme]
    kwargs = dict(scheme=scheme, geometry=geometry, domain=domain, params=params)

    if scheme == "scm":
        _check_params(scheme, params, set())
        eye = np.eye(M * N, dtype=complex)
        return WaveformBundle(a_tx=eye, a_rx=eye.copy(), prefix_rule="cp", **kwargs)

    if scheme == "ofdm":
        _require_1d(scheme, geometry)
        _check_params(scheme, params, set())
        F = transforms.dft_matrix(M)
        return WaveformBundle(a_tx=F.conj().T, a_rx=F, prefix_rule="cp", **kwargs)

    if scheme == "dft-s-ofdm":
        _require_1d(scheme, geometry)
        _check_params(scheme, params, {"width", "mapping", "offset"})
        width = int(params.get("width", M))
        mapping = params.get("mapping", "block-centered")
        if not 1 <= width <= M:
            raise ConfigurationError(f"width must be in 1..{M}, got {width}")
        P = np.zeros((M, width), dtype=complex)
        if mapping == "block-centered":
            offset = int(params.get("offset", (M - width) // 2))
            if not 0 <= offset <= M - width:
                raise ConfigurationError(f"offset must be in 0..{M - width}")
            P[offset + np.arange(width), np.arange(width)] = 1.0
        elif mapping == "dc-centered":
            if "offset" in params:
                raise ConfigurationError("offset applies to block-centered mapping only")
            rows = (np.arange(width) - width // 2) % M
            P[rows, np.arange(width)] = 1.0
        else:
            raise ConfigurationError(f"unknown mapping {mapping!r}")
        Fm = transforms.dft_matrix(M)
        Fw = transforms.dft_matrix(width)
        a_tx = Fm.conj().T @ P @ Fw
        return WaveformBundle(a_tx=a_tx, a_rx=a_tx.conj().T, prefix_rule="cp", **kwargs)

    if scheme == "frft-ofdm":
        _require_1d(scheme, geometry)
        _check_params(scheme, params, {"p"})
        p = float(params.get("p", 0.5))
        K = transforms.dfrft_matrix(M, p)
        return WaveformBundle(a_tx=K.conj().T, a_rx=K, prefix_rule="cp", **kwargs)

    if scheme == "ocdm":
        _require_1d(scheme, geometry)
        _check_params(scheme, params, set())
        _, _, Phi = transforms.dfnt_matrix(M)
        return WaveformBundle(a_tx=Phi.conj().T, a_rx=Phi, prefix_rule="cp", **kwargs)

    if scheme == "ifdm":
        _require_1d(scheme, geometry)
        _check_params(scheme, params, {"seed"})
        seed = int(params.get("seed", 0))
        Pi = transforms.permutation_matrix(transforms.random_interleaver(M, seed))
        F = transforms.dft_matrix(M)
        a_tx = Pi @ F.conj().T
        return WaveformBundle(a_tx=a_tx, a_rx=F @ Pi.T, prefix_rule="cp", **kwargs)

    if scheme == "afdm":
        _require_1d(scheme, geometry)
        _check_params(scheme, params, {"c1", "c2", "alpha_max_int"})
        if "c1" in params:
            c1 = float(params["c1"])
        else:
            c1 = afdm_default_c1(M, int(params.get("alpha_max_int", 0)))
        c2 = float(params.get("c2", 0.0))
        A = transforms.daft_matrix(M, c1, c2)
        return WaveformBundle(
            a_tx=A.conj().T, a_rx=A, prefix_rule="cpp", cpp_c1=c1, **kwargs
        )

    if scheme == "mc-otfs":
        _check_params(scheme, params, set())
        # Delay-fastest vectorization: s = kron(F_N^H, G_tx) x with G = I.
        Fn = transforms.dft_matrix(N)
        a_tx = np.kron(Fn.conj().T, np.eye(M))
        a_rx = np.kron(Fn, np.eye(M))
        return WaveformBundle(a_tx=a_tx, a_rx=a_rx, prefix_rule="cp", **kwargs)

    if scheme == "zak-otfs":
        _check_params(scheme, params, set())
        # Assembled column-by-column from the Zak transform so the bundle is
        # an independent construction from the multicarrier variant.
        L = M * N
        a_tx = np.empty((L, L), dtype=complex)
        basis = np.zeros(L, dtype=complex)
        for j in range(L):
            basis[j] = 1.0
            a_tx[:, j] = transforms.dzt(basis, M, N, direction="inverse")
            basis[j] = 0.0
        return WaveformBundle(a_tx=a_tx, a_rx=a_tx.conj().T, prefix_rule="cp", **kwargs)

    if scheme == "oddm":
        _check_params(scheme, params, set())
        # Delay-major symbol stacking; the interleaver turns the per-delay
        # Doppler IDFT blocks into time order.  Ideal (sample-spaced) pulse,
        # which keeps the bundle exactly unitary; the truncated root-Nyquist
        # transmit pulse is available separately via ddop_pulse.
        Fn = transforms.dft_matrix(N)
        Pi = transforms.structured_permutation("oddm", M, N)
        a_tx = Pi @ np.kron(np.eye(M), Fn.conj().T)
        return WaveformBundle(a_tx=a_tx, a_rx=a_tx.conj().T, prefix_rule="cp", **kwargs)

    if scheme == "otsm":
        _check_params(scheme, params, {"ordering"})
        if N & (N - 1) != 0:
            raise ConfigurationError(f"otsm needs a power-of-two slot count, got {N}")
        W = transforms.wht_matrix(N, ordering=params.get("ordering", "sequency"))
        P = transforms.structured_permutation("shuffle", M, N)
        # Delay-major input x (delay blocks of sequency symbols): P.T reorders
        # to slot-fastest, then the Walsh transform acts along slots.
        a_tx = np.kron(W, np.eye(M)) @ P.T
        a_rx = np.kron(np.eye(M), W) @ P
        return WaveformBundle(a_tx=a_tx.astype(complex), a_rx=a_rx.astype(complex),
                              prefix_rule="cp", **kwargs)

    if scheme == "fbmc":
        _check_params(scheme, params, {"overlap"})
        overlap = int(params.get("overlap", 6))
        G, _ = fbmc_synthesis(geometry, overlap)
        return WaveformBundle(
            a_tx=G, a_rx=G.conj().T, prefix_rule="none", real_field=True, **kwargs
        )

    raise ConfigurationError(f"unhandled scheme {scheme!r}")  # pragma: no cover


# Hermite-series prototype coefficients (even orders 0..20).
_HERMITE_COEFFS = {
    0: 1.412692577,
    4: -3.0145e-3,
    8: -8.8041e-6,
    12: -2.2611e-9,
    16: -4.4570e-15,
    20: 1.8633e-16,
}


def hermite_prototype(t_over_t0: np.ndarray) -> np.ndarray:
    """Hermite-series prototype filter evaluated at t / T0 (unit T0).

    Real, even, and orthogonal for a time-frequency spacing product of 2 on
    the full lattice; the offset-QAM system halves both spacings.
    """
    t = np.asarray(t_over_t0, dtype=float)
    order = max(_HERMITE_COEFFS) + 1
    coeffs = np.zeros(order)
    for i, a in _HERMITE_COEFFS.items():
        coeffs[i] = a
    return np.exp(-2.0 * np.pi * t**2) * hermval(2.0 * np.sqrt(np.pi) * t, coeffs)


def fbmc_synthesis(geometry: FrameGeometry, overlap_factor: int = 6) -> tuple[np.ndarray, int]:
    """Offset-QAM filter-bank synthesis matrix.

    Columns are sampled basis pulses g_{l,k}: the prototype shifted to time
    position k * T0/2 and subcarrier l (spacing 1/T0), with the phase factor
    exp(1j*pi*(l+k)/2).  The prototype is truncated to ±overlap_factor*T0/2
    and normalized to unit sampled energy.  Returns (G, sample_count) with G
    of shape (sample_count, m*n); m*n real-valued symbols enter per frame.
    """
    if overlap_factor < 4:
        raise ConfigurationError("overlap factor must be >= 4")
    M, N = geometry.m, geometry.n
    half = overlap_factor / 2.0  # prototype support: |t| <= half * T0
    dt = 1.0 / M  # in units of T0 (critical sampling, f_s = M / T0)
    n_samp = int(round((half * 2 + (N - 1) * 0.5) / dt)) + 1
    t = -half + dt * np.arange(n_samp)  # t / T0
    G = np.empty((n_samp, M * N), dtype=complex)
    proto_ref = hermite_prototype(np.arange(-half, half + dt / 2, dt))
    norm = np.sqrt(np.sum(proto_ref**2) * dt)
    for k in range(N):
        tk = t - 0.5 * k
        p = hermite_prototype(tk) / norm
        for l in range(M):
            col = p * np.exp(2j * np.pi * l * tk) * np.exp(1j * np.pi * (l + k) / 2.0)
            G[:, l + k * M] = np.sqrt(dt) * col
    return G, n_samp


def ddop_pulse(m: int, n: int, q: int = 4, rolloff: float = 0.1,
               oversample: int = 1) -> np.ndarray:
    """Pulse train of truncated root-raised-cosine pulses, one per slot.

    The elementary pulse is a root-Nyquist pulse for the delay resolution
    T/m, truncated to |t| < q*T/m (needs 2q < m so trains do not overlap),
    and the train repeats it at the slot period T for n slots.  Returned
    samples are on the T/(m*oversample) raster starting at t = -q*T/m, and
    the train is normalized to unit sampled energy.
    """
    if 2 * q >= m:
        raise ConfigurationError(f"need 2q < m, got q={q}, m={m}")
    if not 0.0 <= rolloff <= 1.0:
        raise ConfigurationError("rolloff must lie in [0, 1]")
    if q < 1:
        raise ConfigurationError("q must be >= 1")
    step = 1.0 / oversample  # in units of T/m
    # Train support: t in [-q, (n-1)*m + q] * T/m.
    u = np.arange(-q, (n - 1) * m + q + step / 2, step)
    train = np.zeros(u.size)
    for k in range(n):
        x = u - k * m
        mask = np.abs(x) < q
        train[mask] += _rrc(x[mask], rolloff)
    return train / np.sqrt(np.sum(train**2) * step)


def _rrc(x: np.ndarray, beta: float) -> np.ndarray:
    """Root-raised-cosine impulse response at t/Ts = x (unit symbol interval)."""
    y = np.empty_like(x, dtype=float)
    if beta == 0.0:
        return np.sinc(x)
    sing = np.isclose(np.abs(x), 1.0 / (4.0 * beta))
    zero = np.isclose(x, 0.0)
    rest = ~(sing | zero)
    y[zero] = 1.0 + beta * (4.0 / np.pi - 1.0)
    y[sing] = (beta / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
    )
    xr = x[rest]
    num = np.sin(np.pi * xr * (1 - beta)) + 4 * beta * xr * np.cos(np.pi * xr * (1 + beta))
    den = np.pi * xr * (1 - (4 * beta * xr) ** 2)
    y[rest] = num / den
    return y


def effective_channel(bundle: WaveformBundle, real: ChannelRealization) -> np.ndarray:
    """Modulation-domain channel matrix: demod . deprefix . H . prefix . mod.

    The result is (n_symbols x n_symbols) and satisfies y = H_eff x + noise
    for the bundle's end-to-end chain.  Raises if the prefix is shorter than
    the channel memory (the circular structure would be broken) or if the
    bundle and realization disagree on the sample rate.
    """
    if bundle.real_field:
        raise ConfigurationError(
            "real-field bundles have no complex modulation-domain channel matrix"
        )
    fs = bundle.geometry.sample_rate_hz
    if abs(fs - real.sample_rate_hz) > 1e-6 * fs:
        raise ConfigurationError(
            f"sample rate mismatch: bundle {fs} Hz vs realization {real.sample_rate_hz} Hz"
        )
    L_core = bundle.core_len
    L_p = bundle.geometry.prefix_len
    if L_p < real.max_delay_samples:
        raise ConfigurationError(
            f"prefix {L_p} shorter than channel memory {real.max_delay_samples}"
        )
    R_add = prefix_operator(bundle.prefix_rule, L_core, L_p, bundle.cpp_c1)
    H_full = channel_matrix_full(real, L_core + L_p)
    core_rx = (H_full @ R_add)[L_p:, :]
    return bundle.a_rx @ core_rx @ bundle.a_tx


@dataclass(frozen=True)
class DdamConfig:
    """Path-domain precoding setup for a multi-antenna transmitter.

    ``steering`` holds one channel vector per path, shape (P, n_tx); the
    beamformer is matched ("mrt") or interference-nulling ("zf").
    """

    steering: np.ndarray
    beamformer: str = "zf"
    n_streams: int = 1

    def __post_init__(self):
        steering = np.asarray(self.steering, dtype=complex)
        object.__setattr__(self, "steering", steering)
        if steering.ndim != 2:
            raise ConfigurationError("steering must be (paths, n_tx)")
        if self.beamformer not in ("mrt", "zf"):
            raise ConfigurationError(f"unknown beamformer {self.beamformer!r}")
        if self.n_streams != 1:
            raise ConfigurationError("only single-stream precoding is supported")
        if np.any(np.linalg.norm(steering, axis=1) == 0):
            raise ConfigurationError("steering vectors must be nonzero")

    @property
    def n_paths(self) -> int:
        return self.steering.shape[0]

    @property
    def n_tx(self) -> int:
        return self.steering.shape[1]


def ddam_beamformers(cfg: DdamConfig) -> np.ndarray:
    """Per-path beamforming vectors, shape (P, n_tx), unit total power.

    MRT points each vector along its own path; ZF additionally projects it
    onto the null space of every other path's steering vector so inter-path
    leakage vanishes.  Raises when nulling is infeasible (fewer antennas
    than paths, or a path falls inside the span of the others).
    """
    H = cfg.steering
    P, n_tx = H.shape
    if cfg.beamformer == "zf" and n_tx < P:
        raise ConfigurationError(f"zero-forcing needs n_tx >= paths ({n_tx} < {P})")
    F = np.empty_like(H)
    for i in range(P):
        h = H[i]
        if cfg.beamformer == "mrt" or P == 1:
            f = h / np.linalg.norm(h)
        else:
            others = np.delete(H, i, axis=0).T  # (n_tx, P-1)
            gram = others.conj().T @ others
            try:
                coef = np.linalg.solve(gram, others.conj().T @ h)
            except np.linalg.LinAlgError as exc:
                raise ConfigurationError(f"rank-deficient steering set: {exc}") from exc
            f = h - others @ coef
            norm = np.linalg.norm(f)
            if norm < 1e-12 * np.linalg.norm(h):
                raise ConfigurationError(f"path {i} lies in the span of the others")
            f = f / norm
        F[i] = f
    return F / np.sqrt(P)  # total transmit power sums to one


def ddam_precode(
    x: np.ndarray, cfg: DdamConfig, real: ChannelRealization
) -> np.ndarray:
    """Per-path delay/Doppler pre-compensated multi-antenna transmit signal.

    Each path i carries a copy of the stream delayed by kappa_i = l_max - l_i
    samples and pre-rotated by its negated Doppler, beamformed with its own
    vector:

        s[:, n] = sum_i f_i * x[n - kappa_i] * exp(-2j*pi*nu_i*n/f_s)

    Output shape is (n_tx, len(x) + kappa_max).
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.size == 0:
        raise ConfigurationError("stream must be a nonempty 1-D sequence")
    if cfg.n_paths != len(real.taps):
        raise ConfigurationError(
            f"{cfg.n_paths} steering vectors for {len(real.taps)} channel taps"
        )
    F = ddam_beamformers(cfg)
    l_max = real.max_delay_samples
    kappas = [l_max - t.delay_samples for t in real.taps]
    L = x.size + max(kappas)
    n = np.arange(L)
    fs = real.sample_rate_hz
    streams = np.zeros((cfg.n_paths, L), dtype=complex)  # per-path shifted copies
    for i, (tap, kap) in enumerate(zip(real.taps, kappas)):
        streams[i, kap : kap + x.size] = x
        streams[i] *= np.exp(-2j * np.pi * tap.doppler_hz * n / fs)
    return F.T @ streams


def ddam_apply_channel(
    s: np.ndarray,
    cfg: DdamConfig,
    real: ChannelRealization,
    rng_seed: int | np.random.Generator = 0,
    out_len: int | None = None,
) -> np.ndarray:
    """Propagate a multi-antenna signal through the per-path vector channel.

    r[n] = sum_i gain_i * (h_i^H s[:, n - l_i]) * exp(2j*pi*nu_i*n/f_s) + w[n]

    where h_i are the steering vectors of ``cfg`` and gain_i the (scalar) tap
    gains of the realization, normally 1 when the vectors carry the gain.
    """
    s = np.asarray(s, dtype=complex)
    if s.ndim != 2 or s.shape[0] != cfg.n_tx:
        raise ConfigurationError(f"expected ({cfg.n_tx}, L) signal, got {s.shape}")
    if cfg.n_paths != len(real.taps):
        raise ConfigurationError("steering vector count != channel tap count")
    L = out_len if out_len is not None else s.shape[1] + real.max_delay_samples
    n = np.arange(L)
    r = np.zeros(L, dtype=complex)
    fs = real.sample_rate_hz
    for h_i, tap in zip(cfg.steering, real.taps):
        proj = h_i.conj() @ s  # (L_s,)
        delayed = np.zeros(L, dtype=complex)
        lo = tap.delay_samples
        hi = min(L, lo + proj.size)
        delayed[lo:hi] = proj[: hi - lo]
        r += tap.gain * delayed * np.exp(2j * np.pi * tap.doppler_hz * n / fs)
    if real.sigma2 > 0:
        rng = _as_generator(rng_seed)
        w = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        r += np.sqrt(real.sigma2 / 2.0) * w
    return r


def ddam_composite_gain(cfg: DdamConfig, real: ChannelRealization) -> complex:
    """Gain of the single aligned tap after precoding and propagation.

    Path i's pre-delayed copy reaches the receiver with the residual constant
    phase exp(2j*pi*nu_i*l_i/f_s) picked up because the Doppler
    pre-compensation is evaluated at transmit rather than receive time.
    """
    F = ddam_beamformers(cfg)
    g = 0.0 + 0.0j
    fs = real.sample_rate_hz
    for i, tap in enumerate(real.taps):
        phase = np.exp(2j * np.pi * tap.doppler_hz * tap.delay_samples / fs)
        g += (cfg.steering[i].conj() @ F[i]) * tap.gain * phase
    return complex(g)


def ddam_receive(
    r: np.ndarray,
    kappa_max: int,
    composite_gain: complex = 1.0,
    n_symbols: int | None = None,
) -> np.ndarray:
    """Align to the common compensated tap and undo the composite gain.

    ``kappa_max`` is the alignment delay in samples (all path copies pile up
    there); with zero-forcing (or spatially orthogonal paths) the output
    equals the transmitted stream exactly in the noiseless case.
    """
    r = np.asarray(r, dtype=complex)
    out = r[kappa_max:] if kappa_max else r.copy()
    if n_symbols is not None:
        out = out[:n_symbols]
    return out / composite_gain
