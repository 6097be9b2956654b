"""Frequency-domain CSI synthesis for an asynchronous uplink OFDM channel.

The simulator works directly on the post-FFT model: preamble symbols are
taken as unit modulus and already divided out, so a sample is

    y_n[m, g] = (D_n[m, g] + S_n[g]) * exp(j2π m T_A f_O[m]) * exp(-j2π g τ_O[m] / T) + w

with ``S`` the static and ``D`` the dynamic multipath sums.  Time-domain
waveforms and cyclic-prefix bookkeeping are deliberately not modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidConfigError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SystemConfig:
    """Physical, array and frame constants.

    ``antenna_spacing`` defaults to half a wavelength.  ``snr_db=None`` means
    the synthesized tensor is noiseless.
    """

    antenna_count: int = 8
    subcarrier_count: int = 64
    symbol_duration: float = 1e-6
    cp_duration: float = 0.3e-6
    packet_interval: float = 1e-3
    carrier_freq: float = 3e9
    antenna_spacing: Optional[float] = None
    packet_count: int = 128
    taylor_window: int = 30
    snr_db: Optional[float] = None

    def __post_init__(self):
        if self.antenna_spacing is None:
            object.__setattr__(self, "antenna_spacing", self.wavelength / 2)
        self.validate()

    @property
    def wavelength(self) -> float:
        if not self.carrier_freq > 0:
            raise InvalidConfigError(f"carrier_freq must be positive, got {self.carrier_freq}")
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.packet_count, self.subcarrier_count, self.antenna_count)

    def validate(self):
        def _int(name, minimum):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
                raise InvalidConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")

        _int("antenna_count", 2)
        _int("subcarrier_count", 2)
        _int("taylor_window", 1)
        _int("packet_count", self.taylor_window + 1)
        for name in ("symbol_duration", "packet_interval", "carrier_freq", "antenna_spacing"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidConfigError(f"{name} must be positive and finite, got {value!r}")
        if not (np.isfinite(self.cp_duration) and self.cp_duration >= 0):
            raise InvalidConfigError(f"cp_duration must be non-negative, got {self.cp_duration!r}")
        ratio = self.packet_interval / self.symbol_duration
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-6 * ratio:
            raise InvalidConfigError(
                "packet_interval must be a positive integer multiple of symbol_duration "
                f"(ratio {ratio!r})"
            )
        if self.snr_db is not None and not np.isfinite(self.snr_db):
            raise InvalidConfigError(f"snr_db must be finite or None, got {self.snr_db!r}")

    def replace(self, **changes) -> "SystemConfig":
        if "carrier_freq" in changes and "antenna_spacing" not in changes:
            # keep half-wavelength spacing tied to the new carrier
            if math.isclose(self.antenna_spacing, self.wavelength / 2):
                changes["antenna_spacing"] = None
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "antenna_count": int(self.antenna_count),
            "subcarrier_count": int(self.subcarrier_count),
            "symbol_duration": float(self.symbol_duration),
            "cp_duration": float(self.cp_duration),
            "packet_interval": float(self.packet_interval),
            "carrier_freq": float(self.carrier_freq),
            "antenna_spacing": float(self.antenna_spacing),
            "packet_count": int(self.packet_count),
            "taylor_window": int(self.taylor_window),
            "snr_db": None if self.snr_db is None else float(self.snr_db),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown SystemConfig keys: {sorted(unknown)}")
        return cls(**data)


def spatial_frequency(theta, d, wavelength):
    """Per-element phase progression ``2π d / λ · sin θ`` of a ULA."""
    if not np.all(np.asarray(wavelength) > 0):
        raise InvalidConfigError(f"wavelength must be positive, got {wavelength!r}")
    return 2 * np.pi * d / wavelength * np.sin(theta)


def steering_vector(phi, n_antennas: int) -> np.ndarray:
    """Array response ``exp(j n φ)`` for ``n = 0..N-1``."""
    if n_antennas < 1:
        raise InvalidConfigError(f"n_antennas must be >= 1, got {n_antennas}")
    return np.exp(1j * phi * np.arange(n_antennas))


@dataclass(frozen=True)
class Path:
    """One propagation path.  Static paths carry ``doppler == 0``."""

    gain: complex
    doppler: float
    delay: float
    aoa: float

    def spatial_freq(self, config: SystemConfig) -> float:
        return float(spatial_frequency(self.aoa, config.antenna_spacing, config.wavelength))

    def to_dict(self) -> dict:
        g = complex(self.gain)
        return {"gain": [g.real, g.imag], "doppler": float(self.doppler),
                "delay": float(self.delay), "aoa": float(self.aoa)}

    @classmethod
    def from_dict(cls, data: dict) -> "Path":
        unknown = set(data) - {"gain", "doppler", "delay", "aoa"}
        if unknown:
            raise InvalidConfigError(f"unknown path keys: {sorted(unknown)}")
        gain = data.get("gain", 1.0)
        if isinstance(gain, (list, tuple)):
            gain = complex(gain[0], gain[1])
        return cls(gain=complex(gain), doppler=float(data.get("doppler", 0.0)),
                   delay=float(data.get("delay", 0.0)), aoa=float(data.get("aoa", 0.0)))


@dataclass(frozen=True)
class PathSet:
    """``L`` dynamic paths followed by ``L_S >= 1`` static ones."""

    dynamic: tuple[Path, ...] = ()
    static_: tuple[Path, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dynamic", tuple(self.dynamic))
        object.__setattr__(self, "static_", tuple(self.static_))
        if len(self.static_) < 1:
            raise InvalidConfigError("at least one static path is required (L_S >= 1)")
        for p in self.static_:
            if p.doppler != 0:
                raise InvalidConfigError(f"static path has nonzero Doppler {p.doppler}")
        for p in self.dynamic:
            if p.doppler == 0:
                raise InvalidConfigError("dynamic path has zero Doppler")
        for p in self.dynamic + self.static_:
            if not -np.pi / 2 <= p.aoa <= np.pi / 2:
                raise InvalidConfigError(f"AoA {p.aoa} outside [-pi/2, pi/2]")
            if not np.isfinite(complex(p.gain)):
                raise InvalidConfigError("path gain must be finite")

    @property
    def n_dynamic(self) -> int:
        return len(self.dynamic)

    @property
    def n_static(self) -> int:
        return len(self.static_)

    def check_delays(self, config: SystemConfig):
        for p in self.dynamic + self.static_:
            if not 0 <= p.delay < config.symbol_duration:
                raise InvalidConfigError(
                    f"path delay {p.delay} outside [0, T={config.symbol_duration})"
                )

    def scaled(self, c: complex) -> "PathSet":
        return PathSet(tuple(replace(p, gain=c * p.gain) for p in self.dynamic),
                       tuple(replace(p, gain=c * p.gain) for p in self.static_))

    def to_dict(self) -> dict:
        return {"dynamic": [p.to_dict() for p in self.dynamic],
                "static": [p.to_dict() for p in self.static_]}

    @classmethod
    def from_dict(cls, data: dict) -> "PathSet":
        unknown = set(data) - {"dynamic", "static"}
        if unknown:
            raise InvalidConfigError(f"unknown path-set keys: {sorted(unknown)}")
        return cls(tuple(Path.from_dict(p) for p in data.get("dynamic", [])),
                   tuple(Path.from_dict(p) for p in data.get("static", [])))


@dataclass(frozen=True)
class OffsetTrace:
    """Per-packet timing offset (s) and carrier-frequency offset (Hz)."""

    timing_offset: np.ndarray
    cfo: np.ndarray

    def __post_init__(self):
        to = np.asarray(self.timing_offset, dtype=float).copy()
        cfo = np.asarray(self.cfo, dtype=float).copy()
        if to.ndim != 1 or to.shape != cfo.shape:
            raise InvalidConfigError("timing_offset and cfo must be 1-D with equal length")
        to.flags.writeable = False
        cfo.flags.writeable = False
        object.__setattr__(self, "timing_offset", to)
        object.__setattr__(self, "cfo", cfo)

    def __len__(self):
        return len(self.timing_offset)

    @classmethod
    def zeros(cls, packet_count: int) -> "OffsetTrace":
        return cls(np.zeros(packet_count), np.zeros(packet_count))

    def factor(self, config: SystemConfig) -> np.ndarray:
        """Unit-modulus offset factor of shape ``(M, G, 1)``."""
        m = np.arange(config.packet_count)[:, None, None]
        g = np.arange(config.subcarrier_count)[None, :, None]
        cfo_phase = 2 * np.pi * m * config.packet_interval * self.cfo[:, None, None]
        to_phase = -2 * np.pi * g / config.symbol_duration * self.timing_offset[:, None, None]
        return np.exp(1j * (cfo_phase + to_phase))


@dataclass(frozen=True)
class OffsetModel:
    """Generative model for offset traces.

    ``kind`` is one of ``"zero"``, ``"iid-uniform"`` or ``"random-walk"``.
    For ``iid-uniform`` every sample is drawn from the bounds; for
    ``random-walk`` the trace starts at zero and each step is uniform in
    ``[-step, step]``.
    """

    kind: str = "zero"
    timing_bounds: tuple[float, float] = (0.0, 0.3e-6)
    cfo_bounds: tuple[float, float] = (-100.0, 100.0)
    timing_step: float = 1e-8
    cfo_step: float = 1.0

    KINDS = ("zero", "iid-uniform", "random-walk")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "timing_bounds": list(self.timing_bounds),
                "cfo_bounds": list(self.cfo_bounds), "timing_step": self.timing_step,
                "cfo_step": self.cfo_step}


def generate_offsets(model: OffsetModel | str, packet_count: int, seed=None) -> OffsetTrace:
    """Draw a TO/CFO trace of length ``packet_count`` (deterministic given ``seed``)."""
    if isinstance(model, str):
        model = OffsetModel(kind=model)
    if model.kind not in OffsetModel.KINDS:
        raise InvalidConfigError(f"unknown offset model {model.kind!r}; expected one of {OffsetModel.KINDS}")
    if packet_count < 1:
        raise InvalidConfigError("packet_count must be >= 1")
    if model.kind == "zero":
        return OffsetTrace.zeros(packet_count)
    rng = np.random.default_rng(seed)
    if model.kind == "iid-uniform":
        lo, hi = model.timing_bounds
        to = rng.uniform(lo, hi, packet_count)
        lo, hi = model.cfo_bounds
        cfo = rng.uniform(lo, hi, packet_count)
        return OffsetTrace(to, cfo)
    to_steps = rng.uniform(-model.timing_step, model.timing_step, packet_count - 1)
    cfo_steps = rng.uniform(-model.cfo_step, model.cfo_step, packet_count - 1)
    to = np.concatenate([[0.0], np.cumsum(to_steps)])
    cfo = np.concatenate([[0.0], np.cumsum(cfo_steps)])
    return OffsetTrace(to, cfo)


@dataclass(frozen=True, eq=False)
class CsiTensor:
    """Received CSI samples indexed ``[m, g, n]`` (packet, subcarrier, antenna)."""

    samples: np.ndarray
    config: SystemConfig = field(repr=False)

    def __post_init__(self):
        y = np.array(self.samples, dtype=np.complex128, copy=True)
        if y.shape != self.config.shape:
            raise InvalidConfigError(
                f"tensor shape {y.shape} does not match config (M, G, N) = {self.config.shape}"
            )
        if not np.all(np.isfinite(y)):
            raise InvalidConfigError("CSI tensor contains non-finite values")
        y.flags.writeable = False
        object.__setattr__(self, "samples", y)

    @property
    def shape(self):
        return self.samples.shape

    def rms(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.samples) ** 2)))

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)


def _path_sum(paths: Sequence[Path], config: SystemConfig, with_doppler: bool) -> np.ndarray:
    M, G, N = config.shape
    m = np.arange(M)[:, None, None]
    g = np.arange(G)[None, :, None]
    n = np.arange(N)[None, None, :]
    out = np.zeros((M if with_doppler else 1, G, N), dtype=np.complex128)
    for p in paths:
        phi = p.spatial_freq(config)
        term = p.gain * np.exp(1j * n * phi) * np.exp(-2j * np.pi * g / config.symbol_duration * p.delay)
        if with_doppler:
            term = term * np.exp(2j * np.pi * m * config.packet_interval * p.doppler)
        out = out + term
    return out


def static_component(paths: PathSet, config: SystemConfig) -> np.ndarray:
    """Offset-free static sum ``S_n[g]`` as a ``(G, N)`` array."""
    return _path_sum(paths.static_, config, with_doppler=False)[0]


def dynamic_component(paths: PathSet, config: SystemConfig) -> np.ndarray:
    """Offset-free dynamic sum ``D_n[m, g]`` as an ``(M, G, N)`` array."""
    if not paths.dynamic:
        return np.zeros(config.shape, dtype=np.complex128)
    return _path_sum(paths.dynamic, config, with_doppler=True)


def synthesize_csi(config: SystemConfig, paths: PathSet, offsets: Optional[OffsetTrace] = None,
                   noise_seed=None) -> CsiTensor:
    """Build the received CSI tensor.

    Noise is circular complex Gaussian with variance equal to the mean
    per-sample noiseless power divided by ``10**(snr_db/10)``.
    """
    paths.check_delays(config)
    if offsets is None:
        offsets = OffsetTrace.zeros(config.packet_count)
    if len(offsets) != config.packet_count:
        raise InvalidConfigError(f"offset trace length {len(offsets)} != M={config.packet_count}")
    clean = (dynamic_component(paths, config) + static_component(paths, config)[None]) * offsets.factor(config)
    if config.snr_db is not None:
        rng = np.random.default_rng(noise_seed)
        sigma2 = np.mean(np.abs(clean) ** 2) / 10 ** (config.snr_db / 10)
        noise = rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
        clean = clean + np.sqrt(sigma2 / 2) * noise
    return CsiTensor(clean, config)


@dataclass(frozen=True)
class ScenarioSpec:
    """Randomization recipe for Monte-Carlo path sets.

    Ranges follow the reference simulation: delays in [0, 0.4] µs, Doppler
    in [-300, 300] Hz, AoA in [-π/2, π/2], equal unit path power.  With
    ``los=True`` the first static path is boosted by ``los_advantage_db``.
    """

    n_dynamic: int = 1
    n_static: int = 5
    los: bool = False
    los_advantage_db: float = 10.0
    delay_range: tuple[float, float] = (0.0, 0.4e-6)
    doppler_range: tuple[float, float] = (-300.0, 300.0)
    min_abs_doppler: float = 0.0
    aoa_range: tuple[float, float] = (-np.pi / 2, np.pi / 2)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def random_paths(spec: ScenarioSpec, rng: np.random.Generator) -> PathSet:
    """Draw a :class:`PathSet` according to ``spec``."""

    def draw(dynamic: bool, power: float = 1.0) -> Path:
        gain = np.sqrt(power) * np.exp(2j * np.pi * rng.uniform())
        delay = rng.uniform(*spec.delay_range)
        aoa = rng.uniform(*spec.aoa_range)
        doppler = 0.0
        if dynamic:
            while True:
                doppler = rng.uniform(*spec.doppler_range)
                if doppler != 0 and abs(doppler) >= spec.min_abs_doppler:
                    break
        return Path(complex(gain), float(doppler), float(delay), float(aoa))

    dynamic = tuple(draw(True) for _ in range(spec.n_dynamic))
    static = []
    for i in range(spec.n_static):
        power = 10 ** (spec.los_advantage_db / 10) if (spec.los and i == 0) else 1.0
        static.append(draw(False, power))
    return PathSet(dynamic, tuple(static))
