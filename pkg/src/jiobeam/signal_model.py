"""Uniform-linear-array scenario model and snapshot generation.

Half-wavelength element spacing is assumed throughout, so element ``m``
of the array response to a plane wave arriving from ``theta`` carries the
phase ``-pi * m * cos(theta)``.  A snapshot is

    r(i) = sum_l sqrt(p_l) * a(theta_l) * s_l(i) + n(i)

with unit-power symbols ``s_l`` and circular complex Gaussian sensor
noise of per-element variance ``sigma2``.  Angles are degrees in all
public interfaces and radians internally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Source:
    """One narrowband far-field source: direction, linear power, SoI flag."""

    theta_deg: float
    power: float = 1.0
    is_soi: bool = False


@dataclass(frozen=True)
class ChangeEvent:
    """Replace the active source list from snapshot ``at_snapshot`` on."""

    at_snapshot: int
    sources: tuple[Source, ...]


@dataclass(frozen=True)
class Scenario:
    """Generative model for one interference scenario.

    ``noise_var`` normally derives from the SoI power and ``snr_db``;
    passing it explicitly overrides that (required when ``sources`` is
    empty, which is permitted for noise-only diagnostics).
    """

    m: int
    sources: tuple[Source, ...]
    snr_db: float = 15.0
    symbol_alphabet: str = "qpsk"
    power_jitter_db: float = 0.0
    change_events: tuple[ChangeEvent, ...] = ()
    seed: int = 0
    noise_var: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "change_events", tuple(self.change_events))
        _validate_scenario(self)

    @property
    def soi_index(self) -> int:
        return next(i for i, s in enumerate(self.sources) if s.is_soi)

    @property
    def soi(self) -> Source:
        return self.sources[self.soi_index]

    @property
    def sigma2(self) -> float:
        """Per-element noise variance."""
        if self.noise_var is not None:
            return float(self.noise_var)
        return self.soi.power / 10.0 ** (self.snr_db / 10.0)

    def sources_at(self, snapshot: int) -> tuple[Source, ...]:
        """Active source list at snapshot index ``snapshot``."""
        active = self.sources
        for ev in self.change_events:
            if ev.at_snapshot <= snapshot:
                active = ev.sources
        return active

    def segments(self, n_snapshots: int) -> list[tuple[int, int, tuple[Source, ...]]]:
        """Stationary stretches ``(start, stop, sources)`` covering ``[0, n)``."""
        bounds = [0] + [ev.at_snapshot for ev in self.change_events if ev.at_snapshot < n_snapshots]
        bounds.append(n_snapshots)
        out = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi > lo:
                out.append((lo, hi, self.sources_at(lo)))
        return out


@dataclass(frozen=True)
class Snapshot:
    """One array output sample: received vector, SoI symbol, time index."""

    r: np.ndarray
    d: complex
    index: int


_ALPHABETS = ("qpsk", "complex-gaussian")


def _validate_sources(sources: tuple[Source, ...], where: str, allow_empty: bool = False) -> None:
    if not sources:
        if allow_empty:
            return
        raise ConfigError(f"{where}: at least one source required")
    n_soi = sum(1 for s in sources if s.is_soi)
    if n_soi != 1:
        raise ConfigError(f"{where}: exactly one SoI required, found {n_soi}")
    for i, s in enumerate(sources):
        if not 0.0 < s.theta_deg < 180.0:
            raise ConfigError(f"{where}[{i}].theta_deg: must lie in (0, 180), got {s.theta_deg}")
        if not s.power > 0.0:
            raise ConfigError(f"{where}[{i}].power: must be > 0, got {s.power}")


def _validate_scenario(sc: Scenario) -> None:
    if sc.m < 2:
        raise ConfigError(f"m: element count must be >= 2, got {sc.m}")
    _validate_sources(sc.sources, "sources", allow_empty=sc.noise_var is not None)
    if len(sc.sources) >= sc.m:
        raise ConfigError(f"sources: source count {len(sc.sources)} must be < m = {sc.m}")
    if sc.symbol_alphabet not in _ALPHABETS:
        raise ConfigError(f"symbol_alphabet: expected one of {_ALPHABETS}, got {sc.symbol_alphabet!r}")
    if sc.power_jitter_db < 0.0:
        raise ConfigError(f"power_jitter_db: must be >= 0, got {sc.power_jitter_db}")
    if sc.noise_var is not None and sc.noise_var < 0.0:
        raise ConfigError(f"noise_var: must be >= 0, got {sc.noise_var}")
    prev = -1
    for j, ev in enumerate(sc.change_events):
        if ev.at_snapshot <= prev:
            raise ConfigError(f"change_events[{j}].at_snapshot: must be strictly increasing")
        prev = ev.at_snapshot
        _validate_sources(ev.sources, f"change_events[{j}].sources")
        if len(ev.sources) >= sc.m:
            raise ConfigError(f"change_events[{j}].sources: count must be < m = {sc.m}")


def steering_vector(theta_deg: float, m: int) -> np.ndarray:
    """Array response for a plane wave from ``theta_deg`` on ``m`` elements.

    Element 0 equals exactly 1+0j; all elements have unit modulus.
    """
    if m < 1:
        raise ConfigError(f"m: must be >= 1, got {m}")
    if not 0.0 <= theta_deg <= 180.0:
        raise ConfigError(f"theta_deg: must lie in [0, 180], got {theta_deg}")
    phase = -np.pi * np.arange(m) * np.cos(np.deg2rad(theta_deg))
    return np.exp(1j * phase)


def array_matrix(sources: tuple[Source, ...], m: int) -> np.ndarray:
    """Stack steering vectors of ``sources`` into an (m, K) matrix."""
    if not sources:
        return np.zeros((m, 0), dtype=complex)
    return np.stack([steering_vector(s.theta_deg, m) for s in sources], axis=1)


def true_covariance(scenario: Scenario, at_snapshot: int = 0) -> np.ndarray:
    """Exact snapshot covariance sum_l p_l a_l a_l^H + sigma2 I (nominal powers)."""
    sources = scenario.sources_at(at_snapshot)
    a = array_matrix(sources, scenario.m)
    p = np.array([s.power for s in sources])
    r = (a * p) @ a.conj().T if sources else np.zeros((scenario.m, scenario.m), dtype=complex)
    return r + scenario.sigma2 * np.eye(scenario.m)


def signal_covariance(scenario: Scenario, at_snapshot: int = 0) -> np.ndarray:
    """Rank-one covariance of the SoI component, p_soi a a^H."""
    sources = scenario.sources_at(at_snapshot)
    soi = next(s for s in sources if s.is_soi)
    a = steering_vector(soi.theta_deg, scenario.m)
    return soi.power * np.outer(a, a.conj())


def interference_covariance(scenario: Scenario, at_snapshot: int = 0) -> np.ndarray:
    """Covariance of everything except the SoI: interferers plus noise."""
    sources = tuple(s for s in scenario.sources_at(at_snapshot) if not s.is_soi)
    a = array_matrix(sources, scenario.m)
    p = np.array([s.power for s in sources])
    r = (a * p) @ a.conj().T if sources else np.zeros((scenario.m, scenario.m), dtype=complex)
    return r + scenario.sigma2 * np.eye(scenario.m)


def soi_steering(scenario: Scenario) -> np.ndarray:
    """Steering vector of the SoI (shared by every change event)."""
    return steering_vector(scenario.soi.theta_deg, scenario.m)


# ---------------------------------------------------------------------------
# Randomness.  Each (master seed, trial) pair owns an independent stream; the
# draw order below is the canonical one that makes streams reproducible:
#   1. per-trial power jitters (non-SoI sources; initial list, then each
#      change event's list, in order) -- skipped entirely when jitter is 0,
#   2. per stationary segment: the symbol block, then the noise block.
# ---------------------------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo trial."""
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(trial))))


def _complex_normal(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    x = rng.standard_normal(shape + (2,))
    return (x[..., 0] + 1j * x[..., 1]) / np.sqrt(2.0)


def _symbol_block(rng: np.random.Generator, alphabet: str, shape: tuple) -> np.ndarray:
    if alphabet == "qpsk":
        k = rng.integers(0, 4, size=shape)
        return np.exp(1j * (np.pi / 4.0 + k * np.pi / 2.0))
    return _complex_normal(rng, shape)


def _jittered_powers(scenario: Scenario, sources: tuple[Source, ...],
                     rng: np.random.Generator) -> np.ndarray:
    p = np.array([s.power for s in sources])
    if scenario.power_jitter_db > 0.0:
        for i, s in enumerate(sources):
            if not s.is_soi:
                p[i] *= 10.0 ** (rng.normal(0.0, scenario.power_jitter_db) / 10.0)
    return p


def trial_snapshots(scenario: Scenario, seed: int, trial: int,
                    n_snapshots: int) -> tuple[np.ndarray, np.ndarray]:
    """Materialize one trial's snapshot stream.

    Returns ``(r, d)`` with ``r`` of shape (n_snapshots, m) and ``d`` the
    SoI symbol per snapshot.  Bit-identical for identical
    ``(seed, trial)`` regardless of how the caller consumes the stream.
    """
    rng = trial_rng(seed, trial)
    segs = scenario.segments(n_snapshots)
    powers = {}
    if scenario.power_jitter_db > 0.0:
        powers[0] = _jittered_powers(scenario, scenario.sources, rng)
        for ev in scenario.change_events:
            powers[ev.at_snapshot] = _jittered_powers(scenario, ev.sources, rng)
    r = np.empty((n_snapshots, scenario.m), dtype=complex)
    d = np.empty(n_snapshots, dtype=complex)
    for lo, hi, sources in segs:
        length = hi - lo
        k = len(sources)
        sym = _symbol_block(rng, scenario.symbol_alphabet, (length, k))
        noise = _complex_normal(rng, (length, scenario.m)) * np.sqrt(scenario.sigma2)
        p = powers.get(lo, np.array([s.power for s in sources]))
        if k:
            a = array_matrix(sources, scenario.m)
            scaled = sym * np.sqrt(p)
            r[lo:hi] = scaled @ a.T + noise
            soi_col = next(i for i, s in enumerate(sources) if s.is_soi)
            d[lo:hi] = scaled[:, soi_col]
        else:
            r[lo:hi] = noise
            d[lo:hi] = 0.0
    return r, d


class TrialStream:
    """Deterministic per-trial snapshot stream, materialized once."""

    def __init__(self, scenario: Scenario, seed: int, trial: int, n_snapshots: int):
        self.scenario = scenario
        self.r, self.d = trial_snapshots(scenario, seed, trial, n_snapshots)

    def snapshot(self, i: int) -> Snapshot:
        return Snapshot(r=self.r[i], d=complex(self.d[i]), index=i)


def generate_snapshot(scenario: Scenario, stream: TrialStream, i: int) -> Snapshot:
    """Snapshot ``i`` of a trial stream (see :class:`TrialStream`)."""
    return stream.snapshot(i)


# ---------------------------------------------------------------------------
# JSON configuration.  Powers in the file are dB relative to the SoI, which
# is pinned at unit linear power; angles are degrees.
# ---------------------------------------------------------------------------


def _source_from_dict(d: dict, where: str) -> Source:
    if "theta_deg" not in d:
        raise ConfigError(f"{where}.theta_deg: missing")
    power = 10.0 ** (float(d.get("power_db", 0.0)) / 10.0)
    return Source(theta_deg=float(d["theta_deg"]), power=power,
                  is_soi=bool(d.get("is_soi", False)))


def scenario_from_dict(cfg: dict) -> Scenario:
    """Build a Scenario from a parsed JSON object."""
    if "m" not in cfg:
        raise ConfigError("m: missing")
    if "sources" not in cfg:
        raise ConfigError("sources: missing")
    sources = tuple(_source_from_dict(s, f"sources[{i}]") for i, s in enumerate(cfg["sources"]))
    events = []
    for j, ev in enumerate(cfg.get("change_events", [])):
        if "at_snapshot" not in ev:
            raise ConfigError(f"change_events[{j}].at_snapshot: missing")
        ev_sources = tuple(
            _source_from_dict(s, f"change_events[{j}].sources[{i}]")
            for i, s in enumerate(ev.get("sources", []))
        )
        events.append(ChangeEvent(at_snapshot=int(ev["at_snapshot"]), sources=ev_sources))
    return Scenario(
        m=int(cfg["m"]),
        sources=sources,
        snr_db=float(cfg.get("snr_db", 15.0)),
        symbol_alphabet=cfg.get("symbol_alphabet", "qpsk"),
        power_jitter_db=float(cfg.get("power_jitter_db", 0.0)),
        change_events=tuple(events),
        seed=int(cfg.get("seed", 0)),
    )


def scenario_from_json(path: str | Path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))
