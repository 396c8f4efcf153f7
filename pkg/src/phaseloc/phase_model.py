"""Geometry and the deterministic wrapped-phase forward model.

A passive backscatter tag is read over a round-trip channel, so the
baseband phase advances by 4*pi*d/lambda for a one-way distance d, plus a
per-tag offset phi0 (transceiver circuits + tag reflection) that is
constant along a trajectory but unknown in advance.  Readers report the
phase modulo 2*pi, wrapped into [0, 2*pi).

Everything in this module is pure and thread-safe; the domain types are
immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact SI value
TWO_PI = 2.0 * math.pi


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Position3D:
    """A point in meters. X is normal to the rack plane, Y runs along the
    antenna track, Z is altitude."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        _require_finite("coordinate", self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class CarrierConfig:
    """Carrier frequency in Hz; wavelength is derived as c/f."""

    frequency: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.frequency) and self.frequency > 0):
            raise ValueError(f"carrier frequency must be positive, got {self.frequency!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency


@dataclass(frozen=True)
class PhaseSample:
    """One tag read: where the antenna was, and the wrapped phase it saw.

    phase_wrapped lies in [0, 2*pi).  sample_index is the ordinal of the
    read within one (tag, acquisition run) and must match trajectory
    order.  sigma_hint, when present, is the phase noise STD in radians
    the producer believes applies to this read.
    """

    antenna_pose: Position3D
    carrier: CarrierConfig
    phase_wrapped: float
    sample_index: int
    tag_id: str = ""
    sigma_hint: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.phase_wrapped < TWO_PI):
            raise ValueError(
                f"phase_wrapped must lie in [0, 2*pi), got {self.phase_wrapped!r}"
            )
        if self.sigma_hint is not None and not (self.sigma_hint >= 0.0):
            raise ValueError(f"sigma_hint must be >= 0, got {self.sigma_hint!r}")


def distance(ant: Position3D, tag: Position3D) -> float:
    """Euclidean distance in meters between antenna and tag."""
    return math.sqrt(
        (ant.x - tag.x) ** 2 + (ant.y - tag.y) ** 2 + (ant.z - tag.z) ** 2
    )


def wrap_2pi(angle):
    """Wrap an angle (scalar or ndarray) into [0, 2*pi).

    Idempotent; values within one ulp of a period boundary come back as
    exactly 0.0, never 2*pi.
    """
    wrapped = np.fmod(angle, TWO_PI)
    wrapped = np.where(wrapped < 0.0, wrapped + TWO_PI, wrapped)
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    if np.isscalar(angle) or np.ndim(angle) == 0:
        return float(wrapped)
    return wrapped


def wrap_pm_pi(angle):
    """Wrap an angle (scalar or ndarray) into (-pi, pi]."""
    wrapped = math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), TWO_PI)
    if np.isscalar(angle) or np.ndim(angle) == 0:
        return float(wrapped)
    return wrapped


def predict_phase_unwrapped(
    ant: Position3D, tag: Position3D, carrier: CarrierConfig, phi0: float = 0.0
) -> float:
    """Round-trip phase 4*pi*d/lambda + phi0, before wrapping."""
    return 4.0 * math.pi * distance(ant, tag) / carrier.wavelength + phi0


def predict_phase(
    ant: Position3D, tag: Position3D, carrier: CarrierConfig, phi0: float = 0.0
) -> float:
    """Noise-free wrapped phase a reader at ``ant`` would report for ``tag``.

    Sign convention is +4*pi*d/lambda; readers that report the conjugate
    convention are handled by a sign-flip option at ingestion time, not
    here.
    """
    return wrap_2pi(predict_phase_unwrapped(ant, tag, carrier, phi0))


def poses_to_array(poses) -> np.ndarray:
    """Stack an iterable of Position3D into an (N, 3) float array."""
    return np.array([[p.x, p.y, p.z] for p in poses], dtype=float)


def squared_norm_rows(delta: np.ndarray) -> np.ndarray:
    """Row-wise |delta|^2 over the last axis of an (..., 3) array, summed
    in the same (x, then y, then z) order as the scalar ``distance`` so
    vectorized and scalar paths agree bit-for-bit."""
    return delta[..., 0] ** 2 + delta[..., 1] ** 2 + delta[..., 2] ** 2


def distances_to_point(poses_xyz: np.ndarray, point: Position3D) -> np.ndarray:
    """Distances from each row of an (N, 3) pose array to one point."""
    delta = np.asarray(poses_xyz, dtype=float) - point.as_array()
    return np.sqrt(squared_norm_rows(delta))
