"""Seeded sampling of anchor points and obstacle foot points on a disk.

Every random draw comes from an :class:`RngStream`, a Philox counter-based
generator keyed by ``(master_seed, stream_index)``. Monte Carlo trial ``i``
uses stream ``i``, so results do not depend on how trials are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

from .geom import FootPoint, ObstacleLine, ObstacleSegment, Point2, geo_tolerance

_UINT64 = 1 << 64


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not 0 <= int(v) < _UINT64:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {v}")

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed, self.stream_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def stream_generators(master_seed: int, indices: Iterable[int]) -> Iterator[np.random.Generator]:
    """Yield the generator of each stream in ``indices``.

    Equivalent to ``RngStream(master_seed, i).generator()`` for each ``i`` but
    re-keys a single bit generator in place, so each yielded generator is only
    valid until the next one is requested.
    """
    RngStream(master_seed, 0)  # validates the seed
    bitgen = np.random.Philox(key=0)
    gen = np.random.Generator(bitgen)
    state = bitgen.state
    for i in indices:
        state["state"]["key"] = np.array([master_seed, i], dtype=np.uint64)
        state["state"]["counter"] = np.zeros(4, dtype=np.uint64)
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        bitgen.state = state
        yield gen


def _check_intensity(intensity: float, name: str = "intensity") -> float:
    intensity = float(intensity)
    if not intensity >= 0 or not math.isfinite(intensity):
        raise ValueError(f"{name} must be finite and >= 0, got {intensity}")
    return intensity


def uniform_disk(n: int, radius: float, rng: RngLike) -> np.ndarray:
    """``n`` i.i.d. uniform points on the disk, as an ``(n, 2)`` array."""
    u = as_generator(rng).random((2, n))
    rho = radius * np.sqrt(u[0])
    theta = 2.0 * math.pi * u[1]
    out = np.empty((n, 2))
    np.multiply(rho, np.cos(theta), out=out[:, 0])
    np.multiply(rho, np.sin(theta), out=out[:, 1])
    return out


def sample_disk_points(intensity: float, radius: float, rng: RngLike) -> np.ndarray:
    """Homogeneous PPP on the disk of ``radius`` about the origin, as an ``(N, 2)`` array."""
    intensity = _check_intensity(intensity)
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    g = as_generator(rng)
    n = int(g.poisson(intensity * math.pi * radius * radius))
    return uniform_disk(n, radius, g)


def sample_ppp_disk(intensity: float, radius: float, rng: RngLike) -> list[Point2]:
    return [Point2(float(x), float(y)) for x, y in sample_disk_points(intensity, radius, rng)]


def sample_feet(lambda0: float, radius: float, rng: RngLike) -> tuple[np.ndarray, np.ndarray]:
    """Foot points ``(r, phi)`` of a PPP of intensity ``lambda0`` on the disk.

    Feet closer to the origin than the geometric tolerance are redrawn, so no
    sampled line passes through the origin.
    """
    lambda0 = _check_intensity(lambda0, "lambda0")
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    g = as_generator(rng)
    n = int(g.poisson(lambda0 * math.pi * radius * radius))
    u, v = g.random((2, n))
    phi = 2.0 * math.pi * v
    u_min = (geo_tolerance(radius) / radius) ** 2
    bad = u <= u_min
    while bad.any():
        u[bad] = g.random(int(bad.sum()))
        bad = u <= u_min
    return radius * np.sqrt(u), phi


def sample_obstacle_lines(lambda0: float, radius: float, rng: RngLike) -> list[ObstacleLine]:
    r, phi = sample_feet(lambda0, radius, rng)
    return [ObstacleLine(FootPoint(float(a), float(b))) for a, b in zip(r, phi)]


def sample_obstacle_segments(
    lambda0: float, L: float, radius: float, rng: RngLike
) -> list[ObstacleSegment] | list[ObstacleLine]:
    """Obstacles of length ``L`` centred on their feet; ``L = inf`` gives whole lines."""
    if not L > 0:
        raise ValueError(f"obstacle length must be > 0, got {L}")
    if math.isinf(L):
        return sample_obstacle_lines(lambda0, radius, rng)
    r, phi = sample_feet(lambda0, radius, rng)
    return [ObstacleSegment(FootPoint(float(a), float(b)), L / 2.0) for a, b in zip(r, phi)]
