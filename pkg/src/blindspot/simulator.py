"""Monte Carlo estimation of blind-spot probabilities and cell areas.

Trial ``i`` draws everything from stream ``(master_seed, i)``: obstacle feet
first, then anchors (or probe points). The draws do not depend on the
obstacle length, so sweeping ``L`` with one seed uses common random numbers
and the per-trial blind-spot indicator is monotone in ``L``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import analytic
from .config import ScenarioConfig
from .geom import _shoelace, cell_from_feet, crossing_offsets, reaches_line, visible_from_origin
from .stochproc import (
    RngLike,
    as_generator,
    sample_disk_points,
    sample_feet,
    stream_generators,
    uniform_disk,
)

BATCH = 256
DEFAULT_PROBES = 4096
CELL_CONTAINMENT_FAILURE = 1e-10

MC_METHODS = ("mc", "mc_independent_segments")
METHODS = ("mc", "analytic_asymptotic", "analytic_independent", "mc_independent_segments")


@dataclass(frozen=True)
class EstimateResult:
    value: float
    stderr: float
    n_trials: int
    master_seed: int

    def ci95(self) -> tuple[float, float]:
        half = 1.959963984540054 * self.stderr
        return self.value - half, self.value + half


@dataclass(frozen=True)
class CellAreaSample:
    areas: np.ndarray
    n_discarded: int

    @property
    def discard_fraction(self) -> float:
        total = len(self.areas) + self.n_discarded
        return self.n_discarded / total if total else 0.0


@dataclass(frozen=True)
class SweepRow:
    method: str
    lam: float
    lam0: float
    L: float
    R: float
    k_min: int
    value: float
    stderr: float | None = None
    n_trials: int | None = None
    seed: int | None = None


def _half_lengths(lengths: Sequence[float]) -> list[float]:
    out = []
    for L in lengths:
        if not L > 0:
            raise ValueError(f"obstacle length must be > 0, got {L}")
        out.append(L / 2.0)
    return out


def _parallel(worker: Callable, n: int, threads: int, args: tuple) -> list:
    """Run ``worker(start, stop, *args)`` over contiguous index blocks, in order."""
    threads = max(1, min(int(threads), n))
    bounds = np.linspace(0, n, threads + 1).astype(int)
    blocks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
    if threads == 1:
        return [worker(a, b, *args) for a, b in blocks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, a, b, *args) for a, b in blocks]
        return [f.result() for f in futures]


def simulate_blindspot_trial(config: ScenarioConfig, rng: RngLike) -> bool:
    """One realisation: True when fewer than ``k_min`` anchors see the origin."""
    g = as_generator(rng)
    r, phi = sample_feet(config.lam0, config.R, g)
    anchors = sample_disk_points(config.lam, config.R, g)
    visible = visible_from_origin(anchors, r, phi, config.L / 2.0)
    return int(visible.sum()) < config.k_min


def _indicator_block(start, stop, config: ScenarioConfig, halves, master_seed):
    out = np.empty((stop - start, len(halves)), dtype=bool)
    for b0 in range(start, stop, BATCH):
        b1 = min(b0 + BATCH, stop)
        feet, anchors = [], []
        for g in stream_generators(master_seed, range(b0, b1)):
            feet.append(sample_feet(config.lam0, config.R, g))
            anchors.append(sample_disk_points(config.lam, config.R, g))
        nb = b1 - b0
        m = max((len(r) for r, _ in feet), default=0)
        r_pad = np.full((nb, max(m, 1)), np.inf)
        phi_pad = np.zeros_like(r_pad)
        for i, (r, phi) in enumerate(feet):
            r_pad[i, : len(r)] = r
            phi_pad[i, : len(phi)] = phi
        cos_pad, sin_pad = np.cos(phi_pad), np.sin(phi_pad)
        counts = np.array([len(a) for a in anchors])
        pts = np.concatenate(anchors) if counts.sum() else np.zeros((0, 2))
        tid = np.repeat(np.arange(nb), counts)
        x, y = pts[:, :1], pts[:, 1:]
        geo = (x, y, r_pad[tid], cos_pad[tid], sin_pad[tid])
        hits = reaches_line(*geo)
        off = np.abs(crossing_offsets(*geo)) if any(math.isfinite(h) for h in halves) else None
        for j, h in enumerate(halves):
            blocked = hits if math.isinf(h) else off <= h
            n_vis = np.bincount(tid, weights=~blocked.any(axis=1), minlength=nb)
            out[b0 - start : b1 - start, j] = n_vis < config.k_min
    return out


def blindspot_indicators(
    config: ScenarioConfig,
    lengths: Sequence[float],
    n_trials: int,
    master_seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Per-trial blind-spot indicators, shape ``(n_trials, len(lengths))``.

    Column ``j`` equals ``simulate_blindspot_trial`` with ``L = lengths[j]``
    on stream ``(master_seed, i)`` for row ``i``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    halves = _half_lengths(lengths)
    parts = _parallel(_indicator_block, n_trials, threads, (config, halves, master_seed))
    return np.concatenate(parts)


def _bernoulli_estimate(hits: np.ndarray, master_seed: int) -> EstimateResult:
    n = len(hits)
    p = float(np.count_nonzero(hits)) / n
    return EstimateResult(p, math.sqrt(p * (1.0 - p) / n), n, master_seed)


def estimate_blindspot_lengths(
    config: ScenarioConfig,
    lengths: Sequence[float],
    n_trials: int,
    master_seed: int,
    threads: int = 1,
) -> list[EstimateResult]:
    ind = blindspot_indicators(config, lengths, n_trials, master_seed, threads)
    return [_bernoulli_estimate(ind[:, j], master_seed) for j in range(ind.shape[1])]


def estimate_blindspot(
    config: ScenarioConfig, n_trials: int, master_seed: int, threads: int = 1
) -> EstimateResult:
    return estimate_blindspot_lengths(config, [config.L], n_trials, master_seed, threads)[0]


def cell_window_halfwidth(lam0: float) -> float:
    """Window half-width at which a ray from the origin escapes with prob. 1e-10."""
    return math.sqrt(-4.0 * math.log(CELL_CONTAINMENT_FAILURE) / (math.pi * lam0))


def _cell_block(start, stop, lam0, master_seed):
    w = cell_window_halfwidth(lam0)
    radius = math.sqrt(2.0) * w
    areas = np.full(stop - start, np.nan)
    for i, g in enumerate(stream_generators(master_seed, range(start, stop))):
        r, phi = sample_feet(lam0, radius, g)
        coords, truncated = cell_from_feet(r, phi, w)
        if not truncated:
            areas[i] = _shoelace(coords)
    return areas


def sample_cell_areas(
    lam0: float, n_samples: int, master_seed: int, threads: int = 1
) -> CellAreaSample:
    """Areas of the cell around the origin in ``n_samples`` independent line processes.

    Realisations whose cell reaches the square window are discarded and counted.
    """
    if not lam0 > 0:
        raise ValueError(f"lam0 must be > 0, got {lam0}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    areas = np.concatenate(_parallel(_cell_block, n_samples, threads, (lam0, master_seed)))
    keep = ~np.isnan(areas)
    return CellAreaSample(areas[keep], int((~keep).sum()))


def _visible_fraction_block(start, stop, lam0, halves, R, n_probe, master_seed):
    out = np.empty((stop - start, len(halves)))
    for i, g in enumerate(stream_generators(master_seed, range(start, stop))):
        r, phi = sample_feet(lam0, R, g)
        probes = uniform_disk(n_probe, R, g)
        if len(r) == 0:
            out[i] = 1.0
            continue
        geo = (probes[:, :1], probes[:, 1:], r[None, :], np.cos(phi)[None, :], np.sin(phi)[None, :])
        hits = reaches_line(*geo)
        off = np.abs(crossing_offsets(*geo)) if any(math.isfinite(h) for h in halves) else None
        for j, h in enumerate(halves):
            blocked = hits if math.isinf(h) else off <= h
            out[i, j] = np.count_nonzero(~blocked.any(axis=1)) / n_probe
    return out


def estimate_mean_unshadowed_area_lengths(
    lam0: float,
    lengths: Sequence[float],
    R: float,
    n_obstacle_draws: int,
    n_probe_points: int = DEFAULT_PROBES,
    master_seed: int = 0,
    threads: int = 1,
) -> list[EstimateResult]:
    """Mean visible area inside the disk for several obstacle lengths at once.

    Obstacle draws and probe points are shared across lengths.
    """
    if n_obstacle_draws < 1 or n_probe_points < 1:
        raise ValueError("n_obstacle_draws and n_probe_points must be >= 1")
    if lam0 < 0 or not R > 0:
        raise ValueError("need lam0 >= 0 and R > 0")
    halves = _half_lengths(lengths)
    frac = np.concatenate(
        _parallel(
            _visible_fraction_block,
            n_obstacle_draws,
            threads,
            (lam0, halves, R, n_probe_points, master_seed),
        )
    )
    disk = math.pi * R * R
    results = []
    n = frac.shape[0]
    for j in range(len(halves)):
        col = frac[:, j]
        mean = math.fsum(col) / n
        sd = float(np.std(col, ddof=1)) if n > 1 else 0.0
        results.append(EstimateResult(disk * mean, disk * sd / math.sqrt(n), n, master_seed))
    return results


def estimate_mean_unshadowed_area(
    lam0: float,
    L: float,
    R: float,
    n_obstacle_draws: int,
    n_probe_points: int = DEFAULT_PROBES,
    master_seed: int = 0,
    threads: int = 1,
) -> EstimateResult:
    return estimate_mean_unshadowed_area_lengths(
        lam0, [L], R, n_obstacle_draws, n_probe_points, master_seed, threads
    )[0]


def _independent_from_area(cfg: ScenarioConfig, area: EstimateResult) -> tuple[float, float]:
    value = analytic.independent_blindspot_segments(
        cfg.lam, cfg.lam0, cfg.L, cfg.R, cfg.k_min, mean_Bv=min(area.value, math.pi * cfg.R**2)
    )
    # delta method: d/dm P(Poisson(m) <= k-1) = -pmf(k-1; m)
    m = cfg.lam * area.value
    k = cfg.k_min - 1
    pmf = math.exp(k * math.log(m) - m - math.lgamma(k + 1)) if m > 0 else float(k == 0)
    return value, cfg.lam * pmf * area.stderr


def run_sweep(
    base_config: ScenarioConfig,
    sweep_variable: str,
    values: Sequence[float],
    methods: Sequence[str],
    n_trials: int,
    master_seed: int,
    threads: int = 1,
    area_draws: int = 1000,
    n_probe_points: int = DEFAULT_PROBES,
) -> list[SweepRow]:
    """Evaluate each method at each sweep value; rows ordered by value, then method.

    Monte Carlo methods reuse ``master_seed`` at every value, so an ``L``
    sweep shares obstacles and anchors across lengths.
    """
    if sweep_variable not in ("lambda", "L"):
        raise ValueError(f"sweep variable must be 'lambda' or 'L', got {sweep_variable!r}")
    values = [float(v) for v in values]
    if not values:
        raise ValueError("no sweep values given")
    methods = list(methods)
    if not methods:
        raise ValueError("no methods given")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s): {', '.join(unknown)}")

    field = "lam" if sweep_variable == "lambda" else "L"
    configs = [replace(base_config, **{field: v}) for v in values]

    mc: dict[int, EstimateResult] = {}
    areas: dict[float, EstimateResult] = {}
    if "mc" in methods:
        if sweep_variable == "L":
            ests = estimate_blindspot_lengths(base_config, values, n_trials, master_seed, threads)
            mc = dict(enumerate(ests))
        else:
            mc = {
                i: estimate_blindspot(cfg, n_trials, master_seed, threads)
                for i, cfg in enumerate(configs)
            }
    if "mc_independent_segments" in methods:
        lengths = sorted({cfg.L for cfg in configs})
        ests = estimate_mean_unshadowed_area_lengths(
            base_config.lam0, lengths, base_config.R, area_draws, n_probe_points,
            master_seed, threads,
        )
        areas = dict(zip(lengths, ests))

    rows = []
    for i, cfg in enumerate(configs):
        base = dict(lam=cfg.lam, lam0=cfg.lam0, L=cfg.L, R=cfg.R, k_min=cfg.k_min)
        for method in methods:
            if method == "mc":
                est = mc[i]
                rows.append(SweepRow(method, **base, value=est.value, stderr=est.stderr,
                                     n_trials=est.n_trials, seed=master_seed))
            elif method == "analytic_asymptotic":
                value = analytic.asymptotic_blindspot(cfg.lam, cfg.lam0, cfg.k_min)
                rows.append(SweepRow(method, **base, value=value))
            elif method == "analytic_independent":
                value = analytic.independent_blindspot_lines(cfg.lam, cfg.lam0, cfg.R, cfg.k_min)
                rows.append(SweepRow(method, **base, value=value))
            else:
                area = areas[cfg.L]
                value, stderr = _independent_from_area(cfg, area)
                rows.append(SweepRow(method, **base, value=value, stderr=stderr,
                                     n_trials=area.n_trials, seed=master_seed))
    return rows
