"""Cross-cutting Monte Carlo oracle.

Simulates block-fading trajectories, applies any harvested-power model
per block, and estimates the quantities the analytic modules compute in
closed form: mean harvested energy, the accumulated-power histogram,
first-passage charging times, and the RFID joint-event frequency.

Trials are processed in fixed-size chunks, each driven by its own
counter-derived Philox stream and reduced in chunk order, so a run is
bit-reproducible for a given plan and seed and unchanged by running
chunks in parallel.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import FadingChannel, LinkBudget, chunk_rng, gamma_variates
from .errors import ValidationError


@dataclass(frozen=True)
class SimulationPlan:
    """One Monte Carlo experiment: trials x blocks of IID fading draws
    pushed through a harvested-power model."""

    trials: int
    blocks_per_trial: int
    seed: int
    model: Callable
    link: LinkBudget
    channel: FadingChannel
    chunk_size: int = 1 << 17
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1 or self.blocks_per_trial < 1:
            raise ValidationError("trials and blocks_per_trial must be at least 1")
        if self.chunk_size < 1 or self.workers < 1:
            raise ValidationError("chunk_size and workers must be at least 1")


@dataclass(frozen=True)
class HistogramResult:
    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    def masses(self) -> np.ndarray:
        return self.counts / self.total


@dataclass(frozen=True)
class EnergyEstimate:
    mean_energy_mws: float
    std_error: float
    trials: int


@dataclass(frozen=True)
class FirstPassageSamples:
    """Per-trial first crossing block; censored trials ran out of blocks
    before crossing and their value is a lower bound."""

    blocks: np.ndarray
    censored: np.ndarray

    def mean_blocks(self) -> float:
        if self.censored.any():
            raise ValidationError("censored trials present; increase blocks_per_trial")
        return float(np.mean(self.blocks))


@dataclass(frozen=True)
class EventFrequency:
    frequency: float
    std_error: float
    trials: int


def _chunk_bounds(total: int, chunk_size: int):
    return [(index, start, min(start + chunk_size, total))
            for index, start in enumerate(range(0, total, chunk_size))]


def _map_chunks(plan: SimulationPlan, worker):
    """Run ``worker(index, start, stop)`` over all chunks, returning the
    results in chunk order regardless of scheduling."""
    bounds = _chunk_bounds(plan.trials, plan.chunk_size)
    if plan.workers == 1 or len(bounds) == 1:
        return [worker(*b) for b in bounds]
    with ThreadPoolExecutor(max_workers=plan.workers) as pool:
        futures = [pool.submit(worker, *b) for b in bounds]
        return [f.result() for f in futures]


def _harvested_matrix(plan: SimulationPlan, rng, n_trials: int) -> np.ndarray:
    """(trials, blocks) matrix of per-block harvested power."""
    gain_scale = plan.channel.omega / plan.channel.nakagami_m
    draws = gamma_variates(rng, plan.channel.nakagami_m,
                           n_trials * plan.blocks_per_trial) * gain_scale
    received = plan.link.power_scale_mw * draws
    return np.asarray(plan.model(received), dtype=float).reshape(n_trials,
                                                                 plan.blocks_per_trial)


def simulate_energy(plan: SimulationPlan, packet_duration_s: float) -> EnergyEstimate:
    """Mean and standard error of the harvested energy T_p * sum_n
    p(P_R^(n)) over the plan's trials, in mW*s."""

    def worker(index, start, stop):
        harvested = _harvested_matrix(plan, chunk_rng(plan.seed, index), stop - start)
        energy = packet_duration_s * harvested.sum(axis=1)
        return float(energy.sum()), float(np.dot(energy, energy))

    partials = _map_chunks(plan, worker)
    total = math.fsum(p[0] for p in partials)
    total_sq = math.fsum(p[1] for p in partials)
    mean = total / plan.trials
    variance = max(total_sq / plan.trials - mean * mean, 0.0)
    return EnergyEstimate(mean_energy_mws=mean,
                          std_error=math.sqrt(variance / plan.trials),
                          trials=plan.trials)


def simulate_u_n(plan: SimulationPlan, bin_edges: np.ndarray) -> HistogramResult:
    """Histogram of the accumulated harvested power after
    ``blocks_per_trial`` blocks, over the given bin edges."""
    edges = np.asarray(bin_edges, dtype=float)

    def worker(index, start, stop):
        harvested = _harvested_matrix(plan, chunk_rng(plan.seed, index), stop - start)
        counts, _ = np.histogram(harvested.sum(axis=1), bins=edges)
        return counts

    counts = sum(_map_chunks(plan, worker))
    return HistogramResult(bin_edges=edges, counts=counts, total=plan.trials)


def simulate_first_passage(plan: SimulationPlan, theta_mw: float) -> FirstPassageSamples:
    """Per trial, the first block at which the accumulated harvested
    power exceeds ``theta_mw``; trials that never cross within
    ``blocks_per_trial`` blocks are flagged censored."""
    if theta_mw <= 0.0:
        raise ValidationError("threshold must be positive")
    gain_scale = plan.channel.omega / plan.channel.nakagami_m

    def worker(index, start, stop):
        rng = chunk_rng(plan.seed, index)
        n = stop - start
        crossing = np.zeros(n, dtype=np.int64)
        accumulated = np.zeros(n)
        active = np.arange(n)
        for block in range(1, plan.blocks_per_trial + 1):
            draws = gamma_variates(rng, plan.channel.nakagami_m, active.size) * gain_scale
            harvested = np.asarray(plan.model(plan.link.power_scale_mw * draws), dtype=float)
            accumulated[active] += harvested
            crossed = accumulated[active] > theta_mw
            crossing[active[crossed]] = block
            active = active[~crossed]
            if active.size == 0:
                break
        censored = crossing == 0
        crossing[censored] = plan.blocks_per_trial
        return crossing, censored

    parts = _map_chunks(plan, worker)
    return FirstPassageSamples(blocks=np.concatenate([p[0] for p in parts]),
                               censored=np.concatenate([p[1] for p in parts]))


def simulate_rfid(plan: SimulationPlan, theta_ber_mw: float, harvest_share: float,
                  consumption_mw: float) -> EventFrequency:
    """Frequency of the joint event {P_R > theta_ber} and
    {p(harvest_share * P_R) > consumption} over single-block trials."""
    gain_scale = plan.channel.omega / plan.channel.nakagami_m

    def worker(index, start, stop):
        rng = chunk_rng(plan.seed, index)
        draws = gamma_variates(rng, plan.channel.nakagami_m, stop - start) * gain_scale
        received = plan.link.power_scale_mw * draws
        harvested = np.asarray(plan.model(harvest_share * received), dtype=float)
        hits = (received > theta_ber_mw) & (harvested > consumption_mw)
        return int(np.count_nonzero(hits))

    successes = sum(_map_chunks(plan, worker))
    frequency = successes / plan.trials
    std_error = math.sqrt(max(frequency * (1.0 - frequency), 0.0) / plan.trials)
    return EventFrequency(frequency=frequency, std_error=std_error, trials=plan.trials)
