"""Ground-based repeater-chain entanglement rates (comparison baseline).

A chain of total length d is cut into M elementary links; each repeater
half-node holds n_mem memories, giving n_mem independent parallel chains.
Per timestep each unestablished link succeeds with probability
p = exp(-alpha d / M) and, once established, is held indefinitely. The
expected number of timesteps until some parallel chain has all M links is

    W = sum_{n>=1} (1 - (1 - (1-p)^(n-1))^M)^n_mem,

and the end-to-end rate is the total repetition rate divided by W, where one
timestep lasts the two-way classical heralding time 2(d/M)/c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import FIBER_SPEED_KM_S

DEFAULT_ATTENUATION_PER_KM = 1.0 / 22.0


@dataclass(frozen=True)
class RepeaterChainConfig:
    distance_km: float
    elementary_links: int
    memories_per_half_node: int
    attenuation_per_km: float = DEFAULT_ATTENUATION_PER_KM
    signal_speed_km_s: float = FIBER_SPEED_KM_S

    def __post_init__(self):
        if self.distance_km <= 0:
            raise ValueError("distance_km must be > 0")
        if self.elementary_links < 1 or self.memories_per_half_node < 1:
            raise ValueError("elementary_links and memories_per_half_node must be >= 1")
        if self.attenuation_per_km <= 0 or self.signal_speed_km_s <= 0:
            raise ValueError("attenuation and signal speed must be > 0")

    @property
    def link_success_probability(self) -> float:
        return math.exp(-self.attenuation_per_km * self.distance_km
                        / self.elementary_links)


def waiting_time(elementary_links: int, memories: int, p: float,
                 tol: float = 1e-12) -> float:
    """Expected timesteps until one parallel chain completes.

    The infinite sum is truncated once the geometric tail bound
    sum_{n > n0} term_n <= M^n_mem q^(n_mem n0) / (1 - q^n_mem), q = 1-p,
    drops below tol (the bound follows from 1-(1-x)^M <= min(1, Mx)).
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]; the sum diverges at p = 0")
    if elementary_links < 1 or memories < 1:
        raise ValueError("elementary_links and memories must be >= 1")
    if p == 1.0:
        return 1.0
    q = 1.0 - p
    # log-space tail bound avoids overflow of M^n_mem for large chains
    log_q_pow = memories * math.log(q)
    log_prefactor = (memories * math.log(elementary_links)
                     - math.log1p(-math.exp(log_q_pow)))
    total = 0.0
    n = 1
    while True:
        term = (1.0 - (1.0 - q ** (n - 1)) ** elementary_links) ** memories
        total += term
        log_tail_bound = log_prefactor + n * log_q_pow
        if log_tail_bound <= math.log(tol) or term == 0.0:
            return total
        n += 1


def repeater_rate(config: RepeaterChainConfig) -> float:
    """End-to-end entanglement rate in ebits/s.

    rate = (c n_mem / (2 d/M)) / W, with W the expected waiting time in
    units of the heralding round trip.
    """
    p = config.link_success_probability
    w = waiting_time(config.elementary_links, config.memories_per_half_node, p)
    link_km = config.distance_km / config.elementary_links
    repetition_hz = config.signal_speed_km_s * config.memories_per_half_node / (2.0 * link_km)
    return repetition_hz / w


def waiting_time_monte_carlo(
    elementary_links: int, memories: int, p: float,
    trials: int, seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the waiting time: (mean, standard error).

    Each trial draws geometric establishment times for every link of every
    parallel chain and takes min over chains of max over links.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    rng = np.random.default_rng(seed)
    g = rng.geometric(p, size=(trials, memories, elementary_links))
    w = g.max(axis=2).min(axis=1).astype(float)
    mean = float(w.mean())
    stderr = float(w.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr
