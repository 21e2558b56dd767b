"""Power-splitting backscatter link analysis for passive RFID tags.

A monostatic interrogator illuminates a tag that splits the incident
power between harvesting and backscatter communication.  The round trip
gives a square-law received power at the interrogator, the FM0 coherent
BER is R(sqrt(g)/sigma) with R(x) = 2Q(x)(1 - Q(x)), and a reading
succeeds when the BER is below a threshold while the harvested power
covers the tag's consumption.  Under Nakagami fading the success
probability reduces to one upper-incomplete-gamma evaluation at the
tighter of the two equivalent received-power thresholds.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import special
from .channel import FadingChannel, LinkBudget
from .errors import ValidationError
from .montecarlo import EventFrequency, SimulationPlan, simulate_rfid


@dataclass(frozen=True)
class RfidScenario:
    """Power-splitting parameters of the tag/interrogator pair."""

    absorb_fraction: float      # fraction of time at the absorbing load
    harvest_split: float        # share of absorbed power routed to harvesting
    backscatter_share: float    # fraction of impinged power backscattered
    noise_var_mw: float         # scaled AWGN variance at the interrogator
    ber_threshold: float
    tag_consumption_mw: float

    def __post_init__(self):
        if not 0.0 < self.absorb_fraction < 1.0:
            raise ValidationError("absorb fraction must lie in (0, 1)")
        if not 0.0 < self.harvest_split < 1.0:
            raise ValidationError("harvest split must lie in (0, 1)")
        if not 0.0 < self.backscatter_share <= 1.0 - self.absorb_fraction:
            raise ValidationError("backscatter share must lie in (0, 1 - absorb fraction]")
        if self.noise_var_mw <= 0.0:
            raise ValidationError("noise variance must be positive")
        if not 0.0 < self.ber_threshold < 0.5:
            raise ValidationError("BER threshold must lie in (0, 0.5)")
        if self.tag_consumption_mw <= 0.0:
            raise ValidationError("tag consumption must be positive")

    @property
    def harvest_share(self) -> float:
        """Total share of input power harvested, chi * tau_d."""
        return self.harvest_split * self.absorb_fraction


def interrogator_power(scn: RfidScenario, link: LinkBudget, p_r):
    """Received power at the interrogator after the round trip,
    rho_u * P_R^2 / P_T."""
    p_arr = np.asarray(p_r, dtype=float)
    if np.any(p_arr < 0.0):
        raise ValueError("received power must be non-negative")
    value = scn.backscatter_share * p_arr * p_arr / link.transmit_power_mw
    return float(value) if np.isscalar(p_r) else value


def ber(scn: RfidScenario, p_int: float) -> float:
    """Interrogator bit-error rate at backscatter power ``p_int``;
    approaches 1/2 as the signal vanishes."""
    if p_int < 0.0:
        raise ValueError("interrogator power must be non-negative")
    if p_int == 0.0:
        return 0.5
    return special.r_function(math.sqrt(p_int) / math.sqrt(scn.noise_var_mw))


def ber_power_threshold(scn: RfidScenario, link: LinkBudget) -> float:
    """Minimum received power at the tag for which the interrogator BER
    meets the threshold: sqrt(P_T) R^-1(beta) sigma_u / sqrt(rho_u)."""
    return (math.sqrt(link.transmit_power_mw) * special.r_inverse(scn.ber_threshold)
            * math.sqrt(scn.noise_var_mw) / math.sqrt(scn.backscatter_share))


def success_probability(scn: RfidScenario, link: LinkBudget, ch: FadingChannel,
                        model) -> float:
    """Closed-form probability of a successful reading for an invertible
    harvester model (piecewise or L / CL / CLC baselines).

    Exactly zero whenever the tag consumption is at or above the model's
    saturated output.
    """
    plateau = getattr(model, "max_output_mw", None)
    if plateau is not None and scn.tag_consumption_mw >= plateau:
        return 0.0
    theta_ber = ber_power_threshold(scn, link)
    theta_energy = model.inverse(scn.tag_consumption_mw) / scn.harvest_share
    theta_max = max(theta_ber, theta_energy)
    m = ch.nakagami_m
    scale = link.power_scale_mw * ch.omega
    return special.regularized_upper_gamma(m, m * theta_max / scale)


def success_probability_mc(scn: RfidScenario, link: LinkBudget, ch: FadingChannel,
                           model, n: int, seed: int, *,
                           chunk_size: int = 1 << 17, workers: int = 1) -> EventFrequency:
    """Monte Carlo frequency of the joint success event, for any
    harvester model including the ground truth."""
    plan = SimulationPlan(trials=n, blocks_per_trial=1, seed=seed, model=model,
                          link=link, channel=ch, chunk_size=chunk_size, workers=workers)
    return simulate_rfid(plan, ber_power_threshold(scn, link), scn.harvest_share,
                         scn.tag_consumption_mw)
