"""Closed-form statistics of harvested power under Nakagami fading.

The harvested power of a piecewise-linear model is a mixed random
variable: point masses at zero (input below sensitivity) and at the
saturated output, plus a continuous density on each segment obtained
from the received-power density by the linear change of variables.
``HarvestedPowerDistribution`` carries that decomposition explicitly so
the atoms are testable as probabilities.

Expected harvested power has exact incomplete-gamma closed forms for the
L / CL / CLC baselines and for the piecewise model; the generic
quadrature route (``expected_power_numeric``) integrates p(x) f(x)
adaptively with subdivision at the harvester nodes, and serves as the
independent cross-check for models without a closed form.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import special
from .channel import FadingChannel, LinkBudget, received_power_cdf, received_power_pdf
from .errors import ConvergenceError, ValidationError
from .harvesters import (ConstantLinearConstantHarvester, ConstantLinearHarvester,
                         PiecewiseLinearHarvester)

DEFAULT_TAIL_MASS = 1e-12


@dataclass(frozen=True)
class HarvestedPowerDistribution:
    """Mixed distribution of the piecewise-linear harvested power."""

    harvester: PiecewiseLinearHarvester
    link: LinkBudget
    channel: FadingChannel
    xi: np.ndarray  # received-power CDF at the supports

    @property
    def atom_at_zero(self) -> float:
        return float(self.xi[0])

    @property
    def atom_at_saturation(self) -> float:
        return float(1.0 - self.xi[-1])

    @property
    def max_output_mw(self) -> float:
        return self.harvester.max_output_mw

    def pdf(self, x):
        """Continuous density and atom mass, reported separately.

        The atom column is nonzero only at exactly 0 and exactly v_M,
        where the distribution has Dirac masses.
        """
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        v, b = self.harvester.images, self.harvester.supports
        slopes = self.harvester.slopes
        density = np.zeros_like(x_arr)
        atoms = np.zeros_like(x_arr)
        interior = (x_arr > 0.0) & (x_arr < v[-1])
        if interior.any():
            xs = x_arr[interior]
            seg = np.clip(np.searchsorted(v, xs, side="left"), 1, v.size - 1)
            arg = b[seg - 1] + (xs - v[seg - 1]) / slopes[seg - 1]
            density[interior] = received_power_pdf(self.link, self.channel, arg) / slopes[seg - 1]
        atoms[x_arr == 0.0] = self.atom_at_zero
        atoms[x_arr == v[-1]] = self.atom_at_saturation
        if np.isscalar(x):
            return float(density[0]), float(atoms[0])
        return density, atoms

    def cdf(self, x):
        """Right-continuous CDF; equals xi_0 at 0 and 1 at v_M."""
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        v, b = self.harvester.images, self.harvester.supports
        slopes = self.harvester.slopes
        out = np.zeros_like(x_arr)
        out[x_arr >= v[-1]] = 1.0
        mid = (x_arr >= 0.0) & (x_arr < v[-1])
        if mid.any():
            xs = x_arr[mid]
            seg = np.clip(np.searchsorted(v, xs, side="left"), 1, v.size - 1)
            arg = b[seg - 1] + (xs - v[seg - 1]) / slopes[seg - 1]
            out[mid] = received_power_cdf(self.link, self.channel, arg)
        return float(out[0]) if np.isscalar(x) else out


def harvested_power_distribution(link: LinkBudget, ch: FadingChannel,
                                 h: PiecewiseLinearHarvester) -> HarvestedPowerDistribution:
    xi = received_power_cdf(link, ch, h.supports)
    return HarvestedPowerDistribution(harvester=h, link=link, channel=ch, xi=xi)


def sensitivity_outage(link: LinkBudget, ch: FadingChannel, sensitivity_mw: float) -> float:
    """Probability that the input power is below the harvester's
    sensitivity, i.e. the fraction of time no energy can be harvested."""
    if sensitivity_mw <= 0.0:
        raise ValidationError("sensitivity must be positive")
    return received_power_cdf(link, ch, sensitivity_mw)


def _power_scale(link: LinkBudget, ch: FadingChannel) -> float:
    # Received power is Gamma(m, P(d) * omega / m); all closed forms use
    # the product P(d) * omega as the effective scale.
    return link.power_scale_mw * ch.omega


def expected_power_linear(link: LinkBudget, ch: FadingChannel, eta: float) -> float:
    """E[eta * P_R] = eta * P(d) * omega."""
    return eta * _power_scale(link, ch)


def expected_power_cl(link: LinkBudget, ch: FadingChannel,
                      model: ConstantLinearHarvester) -> float:
    """Closed-form mean of the CL baseline under Nakagami fading."""
    m = ch.nakagami_m
    pd = _power_scale(link, ch)
    z = m * model.sensitivity_mw / pd
    return model.eta * (pd * special.regularized_upper_gamma(m + 1.0, z)
                        - model.sensitivity_mw * special.regularized_upper_gamma(m, z))


def expected_power_clc(link: LinkBudget, ch: FadingChannel,
                       model: ConstantLinearConstantHarvester) -> float:
    """Closed-form mean of the CLC baseline under Nakagami fading."""
    m = ch.nakagami_m
    pd = _power_scale(link, ch)
    z_sen = m * model.sensitivity_mw / pd
    z_sat = m * model.saturation_mw / pd
    ramp = pd * special.gamma_interval_mass(m + 1.0, z_sen, z_sat)
    return model.eta * (ramp
                        + model.saturation_mw * special.regularized_upper_gamma(m, z_sat)
                        - model.sensitivity_mw * special.regularized_upper_gamma(m, z_sen))


def piecewise_power_moment(link: LinkBudget, ch: FadingChannel,
                           h: PiecewiseLinearHarvester, order: int = 1) -> float:
    """E[p~(P_R)^k] for k = 1 or 2, exact via segment-wise Gamma moments.

    Per segment the harvested power is l_j x + c_j, so its powers reduce
    to partial moments of the received power, each an incomplete-gamma
    interval mass; the saturation atom contributes v_M^k times its mass.
    """
    if order not in (1, 2):
        raise ValidationError("only first and second moments are implemented")
    m = ch.nakagami_m
    pd = _power_scale(link, ch)
    b, v = h.supports, h.images
    slopes = h.slopes
    intercepts = v[:-1] - slopes * b[:-1]
    z = m * b / pd
    mass0 = special.gamma_interval_mass(m, z[:-1], z[1:])
    mass1 = special.gamma_interval_mass(m + 1.0, z[:-1], z[1:])
    terms = []
    if order == 1:
        terms.extend(slopes * pd * mass1)
        terms.extend(intercepts * mass0)
        tail = v[-1] * special.regularized_upper_gamma(m, z[-1])
    else:
        mass2 = special.gamma_interval_mass(m + 2.0, z[:-1], z[1:])
        x2 = (pd / m) ** 2 * m * (m + 1.0) * mass2
        x1 = pd * mass1
        terms.extend(slopes ** 2 * x2)
        terms.extend(2.0 * slopes * intercepts * x1)
        terms.extend(intercepts ** 2 * mass0)
        tail = v[-1] ** 2 * special.regularized_upper_gamma(m, z[-1])
    terms.append(tail)
    return math.fsum(terms)


def expected_power_piecewise(link: LinkBudget, ch: FadingChannel,
                             h: PiecewiseLinearHarvester) -> float:
    """Exact expected harvested power of the piecewise-linear model."""
    return piecewise_power_moment(link, ch, h, order=1)


def piecewise_power_variance(link: LinkBudget, ch: FadingChannel,
                             h: PiecewiseLinearHarvester) -> float:
    mean = piecewise_power_moment(link, ch, h, order=1)
    second = piecewise_power_moment(link, ch, h, order=2)
    return max(second - mean * mean, 0.0)


def expected_energy(expected_power_mw: float, blocks: int, packet_duration_s: float) -> float:
    """Expected harvested energy over N coherence blocks, N * T_p * E[P],
    in mW * s (i.e. millijoules)."""
    return blocks * packet_duration_s * expected_power_mw


def calibrate_eta(link: LinkBudget, ch: FadingChannel, kind: str,
                  sensitivity_mw: float, saturation_mw: float, reference_model, *,
                  objective: str = "expected_power") -> float:
    """Efficiency constant for a baseline that matches a reference model.

    The only built-in objective matches the expected harvested power at
    the given scenario; since every baseline's mean is linear in eta,
    the optimum is the exact ratio (no search needed).  Which metric to
    match is a modeling choice, so other objectives are left to callers.
    """
    if objective != "expected_power":
        raise ValidationError(f"unknown calibration objective {objective!r}")
    reference = expected_power_numeric(link, ch, reference_model)
    if kind == "linear":
        unit = expected_power_linear(link, ch, 1.0)
    elif kind == "cl":
        probe = ConstantLinearHarvester(0.5, sensitivity_mw)
        unit = expected_power_cl(link, ch, probe) / probe.eta
    elif kind == "clc":
        probe = ConstantLinearConstantHarvester(0.5, sensitivity_mw, saturation_mw)
        unit = expected_power_clc(link, ch, probe) / probe.eta
    else:
        raise ValidationError(f"unknown baseline kind {kind!r}")
    return float(min(max(reference / unit, 0.0), 1.0 - 1e-12))


def _received_power_tail(link: LinkBudget, ch: FadingChannel, tail_mass: float) -> float:
    """Upper truncation point T with P(P_R > T) <= tail_mass."""
    scale = _power_scale(link, ch)
    hi = scale * max(1.0, 8.0 / math.sqrt(ch.nakagami_m))
    for _ in range(200):
        if received_power_cdf(link, ch, hi) >= 1.0 - tail_mass:
            return hi
        hi *= 2.0
    raise ConvergenceError("failed to bracket the received-power tail")


def expected_power_numeric(link: LinkBudget, ch: FadingChannel, model, *,
                           breakpoints=None, rtol: float = 1e-8,
                           tail_mass: float = DEFAULT_TAIL_MASS) -> float:
    """E[p(P_R)] by adaptive quadrature of p(x) f(x) with subdivision at
    the model's kinks; works for any harvested-power function."""
    if breakpoints is None:
        if isinstance(model, PiecewiseLinearHarvester):
            breakpoints = model.supports
        elif hasattr(model, "sensitivity_mw") and hasattr(model, "saturation_mw"):
            breakpoints = [model.sensitivity_mw, model.saturation_mw]
        else:
            breakpoints = []
    upper = _received_power_tail(link, ch, tail_mass)
    points = np.unique(np.clip(np.asarray(breakpoints, dtype=float), 0.0, upper))
    edges = np.concatenate(([0.0], points[(points > 0.0) & (points < upper)], [upper]))

    def integrand(x):
        return float(model(x)) * received_power_pdf(link, ch, x)

    parts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = quad(integrand, lo, hi, epsabs=1e-300, epsrel=rtol, limit=300)
        if not math.isfinite(value):
            raise ConvergenceError("quadrature returned a non-finite value")
        parts.append(value)
    return math.fsum(parts)
