"""Executable verification suite.

Nine numbered criteria pin the package's numerical contracts: special-
function accuracy, distribution correctness against Monte Carlo, the
three-way expected-power agreement, the quadratic decay of the
piecewise approximation error, density-evolution fidelity, charging-
time agreement, RFID success probabilities, the documented outage
operating points, and byte-level CLI determinism.  Each criterion
returns per-check values and limits so failures localize.

``run_criterion`` executes one criterion; the ``validate`` CLI
subcommand and ``tests/test_acceptance.py`` both route through it.
"""

import functools
import math
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from . import channel, datasets, density, harvesters, montecarlo, rfid, special, stats
from .units import dbm_to_mw

PATH_LOSS_EXPONENT = 2.1
NAKAGAMI_M = 5.0


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    comparison: str = "<="  # value <= limit or value >= limit

    @property
    def passed(self) -> bool:
        if self.comparison == "<=":
            return bool(self.value <= self.limit)
        if self.comparison == ">=":
            return bool(self.value >= self.limit)
        raise ValueError(f"unknown comparison {self.comparison!r}")


@dataclass
class CriterionResult:
    index: int
    title: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = ""
        if not self.passed:
            bad = [c for c in self.checks if not c.passed]
            worst = f"  [{bad[0].name}: {bad[0].value:.4g} vs {bad[0].comparison} {bad[0].limit:.4g}]"
        return (f"criterion {self.index} {status} ({self.seconds:.1f}s) "
                f"{self.title}{worst}")

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "title": self.title,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "checks": [{"name": c.name, "value": float(c.value),
                        "limit": float(c.limit), "comparison": c.comparison,
                        "passed": c.passed}
                       for c in self.checks],
        }


def _link(p_t_mw: float, d_m: float) -> channel.LinkBudget:
    return channel.LinkBudget(transmit_power_mw=p_t_mw, distance_m=d_m,
                              path_loss_exponent=PATH_LOSS_EXPONENT)


def _channel() -> channel.FadingChannel:
    return channel.FadingChannel(nakagami_m=NAKAGAMI_M)


@functools.lru_cache(maxsize=None)
def _reference_piecewise(name: str, segments: int) -> harvesters.PiecewiseLinearHarvester:
    model = datasets.reference_model(name)
    return harvesters.PiecewiseLinearHarvester.from_model(model, segments, "db")


def _mixed_ks_statistic(sorted_samples: np.ndarray, dist) -> float:
    """KS distance between the empirical CDF and a mixed distribution,
    comparing right-continuous values and left limits (atoms excluded
    from the left limit)."""
    n = sorted_samples.size
    values, first_index, counts = np.unique(sorted_samples, return_index=True,
                                            return_counts=True)
    analytic_right = dist.cdf(values)
    _, atoms = dist.pdf(values)
    right = np.abs((first_index + counts) / n - analytic_right)
    left = np.abs(first_index / n - (analytic_right - atoms))
    return float(max(np.max(right), np.max(left)))


def criterion_1() -> list:
    checks = []
    # Gamma recurrence on the sampled shapes.
    worst = 0.0
    for m in (0.5, 1.0, 2.5, 5.0, 10.0):
        lhs = special.gamma(m + 1.0)
        worst = max(worst, abs(lhs - m * special.gamma(m)) / lhs)
    checks.append(Check("gamma recurrence relative error", worst, 1e-12))

    # Upper incomplete gamma against adaptive quadrature of the defining
    # integral over the alpha/z parameter box.
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0, 5.0, 13.0, 27.0, 50.0):
        tail = max(60.0, 12.0 * math.sqrt(alpha))
        for z in (0.0, 0.3, 1.0, 3.7, 10.0, 50.0, 120.0, 200.0):
            upper = max(z, alpha + 10.0 * math.sqrt(alpha)) + tail
            oracle, _ = quad(lambda t: t ** (alpha - 1.0) * math.exp(-t), z, upper,
                             epsabs=1e-300, epsrel=1e-12, limit=400)
            value = special.upper_incomplete_gamma(alpha, z)
            worst = max(worst, abs(value - oracle) / oracle)
    checks.append(Check("incomplete gamma vs quadrature oracle", worst, 1e-10))

    worst = 0.0
    for x in np.geomspace(1e-3, 8.0, 200):
        worst = max(worst, abs(special.r_inverse(special.r_function(x)) - x))
    checks.append(Check("R-inverse of R identity", worst, 1e-9))
    return checks


def criterion_2() -> list:
    checks = []
    pwl = _reference_piecewise("rectenna-A", 585)
    ch = _channel()
    n = 1_000_000
    for seed, d in ((211, 4.0), (212, 10.0)):
        link = _link(1500.0, d)
        dist = stats.harvested_power_distribution(link, ch, pwl)
        received = channel.sample_received_power(link, ch, n, seed=seed)
        harvested = pwl(received)
        harvested.sort()
        ks = _mixed_ks_statistic(harvested, dist)
        checks.append(Check(f"KS distance at d={d:g} m", ks, 0.002))
        for label, mass, hits in (
                ("zero", dist.atom_at_zero, int(np.count_nonzero(harvested == 0.0))),
                ("saturation", dist.atom_at_saturation,
                 int(np.count_nonzero(harvested == pwl.max_output_mw)))):
            se = math.sqrt(max(mass * (1.0 - mass) / n, 0.0))
            checks.append(Check(f"atom at {label} (d={d:g} m), deviation vs 3 SE",
                                abs(hits / n - mass), 3.0 * se + 1e-12))
    return checks


def criterion_3() -> list:
    checks = []
    pwl = _reference_piecewise("rectenna-A", 585)
    ground_truth = datasets.reference_model("rectenna-A")
    ch = _channel()
    worst_quad = worst_mc = worst_gt = 0.0
    for seed, d in enumerate((4.0, 5.5, 7.0, 8.5, 10.0), start=31):
        link = _link(1500.0, d)
        analytic = stats.expected_power_piecewise(link, ch, pwl)
        numeric = stats.expected_power_numeric(link, ch, pwl)
        mc = float(np.mean(pwl(channel.sample_received_power(link, ch, 10_000_000,
                                                             seed=seed))))
        gt = stats.expected_power_numeric(link, ch, ground_truth)
        worst_quad = max(worst_quad, abs(analytic - numeric) / analytic)
        worst_mc = max(worst_mc, abs(analytic - mc) / analytic)
        worst_gt = max(worst_gt, abs(analytic - gt) / analytic)
    checks.append(Check("closed form vs quadrature (relative)", worst_quad, 1e-7))
    checks.append(Check("closed form vs Monte Carlo (relative)", worst_mc, 0.005))
    checks.append(Check("piecewise vs ground-truth model (relative)", worst_gt, 0.005))
    return checks


def criterion_4() -> list:
    checks = []
    model = datasets.reference_model("module-B")
    reports = {}
    for m_segments in (10, 50, 100, 200, 400, 1000):
        pwl = harvesters.PiecewiseLinearHarvester.from_model(model, m_segments, "linear")
        reports[m_segments] = harvesters.approximation_error(model, pwl)
    for m_lo, m_hi in ((50, 100), (200, 400)):
        ratio = reports[m_lo].integrated_error / reports[m_hi].integrated_error
        checks.append(Check(f"error ratio M={m_lo} vs {m_hi}, |ratio-4|/4",
                            abs(ratio - 4.0) / 4.0, 0.15))
    for m_segments in (10, 100, 1000):
        rep = reports[m_segments]
        checks.append(Check(f"measured error within bound at M={m_segments}",
                            rep.integrated_error, rep.analytic_bound))
    return checks


def criterion_5() -> list:
    checks = []
    ch = _channel()
    link = _link(1500.0, 5.0)

    # FFT linear convolution against the O(H^2) direct reference.
    grid = density.GridSpec(lower=0.0, upper=6.0 * link.power_scale_mw, points=513,
                            fft_size=4096)
    single = density.discretize(
        lambda x: channel.received_power_pdf(link, ch, x), grid)
    mass = single.values * grid.resolution
    worst = 0.0
    for n in (2, 3, 5):
        fft_density = density.convolve_n(single, n)
        direct = mass
        for _ in range(n - 1):
            direct = np.convolve(direct, mass)
        direct_density = direct / grid.resolution
        worst = max(worst, float(np.max(np.abs(fft_density.values - direct_density))))
    checks.append(Check("FFT vs brute-force convolution (per node)", worst, 1e-8))

    # Accumulated-power density vs Monte Carlo histograms.
    pwl = _reference_piecewise("rectenna-A", 585)
    dist = stats.harvested_power_distribution(link, ch, pwl)
    mean = stats.expected_power_piecewise(link, ch, pwl)
    var = stats.piecewise_power_variance(link, ch, pwl)
    for seed, n in ((501, 1), (502, 20), (503, 50)):
        grid_n = density.default_grid(mean, var, n)
        assert grid_n.intervals == 1 << 16 and grid_n.fft_size == 1 << 17
        evolved = density.sum_density(density.discretize(dist, grid_n), n)
        edges = density.aligned_bin_edges(grid_n, 256)
        plan = montecarlo.SimulationPlan(trials=1_000_000, blocks_per_trial=n,
                                         seed=seed, model=pwl, link=link, channel=ch)
        hist = montecarlo.simulate_u_n(plan, edges)
        tv = 0.5 * float(np.abs(density.bin_masses(evolved, edges)
                                - hist.masses()).sum())
        checks.append(Check(f"TV distance density vs histogram, N={n}", tv, 0.01))
    return checks


def criterion_6() -> list:
    checks = []
    ch = _channel()
    pwl = _reference_piecewise("rectenna-A", 585)
    distances = (2.0, 2.6, 3.2, 3.8, 4.4, 5.0)
    by_cap = {}
    for cap_uf in (1.0, 20.0):
        spec = density.ChargingSpec(capacitance_f=cap_uf * 1e-6, voltage_v=1.8,
                                    packet_duration_s=0.05)
        expected = []
        worst_rel = 0.0
        for seed_offset, d in enumerate(distances):
            link = _link(1500.0, d)
            dist = stats.harvested_power_distribution(link, ch, pwl)
            mean = stats.expected_power_piecewise(link, ch, pwl)
            var = stats.piecewise_power_variance(link, ch, pwl)
            fp = density.charging_time_analysis(dist, mean, var, spec.threshold_mw,
                                                intervals=1 << 14)
            analytic = density.expected_charging_blocks(fp)
            plan = montecarlo.SimulationPlan(
                trials=200_000, blocks_per_trial=max(4 * fp.n_max, 64),
                seed=601 + seed_offset + int(cap_uf), model=pwl, link=link, channel=ch)
            mc = montecarlo.simulate_first_passage(plan, spec.threshold_mw).mean_blocks()
            worst_rel = max(worst_rel, abs(analytic - mc) / analytic)
            expected.append(analytic)
        by_cap[cap_uf] = expected
        checks.append(Check(f"E[N*] analytic vs Monte Carlo, C={cap_uf:g} uF",
                            worst_rel, 0.02))
        monotone_margin = float(np.min(np.diff(expected)))
        checks.append(Check(f"E[N*] nondecreasing in distance, C={cap_uf:g} uF",
                            monotone_margin, 0.0, ">="))
    cap_margin = float(np.min(np.asarray(by_cap[20.0]) - np.asarray(by_cap[1.0])))
    checks.append(Check("E[N*] nondecreasing in capacitance", cap_margin, 0.0, ">="))
    return checks


def criterion_7() -> list:
    checks = []
    ch = _channel()
    pwl = _reference_piecewise("rectenna-A", 585)
    worst = 0.0
    for seed_offset, d in enumerate((3.0, 5.0)):
        link = _link(1500.0, d)
        for k, p_c in enumerate((1e-5, 3e-4, 1.5e-3)):
            scn = rfid.RfidScenario(absorb_fraction=0.5, harvest_split=0.5,
                                    backscatter_share=0.01, noise_var_mw=1e-11,
                                    ber_threshold=1e-5, tag_consumption_mw=p_c)
            closed = rfid.success_probability(scn, link, ch, pwl)
            mc = rfid.success_probability_mc(scn, link, ch, pwl, 10_000_000,
                                             seed=701 + 10 * seed_offset + k)
            worst = max(worst, abs(closed - mc.frequency))
    checks.append(Check("closed form vs Monte Carlo (absolute)", worst, 0.005))
    scn_high = rfid.RfidScenario(absorb_fraction=0.5, harvest_split=0.5,
                                 backscatter_share=0.01, noise_var_mw=1e-11,
                                 ber_threshold=1e-5,
                                 tag_consumption_mw=2.0 * pwl.max_output_mw)
    closed = rfid.success_probability(scn_high, _link(1500.0, 5.0), ch, pwl)
    checks.append(Check("exact zero for consumption above saturation", closed, 0.0))
    return checks


def criterion_8() -> list:
    checks = []
    ch = _channel()
    sen_b = datasets.bundled_curve("module-B").sensitivity_mw
    sen_a = datasets.bundled_curve("rectenna-A").sensitivity_mw
    worst_low = 1.0
    for d in (4.5, 6.0, 8.0, 10.0):
        link = _link(dbm_to_mw(20.0), d)
        worst_low = min(worst_low, stats.sensitivity_outage(link, ch, sen_b))
    checks.append(Check("module-B outage at 20 dBm, d > 4 m", worst_low, 0.95, ">="))
    outage = stats.sensitivity_outage(_link(dbm_to_mw(35.0), 4.0), ch, sen_b)
    checks.append(Check("module-B outage at 35 dBm, 4 m (|x-0.10|)",
                        abs(outage - 0.10), 0.05))
    worst_a = 0.0
    for p_t_dbm in (20.0, 35.0):
        for d in (4.0, 6.0, 8.0, 10.0):
            link = _link(dbm_to_mw(p_t_dbm), d)
            worst_a = max(worst_a, stats.sensitivity_outage(link, ch, sen_a))
    checks.append(Check("rectenna-A outage across the grid", worst_a, 0.01))
    return checks


def criterion_9() -> list:
    from . import cli  # deferred: cli imports this module for `validate`

    config_text = (
        '{"version": 1, "numerics": {"mc_trials": 20000, "grid_intervals": 4096,'
        ' "seed": 77},\n'
        ' "sweeps": {"distance_m": {"start": 4.0, "stop": 8.0, "count": 3}}}\n')
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = Path(tmp) / "config.json"
        cfg_path.write_text(config_text, encoding="utf-8")
        for run in range(2):
            out_path = Path(tmp) / f"out{run}.csv"
            code = cli.main(["energy", "--config", str(cfg_path),
                             "--output", str(out_path)])
            if code != 0:
                return [Check("energy command exit code", code, 0.0)]
            outputs.append(out_path.read_bytes())
    identical = outputs[0] == outputs[1]
    return [Check("re-run emits byte-identical CSV", 1.0 if identical else 0.0,
                  1.0, ">=")]


_CRITERIA = {
    1: ("special-function accuracy", criterion_1),
    2: ("harvested-power distribution vs empirical CDF", criterion_2),
    3: ("expected-power three-way agreement", criterion_3),
    4: ("approximation-error quadratic decay and bound", criterion_4),
    5: ("density evolution: FFT exactness and TV distance", criterion_5),
    6: ("charging time: analytic vs Monte Carlo, monotonicity", criterion_6),
    7: ("RFID success probability vs Monte Carlo", criterion_7),
    8: ("documented outage operating points", criterion_8),
    9: ("CLI determinism", criterion_9),
}

CRITERION_INDICES = tuple(sorted(_CRITERIA))


def run_criterion(index: int) -> CriterionResult:
    title, func = _CRITERIA[index]
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        checks = func()
    return CriterionResult(index=index, title=title, checks=checks,
                           seconds=time.perf_counter() - start)


def run(indices=None) -> list:
    if indices is None:
        indices = CRITERION_INDICES
    return [run_criterion(i) for i in indices]


def report(results) -> dict:
    return {
        "version": 1,
        "all_passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }
