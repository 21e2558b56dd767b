"""Harvested-power models.

Every model maps received input power (mW) to harvested output power
(mW) and is vectorized over numpy arrays:

* ``GroundTruthHarvester`` -- zero below sensitivity, efficiency-times-
  input between sensitivity and saturation, constant above; the
  efficiency is a function of input power in dBm.
* ``PiecewiseLinearHarvester`` -- interpolates (support, image) pairs,
  either measured datapoints directly or samples of another model.
* ``LinearHarvester`` / ``ConstantLinearHarvester`` /
  ``ConstantLinearConstantHarvester`` -- the L / CL / CLC baselines.
* ``SigmoidHarvester`` / ``QuadraticHarvester`` -- nonlinear baselines
  with unlimited sensitivity; the quadratic may go negative near zero
  input and is deliberately not clamped.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize
from scipy.integrate import quad

from .errors import FitDivergenceError, FitInfeasibleError, ValidationError
from .units import mw_to_dbm

CONSTRAINT_GRID_POINTS = 512
CURVATURE_GRID_POINTS = 10_000


def _as_float_array(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    return arr


@dataclass(frozen=True)
class HarvesterCurve:
    """Measured (input, output) power datapoints in mW.

    The first point is the sensitivity (zero output), the last the
    saturation threshold; inputs are strictly increasing, outputs
    nondecreasing and never above their input.
    """

    input_mw: np.ndarray
    output_mw: np.ndarray

    def __post_init__(self):
        x = _as_float_array(self.input_mw, "input_mw")
        y = _as_float_array(self.output_mw, "output_mw")
        object.__setattr__(self, "input_mw", x)
        object.__setattr__(self, "output_mw", y)
        if x.size != y.size:
            raise ValidationError("input and output columns differ in length")
        if x.size < 2:
            raise ValidationError("a harvester curve needs at least two datapoints")
        if x[0] <= 0.0:
            raise ValidationError("sensitivity must be a positive power")
        if np.any(np.diff(x) <= 0.0):
            raise ValidationError("input powers must be strictly increasing")
        if y[0] != 0.0:
            raise ValidationError("output at the sensitivity point must be zero")
        if np.any(np.diff(y) < 0.0):
            raise ValidationError("output powers must be nondecreasing")
        if np.any(y > x):
            raise ValidationError("output power exceeds input power (efficiency > 1)")

    @property
    def sensitivity_mw(self) -> float:
        return float(self.input_mw[0])

    @property
    def saturation_mw(self) -> float:
        return float(self.input_mw[-1])

    @property
    def size(self) -> int:
        return int(self.input_mw.size)

    def efficiency_samples(self) -> np.ndarray:
        return self.output_mw / self.input_mw


@dataclass(frozen=True)
class EfficiencyPolynomial:
    """Polynomial harvesting efficiency in the dBm scale.

    Stored in a shifted-and-scaled monomial basis t = (u - center) /
    halfwidth for numerical stability; ``dbm_coefficients`` converts back
    to plain powers of u = 10 log10(x).
    """

    degree: int
    scaled_coefficients: np.ndarray
    dbm_center: float
    dbm_halfwidth: float
    sensitivity_mw: float
    saturation_mw: float
    max_residual: float

    def __post_init__(self):
        coeffs = _as_float_array(self.scaled_coefficients, "scaled_coefficients")
        object.__setattr__(self, "scaled_coefficients", coeffs)
        if coeffs.size != self.degree + 1:
            raise ValidationError("coefficient count must equal degree + 1")

    def __call__(self, input_dbm):
        t = (np.asarray(input_dbm, dtype=float) - self.dbm_center) / self.dbm_halfwidth
        value = np.polynomial.polynomial.polyval(t, self.scaled_coefficients)
        return float(value) if np.isscalar(input_dbm) else value

    @property
    def dbm_coefficients(self) -> np.ndarray:
        """Coefficients w_0..w_W of e(u) = sum_i w_i u^i in raw dBm powers."""
        shift = Polynomial([-self.dbm_center / self.dbm_halfwidth, 1.0 / self.dbm_halfwidth])
        composed = Polynomial(self.scaled_coefficients)(shift)
        coeffs = np.zeros(self.degree + 1)
        coeffs[: composed.coef.size] = composed.coef
        return coeffs


def _design_matrix(t: np.ndarray, degree: int) -> np.ndarray:
    return np.vander(t, degree + 1, increasing=True)


def fit_efficiency(curve: HarvesterCurve, degree: int, *,
                   max_residual: float = 0.05,
                   grid_points: int = CONSTRAINT_GRID_POINTS) -> EfficiencyPolynomial:
    """Least-squares efficiency fit in the dBm-domain monomial basis.

    The fit is pinned to zero at the sensitivity point and kept inside
    [0, 1] on a dense domain grid: an equality-constrained solve first,
    then SLSQP refinement only if the box constraints are violated.
    Raises ``FitInfeasibleError`` when the constrained max residual
    exceeds ``max_residual``.
    """
    if degree < 0:
        raise ValidationError("polynomial degree must be non-negative")
    if curve.size < degree + 2:
        raise ValidationError("need at least degree + 2 datapoints to fit")
    u = mw_to_dbm(curve.input_mw)
    center = 0.5 * (u[0] + u[-1])
    halfwidth = 0.5 * (u[-1] - u[0])
    t = (u - center) / halfwidth
    e = curve.efficiency_samples()

    a_full = _design_matrix(t, degree)
    # Eliminate the equality constraint e(t=-1) = 0 through a null-space
    # parametrization, leaving an unconstrained least-squares problem.
    phi_sen = _design_matrix(np.array([-1.0]), degree)[0]
    _, _, vt = np.linalg.svd(phi_sen[None, :])
    null_basis = vt[1:].T  # (degree+1, degree)
    a_reduced = a_full @ null_basis
    if degree == 0:
        theta = np.zeros(0)
    else:
        theta, *_ = np.linalg.lstsq(a_reduced, e, rcond=None)

    t_grid = np.linspace(-1.0, 1.0, grid_points)
    g_grid = _design_matrix(t_grid, degree) @ null_basis

    def box_violation(th):
        values = g_grid @ th
        return max(float(np.max(-values, initial=0.0)),
                   float(np.max(values - 1.0, initial=0.0)))

    if degree > 0 and box_violation(theta) > 1e-9:
        def objective(th):
            r = a_reduced @ th - e
            return float(r @ r)

        def gradient(th):
            return 2.0 * a_reduced.T @ (a_reduced @ th - e)

        constraints = [
            {"type": "ineq", "fun": lambda th: g_grid @ th, "jac": lambda th: g_grid},
            {"type": "ineq", "fun": lambda th: 1.0 - g_grid @ th, "jac": lambda th: -g_grid},
        ]
        result = optimize.minimize(objective, theta, jac=gradient, method="SLSQP",
                                   constraints=constraints,
                                   options={"maxiter": 400, "ftol": 1e-14})
        if not result.success:
            raise FitDivergenceError(f"box-constrained refinement failed: {result.message}")
        theta = result.x

    coeffs = null_basis @ theta
    residual = float(np.max(np.abs(a_full @ coeffs - e))) if curve.size else 0.0
    if residual > max_residual:
        raise FitInfeasibleError(
            f"constrained fit residual {residual:.4g} exceeds tolerance {max_residual:.4g}")
    return EfficiencyPolynomial(
        degree=degree,
        scaled_coefficients=coeffs,
        dbm_center=center,
        dbm_halfwidth=halfwidth,
        sensitivity_mw=curve.sensitivity_mw,
        saturation_mw=curve.saturation_mw,
        max_residual=residual,
    )


@dataclass(frozen=True)
class GroundTruthHarvester:
    """Harvested power from an efficiency function of input power in dBm:
    zero below sensitivity, e(x) * x in between, clamped above saturation."""

    efficiency: Callable
    sensitivity_mw: float
    saturation_mw: float

    def __post_init__(self):
        if not 0.0 < self.sensitivity_mw < self.saturation_mw:
            raise ValidationError("need 0 < sensitivity < saturation")

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        clamped = np.clip(x_arr, self.sensitivity_mw, self.saturation_mw)
        value = self.efficiency(mw_to_dbm(clamped)) * clamped
        value = np.where(x_arr <= self.sensitivity_mw, 0.0, value)
        return float(value) if np.isscalar(x) else value

    @property
    def max_output_mw(self) -> float:
        return float(self.__call__(self.saturation_mw))


def ground_truth_from_fit(curve: HarvesterCurve, degree: int, **fit_kwargs) -> GroundTruthHarvester:
    """Fit the efficiency polynomial and wrap it as a harvested-power model."""
    eff = fit_efficiency(curve, degree, **fit_kwargs)
    return GroundTruthHarvester(efficiency=eff,
                                sensitivity_mw=curve.sensitivity_mw,
                                saturation_mw=curve.saturation_mw)


@dataclass(frozen=True)
class PiecewiseLinearHarvester:
    """Piecewise-linear harvested power through supports b_0..b_M and
    strictly increasing images v_0 = 0 < v_1 < ... < v_M."""

    supports: np.ndarray
    images: np.ndarray

    def __post_init__(self):
        b = _as_float_array(self.supports, "supports")
        v = _as_float_array(self.images, "images")
        object.__setattr__(self, "supports", b)
        object.__setattr__(self, "images", v)
        if b.size != v.size:
            raise ValidationError("supports and images differ in length")
        if b.size < 2:
            raise ValidationError("need at least two support points")
        if b[0] <= 0.0:
            raise ValidationError("first support (sensitivity) must be positive")
        if np.any(np.diff(b) <= 0.0):
            raise ValidationError("supports must be strictly increasing")
        if v[0] != 0.0:
            raise ValidationError("image at the first support must be zero")
        if np.any(np.diff(v) <= 0.0):
            raise ValidationError("images must be strictly increasing")

    @classmethod
    def from_curve(cls, curve: HarvesterCurve) -> "PiecewiseLinearHarvester":
        """Interpolate measured datapoints directly, without any fitting.

        Consecutive points with exactly equal outputs are merged, keeping
        the first; decreasing outputs are rejected by curve validation.
        """
        keep = np.concatenate(([True], np.diff(curve.output_mw) > 0.0))
        return cls(curve.input_mw[keep], curve.output_mw[keep])

    @classmethod
    def from_model(cls, model, segments: int, spacing: str = "linear", *,
                   sensitivity_mw: float | None = None,
                   saturation_mw: float | None = None) -> "PiecewiseLinearHarvester":
        """Sample another harvester model at M+1 supports.

        ``spacing`` is "linear" (uniform in mW, the error-bound setting)
        or "db" (uniform in dBm).
        """
        if segments < 1:
            raise ValidationError("need at least one segment")
        sen = sensitivity_mw if sensitivity_mw is not None else model.sensitivity_mw
        sat = saturation_mw if saturation_mw is not None else model.saturation_mw
        if not 0.0 < sen < sat:
            raise ValidationError("need 0 < sensitivity < saturation")
        if spacing == "linear":
            b = np.linspace(sen, sat, segments + 1)
        elif spacing == "db":
            b = np.geomspace(sen, sat, segments + 1)
        else:
            raise ValidationError(f"unknown spacing {spacing!r}")
        return cls(b, model(b))

    @property
    def segments(self) -> int:
        return int(self.supports.size - 1)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.images) / np.diff(self.supports)

    @property
    def sensitivity_mw(self) -> float:
        return float(self.supports[0])

    @property
    def saturation_mw(self) -> float:
        return float(self.supports[-1])

    @property
    def max_output_mw(self) -> float:
        return float(self.images[-1])

    def __call__(self, x):
        value = np.interp(x, self.supports, self.images)
        return float(value) if np.isscalar(x) else value

    def inverse(self, y):
        """Unique preimage on [b_0, b_M] of y in [0, v_M]."""
        y_arr = np.asarray(y, dtype=float)
        if np.any(y_arr < 0.0) or np.any(y_arr > self.images[-1]):
            raise ValueError("inverse argument outside [0, v_M]")
        value = np.interp(y_arr, self.images, self.supports)
        return float(value) if np.isscalar(y) else value


def _check_eta(eta: float):
    if not 0.0 <= eta < 1.0:
        raise ValidationError("efficiency constant must lie in [0, 1)")


@dataclass(frozen=True)
class LinearHarvester:
    """L baseline: a constant fraction of the input power."""

    eta: float

    def __post_init__(self):
        _check_eta(self.eta)

    def __call__(self, x):
        value = self.eta * np.asarray(x, dtype=float)
        return float(value) if np.isscalar(x) else value

    def inverse(self, y):
        if y <= 0.0:
            raise ValueError("inverse requires y > 0")
        return y / self.eta


@dataclass(frozen=True)
class ConstantLinearHarvester:
    """CL baseline: zero below sensitivity, then linear in the excess."""

    eta: float
    sensitivity_mw: float

    def __post_init__(self):
        _check_eta(self.eta)
        if self.sensitivity_mw <= 0.0:
            raise ValidationError("sensitivity must be positive")

    def __call__(self, x):
        value = self.eta * np.maximum(np.asarray(x, dtype=float) - self.sensitivity_mw, 0.0)
        return float(value) if np.isscalar(x) else value

    def inverse(self, y):
        if y <= 0.0:
            raise ValueError("inverse requires y > 0")
        return self.sensitivity_mw + y / self.eta


@dataclass(frozen=True)
class ConstantLinearConstantHarvester:
    """CLC baseline: the CL ramp clamped at the saturation threshold."""

    eta: float
    sensitivity_mw: float
    saturation_mw: float

    def __post_init__(self):
        _check_eta(self.eta)
        if not 0.0 < self.sensitivity_mw < self.saturation_mw:
            raise ValidationError("need 0 < sensitivity < saturation")

    @property
    def max_output_mw(self) -> float:
        return self.eta * (self.saturation_mw - self.sensitivity_mw)

    def __call__(self, x):
        excess = np.clip(np.asarray(x, dtype=float), self.sensitivity_mw, self.saturation_mw) \
            - self.sensitivity_mw
        value = self.eta * excess
        return float(value) if np.isscalar(x) else value

    def inverse(self, y):
        if not 0.0 < y < self.max_output_mw:
            raise ValueError("inverse requires 0 < y < the saturation plateau")
        return self.sensitivity_mw + y / self.eta


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -700.0, 700.0)))


@dataclass(frozen=True)
class SigmoidHarvester:
    """Normalized logistic harvested power, zero at zero input and
    approaching ``saturation_level`` for large input."""

    saturation_level: float
    steepness: float
    center: float

    def __post_init__(self):
        if self.saturation_level <= 0.0:
            raise ValidationError("saturation level must be positive")

    def __call__(self, x):
        base = _sigmoid(-self.steepness * self.center)
        raw = _sigmoid(self.steepness * (np.asarray(x, dtype=float) - self.center))
        value = self.saturation_level * (raw - base) / (1.0 - base)
        return float(value) if np.isscalar(x) else value


@dataclass(frozen=True)
class QuadraticHarvester:
    """Second-order polynomial in the mW scale; negative values near
    zero input are preserved, not clamped."""

    coefficients: tuple  # (c2, c1, c0)

    def __call__(self, x):
        c2, c1, c0 = self.coefficients
        x_arr = np.asarray(x, dtype=float)
        value = (c2 * x_arr + c1) * x_arr + c0
        return float(value) if np.isscalar(x) else value


def fit_sigmoid(curve: HarvesterCurve) -> SigmoidHarvester:
    """Nonlinear least squares for the normalized sigmoid parameters."""
    x, y = curve.input_mw, curve.output_mw

    def f(xx, level, steepness, center):
        return SigmoidHarvester(level, steepness, center)(xx)

    y_max = float(y[-1])
    x_mid = float(np.median(x))
    p0 = (1.2 * y_max if y_max > 0 else 1.0, 2.0 / max(x_mid, 1e-6), x_mid)
    try:
        params, _ = optimize.curve_fit(
            f, x, y, p0=p0, maxfev=20_000,
            bounds=([1e-12, 1e-12, -np.inf], [np.inf, np.inf, np.inf]))
    except RuntimeError as exc:
        raise FitDivergenceError(f"sigmoid fit did not converge: {exc}") from exc
    return SigmoidHarvester(*map(float, params))


def fit_quadratic(curve: HarvesterCurve) -> QuadraticHarvester:
    """Plain least-squares second-order polynomial in mW."""
    c2, c1, c0 = np.polyfit(curve.input_mw, curve.output_mw, 2)
    return QuadraticHarvester((float(c2), float(c1), float(c0)))


@dataclass(frozen=True)
class ApproximationErrorReport:
    integrated_error: float
    analytic_bound: float
    curvature_max: float
    segments: int


def approximation_error(model, pwl: PiecewiseLinearHarvester, *,
                        rtol: float = 1e-8,
                        curvature_grid: int = CURVATURE_GRID_POINTS) -> ApproximationErrorReport:
    """Integrated |model - piecewise| over the operating interval, with
    the quadratic-decay bound C (sat - sen)^3 / (8 M^2).

    The curvature constant C is the max |second derivative| of the model
    estimated by central differences on a dense uniform grid, since the
    ground truth has no closed-form second derivative.
    """
    b = pwl.supports
    total = 0.0
    for lo, hi in zip(b[:-1], b[1:]):
        part, _ = quad(lambda s: abs(float(model(s)) - float(pwl(s))), lo, hi,
                       epsabs=1e-15, epsrel=rtol, limit=200)
        total += part
    sen, sat = float(b[0]), float(b[-1])
    grid = np.linspace(sen, sat, curvature_grid)
    h = grid[1] - grid[0]
    values = model(grid)
    second = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / (h * h)
    curvature = float(np.max(np.abs(second)))
    bound = curvature * (sat - sen) ** 3 / (8.0 * pwl.segments ** 2)
    return ApproximationErrorReport(integrated_error=total, analytic_bound=bound,
                                    curvature_max=curvature, segments=pwl.segments)
