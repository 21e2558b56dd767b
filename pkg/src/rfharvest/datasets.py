"""Bundled synthetic harvester datasets and CSV ingestion.

The package ships two reproducible reference datasets in place of the
proprietary measured ones:

* ``rectenna-A`` -- a highly sensitive rectenna, 118 points over
  [10^-4.25, 10^1.6] mW (-42.5 to +16 dBm), peak efficiency ~0.30.
* ``module-B``   -- a commercial harvesting module, 53 points over
  [10^-1.2, 10] mW (-12 to +10 dBm), peak efficiency ~0.50.

Both are generated from documented smooth efficiency curves of the form
e(u) = E0 * t^a * exp(-q t^2) with t the dBm position normalized to
[0, 1]; the curves rise from exactly zero at the sensitivity point to a
mid-band peak and decline gently toward saturation, and their harvested
power e(x) * x is strictly increasing, so the sampled curves satisfy all
`HarvesterCurve` invariants.

User data is ingested from CSV with header ``input_dbm,output_dbm`` or
``input_mw,output_mw``, one datapoint per line, ``#`` comments, and a
``.`` decimal point.  A literal ``-inf`` output in the dBm form encodes
zero harvested power at the sensitivity point.
"""

import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ValidationError
from .harvesters import GroundTruthHarvester, HarvesterCurve
from .units import dbm_to_mw, mw_to_dbm


@dataclass(frozen=True)
class _BumpEfficiency:
    """Smooth efficiency e(u) = scale * t^rise * exp(-taper * t^2) with
    t = (u - sen_dbm) / span_db clipped to [0, 1]."""

    scale: float
    rise: float
    taper: float
    sen_dbm: float
    span_db: float

    def __call__(self, input_dbm):
        t = (np.asarray(input_dbm, dtype=float) - self.sen_dbm) / self.span_db
        t = np.clip(t, 0.0, 1.0)
        value = self.scale * t ** self.rise * np.exp(-self.taper * t * t)
        return float(value) if np.isscalar(input_dbm) else value


RECTENNA_A_EFFICIENCY = _BumpEfficiency(scale=0.99, rise=1.8, taper=1.246,
                                        sen_dbm=-42.5, span_db=58.5)
MODULE_B_EFFICIENCY = _BumpEfficiency(scale=1.466, rise=1.3, taper=1.254,
                                      sen_dbm=-12.0, span_db=22.0)

_SPECS = {
    "rectenna-A": (RECTENNA_A_EFFICIENCY, -42.5, 16.0, 118),
    "module-B": (MODULE_B_EFFICIENCY, -12.0, 10.0, 53),
}

DATASET_NAMES = tuple(_SPECS)


def reference_model(name: str) -> GroundTruthHarvester:
    """The exact smooth harvester behind a bundled dataset."""
    eff, lo_dbm, hi_dbm, _ = _spec(name)
    return GroundTruthHarvester(efficiency=eff,
                                sensitivity_mw=float(dbm_to_mw(lo_dbm)),
                                saturation_mw=float(dbm_to_mw(hi_dbm)))


def bundled_curve(name: str) -> HarvesterCurve:
    """The bundled dataset: the reference model sampled at dBm-uniform
    input powers."""
    eff, lo_dbm, hi_dbm, points = _spec(name)
    model = reference_model(name)
    inputs = dbm_to_mw(np.linspace(lo_dbm, hi_dbm, points))
    return HarvesterCurve(inputs, model(inputs))


def _spec(name: str):
    try:
        return _SPECS[name]
    except KeyError:
        known = ", ".join(sorted(_SPECS))
        raise ValidationError(f"unknown dataset {name!r}; bundled datasets: {known}") from None


_HEADERS = {
    ("input_dbm", "output_dbm"): True,
    ("input_mw", "output_mw"): False,
}


def parse_curve_csv(text: str) -> HarvesterCurve:
    """Parse harvester datapoints from CSV text (see module docstring
    for the format contract)."""
    rows = []
    header = None
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [part.strip() for part in line.split(",")]
        if header is None:
            header = tuple(part.lower() for part in fields)
            if header not in _HEADERS:
                raise ValidationError(
                    f"line {lineno}: header must be 'input_dbm,output_dbm' or "
                    f"'input_mw,output_mw', got {','.join(fields)!r}")
            continue
        if len(fields) != 2:
            raise ValidationError(f"line {lineno}: expected two comma-separated values")
        try:
            rows.append((float(fields[0]), float(fields[1])))
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    if header is None:
        raise ValidationError("missing CSV header line")
    if not rows:
        raise ValidationError("no datapoints in CSV")
    data = np.asarray(rows, dtype=float)
    if _HEADERS[header]:
        inputs = dbm_to_mw(data[:, 0])
        outputs = np.where(np.isneginf(data[:, 1]), 0.0, dbm_to_mw(data[:, 1]))
    else:
        inputs, outputs = data[:, 0], data[:, 1]
    return HarvesterCurve(inputs, outputs)


def load_curve_csv(path) -> HarvesterCurve:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_curve_csv(handle.read())


def curve_to_csv(curve: HarvesterCurve, *, dbm: bool = False) -> str:
    """Serialize a curve in the loader's format, round-trip exact in the
    mW form."""
    lines = []
    if dbm:
        lines.append("input_dbm,output_dbm")
        for x, y in zip(curve.input_mw, curve.output_mw):
            out = "-inf" if y == 0.0 else repr(float(mw_to_dbm(y)))
            lines.append(f"{float(mw_to_dbm(x))!r},{out}")
    else:
        lines.append("input_mw,output_mw")
        for x, y in zip(curve.input_mw, curve.output_mw):
            lines.append(f"{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"


def packaged_curve_csv(name: str) -> str:
    """Text of the CSV file shipped with the package for a bundled dataset."""
    filename = name.lower().replace("-", "_") + ".csv"
    return resources.files("rfharvest.data").joinpath(filename).read_text(encoding="utf-8")


def resolve_curve(source: str) -> HarvesterCurve:
    """A bundled dataset by name, or a CSV file by path."""
    if source in _SPECS:
        return bundled_curve(source)
    return load_curve_csv(source)
