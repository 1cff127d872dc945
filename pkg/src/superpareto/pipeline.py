"""Per-year multi-level analysis, report serialization and plot data.

For each year the records are cut, aggregated at the worker, firm and
sector levels and fitted with the GB2 likelihood and the Hill estimator.
The demand exponent follows from the firm and worker indices.
"""
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    InconsistencyWarning,
    InsufficientDataError,
    OutOfTheoryError,
    SuperParetoError,
)
from .records import LEVELS, aggregate_weighted, as_panel
from .superstat import infer_delta
from .tail_fit import MIN_FIT_SAMPLES, CutPolicy, apply_cuts, fit_gb2_mle, hill_estimator

logger = logging.getLogger(__name__)

__all__ = [
    "MIN_FIRMS",
    "LevelFit",
    "YearReport",
    "hill_k_for",
    "fit_level",
    "analyze_year",
    "analyze",
    "format_report",
    "parse_report",
    "reports_to_json",
    "write_report",
    "plotdata_rows",
    "emit_plotdata",
]

MIN_FIRMS = 50
REPORT_HEADER = "# superpareto report v1"


@dataclass(frozen=True)
class LevelFit:
    """GB2 and Hill estimates at one aggregation level."""

    level: str
    n_values: int
    n_obs: float
    mu: float = math.nan
    se_mu: float = math.nan
    nu: float = math.nan
    q: float = math.nan
    c1: float = math.nan
    log_likelihood: float = math.nan
    hill: float = math.nan
    hill_k: float = math.nan
    converged: bool = False
    message: str = ""


@dataclass(frozen=True)
class YearReport:
    """Pareto indices of one year at the three aggregation levels.

    ``law_ii`` is ``True``/``False`` when all three fits converged and
    records whether ``mu_W > mu_F > mu_S``; otherwise ``None``.
    """

    year: int
    cut_policy: str
    truncated: bool
    n_firms: int
    n_workers: int
    n_sectors: int
    worker: LevelFit
    firm: LevelFit
    sector: LevelFit
    delta: float = math.nan
    delta_consistent: bool | None = None
    law_ii: bool | None = None
    notes: tuple = field(default=())

    @property
    def mu_w(self):
        return self.worker.mu

    @property
    def mu_f(self):
        return self.firm.mu

    @property
    def mu_s(self):
        return self.sector.mu

    @property
    def converged(self):
        return {lv: getattr(self, lv).converged for lv in LEVELS}


def hill_k_for(values, weights=None):
    """Hill order: the observations carried by the top ``isqrt(m)`` distinct values.

    ``m`` is the number of distinct values.  Unweighted samples get
    ``k = isqrt(n)``.
    """
    values = np.asarray(values, dtype=float)
    if weights is None:
        return max(1, math.isqrt(len(values)))
    top = max(1, math.isqrt(len(values)))
    order = np.argsort(-values, kind="stable")
    return float(np.sum(np.asarray(weights, dtype=float)[order[:top]]))


def fit_level(level, values, weights=None, *, n_starts=8, upper=None):
    """Fit one aggregation sample.  Too few values yield ``converged=False``.

    ``upper`` fits the GB2 truncated to ``c < upper``.
    """
    values = np.asarray(values, dtype=float)
    n_obs = float(np.sum(weights)) if weights is not None else float(len(values))
    if len(values) < MIN_FIT_SAMPLES:
        return LevelFit(level, len(values), n_obs,
                        message=f"insufficient data: {len(values)} values, need {MIN_FIT_SAMPLES}")
    window = None if upper is None else (0.0, upper)
    res = fit_gb2_mle(values, weights, n_starts=n_starts, window=window)
    k = hill_k_for(values, weights)
    try:
        hill = hill_estimator(values, k, weights)
    except (SuperParetoError, ValueError) as exc:
        hill = math.nan
        logger.warning("%s level: Hill estimate failed: %s", level, exc)
    if res.params is None:
        return LevelFit(level, len(values), n_obs, hill=hill, hill_k=k, message=res.message)
    p = res.params
    return LevelFit(level, len(values), n_obs, mu=p.mu, se_mu=res.se_mu, nu=p.nu, q=p.q, c1=p.c1,
                    log_likelihood=res.log_likelihood, hill=hill, hill_k=k,
                    converged=res.converged, message=res.message)


def _cut_point(panel, kept, cut):
    # smallest productivity removed by the cut; the kept sample lies below it
    if cut.mode == "threshold":
        return float(np.nextafter(cut.c_max, np.inf))
    if cut.mode == "none" or len(kept) == len(panel):
        return None
    removed = np.setdiff1d(np.unique(panel.firm_id), np.unique(kept.firm_id))
    firm_c, _ = aggregate_weighted(panel[np.isin(panel.firm_id, removed)], "firm")
    top = max(float(firm_c.min()), float(kept.c.max()))
    return float(np.nextafter(top, np.inf))


def analyze_year(records, cut=None, *, n_starts=8, truncated=False):
    """Analyze one year of records.

    The records are put in canonical order first, so the report does not
    depend on the input order.  Raises :class:`InsufficientDataError`
    when fewer than 50 firms survive the cut.

    With ``truncated=True`` the worker and firm fits use the GB2 truncated
    at the cut point, which removes the bias a cut induces on clean
    heavy-tailed data.  The default fits the cut sample as it stands.
    """
    cut = CutPolicy() if cut is None else cut
    panel = as_panel(records)
    years = panel.years()
    if len(years) > 1:
        raise ValueError(f"analyze_year needs records of a single year, got {years}")
    if not years:
        raise InsufficientDataError("no records")
    panel = panel.canonical()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        kept = apply_cuts(panel, cut)
    n_firms = len(np.unique(kept.firm_id)) if len(kept) else 0
    if n_firms < MIN_FIRMS:
        raise InsufficientDataError(f"year {years[0]}: {n_firms} firms after cuts, need {MIN_FIRMS}")

    upper = _cut_point(panel, kept, cut) if truncated else None
    fits = {}
    for level in LEVELS:
        values, weights = aggregate_weighted(kept, level)
        fits[level] = fit_level(level, values, weights if level == "worker" else None,
                                n_starts=n_starts, upper=None if level == "sector" else upper)

    notes = []
    delta, consistent = math.nan, None
    if fits["firm"].converged and fits["worker"].converged:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                delta = infer_delta(fits["firm"].mu, fits["worker"].mu)
                consistent = not any(issubclass(w.category, InconsistencyWarning) for w in caught)
            except OutOfTheoryError as exc:
                notes.append(f"delta omitted: {exc}")
        if consistent is False:
            notes.append("mu_W does not exceed mu_F")
    else:
        notes.append("delta omitted: firm or worker fit did not converge")

    law_ii = None
    if all(f.converged for f in fits.values()):
        law_ii = bool(fits["worker"].mu > fits["firm"].mu > fits["sector"].mu)

    return YearReport(
        year=years[0],
        cut_policy=str(cut),
        truncated=bool(truncated and upper is not None),
        n_firms=n_firms,
        n_workers=int(kept.employees.sum()),
        n_sectors=len(np.unique(kept.sector_id)),
        worker=fits["worker"],
        firm=fits["firm"],
        sector=fits["sector"],
        delta=float(delta),
        delta_consistent=consistent,
        law_ii=law_ii,
        notes=tuple(notes),
    )


def analyze(records, cut=None, *, n_starts=8, truncated=False):
    """Reports for every year in ``records``, in increasing year order.

    Years with too few firms are skipped with a logged warning.
    """
    panel = as_panel(records)
    reports = []
    for year, sub in panel.by_year().items():
        try:
            reports.append(analyze_year(sub, cut, n_starts=n_starts, truncated=truncated))
        except InsufficientDataError as exc:
            logger.warning("skipping year %d: %s", year, exc)
    if not reports:
        raise InsufficientDataError("no year has enough firms to analyze")
    return reports


# --------------------------------------------------------------------------
# report serialization
# --------------------------------------------------------------------------
#
# Text format: a header line, then one block per year.  Each block starts
# with "[year YYYY]" and holds "key = value" lines.  Reals use 6
# significant digits, booleans true/false, missing values "na".

_LEVEL_KEYS = ("mu", "se_mu", "nu", "q", "c1", "log_likelihood", "hill", "hill_k",
               "converged", "n_values", "n_obs", "message")
_SUFFIX = {"worker": "w", "firm": "f", "sector": "s"}


def _fmt(v):
    if v is None:
        return "na"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return "na" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def _report_items(r):
    yield "year", r.year
    yield "cut_policy", r.cut_policy
    yield "truncated_fit", r.truncated
    yield "n_firms", r.n_firms
    yield "n_workers", r.n_workers
    yield "n_sectors", r.n_sectors
    for level in LEVELS:
        fit = getattr(r, level)
        s = _SUFFIX[level]
        for key in _LEVEL_KEYS:
            yield f"{key}_{s}", getattr(fit, key)
    yield "delta", r.delta
    yield "delta_consistent", r.delta_consistent
    yield "law_ii", r.law_ii
    yield "notes", "; ".join(r.notes)


def format_report(reports):
    """Serialize reports in the key-value text format."""
    lines = [REPORT_HEADER]
    for r in reports:
        lines.append(f"[year {r.year}]")
        lines.extend(f"{k} = {_fmt(v)}" for k, v in _report_items(r))
    return "\n".join(lines) + "\n"


def _parse_value(text):
    if text == "na":
        return None
    if text in ("true", "false"):
        return text == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_report(text):
    """Read the text format back as a list of ``{key: value}`` dicts."""
    blocks = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[year") and line.endswith("]"):
            blocks.append({})
            continue
        if not blocks:
            raise ValueError(f"key-value line outside a year block: {raw!r}")
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed report line: {raw!r}")
        blocks[-1][key.strip()] = _parse_value(value.strip())
    return blocks


def reports_to_json(reports):
    """JSON rendering with the same keys and rounding as the text format."""
    out = []
    for r in reports:
        out.append({k: _parse_value(_fmt(v)) for k, v in _report_items(r)})
    return json.dumps(out, indent=2, sort_keys=False) + "\n"


def write_report(reports, path):
    """Write the text format, or JSON when ``path`` ends in ``.json``."""
    path = Path(path)
    text = reports_to_json(reports) if path.suffix.lower() == ".json" else format_report(reports)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


# --------------------------------------------------------------------------
# plot data
# --------------------------------------------------------------------------

def plotdata_rows(sample, weights=None):
    """Distinct values in descending order with ``P_>(c) = #{x >= c} / n``."""
    x = np.asarray(sample, dtype=float).ravel()
    if len(x) == 0:
        raise InsufficientDataError("plot data needs a non-empty sample")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float).ravel()
    values, inv = np.unique(x, return_inverse=True)
    counts = np.bincount(inv, weights=w, minlength=len(values))
    values, counts = values[::-1], counts[::-1]
    return values, np.cumsum(counts) / counts.sum()


def emit_plotdata(sample, out, weights=None, *, comment=None):
    """Write a rank-size file: ``c P_>`` per line, comments prefixed ``#``."""
    values, p = plotdata_rows(sample, weights)
    out = Path(out)
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in str(comment).splitlines())
    lines.append("# c P_>(c)")
    lines.extend(f"{v!r} {q!r}" for v, q in zip(values.tolist(), p.tolist()))
    try:
        out.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {out}: {exc}") from exc
    return out


def report_dict(report):
    """Plain-dict view of a report, unrounded."""
    return asdict(report)
