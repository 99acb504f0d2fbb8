"""Statistical harness relating per-text indices to proficiency scores.

Pipeline: bivariate correlation filtering (with association-family pruning),
variance-inflation-factor pruning, all-subset AIC model selection, and an
OLS fit reporting averaged-over-orderings relative importance shares.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy import stats as sps

# Guard for log(RSS/n) on numerically perfect fits.
_TINY_RSS = 1e-300

# Beyond this many candidates an exhaustive subset scan gets slow in pure
# Python; fall back to forward+backward stepwise search over visited models.
MAX_EXHAUSTIVE = 18
MAX_CANDIDATES = 25

# LMG needs R^2 for every predictor subset; cap where 2^k stays cheap.
MAX_LMG_PREDICTORS = 15

_SOA_SUFFIXES = ("AvMI", "AvT", "AvDeltaPLemma", "AvDeltaPStructure")


@dataclass
class FeatureMatrix:
    """Named numeric features plus a target score, one row per text.

    Missing feature cells are None; the target is always present.  Rows with
    missing values in the columns a given operation uses are dropped there.
    """

    ids: list[str]
    names: list[str]
    columns: dict[str, list[float | None]]
    target: list[float]

    def __post_init__(self) -> None:
        n = len(self.target)
        if len(self.ids) != n:
            raise ValueError("ids and target lengths disagree")
        for name in self.names:
            if len(self.columns[name]) != n:
                raise ValueError(f"column {name} has wrong length")

    def n_rows(self) -> int:
        return len(self.target)

    def complete(self, names: list[str]) -> tuple[np.ndarray, np.ndarray, int]:
        """Listwise-complete design matrix over the given columns.

        Returns (X, y, n_dropped) where dropped rows had a missing value in
        at least one requested column.
        """
        cols = [self.columns[n] for n in names]
        keep = [i for i in range(self.n_rows()) if all(c[i] is not None for c in cols)]
        x = np.array([[c[i] for c in cols] for i in keep], dtype=float)
        x = x.reshape(len(keep), len(names))
        y = np.array([self.target[i] for i in keep], dtype=float)
        return x, y, self.n_rows() - len(keep)

    def restrict(self, names: list[str]) -> "FeatureMatrix":
        """Submatrix with only listwise-complete rows over the given columns."""
        cols = [self.columns[n] for n in names]
        keep = [i for i in range(self.n_rows()) if all(c[i] is not None for c in cols)]
        return FeatureMatrix(
            ids=[self.ids[i] for i in keep],
            names=list(names),
            columns={n: [self.columns[n][i] for i in keep] for n in names},
            target=[self.target[i] for i in keep],
        )


def pearson(x, y) -> float:
    """Pearson product-moment correlation of two equal-length vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("vectors must be one-dimensional and of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("constant vector")
    return float((xc @ yc) / (sx * sy))


def soa_family(name: str) -> str | None:
    """Family key for association indices ('asc' aggregate or the type tag)."""
    for suffix in _SOA_SUFFIXES:
        if name == "asc" + suffix:
            return "asc"
        if name.endswith("_" + suffix):
            return name[: -len(suffix) - 1]
    return None


def bivariate_r(matrix: FeatureMatrix) -> dict[str, float | None]:
    """Per-feature correlation with the target, pairwise-complete.

    Features that cannot be assessed (fewer than 3 paired values, or zero
    variance on either side) get None.
    """
    out: dict[str, float | None] = {}
    for name in matrix.names:
        col = matrix.columns[name]
        pairs = [(v, t) for v, t in zip(col, matrix.target) if v is not None]
        if len(pairs) < 3:
            out[name] = None
            continue
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        try:
            out[name] = pearson(xs, ys)
        except ValueError:
            out[name] = None
    return out


def bivariate_filter(matrix: FeatureMatrix, threshold: float = 0.10) -> list[str]:
    """Keep features with |r| >= threshold, then prune association families.

    Within each association family (the four aggregate metrics form one
    family; each type-specific metric quadruple forms another) only the
    member most strongly correlated with the target survives.  Ties keep the
    earlier column.
    """
    r_by_name = bivariate_r(matrix)
    passed = [
        n
        for n in matrix.names
        if r_by_name[n] is not None and abs(r_by_name[n]) >= threshold
    ]
    best_in_family: dict[str, str] = {}
    for n in passed:
        fam = soa_family(n)
        if fam is None:
            continue
        cur = best_in_family.get(fam)
        if cur is None or abs(r_by_name[n]) > abs(r_by_name[cur]):
            best_in_family[fam] = n
    return [
        n for n in passed
        if soa_family(n) is None or best_in_family[soa_family(n)] == n
    ]


def _aux_r_squared(x: np.ndarray, y: np.ndarray) -> float:
    """R^2 of y regressed on x plus an intercept (least squares)."""
    a = np.column_stack([np.ones(len(y)), x])
    beta, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ beta
    yc = y - y.mean()
    tss = float(yc @ yc)
    if tss == 0.0:
        return 1.0
    return 1.0 - float(resid @ resid) / tss


def vif_prune(
    matrix: FeatureMatrix,
    names: list[str] | None = None,
    limit: float = 5.0,
) -> list[str]:
    """Iteratively drop the feature with the largest variance inflation factor.

    Stops once all VIFs are below the limit or a single feature remains.
    Perfectly collinear (or constant) features have infinite VIF and go
    first; among ties the later column is dropped.
    """
    names = list(matrix.names if names is None else names)
    if len(names) < 2:
        return names
    x, _, _ = matrix.complete(names)
    keep = list(range(len(names)))
    while len(keep) >= 2:
        vifs = []
        for pos, j in enumerate(keep):
            others = [c for c in keep if c != j]
            r2 = _aux_r_squared(x[:, others], x[:, j])
            vifs.append(math.inf if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2))
        worst_pos = 0
        for pos in range(1, len(keep)):
            if vifs[pos] >= vifs[worst_pos]:
                worst_pos = pos
        if vifs[worst_pos] < limit:
            break
        del keep[worst_pos]
    return [names[j] for j in keep]


def aic(n: int, rss: float, k: int) -> float:
    """Gaussian AIC with intercept and error variance counted: n ln(RSS/n) + 2(k+2)."""
    return n * math.log(max(rss, _TINY_RSS) / n) + 2 * (k + 2)


@dataclass
class AicSelection:
    best: tuple[str, ...]
    best_aic: float
    # All inspected subsets within delta-AIC < 4 of the minimum, best first.
    candidates: list[tuple[tuple[str, ...], float]]
    n_obs: int
    n_models: int
    exhaustive: bool


def _subset_rss(gram: np.ndarray, gy: np.ndarray, yy: float, idx: tuple[int, ...]) -> float:
    sub = np.ix_(idx, idx)
    try:
        beta = np.linalg.solve(gram[sub], gy[list(idx)])
    except np.linalg.LinAlgError:
        beta, _, _, _ = np.linalg.lstsq(gram[sub], gy[list(idx)], rcond=None)
    return max(float(yy - beta @ gy[list(idx)]), 0.0)


def aic_select(
    matrix: FeatureMatrix,
    names: list[str] | None = None,
    delta: float = 4.0,
) -> AicSelection:
    """Best-subset selection by AIC, returning every model within delta of the best.

    Exhaustive over all 2^k subsets for k <= MAX_EXHAUSTIVE; beyond that the
    search is the union of models visited by greedy forward selection and
    backward elimination.  Ties for best go to the smaller model.
    """
    names = list(matrix.names if names is None else names)
    if len(names) > MAX_CANDIDATES:
        raise ValueError(f"too many candidate features ({len(names)} > {MAX_CANDIDATES})")
    x, y, _ = matrix.complete(names)
    n = len(y)
    if n < 3:
        raise ValueError("need at least 3 complete rows")
    a = np.column_stack([np.ones(n), x])
    gram = a.T @ a
    gy = a.T @ y
    yy = float(y @ y)

    def model_aic(subset: tuple[int, ...]) -> float:
        idx = (0,) + tuple(j + 1 for j in subset)
        return aic(n, _subset_rss(gram, gy, yy, idx), len(subset))

    scored: dict[tuple[int, ...], float] = {}
    exhaustive = len(names) <= MAX_EXHAUSTIVE
    if exhaustive:
        for size in range(len(names) + 1):
            for subset in combinations(range(len(names)), size):
                scored[subset] = model_aic(subset)
    else:
        _stepwise_scan(len(names), model_aic, scored)

    best_subset = min(scored, key=lambda s: (scored[s], len(s), s))
    best_aic = scored[best_subset]
    within = sorted(
        ((s, v) for s, v in scored.items() if v - best_aic < delta),
        key=lambda item: (item[1], len(item[0]), item[0]),
    )
    to_names = lambda s: tuple(names[j] for j in s)
    return AicSelection(
        best=to_names(best_subset),
        best_aic=best_aic,
        candidates=[(to_names(s), v) for s, v in within],
        n_obs=n,
        n_models=len(scored),
        exhaustive=exhaustive,
    )


def _stepwise_scan(k, model_aic, scored) -> None:
    """Greedy forward and backward passes; every visited model is scored."""

    def score(subset: tuple[int, ...]) -> float:
        if subset not in scored:
            scored[subset] = model_aic(subset)
        return scored[subset]

    current: tuple[int, ...] = ()
    best = score(current)
    while True:
        step = [tuple(sorted(current + (j,))) for j in range(k) if j not in current]
        if not step:
            break
        cand = min(step, key=score)
        if score(cand) >= best:
            break
        current, best = cand, score(cand)
    current = tuple(range(k))
    best = score(current)
    while current:
        step = [tuple(j for j in current if j != drop) for drop in current]
        cand = min(step, key=score)
        if score(cand) >= best:
            break
        current, best = cand, score(cand)


@dataclass
class RegressionSummary:
    """OLS fit with per-predictor inference and relative importance shares."""

    predictors: list[str]  # excludes the intercept
    estimates: dict[str, float]  # keyed by predictor or "(Intercept)"
    std_errors: dict[str, float]
    t_values: dict[str, float]
    p_values: dict[str, float]
    lmg_shares: dict[str, float] | None  # sum to r_squared; None if k > cap
    r_squared: float
    adj_r_squared: float
    residual_se: float
    f_statistic: float | None
    f_p_value: float | None
    df_model: int
    df_resid: int
    n_obs: int


def ols_fit(matrix: FeatureMatrix, names: list[str] | None = None) -> RegressionSummary:
    """Least-squares fit of the target on the named features plus an intercept."""
    names = list(matrix.names if names is None else names)
    x, y, _ = matrix.complete(names)
    n, k = x.shape
    if n <= k + 1:
        raise ValueError(f"need more than {k + 1} complete rows, got {n}")
    a = np.column_stack([np.ones(n), x])
    rank = np.linalg.matrix_rank(a)
    if rank < k + 1:
        raise ValueError(
            "rank-deficient design; collinear columns: " + ", ".join(_dependent_columns(a, names))
        )
    beta, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ beta
    rss = float(resid @ resid)
    yc = y - y.mean()
    tss = float(yc @ yc)
    if tss == 0.0:
        raise ValueError("constant vector")
    df_resid = n - k - 1
    sigma2 = rss / df_resid
    cov = np.linalg.inv(a.T @ a) * sigma2
    se = np.sqrt(np.diag(cov))
    t_vals = beta / se
    p_vals = 2.0 * sps.t.sf(np.abs(t_vals), df_resid)
    r2 = 1.0 - rss / tss
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / df_resid
    if k > 0:
        f_stat = (r2 / k) / ((1.0 - r2) / df_resid) if r2 < 1.0 else math.inf
        f_p = float(sps.f.sf(f_stat, k, df_resid)) if math.isfinite(f_stat) else 0.0
    else:
        f_stat = None
        f_p = None
    labels = ["(Intercept)"] + names
    shares = _lmg_shares(x, y, names) if 1 <= k <= MAX_LMG_PREDICTORS else None
    return RegressionSummary(
        predictors=names,
        estimates={lab: float(b) for lab, b in zip(labels, beta)},
        std_errors={lab: float(s) for lab, s in zip(labels, se)},
        t_values={lab: float(t) for lab, t in zip(labels, t_vals)},
        p_values={lab: float(p) for lab, p in zip(labels, p_vals)},
        lmg_shares=shares,
        r_squared=r2,
        adj_r_squared=adj_r2,
        residual_se=math.sqrt(sigma2),
        f_statistic=f_stat,
        f_p_value=f_p,
        df_model=k,
        df_resid=df_resid,
        n_obs=n,
    )


def _dependent_columns(a: np.ndarray, names: list[str]) -> list[str]:
    """Columns that do not raise the design rank, in order (intercept excluded)."""
    dependent = []
    rank = 0
    for j in range(a.shape[1]):
        new_rank = np.linalg.matrix_rank(a[:, : j + 1])
        if new_rank == rank and j > 0:
            dependent.append(names[j - 1])
        rank = new_rank
    return dependent


def _lmg_shares(x: np.ndarray, y: np.ndarray, names: list[str]) -> dict[str, float]:
    """Average R^2 contribution of each predictor over all entry orderings.

    Computed subset-wise: share_j = sum over subsets S not containing j of
    |S|!(k-|S|-1)!/k! * (R^2(S+j) - R^2(S)).  Shares sum to the full-model
    R^2 exactly (up to float accumulation).
    """
    n, k = x.shape
    a = np.column_stack([np.ones(n), x])
    gram = a.T @ a
    gy = a.T @ y
    yy = float(y @ y)
    yc = y - y.mean()
    tss = float(yc @ yc)

    r2_by_mask = np.empty(1 << k)
    for mask in range(1 << k):
        idx = (0,) + tuple(j + 1 for j in range(k) if mask >> j & 1)
        r2_by_mask[mask] = 1.0 - _subset_rss(gram, gy, yy, idx) / tss

    fact = [math.factorial(i) for i in range(k + 1)]
    weight = [fact[s] * fact[k - 1 - s] / fact[k] for s in range(k)]
    shares: dict[str, float] = {}
    for j in range(k):
        bit = 1 << j
        total = 0.0
        for mask in range(1 << k):
            if mask & bit:
                continue
            s = bin(mask).count("1")
            total += weight[s] * (r2_by_mask[mask | bit] - r2_by_mask[mask])
        shares[names[j]] = total
    return shares


# ---------------------------------------------------------------------------
# CSV input and the end-to-end pipeline used by the command-line interface.


def load_feature_matrix(
    indices_csv: str | Path,
    scores_csv: str | Path,
    score_column: str = "score",
    composite_of: list[str] | None = None,
    join_column: str = "filename",
) -> FeatureMatrix:
    """Join an indices CSV with a scores CSV on filename.

    The target is either a single score column or the mean of the listed
    composite columns.  Rows without a usable score are excluded.
    """
    scores: dict[str, float] = {}
    with open(scores_csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or join_column not in reader.fieldnames:
            raise ValueError(f"scores CSV lacks a {join_column!r} column")
        wanted = composite_of if composite_of else [score_column]
        missing = [c for c in wanted if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"scores CSV lacks column(s): {', '.join(missing)}")
        for row in reader:
            try:
                vals = [float(row[c]) for c in wanted]
            except (TypeError, ValueError):
                continue
            scores[row[join_column]] = sum(vals) / len(vals)

    ids: list[str] = []
    target: list[float] = []
    columns: dict[str, list[float | None]] = {}
    with open(indices_csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or join_column not in reader.fieldnames:
            raise ValueError(f"indices CSV lacks a {join_column!r} column")
        feature_names = [c for c in reader.fieldnames if c != join_column]
        columns = {n: [] for n in feature_names}
        for row in reader:
            key = row[join_column]
            if key not in scores:
                continue
            ids.append(key)
            target.append(scores[key])
            for n in feature_names:
                cell = row[n]
                columns[n].append(float(cell) if cell not in (None, "") else None)
    return FeatureMatrix(ids=ids, names=feature_names, columns=columns, target=target)


@dataclass
class PipelineResult:
    n_rows: int
    r_threshold: float
    vif_limit: float
    r_by_name: dict[str, float | None]
    filtered: list[str]  # survivors of the bivariate filter
    n_dropped_missing: int
    vif_kept: list[str]
    selection: AicSelection | None
    summary: RegressionSummary | None
    notes: list[str] = field(default_factory=list)


def run_pipeline(
    matrix: FeatureMatrix,
    r_threshold: float = 0.10,
    vif_limit: float = 5.0,
) -> PipelineResult:
    """Filter, prune, select and fit; mirrors the reporting workflow end to end."""
    if len(set(matrix.target)) < 2:
        raise ValueError("constant vector")
    r_by_name = bivariate_r(matrix)
    filtered = bivariate_filter(matrix, r_threshold)
    notes: list[str] = []
    if not filtered:
        notes.append("no feature passed the bivariate filter; intercept-only model")
        return PipelineResult(
            n_rows=matrix.n_rows(),
            r_threshold=r_threshold,
            vif_limit=vif_limit,
            r_by_name=r_by_name,
            filtered=[],
            n_dropped_missing=0,
            vif_kept=[],
            selection=None,
            summary=None,
            notes=notes,
        )
    # Listwise completion can starve the model when sparse per-type indices
    # pass the filter; exclude the sparsest candidates until enough complete
    # rows remain for the largest possible model.
    modeling = list(filtered)
    excluded_sparse: list[str] = []
    while modeling:
        _, y_check, _ = matrix.complete(modeling)
        if len(y_check) >= max(3, len(modeling) + 2):
            break
        missing = {
            n: sum(1 for v in matrix.columns[n] if v is None) for n in modeling
        }
        worst = max(modeling, key=lambda n: (missing[n], modeling.index(n)))
        modeling.remove(worst)
        excluded_sparse.append(worst)
    if excluded_sparse:
        notes.append(
            "excluded as too sparse to model: " + ", ".join(excluded_sparse)
        )
    if not modeling:
        notes.append("no candidate feature had enough complete rows; no model fitted")
        return PipelineResult(
            n_rows=matrix.n_rows(),
            r_threshold=r_threshold,
            vif_limit=vif_limit,
            r_by_name=r_by_name,
            filtered=filtered,
            n_dropped_missing=0,
            vif_kept=[],
            selection=None,
            summary=None,
            notes=notes,
        )
    _, _, n_dropped = matrix.complete(modeling)
    complete = matrix.restrict(modeling)
    vif_kept = vif_prune(complete, limit=vif_limit)
    if len(vif_kept) < len(modeling):
        dropped = [n for n in modeling if n not in vif_kept]
        notes.append("dropped for collinearity: " + ", ".join(dropped))
    selection = aic_select(complete, vif_kept)
    if not selection.exhaustive:
        notes.append(
            f"subset search was stepwise (forward+backward) over {selection.n_models} models"
        )
    summary = ols_fit(complete, list(selection.best))
    return PipelineResult(
        n_rows=matrix.n_rows(),
        r_threshold=r_threshold,
        vif_limit=vif_limit,
        r_by_name=r_by_name,
        filtered=filtered,
        n_dropped_missing=n_dropped,
        vif_kept=vif_kept,
        selection=selection,
        summary=summary,
        notes=notes,
    )


def _fmt_p(p: float) -> str:
    return "<.001" if p < 0.001 else f"{p:.3f}".lstrip("0")


def format_report(result: PipelineResult) -> str:
    """Plain-text report: correlation table plus the selected-model summary."""
    lines: list[str] = []
    lines.append(f"Correlations with score ({result.n_rows} texts)")
    lines.append("-" * 58)
    lines.append(f"{'index':<28} {'r':>8}  kept")
    for name in result.r_by_name:
        r = result.r_by_name[name]
        r_txt = f"{r:>8.3f}" if r is not None else f"{'--':>8}"
        kept = "yes" if name in result.filtered else ""
        lines.append(f"{name:<28} {r_txt}  {kept}")
    lines.append("")
    lines.append(
        f"Bivariate filter |r| >= {result.r_threshold:g} with per-family pruning: "
        f"{len(result.filtered)} retained"
    )
    lines.append(f"Rows dropped for missing values: {result.n_dropped_missing}")
    if result.selection is not None:
        lines.append(
            f"Collinearity pruning (VIF < {result.vif_limit:g}): "
            f"{len(result.vif_kept)} candidates entered model selection"
        )
        lines.append(
            f"Model selection: {len(result.selection.candidates)} of "
            f"{result.selection.n_models} models within delta-AIC < 4 "
            f"(best AIC = {result.selection.best_aic:.3f})"
        )
    for note in result.notes:
        lines.append(f"Note: {note}")
    lines.append("")
    summary = result.summary
    if summary is None:
        lines.append("No model fitted.")
        return "\n".join(lines) + "\n"
    lines.append(f"Selected model ({summary.df_model} predictors, n = {summary.n_obs})")
    lines.append("-" * 72)
    lines.append(
        f"{'predictor':<28} {'estimate':>10} {'SE':>9} {'t':>8} {'p':>7} {'rel.imp(%)':>11}"
    )
    for label in ["(Intercept)"] + summary.predictors:
        est = summary.estimates[label]
        se = summary.std_errors[label]
        t = summary.t_values[label]
        p = _fmt_p(summary.p_values[label])
        if summary.lmg_shares is not None and label in summary.lmg_shares and summary.r_squared > 0:
            imp = f"{100.0 * summary.lmg_shares[label] / summary.r_squared:>11.1f}"
        else:
            imp = f"{'--':>11}"
        lines.append(f"{label:<28} {est:>10.4f} {se:>9.4f} {t:>8.2f} {p:>7} {imp}")
    fit = (
        f"R^2 = {summary.r_squared:.3f} (adj. {summary.adj_r_squared:.3f}); "
        f"residual SE = {summary.residual_se:.3f}"
    )
    if summary.f_statistic is not None:
        fit += (
            f"; F({summary.df_model}, {summary.df_resid}) = {summary.f_statistic:.1f}, "
            f"p {_fmt_p(summary.f_p_value)}"
        )
    lines.append(fit)
    return "\n".join(lines) + "\n"
