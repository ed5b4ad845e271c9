"""Thread-length OLS with classical inference and a Stata-style summary table.

Collinear predictors are detected column by column with a Gram-Schmidt pass
(intercept first, then the remaining columns in order); any column whose
residual norm after projection falls below ``RANK_TOL`` times its own norm
is reported as omitted. The retained columns are then fit with a
Householder QR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import AllColumnsOmitted, EmptyInput, InsufficientRows, InvalidDf, MismatchedPredictors
from .thread_core import PREDICTORS, ThreadStats

INTERCEPT = "cons"
RANK_TOL = 1e-10
_CF_EPS = 1e-15
_CF_TINY = 1e-300
_CF_MAXITER = 100_000


@dataclass(frozen=True)
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...]
    intercept: str | None = INTERCEPT

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError(f"design shape {self.X.shape} does not match y of length {self.y.shape[0]}")
        if self.X.shape[1] != len(self.columns):
            raise ValueError("column names do not match design width")


@dataclass(frozen=True)
class OlsFit:
    columns: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    omitted: tuple[str, ...]
    all_columns: tuple[str, ...]
    r2: float
    adj_r2: float
    df_resid: int
    n_obs: int
    residuals: np.ndarray

    def _index(self, name: str) -> int:
        return self.columns.index(name)

    def coef(self, name: str) -> float:
        return float(self.coefficients[self._index(name)])

    def std_err(self, name: str) -> float:
        return float(self.std_errors[self._index(name)])

    def p_value(self, name: str) -> float:
        return float(self.p_values[self._index(name)])


def build_design(stats: Sequence[ThreadStats]) -> DesignMatrix:
    if not stats:
        raise EmptyInput("no thread statistics to model")
    X = np.array([list(s.predictors()) + [1] for s in stats], dtype=float)
    y = np.array([s.length for s in stats], dtype=float)
    return DesignMatrix(X=X, y=y, columns=PREDICTORS + (INTERCEPT,))


# -- Student t tail -----------------------------------------------------------

def _betacf(a: float, b: float, x: float, one_minus_x: float) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    # 1 - qab*x/qap, rearranged so x close to 1 does not cancel
    d = (1.0 - b + qab * one_minus_x) / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def _lgamma_ratio(a: float, b: float) -> float:
    """log(Gamma(a + b) / Gamma(a)), stable when ``a`` is large."""
    if a < 20.0:
        return math.lgamma(a + b) - math.lgamma(a)
    ab = a + b
    # Stirling difference; the log1p form avoids cancelling two huge terms.
    out = (a - 0.5) * math.log1p(b / a) + b * math.log(ab) - b
    for coef, power in ((1 / 12, 1), (-1 / 360, 3), (1 / 1260, 5), (-1 / 1680, 7)):
        out += coef * (ab ** -power - a ** -power)
    return out


def _betainc_reg(a: float, b: float, x: float, one_minus_x: float, log_x: float, log_1mx: float) -> float:
    """Regularized incomplete beta I_x(a, b) with caller-supplied complements and logs."""
    if x <= 0.0:
        return 0.0
    if one_minus_x <= 0.0:
        return 1.0
    big, small = (a, b) if a >= b else (b, a)
    log_front = _lgamma_ratio(big, small) - math.lgamma(small) + a * log_x + b * log_1mx
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x, one_minus_x) / a
    return 1.0 - front * _betacf(b, a, one_minus_x, x) / b


def _t_tail_series(t2: float, df: float) -> float:
    # 1 - I_y(1/2, df/2) with y = t^2/(df + t^2), summed as a positive-term
    # hypergeometric series. Used where the continued fraction is ill-conditioned.
    a = df / 2.0
    y = t2 / (df + t2)
    log_front = (
        0.5 * math.log(y) - a * math.log1p(t2 / df)
        + _lgamma_ratio(a, 0.5) - math.lgamma(0.5) + math.log(2.0)
    )
    term = total = 1.0
    n = 0
    while term > 1e-17 * total:
        term *= (a + 0.5 + n) / (1.5 + n) * y
        total += term
        n += 1
    return 1.0 - math.exp(log_front) * total


def student_t_p(t: float, df: int) -> float:
    """Two-sided p-value P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if int(df) != df or df < 1:
        raise InvalidDf(f"degrees of freedom must be a positive integer, got {df!r}")
    t = float(t)
    if not math.isfinite(t):
        raise InvalidDf(f"t must be finite, got {t!r}")
    if t == 0.0:
        return 1.0
    df = float(df)
    t2 = t * t
    if df >= 1000.0 and t2 < 25.0:
        return min(1.0, max(0.0, _t_tail_series(t2, df)))
    denom = df + t2
    log_x = -math.log1p(t2 / df)
    log_1mx = 2.0 * math.log(abs(t)) - math.log(denom)
    p = _betainc_reg(df / 2.0, 0.5, df / denom, t2 / denom, log_x, log_1mx)
    return min(1.0, max(0.0, p))


# -- fitting --------------------------------------------------------------------

def _independent_columns(X: np.ndarray, order: Sequence[int], tol: float) -> list[int]:
    basis: list[np.ndarray] = []
    keep = []
    for j in order:
        v = X[:, j]
        norm = np.linalg.norm(v)
        if norm == 0.0:
            continue
        r = v.copy()
        for _ in range(2):  # second pass re-orthogonalizes
            for q in basis:
                r -= (q @ r) * q
        rn = np.linalg.norm(r)
        if rn <= tol * norm:
            continue
        basis.append(r / rn)
        keep.append(j)
    return keep


def fit_ols(d: DesignMatrix, tol: float = RANK_TOL) -> OlsFit:
    X, y = np.asarray(d.X, dtype=float), np.asarray(d.y, dtype=float)
    n, p = X.shape
    order = list(range(p))
    has_intercept = d.intercept is not None and d.intercept in d.columns
    if has_intercept:
        ic = d.columns.index(d.intercept)
        order.remove(ic)
        order.insert(0, ic)

    keep = sorted(_independent_columns(X, order, tol))
    if not keep:
        raise AllColumnsOmitted("every design column is zero or collinear")
    k = len(keep)
    if n <= k:
        raise InsufficientRows(f"{n} rows cannot support {k} retained columns")

    Xr = X[:, keep]
    Q, R = np.linalg.qr(Xr)
    beta = solve_triangular(R, Q.T @ y)
    resid = y - Xr @ beta
    rss = float(resid @ resid)
    df_resid = n - k
    sigma2 = rss / df_resid
    R_inv = solve_triangular(R, np.eye(k))
    se = np.sqrt(sigma2 * np.einsum("ij,ij->i", R_inv, R_inv))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta / se
    pvals = np.array([student_t_p(tj, df_resid) if math.isfinite(tj) else (0.0 if se_j == 0 and b != 0 else math.nan)
                      for tj, se_j, b in zip(t, se, beta)])

    if has_intercept and ic in keep:
        tss = float(((y - y.mean()) ** 2).sum())
    else:
        tss = float((y ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else math.nan
    adj = 1.0 - (1.0 - r2) * (n - 1) / df_resid

    names = tuple(d.columns[j] for j in keep)
    omitted = tuple(c for j, c in enumerate(d.columns) if j not in keep)
    return OlsFit(
        columns=names,
        coefficients=beta,
        std_errors=se,
        t_stats=t,
        p_values=pvals,
        omitted=omitted,
        all_columns=tuple(d.columns),
        r2=r2,
        adj_r2=adj,
        df_resid=df_resid,
        n_obs=n,
        residuals=resid,
    )


# -- reporting -----------------------------------------------------------------

def significance_stars(p: float) -> str:
    if not p < 0.05:
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    return "*"


def format_coef(coef: float, p: float) -> str:
    return f"{coef:.6f}{significance_stars(p)}"


def _check_terms(fits: Mapping[str, OlsFit]) -> tuple[str, ...]:
    if not fits:
        raise EmptyInput("no fits to render")
    terms = None
    for name, fit in fits.items():
        if terms is None:
            terms = fit.all_columns
        elif fit.all_columns != terms:
            raise MismatchedPredictors(f"fit {name!r} has predictors {fit.all_columns}, expected {terms}")
    # intercept is always rendered after the predictors
    return tuple(t for t in terms if t != INTERCEPT) + tuple(t for t in terms if t == INTERCEPT)


def tabulate_fits(fits: Mapping[str, OlsFit]) -> list[dict]:
    """Long-format rows (one per strand and term) for machine-readable output."""
    terms = _check_terms(fits)
    rows = []
    for strand, fit in fits.items():
        for term in terms:
            if term in fit.omitted:
                rows.append(dict(strand=strand, term=term, coef=0.0, std_err=None, t=None, p=None,
                                 stars="", omitted=True))
                continue
            i = fit.columns.index(term)
            p = float(fit.p_values[i])
            rows.append(dict(
                strand=strand, term=term, coef=float(fit.coefficients[i]), std_err=float(fit.std_errors[i]),
                t=float(fit.t_stats[i]), p=p, stars=significance_stars(p), omitted=False,
            ))
        rows.append(dict(strand=strand, term="Adj. R2", coef=float(fit.adj_r2), std_err=None, t=None, p=None,
                         stars="", omitted=False))
    return rows


def render_table(fits: Mapping[str, OlsFit]) -> str:
    """Plain-text table: Coef./Std. Err. column pair per strand, one row per term."""
    terms = _check_terms(fits)
    header1 = [""] + [s for strand in fits for s in (strand, "")]
    header2 = [""] + ["Coef.", "Std. Err."] * len(fits)
    body = []
    for term in terms:
        row = [term]
        for fit in fits.values():
            if term in fit.omitted:
                row += ["0 (omitted)", ""]
            else:
                i = fit.columns.index(term)
                row += [format_coef(fit.coefficients[i], fit.p_values[i]), f"{fit.std_errors[i]:.6f}"]
        body.append(row)
    body.append(["Adj. R2"] + [c for fit in fits.values() for c in (f"{fit.adj_r2:.4f}", "")])
    body.append(["N"] + [c for fit in fits.values() for c in (str(fit.n_obs), "")])

    table = [header1, header2] + body
    widths = [max(len(r[j]) for r in table) for j in range(len(header1))]
    rule = "-" * (sum(widths) + 3 * (len(widths) - 1))
    lines = [rule]
    for r_i, row in enumerate(table):
        lines.append("   ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if r_i == 1 or r_i == len(table) - 3:
            lines.append(rule)
    lines.append(rule)
    lines.append("*p < 0.05; **p < 0.01; ***p < 0.001")
    return "\n".join(lines) + "\n"
