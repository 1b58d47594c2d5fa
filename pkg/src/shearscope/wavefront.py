"""Wavefront-set estimation from coefficient decay across scales.

A fitted exponent k in ``|SH| ~ C a^k`` is extracted per (translation, shear)
node by least squares in log-log coordinates; magnitudes below a noise floor
are excluded, and nodes whose coefficients sit entirely at the floor count as
maximal decay ("at-floor").  A direction chart covering slopes in [-1, 1]
plus a reciprocal-slope chart through the coordinate-swapped generator
together classify every direction; a node joins the regular set only when
the decay exceeds the threshold uniformly over a small neighborhood.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from .generators import ShearletSpec
from .grid import SampledField2D
from .xform import CoeffVolume

__all__ = [
    "DecayReport",
    "WavefrontMap",
    "ExpectedExponentBudget",
    "AT_FLOOR",
    "fit_decay_slopes",
    "decay_slope",
    "magnitude_stack",
    "expected_direct_exponent",
    "expected_inverse_budget",
    "wavefront_map",
    "export_wavefront_csv",
    "export_min_slope_pgm",
]

INF = float("inf")

#: sentinel slope for nodes whose coefficients never rise above the floor
AT_FLOOR = INF

#: interior alpha grid used when the budget leaves alpha free
ALPHA_GRID = np.linspace(0.5, 1.0, 101)[1:-1]


@dataclass(frozen=True)
class DecayReport:
    """Fitted exponents per (shear, t-node) with fit quality and metadata."""

    slope_map: np.ndarray  # (n_s, n1, n2); +inf marks at-floor nodes
    r2_map: np.ndarray     # (n_s, n1, n2); nan where at-floor
    a_fit_range: tuple[float, float]
    floor: float

    @property
    def at_floor(self) -> np.ndarray:
        return np.isinf(self.slope_map)


def _select_scales(a: np.ndarray, fit_range):
    if fit_range is None:
        sel = np.ones(len(a), dtype=bool)
    else:
        lo, hi = fit_range
        sel = (a >= lo * (1 - 1e-12)) & (a <= hi * (1 + 1e-12))
    if sel.sum() < 6:
        raise ValueError(
            f"fit range contains {int(sel.sum())} scales; at least 6 required"
        )
    return sel


def _fit_from_mags(mags: np.ndarray, a: np.ndarray, floor: float, fit_range,
                   require_full_column: bool = False) -> DecayReport:
    x = np.log(a).astype(np.float64)[:, None, None, None]
    good = mags > floor
    if require_full_column:
        # strict evidence: a partial column (any scale at the floor) is
        # treated as at-floor instead of being fitted on the surviving part
        full = good.all(axis=0)
        good = good & full[None]
    n = good.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(good, np.log(np.maximum(mags, 1e-300, dtype=np.float64)), 0.0)
        sx = np.where(good, x, 0.0).sum(axis=0)
        sy = y.sum(axis=0)
        sxx = np.where(good, x * x, 0.0).sum(axis=0)
        sxy = (np.where(good, x, 0.0) * y).sum(axis=0)
        syy = (y * y).sum(axis=0)
        denom = n * sxx - sx * sx
        slope = (n * sxy - sx * sy) / denom
        ss_tot = syy - sy * sy / np.maximum(n, 1)
        ss_res = ss_tot - slope * (sxy - sx * sy / np.maximum(n, 1))
        r2 = np.where(ss_tot > 1e-30, 1.0 - ss_res / np.where(ss_tot > 1e-30, ss_tot, 1.0), 1.0)
    at_floor = n < 6
    slope = np.where(at_floor, INF, slope)
    r2 = np.where(at_floor, np.nan, np.clip(r2, 0.0, 1.0))
    lo = float(a[0]) if fit_range is None else fit_range[0]
    hi = float(a[-1]) if fit_range is None else fit_range[1]
    return DecayReport(slope_map=slope, r2_map=r2, a_fit_range=(lo, hi), floor=floor)


def fit_decay_slopes(
    vol: CoeffVolume,
    fit_range: tuple[float, float] | None = None,
    floor: float | None = None,
) -> DecayReport:
    """Least-squares decay exponents at every (shear, translation) node.

    The fit regresses ``log |SH|`` on ``log a`` over the selected scales,
    excluding magnitudes at or below the floor (default ``1e-12`` times the
    volume's largest magnitude).  Nodes with fewer than 6 surviving scales
    are reported as at-floor (+inf slope): their decay outran the measurable
    range.
    """
    sel = _select_scales(vol.a_grid, fit_range)
    mags = np.abs(vol.coeffs[sel])
    if floor is None:
        floor = 1e-12 * float(np.abs(vol.coeffs).max())
    return _fit_from_mags(mags, vol.a_grid[sel], floor, fit_range)


def decay_slope(
    vol: CoeffVolume,
    t_index: tuple[int, int],
    s_index: int,
    fit_range: tuple[float, float] | None = None,
    floor: float | None = None,
) -> tuple[float, float]:
    """Fitted exponent and r^2 at one (translation, shear) node.

    Returns ``(inf, nan)`` when the node is at-floor.
    """
    sel = _select_scales(vol.a_grid, fit_range)
    mags = np.abs(vol.coeffs[sel, s_index, t_index[0], t_index[1]])
    a = vol.a_grid[sel]
    if floor is None:
        floor = 1e-12 * float(np.abs(vol.coeffs).max())
    good = mags > floor
    if good.sum() < 6:
        return AT_FLOOR, float("nan")
    x = np.log(a[good])
    y = np.log(mags[good])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 1e-30 else 1.0
    return float(slope), r2


# --- exponent arithmetic --------------------------------------------------------


@dataclass(frozen=True)
class ExpectedExponentBudget:
    """Order parameters entering the decay-exponent arithmetic.

    ``alpha`` may be fixed in (1/2, 1) or left None to optimize over a grid.
    ``M``: directional moments, ``N``: directional regularity of the data,
    ``L``: second-coordinate smoothness, ``P``: spatial decay, ``K``: the
    measured coefficient decay, ``L1``/``L2``: window decay orders.
    """

    alpha: float | None = None
    M: float = INF
    N: float = INF
    L: float = INF
    P: float = INF
    K: float = INF
    L1: float = INF
    L2: float = INF

    def __post_init__(self):
        if self.alpha is not None and not (0.5 < self.alpha < 1.0):
            raise ValueError("alpha must lie strictly between 1/2 and 1")


def _direct_terms(b: ExpectedExponentBudget, alpha: float) -> float:
    terms = [
        -0.75 + b.P / 2.0,
        (1.0 - alpha) * b.M,
        -0.75 + alpha * b.N,
        (alpha - 0.5) * b.L,
    ]
    return min(terms)


def expected_direct_exponent(budget: ExpectedExponentBudget) -> float:
    """Guaranteed decay exponent at a regular directed point.

    The four competing terms are balanced over alpha; with every order
    infinite the result is the +inf sentinel ("rapid decay").
    """
    alphas = [budget.alpha] if budget.alpha is not None else ALPHA_GRID
    return max(_direct_terms(budget, float(al)) for al in alphas)


def _inverse_sup_n(b: ExpectedExponentBudget, alpha: float) -> float:
    bounds = [b.K - 2.75]
    # N + 2 < (1-alpha)(M+N) - 3/4  =>  N < ((1-alpha) M - 11/4) / alpha
    if np.isinf(b.M):
        bounds.append(INF)
    else:
        bounds.append(((1.0 - alpha) * b.M - 2.75) / alpha)
    bounds.append((alpha - 0.5) * b.L - 2.75 if not np.isinf(b.L) else INF)
    if np.isinf(b.L2):
        bounds.append(INF)
    elif np.isinf(b.M):
        bounds.append(-INF)  # finite window order with infinite moments: degenerate
    else:
        bounds.append(2.0 * (b.L2 - b.M + 1.0) - 2.0)
    bounds.append(2.0 * b.L1 if not np.isinf(b.L1) else INF)
    return min(bounds)


def expected_inverse_budget(budget: ExpectedExponentBudget) -> float:
    """Largest regularity order certified from decay of order K.

    For an all-infinite budget this reduces exactly to ``K - 11/4``; a value
    <= 0 means no regularity is certified at this K.
    """
    alphas = [budget.alpha] if budget.alpha is not None else ALPHA_GRID
    return max(_inverse_sup_n(budget, float(al)) for al in alphas)


# --- the map ---------------------------------------------------------------------


@dataclass(frozen=True)
class WavefrontMap:
    """Regular-set masks for the two direction charts.

    ``d1_mask[j]`` covers shears ``s_grid[j]`` with |s| <= 1 (slope chart);
    ``d2_mask[j]`` covers reciprocal slopes ``p_grid[j]`` with |p| < 1, i.e.
    geometric slopes 1/p beyond the first chart; |s| = 1 belongs to the
    first chart.  True = regular (rapid decay uniformly over a 3x3x3
    neighborhood); the detected wavefront estimate is the complement.
    """

    d1_mask: np.ndarray
    d2_mask: np.ndarray
    s_grid: np.ndarray
    p_grid: np.ndarray
    threshold_k: float
    d1_report: DecayReport
    d2_report: DecayReport
    field_spacing: float
    field_origin: tuple[float, float]

    def detected_d1(self) -> np.ndarray:
        cover = np.abs(self.s_grid) <= 1.0 + 1e-12
        return (~self.d1_mask) & cover[:, None, None]

    def detected_d2(self) -> np.ndarray:
        cover = np.abs(self.p_grid) < 1.0 - 1e-12
        return (~self.d2_mask) & cover[:, None, None]


def _box_sup(mags: np.ndarray) -> np.ndarray:
    # uniform-constant surrogate: supremum over the 3-shear x 3x3-translation
    # neighborhood per scale, clamped at the grid edges
    return maximum_filter(mags, size=(1, 3, 3, 3), mode="nearest")


def magnitude_stack(
    f: SampledField2D,
    spec: ShearletSpec,
    a_grid: np.ndarray,
    s_grid: np.ndarray,
    *,
    dtype=np.float32,
    threads: int | None = None,
) -> np.ndarray:
    """Coefficient magnitudes per (scale, shear, t) without keeping the
    complex volume; scales are processed one at a time."""
    from .xform import FieldMeta, _batch_inverse, _multiplier_stack, _resolution_warning
    from .grid import dft_forward

    a_grid = np.asarray(a_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    _resolution_warning(a_grid, f.spacing)
    meta = FieldMeta.of(f)
    F = dft_forward(f)
    out = np.empty((len(a_grid), len(s_grid), f.n1, f.n2), dtype=dtype)

    def run(i: int) -> None:
        G = _multiplier_stack(spec, F, float(a_grid[i]), s_grid)
        out[i] = np.abs(_batch_inverse(G, meta)).astype(dtype)

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(run, range(len(a_grid))))
    else:
        for i in range(len(a_grid)):
            run(i)
    return out


def wavefront_map(
    f: SampledField2D,
    spec: ShearletSpec,
    a_grid: np.ndarray,
    s_grid: np.ndarray,
    threshold_k: float = 2.0,
    *,
    fit_range: tuple[float, float] | None = None,
    floor: float | None = None,
    require_full_column: bool = False,
    threads: int | None = None,
) -> WavefrontMap:
    """Classify every (translation, direction) node by decay of its coefficients.

    Runs the slope chart with the given generator over ``s_grid`` (which must
    cover [-1, 1]) and the reciprocal chart built from the coordinate swaps
    of the same elements, with the grid read as reciprocal slopes.  A node is
    regular when the fitted exponent reaches ``threshold_k`` (at-floor nodes
    count as rapid) uniformly over its 3-shear x 3x3-translation
    neighborhood.

    The uniformity over a neighborhood is realized by fitting the decay of
    the neighborhood supremum (3 shears x 3x3 translations) of the
    magnitudes: the supremum is exactly the uniform-constant estimate, and it
    is insensitive to the isolated phase zeros any oscillating generator
    produces at single nodes.  ``require_full_column=True`` only fits nodes
    whose pooled magnitudes clear the floor at every scale of the window, so
    partially-buried columns read as at-floor instead of contributing
    unreliable slopes.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.min() > -1.0 + 1e-12 or s_grid.max() < 1.0 - 1e-12:
        raise ValueError("s_grid must cover [-1, 1]")
    if not threshold_k > 0:
        raise ValueError("threshold_k must be positive")
    a_grid = np.asarray(a_grid, dtype=float)
    sel = _select_scales(a_grid, fit_range)

    from .xform import swap_axes_field

    mags1 = _box_sup(magnitude_stack(f, spec, a_grid[sel], s_grid, threads=threads))
    # vertical chart: coordinate-swapped elements = transform of the
    # transposed field, translation axes swapped back
    mags2 = _box_sup(np.ascontiguousarray(np.swapaxes(
        magnitude_stack(swap_axes_field(f), spec, a_grid[sel], s_grid, threads=threads),
        -2, -1,
    )))
    if floor is None:
        # one noise floor for both charts, so a chart that carries none of the
        # field's energy reads as at-floor rather than as fitted junk
        floor = 1e-12 * max(float(mags1.max()), float(mags2.max()))
    rep1 = _fit_from_mags(mags1, a_grid[sel], floor, fit_range, require_full_column)
    del mags1
    rep2 = _fit_from_mags(mags2, a_grid[sel], floor, fit_range, require_full_column)
    del mags2
    ok1 = (rep1.slope_map >= threshold_k) | rep1.at_floor
    ok2 = (rep2.slope_map >= threshold_k) | rep2.at_floor

    d1 = ok1 & (np.abs(s_grid) <= 1.0 + 1e-12)[:, None, None]
    d2 = ok2 & (np.abs(s_grid) < 1.0 - 1e-12)[:, None, None]
    return WavefrontMap(
        d1_mask=d1,
        d2_mask=d2,
        s_grid=s_grid,
        p_grid=s_grid,
        threshold_k=float(threshold_k),
        d1_report=rep1,
        d2_report=rep2,
        field_spacing=f.spacing,
        field_origin=f.origin,
    )


def export_wavefront_csv(wfmap: WavefrontMap, path) -> None:
    """Rows (t1, t2, s, slope, r2, in_D) for both charts.

    Chart-2 rows list the geometric slope ``1/p`` (``inf`` at p = 0).
    """
    h = wfmap.field_spacing
    o1, o2 = wfmap.field_origin
    n1, n2 = wfmap.d1_report.slope_map.shape[1:]
    t1 = o1 + h * np.arange(n1)
    t2 = o2 + h * np.arange(n2)
    with open(path, "w", newline="") as fh:
        fh.write("t1,t2,s,slope,r2,in_D\n")
        for chart, rep, mask, grid, to_slope in (
            ("d1", wfmap.d1_report, wfmap.d1_mask, wfmap.s_grid, lambda s: s),
            ("d2", wfmap.d2_report, wfmap.d2_mask, wfmap.p_grid,
             lambda p: np.inf if p == 0 else 1.0 / p),
        ):
            cover = (
                np.abs(grid) <= 1.0 + 1e-12 if chart == "d1"
                else np.abs(grid) < 1.0 - 1e-12
            )
            for j, g in enumerate(grid):
                if not cover[j]:
                    continue
                sl = to_slope(float(g))
                for i1 in range(n1):
                    for i2 in range(n2):
                        k = rep.slope_map[j, i1, i2]
                        r2 = rep.r2_map[j, i1, i2]
                        fh.write(
                            f"{t1[i1]!r},{t2[i2]!r},{sl!r},"
                            f"{'inf' if np.isinf(k) else repr(float(k))},"
                            f"{'nan' if np.isnan(r2) else repr(float(r2))},"
                            f"{int(mask[j, i1, i2])}\n"
                        )


def export_min_slope_pgm(wfmap: WavefrontMap, path) -> None:
    """8-bit PGM heat map of the minimum slope over directions per t-node.

    At-floor nodes render at the bright end; low (detected) slopes are dark.
    """
    stack = np.concatenate([wfmap.d1_report.slope_map, wfmap.d2_report.slope_map])
    finite = np.isfinite(stack)
    hi = float(stack[finite].max()) if finite.any() else 1.0
    lo = float(stack[finite].min()) if finite.any() else 0.0
    span = hi - lo if hi > lo else 1.0
    mins = np.where(np.isfinite(stack), stack, hi).min(axis=0)
    img = np.clip((mins - lo) / span * 255.0, 0.0, 255.0).astype(np.uint8)
    n1, n2 = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{n2} {n1}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
