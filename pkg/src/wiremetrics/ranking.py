"""Turn pairwise preference records into method rankings.

Three independent scoring routes over the same records — simple win rates,
a Bradley-Terry ability fit, and an SVD factor score — plus the agreement,
panel-error, and bootstrap-stability analyses used to sanity-check them.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import expit
from scipy.stats import kendalltau as _scipy_kendalltau

from .geometry import Wireframe
from .metrics import JUDGE_METRICS, evaluate

__all__ = [
    "ChoiceRecord",
    "PreferenceModelParams",
    "RankingTable",
    "WinRateMatrix",
    "load_records",
    "save_records",
    "win_rates",
    "fit_bt",
    "implied_win_rates",
    "to_elo",
    "win_rate_matrix",
    "factor_scores",
    "svd_quality",
    "kendall_tau",
    "agreement",
    "agreement_matrix",
    "metric_as_judge",
    "panel_error",
    "bootstrap_stability",
    "ranking_table",
    "JUDGE_METRICS",
]

log = logging.getLogger(__name__)

CHOICES = ("left", "right", "equal")

# |theta| ceiling for methods with one-sided records (pure win or pure loss
# streaks push the unregularized optimum to infinity).
ABILITY_BOUND = 10.0


@dataclass(frozen=True)
class ChoiceRecord:
    """One pairwise judgment: rater saw (left, right) for a house and chose."""

    rater: str
    house: str
    left: str
    right: str
    choice: str
    is_consistency_repeat: bool = False
    timestamp: float = 0.0

    def __post_init__(self):
        if self.left == self.right:
            raise ValueError(f"left and right must differ (both {self.left!r})")
        if not self.left or not self.right or not self.house:
            raise ValueError("method and house ids must be non-empty")
        if self.choice not in CHOICES:
            raise ValueError(f"choice must be one of {CHOICES}, got {self.choice!r}")

    def pair_key(self) -> tuple[str, str, str]:
        """(house, low method, high method) — side-order independent."""
        a, b = sorted((self.left, self.right))
        return (self.house, a, b)

    def oriented_choice(self) -> str:
        """Choice re-expressed relative to the sorted pair order."""
        if self.choice == "equal":
            return "equal"
        winner = self.left if self.choice == "left" else self.right
        return "first" if winner == min(self.left, self.right) else "second"

    def to_json(self) -> str:
        return json.dumps(
            {
                "rater": self.rater,
                "house": self.house,
                "left": self.left,
                "right": self.right,
                "choice": self.choice,
                "is_consistency_repeat": self.is_consistency_repeat,
                "timestamp": self.timestamp,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "ChoiceRecord":
        d = json.loads(line)
        return cls(
            rater=d["rater"],
            house=d["house"],
            left=d["left"],
            right=d["right"],
            choice=d["choice"],
            is_consistency_repeat=bool(d.get("is_consistency_repeat", False)),
            timestamp=float(d.get("timestamp", 0.0)),
        )


def load_records(path) -> list[ChoiceRecord]:
    """Read line-delimited records; blank lines are skipped."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ChoiceRecord.from_json(line))
    return out


def save_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def _scored(records, include_repeats: bool):
    for r in records:
        if r.is_consistency_repeat and not include_repeats:
            continue
        yield r


def win_rates(records, include_repeats: bool = False) -> dict[str, float]:
    """Points per appearance: win 1, tie 0.5, loss 0.

    Consistency repeats are excluded by default — they re-show a pair to
    measure the rater, not the methods.
    """
    records = list(_scored(records, include_repeats))
    if not records:
        raise ValueError("no scorable records")
    points: dict[str, float] = {}
    seen: dict[str, int] = {}
    for r in records:
        seen[r.left] = seen.get(r.left, 0) + 1
        seen[r.right] = seen.get(r.right, 0) + 1
        points.setdefault(r.left, 0.0)
        points.setdefault(r.right, 0.0)
        if r.choice == "equal":
            points[r.left] += 0.5
            points[r.right] += 0.5
        else:
            points[r.left if r.choice == "left" else r.right] += 1.0
    return {m: points[m] / seen[m] for m in sorted(seen)}


# ---------------------------------------------------------------------------
# Bradley-Terry fit
# ---------------------------------------------------------------------------


@dataclass
class PreferenceModelParams:
    """Fitted latent abilities with the (scale, offset) they were fit under."""

    abilities: dict[str, float]
    scale: float = 1.0
    offset: float = 0.0
    n_components: int = 1
    diverged: tuple[str, ...] = ()

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        for m, v in self.abilities.items():
            if not math.isfinite(v):
                raise ValueError(f"non-finite ability for {m!r}")


def _win_matrix(records, include_repeats: bool):
    """(methods, W) where W[i, j] = wins of i over j, ties as 0.5 each way."""
    methods = sorted({m for r in records for m in (r.left, r.right)})
    index = {m: k for k, m in enumerate(methods)}
    W = np.zeros((len(methods), len(methods)))
    for r in _scored(records, include_repeats):
        i, j = index[r.left], index[r.right]
        if r.choice == "equal":
            W[i, j] += 0.5
            W[j, i] += 0.5
        elif r.choice == "left":
            W[i, j] += 1.0
        else:
            W[j, i] += 1.0
    return methods, W


def fit_bt(
    records,
    s: float = 1.0,
    o: float = 0.0,
    lr: float = 0.05,
    n_iter: int = 4000,
    seed: int = 0,
    tol: float = 1e-9,
    include_repeats: bool = False,
) -> PreferenceModelParams:
    """Fit abilities by full-batch Adam on the pairwise cross-entropy.

    The win probability model is sigmoid((theta_i - theta_j)/s + o); ties
    enter as a half-weight win each way.  Abilities are mean-centered per
    connected component of the comparison graph (the gauge is otherwise
    free), and clamped to +-10 when a method has only wins or only losses.
    """
    methods, W = _win_matrix(records, include_repeats)
    if not methods:
        raise ValueError("no scorable records")
    n = len(methods)
    n_comp, labels = connected_components((W + W.T) > 0, directed=False)
    if n_comp > 1:
        warnings.warn(
            f"comparison graph has {n_comp} components; abilities are only "
            "comparable within a component",
            stacklevel=2,
        )

    rng = np.random.default_rng(seed)
    theta = rng.normal(scale=0.1, size=n)
    m_t = np.zeros(n)
    v_t = np.zeros(n)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    for step in range(1, n_iter + 1):
        z = (theta[:, None] - theta[None, :]) / s + o
        p = expit(z)
        # dL/dtheta_k = sum_j (p_kj - 1) W_kj / s + sum_i (1 - p_ik) W_ik / s
        grad = ((p - 1.0) * W).sum(axis=1) / s + ((1.0 - p) * W).sum(axis=0) / s
        if np.abs(grad).max() < tol:
            break
        m_t = beta1 * m_t + (1 - beta1) * grad
        v_t = beta2 * v_t + (1 - beta2) * grad * grad
        m_hat = m_t / (1 - beta1**step)
        v_hat = v_t / (1 - beta2**step)
        theta -= lr * m_hat / (np.sqrt(v_hat) + eps)
        np.clip(theta, -ABILITY_BOUND, ABILITY_BOUND, out=theta)

    # a method that never lost (or never won) a point has no finite optimum;
    # pin it to the ability bound before fixing the gauge
    one_sided = []
    for k in range(n):
        wins, losses = W[k].sum(), W[:, k].sum()
        if (wins > 0) != (losses > 0):
            one_sided.append(methods[k])
            theta[k] = ABILITY_BOUND if wins > 0 else -ABILITY_BOUND
    if one_sided:
        warnings.warn(
            f"methods with only wins or only losses: {one_sided}; abilities clamped",
            stacklevel=2,
        )

    for c in range(n_comp):
        mask = labels == c
        theta[mask] -= theta[mask].mean()
    np.clip(theta, -ABILITY_BOUND, ABILITY_BOUND, out=theta)

    return PreferenceModelParams(
        abilities={m: float(t) for m, t in zip(methods, theta)},
        scale=s,
        offset=o,
        n_components=n_comp,
        diverged=tuple(one_sided),
    )


def implied_win_rates(params: PreferenceModelParams) -> dict[str, float]:
    """Mean model win probability of each method against all the others."""
    methods = sorted(params.abilities)
    if len(methods) < 2:
        return {m: 0.5 for m in methods}
    th = np.array([params.abilities[m] for m in methods])
    p = expit((th[:, None] - th[None, :]) / params.scale + params.offset)
    np.fill_diagonal(p, 0.0)
    rates = p.sum(axis=1) / (len(methods) - 1)
    return {m: float(r) for m, r in zip(methods, rates)}


def to_elo(params: PreferenceModelParams, s: float = 400.0, o: float = 800.0) -> dict[str, float]:
    """Affine map of abilities onto the chess-style scale: rating = s*theta + o."""
    return {m: s * t + o for m, t in params.abilities.items()}


# ---------------------------------------------------------------------------
# SVD factor score
# ---------------------------------------------------------------------------


@dataclass
class WinRateMatrix:
    """Methods-by-raters table of per-rater pick rates."""

    matrix: np.ndarray  # (n_methods, n_raters), entries in [0, 1]
    methods: list[str]
    raters: list[str]

    def log_odds(self, clamp: float = 1e-3) -> np.ndarray:
        m = np.clip(self.matrix, clamp, 1.0 - clamp)
        return np.log(m / (1.0 - m))


def win_rate_matrix(records, include_repeats: bool = False) -> WinRateMatrix:
    """Per-rater pick rates; cells a rater never saw sit at the neutral 0.5.

    Rater columns with no observations at all are dropped with a warning.
    """
    records = list(_scored(records, include_repeats))
    if not records:
        raise ValueError("no scorable records")
    methods = sorted({m for r in records for m in (r.left, r.right)})
    raters = sorted({r.rater for r in records})
    mi = {m: k for k, m in enumerate(methods)}
    ri = {r: k for k, r in enumerate(raters)}
    points = np.zeros((len(methods), len(raters)))
    seen = np.zeros((len(methods), len(raters)))
    for r in records:
        k = ri[r.rater]
        seen[mi[r.left], k] += 1
        seen[mi[r.right], k] += 1
        if r.choice == "equal":
            points[mi[r.left], k] += 0.5
            points[mi[r.right], k] += 0.5
        else:
            points[mi[r.left if r.choice == "left" else r.right], k] += 1.0
    empty = seen.sum(axis=0) == 0
    if empty.any():
        dropped = [raters[k] for k in np.flatnonzero(empty)]
        warnings.warn(f"raters with no observations dropped: {dropped}", stacklevel=2)
        keep = ~empty
        points, seen = points[:, keep], seen[:, keep]
        raters = [r for r, k in zip(raters, keep) if k]
    with np.errstate(invalid="ignore"):
        M = np.where(seen > 0, points / np.maximum(seen, 1), 0.5)
    return WinRateMatrix(M, methods, raters)


def factor_scores(
    table: WinRateMatrix,
    orient_by: dict[str, float] | None = None,
    clamp: float = 1e-3,
) -> dict[str, float]:
    """First left singular vector of the column-centered log-odds table.

    ``orient_by`` fixes the sign so the factor correlates positively with
    the given per-method scores (typically win rates); without it the raw
    SVD sign is kept.
    """
    if len(table.methods) < 2:
        raise ValueError("need at least 2 methods for a factor score")
    eta = table.log_odds(clamp)
    eta = eta - eta.mean(axis=0, keepdims=True)
    u, _, _ = np.linalg.svd(eta, full_matrices=False)
    q = u[:, 0]
    if orient_by is not None:
        w = np.array([orient_by[m] for m in table.methods])
        if np.dot(q - q.mean(), w - w.mean()) < 0:
            q = -q
    return {m: float(v) for m, v in zip(table.methods, q)}


def svd_quality(records, clamp: float = 1e-3, include_repeats: bool = False) -> dict[str, float]:
    """Factor score of each method from the per-rater pick-rate table."""
    table = win_rate_matrix(records, include_repeats)
    return factor_scores(table, orient_by=win_rates(records, include_repeats), clamp=clamp)


# ---------------------------------------------------------------------------
# rank comparison and agreement
# ---------------------------------------------------------------------------


def kendall_tau(rank_a, rank_b) -> float:
    """Tie-aware Kendall tau-b between two scorings of the same items.

    Mappings are aligned by key; plain sequences by position.
    """
    if isinstance(rank_a, dict) or isinstance(rank_b, dict):
        if set(rank_a) != set(rank_b):
            raise ValueError("rankings must cover the same items")
        keys = sorted(rank_a)
        xs = [rank_a[k] for k in keys]
        ys = [rank_b[k] for k in keys]
    else:
        xs, ys = list(rank_a), list(rank_b)
        if len(xs) != len(ys):
            raise ValueError("rankings must have equal length")
    if len(xs) < 2:
        raise ValueError("need at least 2 items")
    tau = _scipy_kendalltau(xs, ys, variant="b").statistic
    return float(tau)


def _canonical_choices(records) -> dict[tuple[str, str, str], str]:
    """Collapse a judge's records to one choice per (house, pair) key.

    Replicates are resolved by majority; a split vote counts as 'equal'.
    """
    votes: dict[tuple[str, str, str], dict[str, int]] = {}
    for r in records:
        tally = votes.setdefault(r.pair_key(), {})
        c = r.oriented_choice()
        tally[c] = tally.get(c, 0) + 1
    out = {}
    for key, tally in votes.items():
        best = max(tally.values())
        leaders = [c for c, k in tally.items() if k == best]
        out[key] = leaders[0] if len(leaders) == 1 else "equal"
    return out


def agreement(records_a, records_b, exclude_ties: bool = False) -> float:
    """Mean agreement points over the (house, pair) keys both judges rated.

    Same decisive choice scores 1, decisive-vs-equal scores 0.5, opposite
    decisive choices score 0.  With exclude_ties, only keys where both
    judges were decisive count.
    """
    a = _canonical_choices(records_a)
    b = _canonical_choices(records_b)
    shared = sorted(set(a) & set(b))
    if exclude_ties:
        shared = [k for k in shared if a[k] != "equal" and b[k] != "equal"]
    if not shared:
        raise ValueError("judges share no scorable (house, pair) keys")
    total = 0.0
    for k in shared:
        if a[k] == b[k]:
            total += 1.0
        elif a[k] == "equal" or b[k] == "equal":
            total += 0.5
    return total / len(shared)


def agreement_matrix(records, exclude_ties: bool = False):
    """Rater-by-rater agreement over shared pairs.

    Returns (sorted rater ids, square matrix); cells with no shared
    scorable keys are NaN.  Symmetric, diagonal 1.0 by construction.
    """
    by_rater: dict[str, list[ChoiceRecord]] = {}
    for r in records:
        by_rater.setdefault(r.rater, []).append(r)
    raters = sorted(by_rater)
    if not raters:
        raise ValueError("no records")
    m = np.full((len(raters), len(raters)), np.nan)
    for i, a in enumerate(raters):
        for j in range(i, len(raters)):
            try:
                m[i, j] = m[j, i] = agreement(
                    by_rater[a], by_rater[raters[j]], exclude_ties=exclude_ties
                )
            except ValueError:
                pass
    return raters, m


def metric_as_judge(
    metric: str,
    store,
    pairs,
    tie_tol: float = 1e-9,
    **params,
) -> list[ChoiceRecord]:
    """Judge (left, right) candidate pairs by metric value against ground truth.

    ``store`` maps ids to wireframes, with each house id mapping to its
    reference wireframe.  ``pairs`` yields (house, left, right) id triples.
    Pairs whose evaluation fails are skipped and logged.
    """
    if metric not in JUDGE_METRICS:
        raise KeyError(f"{metric!r} is not a judge metric; known: {JUDGE_METRICS}")
    out = []
    for house, left, right in pairs:
        try:
            gt = store[house]
            d_left = _judged_value(metric, store[left], gt, params)
            d_right = _judged_value(metric, store[right], gt, params)
        except Exception as exc:  # noqa: BLE001 - any metric failure skips the pair
            log.warning("skipping pair (%s, %s, %s): %s", house, left, right, exc)
            continue
        if abs(d_left - d_right) <= tie_tol:
            choice = "equal"
        else:
            choice = "left" if d_left < d_right else "right"
        out.append(
            ChoiceRecord(
                rater=f"metric:{metric}",
                house=house,
                left=left,
                right=right,
                choice=choice,
            )
        )
    return out


def _judged_value(metric: str, pred: Wireframe, gt: Wireframe, params: dict) -> float:
    res = evaluate(metric, pred, gt, **params)
    return res.value if res.direction == "lower" else -res.value


# ---------------------------------------------------------------------------
# panel error
# ---------------------------------------------------------------------------


def panel_error(n_raters: int, p_correct: float) -> float:
    """Probability that the majority of independent raters is wrong.

    Exact binomial tail; an even split counts as half an error.
    """
    if n_raters < 1:
        raise ValueError("need at least one rater")
    if not 0.0 < p_correct < 1.0:
        raise ValueError("p_correct must be in (0, 1)")
    q = 1.0 - p_correct
    total = 0.0
    for k in range(n_raters + 1):
        pk = math.comb(n_raters, k) * q**k * p_correct ** (n_raters - k)
        if 2 * k > n_raters:
            total += pk
        elif 2 * k == n_raters:
            total += 0.5 * pk
    return total


# ---------------------------------------------------------------------------
# bootstrap stability
# ---------------------------------------------------------------------------

_BOOTSTRAP_AXES = ("comparisons", "houses", "raters")


@dataclass
class StabilityRow:
    size: int
    mean_tau: float
    ci_low: float
    ci_high: float


@dataclass
class StabilityTable:
    axis: str
    rows: list[StabilityRow]
    confidence: float
    iters: int

    def minimal_adequate_size(self, threshold: float = 0.95) -> int | None:
        """Smallest size whose CI lower bound clears the threshold."""
        for row in sorted(self.rows, key=lambda r: r.size):
            if row.ci_low >= threshold:
                return row.size
        return None


def _encode(records):
    methods = sorted({m for r in records for m in (r.left, r.right)})
    mi = {m: k for k, m in enumerate(methods)}
    left = np.array([mi[r.left] for r in records])
    right = np.array([mi[r.right] for r in records])
    # points for the left / right method of each record
    pts = {"left": (1.0, 0.0), "right": (0.0, 1.0), "equal": (0.5, 0.5)}
    lp = np.array([pts[r.choice][0] for r in records])
    rp = np.array([pts[r.choice][1] for r in records])
    return methods, left, right, lp, rp


def _rates_from_indices(idx, left, right, lp, rp, n_methods):
    pts = np.bincount(left[idx], weights=lp[idx], minlength=n_methods) + np.bincount(
        right[idx], weights=rp[idx], minlength=n_methods
    )
    seen = np.bincount(left[idx], minlength=n_methods) + np.bincount(
        right[idx], minlength=n_methods
    )
    with np.errstate(invalid="ignore"):
        return np.where(seen > 0, pts / np.maximum(seen, 1), np.nan), seen > 0


def bootstrap_stability(
    records,
    axis: str,
    sizes,
    iters: int = 500,
    confidence: float = 0.95,
    seed: int = 0,
    include_repeats: bool = False,
) -> StabilityTable:
    """Rank stability of win rates under subsampling along one axis.

    For each size, draw ``iters`` subsamples without replacement, rank the
    subsample by win rate, and measure Kendall tau against the full-data
    ranking over the methods the subsample observed.  Reports the mean and
    the percentile confidence interval per size.
    """
    if axis not in _BOOTSTRAP_AXES:
        raise ValueError(f"axis must be one of {_BOOTSTRAP_AXES}")
    records = list(_scored(records, include_repeats))
    if not records:
        raise ValueError("no scorable records")
    methods, left, right, lp, rp = _encode(records)
    full, _ = _rates_from_indices(np.arange(len(records)), left, right, lp, rp, len(methods))

    if axis == "comparisons":
        units: list[np.ndarray] = [np.array([i]) for i in range(len(records))]
    else:
        key = (lambda r: r.house) if axis == "houses" else (lambda r: r.rater)
        groups: dict[str, list[int]] = {}
        for i, r in enumerate(records):
            groups.setdefault(key(r), []).append(i)
        units = [np.array(groups[k]) for k in sorted(groups)]

    rng = np.random.default_rng(seed)
    alpha = (1.0 - confidence) / 2.0
    rows = []
    for size in sorted(set(int(s) for s in sizes)):
        if not 1 <= size <= len(units):
            raise ValueError(f"size {size} outside population 1..{len(units)}")
        taus = np.empty(iters)
        for b in range(iters):
            chosen = rng.choice(len(units), size=size, replace=False)
            idx = np.concatenate([units[c] for c in chosen])
            sub, present = _rates_from_indices(idx, left, right, lp, rp, len(methods))
            if present.sum() < 2:
                taus[b] = 0.0
                continue
            tau = _scipy_kendalltau(sub[present], full[present], variant="b").statistic
            # a constant subsample ranking carries no order information
            taus[b] = 0.0 if math.isnan(tau) else tau
        rows.append(
            StabilityRow(
                size=size,
                mean_tau=float(taus.mean()),
                ci_low=float(np.quantile(taus, alpha)),
                ci_high=float(np.quantile(taus, 1.0 - alpha)),
            )
        )
    return StabilityTable(axis=axis, rows=rows, confidence=confidence, iters=iters)


# ---------------------------------------------------------------------------
# combined table
# ---------------------------------------------------------------------------


@dataclass
class RankingTable:
    """Per-method summary across all three scoring routes."""

    methods: list[str]  # sorted by win rate, best first
    win_rate: dict[str, float]
    implied_win_rate: dict[str, float]
    bt_ability: dict[str, float]
    elo: dict[str, float]
    quality_factor: dict[str, float]

    COLUMNS = ("method", "win_rate", "implied_win_rate", "bt_ability", "elo", "quality_factor")

    def rows(self) -> list[tuple]:
        return [
            (
                m,
                self.win_rate[m],
                self.implied_win_rate[m],
                self.bt_ability[m],
                self.elo[m],
                self.quality_factor[m],
            )
            for m in self.methods
        ]

    def to_tsv(self) -> str:
        lines = ["\t".join(self.COLUMNS)]
        for m, wr, iwr, th, elo, q in self.rows():
            lines.append(f"{m}\t{wr:.4f}\t{iwr:.4f}\t{th:.4f}\t{elo:.1f}\t{q:.4f}")
        return "\n".join(lines) + "\n"


def ranking_table(records, seed: int = 0, include_repeats: bool = False) -> RankingTable:
    """Fit every scoring route on the records and assemble one table."""
    wr = win_rates(records, include_repeats)
    params = fit_bt(records, seed=seed, include_repeats=include_repeats)
    try:
        quality = svd_quality(records, include_repeats=include_repeats)
    except ValueError:
        quality = {m: float("nan") for m in wr}
    order = sorted(wr, key=lambda m: (-wr[m], m))
    return RankingTable(
        methods=order,
        win_rate=wr,
        implied_win_rate=implied_win_rates(params),
        bt_ability=params.abilities,
        elo=to_elo(params),
        quality_factor=quality,
    )
