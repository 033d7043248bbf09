"""Seeded random sampling and statistical verification.

RNG contract
------------
All randomness is counter-based SplitMix64.  A ``SeedSpec`` is a
(master_seed, stream_index) pair; the stream key is

    key = mix64(master_seed + (stream_index + 1) * GOLDEN)   (mod 2**64)

and draw t of a stream is ``mix64(key + (t + 1) * GOLDEN)`` mapped to
[0, 1) through its top 53 bits.  There is no mutable generator state:
every draw is a pure function of (master_seed, stream_index, t).  Batch
routines give sample s the stream ``stream_index + s``, so a batch slot
equals the corresponding single-draw call bit for bit, and results do not
depend on thread count or batch splitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats as scipy_stats

from kaltseq import _kernels
from kaltseq.core import InvariantError, greedy_scan, rank_permutation
from kaltseq.reports import CheckResult

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

ALPHA = 1e-3  # level for every statistical accept/reject in this module


@dataclass(frozen=True)
class SeedSpec:
    """Fully determines every random draw of a run."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be >= 0")

    def stream(self, offset: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_index + offset)

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "stream_index": self.stream_index}


def _mix64(z: int) -> int:
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def stream_key(seed: SeedSpec) -> int:
    return _mix64((seed.master_seed + (seed.stream_index + 1) * GOLDEN) & MASK64)


def stream_uniform(seed: SeedSpec, t: int) -> float:
    """Draw t of the stream, as the kernels compute it."""
    return (_mix64((stream_key(seed) + (t + 1) * GOLDEN) & MASK64) >> 11) * 2.0 ** -53


def sample_real_seq(n: int, seed: SeedSpec) -> np.ndarray:
    """n independent uniforms on [0,1): counters 0..n-1 of the stream."""
    if n < 0:
        raise ValueError("n must be >= 0")
    key = np.uint64(stream_key(seed))
    t = np.arange(1, n + 1, dtype=np.uint64)
    z = key + t * np.uint64(GOLDEN)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def sample_permutation(n: int, seed: SeedSpec, method: str = "ranks") -> tuple[int, ...]:
    """Uniform permutation of 1..n.

    "ranks" (default) ranks a fresh uniform vector; "shuffle" runs
    Fisher-Yates on the same stream.  Both are exactly uniform; the tests
    compare their empirical laws.
    """
    if method == "ranks":
        return rank_permutation(sample_real_seq(n, seed))
    if method == "shuffle":
        perm = list(range(1, n + 1))
        for i in range(n - 1, 0, -1):
            j = int(stream_uniform(seed, n - 1 - i) * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return tuple(perm)
    raise ValueError("method must be 'ranks' or 'shuffle'")


def _require_one_threshold(k, x):
    if (k is None) == (x is None):
        raise ValueError("give exactly one of k or x")
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    if x is not None and not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")


def sample_L_direct(n: int, seed: SeedSpec, k: Optional[int] = None,
                    x: Optional[float] = None) -> int:
    """One draw of the longest-alternating-subsequence length.

    k-mode: greedy on a fresh uniform permutation (Fisher-Yates).
    x-mode: greedy on fresh uniforms with the reject-high-start
    bookkeeping, so the draw is 0 when every value exceeds 1-x (an event
    of probability x^n on which the maximal subsequence is a singleton).
    This is the exact law of the binomial mixture; see the ledgered note
    on mixture semantics.

    Matches the corresponding batch kernel slot bit for bit.
    """
    _require_one_threshold(k, x)
    if x is not None:
        trace = greedy_scan(sample_real_seq(n, seed), x, reject_ceiling=1.0 - x)
        return len(trace.committed) + (trace.provisional is not None)
    perm = sample_permutation(n, seed, method="shuffle")
    trace = greedy_scan(perm, k)
    return len(trace.committed) + (trace.provisional is not None)


def sample_L_by_thinning_recipe(n: int, x: float, seed: SeedSpec) -> int:
    """One length draw via the binomial recipe: keep each uniform iff it is
    below 1-x (kept count is Bin(n, 1-x), kept values iid uniform below
    1-x, hence rank-uniform), then take the ordinary alternating length of
    the kept subsequence."""
    if not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    y = sample_real_seq(n, seed)
    survivors = y[y < 1.0 - x]
    trace = greedy_scan(survivors, 0.0)
    return len(trace.committed) + (trace.provisional is not None)


_METHOD_KERNELS = {"direct", "thinning", "binomial"}


def draw_lengths(n: int, samples: int, seed: SeedSpec, k: Optional[int] = None,
                 x: Optional[float] = None, method: str = "direct") -> np.ndarray:
    """Batch of independent length draws; sample s uses stream
    ``seed.stream_index + s``.

    x-mode methods: "direct" (one-pass greedy with reject-high-start
    bookkeeping), "thinning" (materialize the shifted accepted values,
    then zero-threshold greedy), "binomial" (fixed-threshold survivor
    recount).  All three have the same law; k-mode supports only "direct".
    """
    _require_one_threshold(k, x)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if method not in _METHOD_KERNELS:
        raise ValueError(f"unknown method {method!r}")
    master = seed.master_seed & MASK64
    base = seed.stream_index
    if k is not None:
        if method != "direct":
            raise ValueError("k-mode supports only the direct method")
        return _kernels.batch_L_k(n, k, samples, master, base)
    if method == "direct":
        return _kernels.batch_L_x(n, float(x), samples, master, base, True)
    if method == "thinning":
        return _kernels.batch_L_x_two_phase(n, float(x), samples, master, base)
    return _kernels.batch_L_binomial_recipe(n, float(x), samples, master, base)


# ---------------------------------------------------------------------------
# thinning transform


@dataclass(frozen=True)
class ThinningRecord:
    """Accepted indices (0-based) and their shifted values z.

    Replaying the reject-high-start greedy on the same input reproduces
    ``accepted`` exactly; each z lies in [0, 1-x].
    """

    accepted: tuple[int, ...]
    z_values: tuple[float, ...]
    x: float


def thinning_transform(y: Sequence[float], x: float) -> ThinningRecord:
    """Run the reject-high-start greedy and shift each accepted value that
    arrived after an up step down by x, mapping accepted values to iid
    uniforms on [0, 1-x] independent of the acceptance pattern."""
    if not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    trace = greedy_scan(y, x, reject_ceiling=1.0 - x)
    z = tuple(y[i] - x if kind == "after_up" else float(y[i])
              for i, kind in zip(trace.accepted, trace.kinds))
    return ThinningRecord(accepted=trace.accepted, z_values=z, x=x)


# ---------------------------------------------------------------------------
# estimators


@dataclass(frozen=True)
class McSummary:
    estimate: float
    std_error: float
    samples: int
    seed: SeedSpec
    target: str


@dataclass(frozen=True)
class MomentsEstimate:
    mean: McSummary
    variance: McSummary


def _jackknife_variance_se(values: np.ndarray) -> float:
    """Delete-one jackknife standard error of the ddof=1 sample variance."""
    v = values.astype(np.float64)
    n = v.shape[0]
    if n < 3:
        return float("nan")
    s1 = v.sum()
    s2 = (v * v).sum()
    loo_mean = (s1 - v) / (n - 1)
    loo_var = ((s2 - v * v) - (n - 1) * loo_mean ** 2) / (n - 2)
    return float(np.sqrt((n - 1) / n * ((loo_var - loo_var.mean()) ** 2).sum()))


def estimate_moments(n: int, samples: int, seed: SeedSpec, k: Optional[int] = None,
                     x: Optional[float] = None, method: str = "direct") -> MomentsEstimate:
    """Sample mean (with standard error) and sample variance (with
    delete-one jackknife standard error) of the length."""
    if samples < 100:
        raise ValueError("samples must be >= 100")
    lengths = draw_lengths(n, samples, seed, k=k, x=x, method=method)
    v = lengths.astype(np.float64)
    mean = float(v.mean())
    mean_se = float(v.std(ddof=1) / math.sqrt(samples))
    var = float(v.var(ddof=1))
    var_se = _jackknife_variance_se(v)
    label = f"k={k}" if k is not None else f"x={x}"
    return MomentsEstimate(
        mean=McSummary(mean, mean_se, samples, seed, f"mean length, n={n}, {label}"),
        variance=McSummary(var, var_se, samples, seed, f"variance of length, n={n}, {label}"),
    )


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov statistic


def ks_sup(values: Sequence[float]) -> float:
    """Exact sup over [0,1] of |empirical CDF - identity|, evaluated at the
    order statistics: max_i max(i/n - y_(i), y_(i) - (i-1)/n)."""
    y = np.sort(np.asarray(values, dtype=np.float64))
    n = y.shape[0]
    if n == 0:
        raise ValueError("ks_sup requires at least one value")
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(np.maximum(i / n - y, y - (i - 1) / n).max())


# ---------------------------------------------------------------------------
# sandwich trials


@dataclass(frozen=True)
class SandwichOutcome:
    n: int
    k: int
    trials: int
    x1: float
    x2: float
    holds: int
    lower_violated: int
    upper_violated: int
    ks_exceed: int
    ks_threshold: float
    seed: SeedSpec

    @property
    def violation_fraction(self) -> float:
        return (self.trials - self.holds) / self.trials

    @property
    def ks_exceed_fraction(self) -> float:
        return self.ks_exceed / self.trials


def sandwich_bounds(n: int, k: int) -> tuple[float, float]:
    """The two real thresholds k/n -+ n^(-1/3) that bracket the integer
    threshold k after the rank map."""
    margin = n ** (-1.0 / 3.0)
    return k / n - margin, k / n + margin


def sandwich_trials(n: int, k: int, trials: int, seed: SeedSpec) -> SandwichOutcome:
    """Draw y, compute the three greedy lengths and the KS supremum per
    trial, and tally the two-sided inequality
    L(x2 side) <= L(integer side on ranks) <= L(x1 side).

    Whenever the KS supremum is at most n^(-1/3)/2, the inequality is a
    theorem; a violation under that bound raises InvariantError.
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..{n - 1} (got {k})")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x1, x2 = sandwich_bounds(n, k)
    if x1 < 0:
        raise ValueError(
            f"lower threshold x1 = k/n - n^(-1/3) = {x1:.6f} is negative; "
            "increase k or n")
    if x2 >= 1:
        raise ValueError(
            f"upper threshold x2 = k/n + n^(-1/3) = {x2:.6f} is not below 1; "
            "decrease k or increase n")
    L_k, L_x1, L_x2, ks = _kernels.sandwich_batch(
        n, k, x1, x2, trials, seed.master_seed & MASK64, seed.stream_index)
    violated = (L_x2 > L_k) | (L_k > L_x1)
    threshold = 0.5 * n ** (-1.0 / 3.0)
    safe = ks <= threshold
    bad = violated & safe
    if bad.any():
        t = int(np.argmax(bad))
        raise InvariantError(
            f"sandwich inequality failed on trial {t} although ks_sup="
            f"{ks[t]:.6g} <= {threshold:.6g}; this is mathematically impossible")
    return SandwichOutcome(
        n=n, k=k, trials=trials, x1=x1, x2=x2,
        holds=int((~violated).sum()),
        lower_violated=int((L_x2 > L_k).sum()),
        upper_violated=int((L_k > L_x1).sum()),
        ks_exceed=int((ks > threshold).sum()),
        ks_threshold=threshold,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# thinning validation


@dataclass(frozen=True)
class ThinningReport:
    n: int
    x: float
    runs: int
    seed: SeedSpec
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def validate_thinning(n: int, x: float, runs: int, seed: SeedSpec,
                      skip_up_shift: bool = False) -> ThinningReport:
    """Statistical validation of the thinning transform at level ALPHA.

    Checks: (a) pooled z/(1-x) is uniform (KS), (b) every index is accepted
    with frequency 1-x (4-sigma bands), (c) acceptance count and mean z are
    uncorrelated (4-sigma band), plus mean/variance of the acceptance count
    against Bin(n, 1-x).  ``skip_up_shift`` runs the deliberately corrupted
    transform for mutation testing; (a) must then fail.
    """
    if runs < 1000:
        raise ValueError("runs must be >= 1000")
    if not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    mask, z, zlen = _kernels.thinning_batch(
        n, float(x), runs, seed.master_seed & MASK64, seed.stream_index, skip_up_shift)
    counts = zlen.astype(np.float64)
    pooled = np.concatenate([z[i, :zlen[i]] for i in range(runs)]) / (1.0 - x)

    ks_p = float(scipy_stats.kstest(pooled, "uniform").pvalue)
    checks = [CheckResult(
        name="pooled_z_uniform_ks",
        observed=ks_p,
        expected=f"KS p-value >= {ALPHA} against U[0, 1-x] after rescaling",
        passed=ks_p >= ALPHA,
    )]

    freq = np.asarray(mask, dtype=np.float64).mean(axis=0)
    sigma = math.sqrt(x * (1.0 - x) / runs)
    worst = float(np.abs(freq - (1.0 - x)).max())
    checks.append(CheckResult(
        name="per_index_acceptance_frequency",
        observed=worst,
        expected=f"max index deviation from 1-x = {1 - x} within 4 sigma = {4 * sigma:.6g}",
        band=(0.0, 4 * sigma),
        passed=worst <= 4 * sigma,
    ))

    mean_z = np.array([z[i, :zlen[i]].mean() if zlen[i] > 0 else np.nan
                       for i in range(runs)])
    usable = ~np.isnan(mean_z)
    corr = float(np.corrcoef(counts[usable], mean_z[usable])[0, 1])
    corr_band = 4.0 / math.sqrt(int(usable.sum()))
    checks.append(CheckResult(
        name="count_vs_mean_z_correlation",
        observed=corr,
        expected=f"|correlation| within null 4-sigma band {corr_band:.6g}",
        band=(-corr_band, corr_band),
        passed=abs(corr) <= corr_band,
    ))

    target_mean = n * (1.0 - x)
    target_var = n * x * (1.0 - x)
    mean_se = math.sqrt(target_var / runs)
    obs_mean = float(counts.mean())
    checks.append(CheckResult(
        name="acceptance_count_mean",
        observed=obs_mean,
        expected=f"within 4 SE of n(1-x) = {target_mean}",
        band=(target_mean - 4 * mean_se, target_mean + 4 * mean_se),
        passed=abs(obs_mean - target_mean) <= 4 * mean_se,
    ))
    obs_var = float(counts.var(ddof=1))
    checks.append(CheckResult(
        name="acceptance_count_variance",
        observed=obs_var,
        expected=f"within 5% of n x (1-x) = {target_var}",
        band=(0.95 * target_var, 1.05 * target_var),
        passed=abs(obs_var - target_var) <= 0.05 * target_var,
    ))
    return ThinningReport(n=n, x=x, runs=runs, seed=seed, checks=tuple(checks))


# ---------------------------------------------------------------------------
# variance curve


@dataclass(frozen=True)
class VarianceCurvePoint:
    x: float
    variance: float
    std_error: float


@dataclass(frozen=True)
class VarianceCurve:
    n: int
    samples_per_point: int
    points: tuple[VarianceCurvePoint, ...]
    fitted_argmax: float
    seed: SeedSpec


def variance_curve(n: int, x_grid: Sequence[float], samples_per_point: int,
                   seed: SeedSpec) -> VarianceCurve:
    """Monte Carlo variance of the length across a threshold grid, plus the
    argmax of a least-squares quadratic fit (the analytic curve
    (1-x)(2+5x) 4n/45 is an exact quadratic with maximum at x = 0.3)."""
    if samples_per_point < 10_000:
        raise ValueError("samples_per_point must be >= 10^4")
    points = []
    for i, x in enumerate(x_grid):
        est = estimate_moments(n, samples_per_point,
                               seed.stream(i * samples_per_point), x=float(x))
        points.append(VarianceCurvePoint(float(x), est.variance.estimate,
                                         est.variance.std_error))
    xs = np.array([p.x for p in points])
    vs = np.array([p.variance for p in points])
    a, b, _c = np.polyfit(xs, vs, 2)
    if a >= 0:
        raise InvariantError("variance curve fit is not concave; no interior maximum")
    return VarianceCurve(n=n, samples_per_point=samples_per_point,
                         points=tuple(points), fitted_argmax=float(-b / (2 * a)),
                         seed=seed)


# ---------------------------------------------------------------------------
# distribution comparison helpers


def empirical_counts(lengths: np.ndarray, m_max: int) -> np.ndarray:
    return np.bincount(lengths, minlength=m_max + 1)


def chi_square_gof(observed: np.ndarray, probs: np.ndarray) -> tuple[float, int, float]:
    """Chi-square goodness of fit with adjacent pooling of expected
    counts below 5.  Returns (statistic, dof, p-value)."""
    n = observed.sum()
    expected = probs * n
    obs_pool, exp_pool = [], []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            obs_pool.append(acc_o)
            exp_pool.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0:
        if exp_pool:
            obs_pool[-1] += acc_o
            exp_pool[-1] += acc_e
        else:
            obs_pool.append(acc_o)
            exp_pool.append(acc_e)
    obs_arr = np.array(obs_pool)
    exp_arr = np.array(exp_pool)
    stat = float(((obs_arr - exp_arr) ** 2 / exp_arr).sum())
    dof = max(len(obs_pool) - 1, 1)
    return stat, dof, float(scipy_stats.chi2.sf(stat, dof))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    m = max(len(p), len(q))
    pa = np.zeros(m)
    qa = np.zeros(m)
    pa[:len(p)] = p
    qa[:len(q)] = q
    return 0.5 * float(np.abs(pa - qa).sum())
