"""Exhaustive enumeration over S_n and exact closed-form statistics.

Everything rational is kept as ``fractions.Fraction`` over Python big
integers; floats appear only when the caller passes an irrational
threshold x.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

import numpy as np

from kaltseq import _kernels
from kaltseq.core import CapacityError, InvariantError

DEFAULT_ENUM_CAP = 11
HARD_ENUM_CAP = 12
TABLE_SCHEMA_VERSION = 1

Rational = Union[int, Fraction]
Threshold = Union[int, Fraction, float]


@dataclass(frozen=True)
class LengthDistribution:
    """Exact counts of the longest-subsequence length over all of S_n."""

    n: int
    k: int
    counts: Mapping[int, int]

    def total(self) -> int:
        return sum(self.counts.values())

    def mean(self) -> Fraction:
        return Fraction(sum(m * c for m, c in self.counts.items()), self.total())

    def second_moment(self) -> Fraction:
        return Fraction(sum(m * m * c for m, c in self.counts.items()), self.total())


@dataclass(frozen=True)
class RationalStat:
    mean: Fraction
    variance: Fraction


@dataclass(frozen=True)
class MixtureDistribution:
    """Law of the length under the binomial-thinning construction."""

    n: int
    x: Threshold
    probs: Mapping[int, Threshold]

    def mean(self):
        return sum(m * p for m, p in self.probs.items())

    def variance(self):
        mu = self.mean()
        return sum(m * m * p for m, p in self.probs.items()) - mu * mu


def enumerate_distribution(n: int, k: int, cap: int = DEFAULT_ENUM_CAP,
                           audit_stride: int = 10_000) -> LengthDistribution:
    """Exact law of the longest k-alternating subsequence length over S_n.

    Runs the greedy algorithm on every permutation, in lexicographic blocks
    fixed by the first element.  A deterministic 1-in-``audit_stride``
    subsample of each block is recomputed with the DP oracle; any mismatch
    aborts the run.
    """
    if cap > HARD_ENUM_CAP:
        raise CapacityError(
            f"enumeration cap {cap} exceeds the hard maximum {HARD_ENUM_CAP}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise CapacityError(
            f"n={n} exceeds the enumeration cap {cap} "
            f"({math.factorial(n)} permutations); raise the cap explicitly up to "
            f"{HARD_ENUM_CAP} if you mean it")
    if not 1 <= k <= max(1, n - 1):
        raise ValueError(f"k must lie in 1..max(1, n-1) = 1..{max(1, n - 1)} (got {k})")
    block_counts, mismatches = _kernels.enumerate_counts(n, k, audit_stride)
    if int(mismatches.sum()) != 0:
        raise InvariantError(
            f"greedy/DP audit failed on {int(mismatches.sum())} permutations at n={n}, k={k}")
    merged = np.asarray(block_counts).sum(axis=0)
    counts = {length: int(c) for length, c in enumerate(merged) if c > 0}
    dist = LengthDistribution(n=n, k=k, counts=counts)
    if dist.total() != math.factorial(n):
        raise InvariantError(
            f"enumeration counted {dist.total()} permutations, expected {n}!")
    return dist


def exact_mean_variance(dist: LengthDistribution) -> RationalStat:
    """Exact rational mean and variance of a length distribution."""
    if not dist.counts:
        raise ValueError("empty distribution")
    mean = dist.mean()
    return RationalStat(mean=mean, variance=dist.second_moment() - mean * mean)


def stanley_mean(n: int) -> Fraction:
    """(4n+1)/6, the exact mean at threshold 1 (stated for n >= 4;
    enumeration shows it also holds at n = 2, 3)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(4 * n + 1, 6)


def stanley_variance(n: int) -> Fraction:
    """8n/45 - 13/180, the exact variance at threshold 1 for n >= 4."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(8 * n, 45) - Fraction(13, 180)


def armstrong_mean(n: int, k: int) -> Fraction:
    """(4(n-k)+5)/6, the conjectured exact mean of the k-threshold length."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..{n - 1} (got {k})")
    return Fraction(4 * (n - k) + 5, 6)


def _exactify(x: Threshold):
    """Fractions in, Fractions out; floats in, floats out."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return float(x)


def x_alternating_mean(n: int, x: Threshold):
    """(2/3) n (1-x) + 1/6: asymptotic mean of the x-threshold length."""
    xv = _exactify(x)
    one_sixth = Fraction(1, 6) if isinstance(xv, Fraction) else 1.0 / 6.0
    two_thirds = Fraction(2, 3) if isinstance(xv, Fraction) else 2.0 / 3.0
    return two_thirds * n * (1 - xv) + one_sixth


def x_alternating_variance(n: int, x: Threshold):
    """(1-x)(2+5x) 4n/45: asymptotic variance of the x-threshold length,
    in the simplified form that drops a constant -13/180 (see
    x_alternating_variance_unsimplified)."""
    xv = _exactify(x)
    scale = Fraction(4 * n, 45) if isinstance(xv, Fraction) else 4.0 * n / 45.0
    return (1 - xv) * (2 + 5 * xv) * scale


def x_alternating_variance_unsimplified(n: int, x: Threshold):
    """8n(1-x)/45 - 13/180 + (4/9) n x (1-x): the variance as produced by
    the law-of-total-variance derivation, before the constant -13/180 is
    dropped.  Differs from x_alternating_variance by exactly 13/180."""
    xv = _exactify(x)
    if isinstance(xv, Fraction):
        return (Fraction(8 * n, 45) * (1 - xv) - Fraction(13, 180)
                + Fraction(4 * n, 9) * xv * (1 - xv))
    return 8.0 * n * (1 - xv) / 45.0 - 13.0 / 180.0 + 4.0 * n / 9.0 * xv * (1 - xv)


def alternating_length_tables(n_max: int, cap: int = DEFAULT_ENUM_CAP,
                              ) -> dict[int, LengthDistribution]:
    """Exact threshold-1 tables for every size 0..n_max.

    Size 0 is the empty permutation with length 0; it carries the whole
    weight of the zero term of the binomial mixture.
    """
    tables: dict[int, LengthDistribution] = {
        0: LengthDistribution(n=0, k=1, counts={0: 1})}
    for z in range(1, n_max + 1):
        tables[z] = enumerate_distribution(z, 1, cap=cap)
    return tables


def mixture_distribution(n: int, x: Threshold,
                         tables: Mapping[int, LengthDistribution]) -> MixtureDistribution:
    """Law of the x-threshold length as a Bin(n, 1-x) mixture of the exact
    threshold-1 tables.

    probs(m) = sum_z C(n,z) (1-x)^z x^(n-z) P(L_z = m).  Exact Fractions
    when x is rational, floats otherwise.
    """
    xv = _exactify(x)
    if not 0 <= xv < 1:
        raise ValueError("x must lie in [0, 1)")
    for z in range(n + 1):
        if z not in tables:
            raise LookupError(
                f"missing exact table for size {z}; build tables up to n={n} first")
    zero = Fraction(0) if isinstance(xv, Fraction) else 0.0
    probs: dict[int, Threshold] = {}
    for z in range(n + 1):
        weight = math.comb(n, z) * (1 - xv) ** z * xv ** (n - z)
        if weight == 0:
            continue
        table = tables[z]
        denom = table.total()
        for m, c in table.counts.items():
            contribution = weight * Fraction(c, denom) if isinstance(xv, Fraction) \
                else weight * (c / denom)
            probs[m] = probs.get(m, zero) + contribution
    total = sum(probs.values())
    if isinstance(xv, Fraction):
        if total != 1:
            raise InvariantError(f"exact mixture probabilities sum to {total}, not 1")
    elif abs(total - 1.0) > 1e-12:
        raise InvariantError(f"mixture probabilities sum to {total}, off by >1e-12")
    return MixtureDistribution(n=n, x=xv, probs=probs)


def format_rational(value: Rational) -> str:
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text)


def tables_to_rows(tables) -> list[tuple[int, int, int, int]]:
    """Flatten distributions (iterable or mapping of any key) to sorted
    (n, k, length, count) rows."""
    dists = tables.values() if isinstance(tables, Mapping) else tables
    rows = []
    for t in sorted(dists, key=lambda d: (d.n, d.k)):
        for length in sorted(t.counts):
            rows.append((t.n, t.k, length, t.counts[length]))
    return rows


def write_tables_csv(path, tables) -> None:
    """CSV schema: header n,k,length,count, one row per attained length."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "k", "length", "count"])
        for row in tables_to_rows(tables):
            writer.writerow(row)


def read_tables_csv(path) -> dict[tuple[int, int], LengthDistribution]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append((int(rec["n"]), int(rec["k"]), int(rec["length"]), int(rec["count"])))
    return _tables_from_rows(rows)


def write_tables_json(path, tables) -> None:
    payload = {
        "schema_version": TABLE_SCHEMA_VERSION,
        "rows": [{"n": n, "k": k, "length": length, "count": count}
                 for n, k, length, count in tables_to_rows(tables)],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_tables_json(path) -> dict[tuple[int, int], LengthDistribution]:
    with open(path) as fh:
        payload = json.load(fh)
    rows = [(rec["n"], rec["k"], rec["length"], rec["count"]) for rec in payload["rows"]]
    return _tables_from_rows(rows)


def by_size(tables: Mapping[tuple[int, int], LengthDistribution],
            k: int = 1) -> dict[int, LengthDistribution]:
    """Select one threshold from an imported table collection, keyed by size
    (the form mixture_distribution consumes)."""
    out = {t.n: t for t in tables.values() if t.k == k}
    if 0 not in out:
        out[0] = LengthDistribution(n=0, k=k, counts={0: 1})
    return out


def _tables_from_rows(rows) -> dict[tuple[int, int], LengthDistribution]:
    grouped: dict[tuple[int, int], dict[int, int]] = {}
    for n, k, length, count in rows:
        grouped.setdefault((n, k), {})[length] = count
    tables: dict[tuple[int, int], LengthDistribution] = {}
    for (n, k), counts in grouped.items():
        dist = LengthDistribution(n=n, k=k, counts=counts)
        expected = math.factorial(n)
        if dist.total() != expected:
            raise ValueError(
                f"table (n={n}, k={k}) sums to {dist.total()}, expected {n}! = {expected}")
        tables[(n, k)] = dist
    return tables
