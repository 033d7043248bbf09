"""Deterministic algorithms on alternating subsequences.

A word is a sequence of pairwise-distinct integers (a permutation when its
values are exactly 1..n).  A word w is k-alternating, up-first, when

    w[0] < w[1] > w[2] < w[3] ...   and every jump |w[j+1] - w[j]| >= k.

The real-valued analogue replaces the integer threshold k with a real
x in [0, 1) and acts on sequences of values in [0, 1].  Up-first is the
convention everywhere; down-first appears only as a mode of the DP oracle.

This module is the pure-Python reference implementation.  Performance
twins of the hot routines live in ``kaltseq._kernels`` and are tested for
exact agreement against the functions here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

Number = Union[int, float]

SUBSET_ORACLE_CAP = 20


class CapacityError(ValueError):
    """An input exceeds a hard size cap (exhaustive routines only)."""


class InvariantError(AssertionError):
    """A mathematically guaranteed identity failed at runtime.

    Raised by the self-auditing paths (enumeration spot checks, per-trial
    sandwich implication).  Always indicates an implementation bug, never
    user error.
    """


def ensure_distinct(values: Sequence[Number]) -> None:
    """Raise ValueError naming the first repeated value."""
    seen = set()
    for v in values:
        if v in seen:
            raise ValueError(f"duplicate value {v!r}: word values must be pairwise distinct")
        seen.add(v)


def is_permutation(values: Sequence[int]) -> bool:
    """True iff values are exactly {1, ..., n} in some order."""
    n = len(values)
    return sorted(values) == list(range(1, n + 1))


def rank_permutation(values: Sequence[Number]) -> tuple[int, ...]:
    """Map a real sequence to the permutation of its ranks.

    Position j receives the count of values <= values[j], so sorted input
    gives the identity.  Ties (measure zero for sampled input) are broken
    by original position so the output is always a permutation.
    """
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    ranks = [0] * len(values)
    for r, i in enumerate(order):
        ranks[i] = r + 1
    return tuple(ranks)


def is_k_alternating(word: Sequence[int], k: int) -> bool:
    """Up-first alternation with every jump at least k; length <= 1 is vacuously true."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return _is_alternating(word, k)


def is_x_alternating(values: Sequence[float], x: float) -> bool:
    """Real-threshold analogue of is_k_alternating for values in [0, 1]."""
    if not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    return _is_alternating(values, x)


def _is_alternating(seq: Sequence[Number], step: Number) -> bool:
    for j in range(len(seq) - 1):
        if j % 2 == 0:
            if seq[j + 1] - seq[j] < step:
                return False
        else:
            if seq[j] - seq[j + 1] < step:
                return False
    return True


@dataclass(frozen=True)
class AltWitness:
    """A maximal alternating subsequence: 0-based indices into the parent."""

    indices: tuple[int, ...]
    first_direction: str = "up"

    @property
    def length(self) -> int:
        return len(self.indices)

    def values(self, parent: Sequence[Number]) -> tuple[Number, ...]:
        return tuple(parent[i] for i in self.indices)


@dataclass(frozen=True)
class ScanTrace:
    """Full bookkeeping of one greedy provisional-acceptance pass.

    ``accepted`` lists every index that was at least provisionally accepted,
    in scan order; ``kinds`` says how each acceptance happened ("initial",
    "after_up", "after_down").  ``committed`` are the indices promoted into
    the witness before the scan ended; the final provisional index (if any)
    completes the witness.
    """

    accepted: tuple[int, ...]
    kinds: tuple[str, ...]
    committed: tuple[int, ...]
    provisional: Optional[int]

    @property
    def witness_indices(self) -> tuple[int, ...]:
        if self.provisional is None:
            return self.committed
        return self.committed + (self.provisional,)


def greedy_scan(seq: Sequence[Number], step: Number,
                reject_ceiling: Optional[Number] = None) -> ScanTrace:
    """One left-to-right greedy pass, up-first.

    When waiting for an up step: a value above the provisional one by at
    least ``step`` commits the provisional value and takes its place; a
    smaller value replaces it; anything in between is rejected.  The down
    state mirrors this.  With ``reject_ceiling`` set, leading values above
    the ceiling are rejected outright instead of starting as provisional.
    """
    accepted: list[int] = []
    kinds: list[str] = []
    committed: list[int] = []
    prov: Optional[int] = None
    up = True
    for j, w in enumerate(seq):
        if prov is None:
            if reject_ceiling is not None and w > reject_ceiling:
                continue
            prov = j
            accepted.append(j)
            kinds.append("initial")
            continue
        v = seq[prov]
        if up:
            if w >= v + step:
                committed.append(prov)
                prov = j
                up = False
                accepted.append(j)
                kinds.append("after_up")
            elif w < v:
                prov = j
                accepted.append(j)
                kinds.append("after_down")
        else:
            if w <= v - step:
                committed.append(prov)
                prov = j
                up = True
                accepted.append(j)
                kinds.append("after_down")
            elif w > v:
                prov = j
                accepted.append(j)
                kinds.append("after_up")
    return ScanTrace(tuple(accepted), tuple(kinds), tuple(committed), prov)


def greedy_k_alternating(word: Sequence[int], k: int) -> AltWitness:
    """Maximal-length k-alternating (up-first) subsequence in one O(n) pass."""
    if k < 0:
        raise ValueError("k must be >= 0")
    trace = greedy_scan(word, k)
    return AltWitness(trace.witness_indices)


def greedy_x_alternating(values: Sequence[float], x: float,
                         reject_high_start: bool = False) -> AltWitness:
    """Maximal-length x-alternating subsequence.

    ``reject_high_start`` switches to the bookkeeping variant that rejects
    leading values above 1 - x instead of holding them provisionally.  The
    witness length is identical either way: a high starter can only ever be
    replaced, never committed, so it contributes at most the final singleton
    -- which the variant recovers as the smallest value when every value was
    rejected.
    """
    if not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    trace = greedy_scan(values, x, reject_ceiling=(1.0 - x) if reject_high_start else None)
    indices = trace.witness_indices
    if not indices and len(values) > 0:
        # every value exceeded 1 - x; the plain variant would have ended
        # holding the running minimum as its provisional singleton
        indices = (min(range(len(values)), key=lambda i: values[i]),)
    return AltWitness(indices)


def peak_valley_witness(perm: Sequence[int]) -> AltWitness:
    """Maximal ordinary (k=1) alternating subsequence by peak/valley selection.

    Selects every interior local maximum or minimum, index 0 iff the word
    starts with an ascent, and the last index iff appending it extends the
    alternation.
    """
    n = len(perm)
    if n == 0:
        raise ValueError("peak_valley_witness requires a nonempty word")
    if n == 1:
        return AltWitness((0,))
    selected: list[int] = []
    if perm[0] < perm[1]:
        selected.append(0)
    for i in range(1, n - 1):
        if perm[i - 1] < perm[i] > perm[i + 1] or perm[i - 1] > perm[i] < perm[i + 1]:
            selected.append(i)
    if _extends_up_first(selected, perm, perm[n - 1]):
        selected.append(n - 1)
    return AltWitness(tuple(selected))


def _extends_up_first(selected: list[int], perm: Sequence[int], value: int) -> bool:
    if not selected:
        return True
    last = perm[selected[-1]]
    if len(selected) % 2 == 1:
        return value > last
    return value < last


def dp_longest_k_alternating(word: Sequence[int], k: int,
                             first_direction: str = "up") -> int:
    """Exact maximum k-alternating subsequence length by O(n^2) DP.

    States are (end index, parity of the subsequence length); the down-first
    mode is the up-first DP on the negated word.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if first_direction not in ("up", "down"):
        raise ValueError("first_direction must be 'up' or 'down'")
    w = list(word) if first_direction == "up" else [-v for v in word]
    n = len(w)
    if n == 0:
        return 0
    # odd[i]: best odd length ending at i (singleton or last step down)
    # even[i]: best even length ending at i (last step up); 0 = unreachable
    odd = [1] * n
    even = [0] * n
    best = 1
    for i in range(n):
        wi = w[i]
        for j in range(i):
            if wi - w[j] >= k and odd[j] + 1 > even[i]:
                even[i] = odd[j] + 1
            if w[j] - wi >= k and even[j] > 0 and even[j] + 1 > odd[i]:
                odd[i] = even[j] + 1
        if even[i] > best:
            best = even[i]
        if odd[i] > best:
            best = odd[i]
    return best


def subset_oracle(values: Sequence[Number], k: Optional[int] = None,
                  x: Optional[float] = None) -> int:
    """Ground-truth maximum alternating subsequence length by 2^n enumeration.

    Exactly one of k (integer threshold) or x (real threshold) must be given.
    Capped at length 20; anything larger is oracle misuse.
    """
    if (k is None) == (x is None):
        raise ValueError("give exactly one of k or x")
    n = len(values)
    if n > SUBSET_ORACLE_CAP:
        raise CapacityError(
            f"subset oracle is 2^n enumeration, capped at n <= {SUBSET_ORACLE_CAP} (got {n})")
    step = k if k is not None else x
    if k is not None and k < 0:
        raise ValueError("k must be >= 0")
    if x is not None and not 0.0 <= x < 1.0:
        raise ValueError("x must lie in [0, 1)")
    best = 0
    for mask in range(1 << n):
        sub = [values[i] for i in range(n) if mask >> i & 1]
        if len(sub) > best and _is_alternating(sub, step):
            best = len(sub)
    return best
