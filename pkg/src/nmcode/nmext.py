"""Two-source non-malleable extractor experiments on explicit tables.

Everything here is exact-by-enumeration behind hard size guards: an
extractor on two n-bit sources is a full lookup table with 2^(2n) entries
(n <= 8). Checks cover plain extraction, the relaxed non-malleability
conditions for fixed-point-free tampering, the strict condition for
arbitrary tampering via the distance-minimizing reference distribution,
and the extractor-to-code reduction with its (2^k + 1) error blowup.

Source sweeps range over flat sources only; a flat pair is given by the
two supports. Sweeps that touch every support pair are vectorized with
numpy but aggregate exact integer counts, so reported distances stay
exact Fractions.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import log2
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    BitWord,
    GuardExceeded,
    InfeasibleParams,
    RngSeed,
    Symbol,
)
from .lp import min_copy_distance, min_copy_distance_m1
from .tamper import SplitStateTamperFn
from . import schemes

EXTRACTION_GUARD_N = 8
STRICT_GUARD_N = 6

PATTERNS = ("first-only", "second-only", "both")


class ExtractorTable:
    """Explicit function of two n-bit inputs to an m-bit output."""

    def __init__(self, n: int, m: int, entries: Sequence[int], seed: Optional[RngSeed] = None):
        if n > EXTRACTION_GUARD_N:
            raise GuardExceeded(f"n = {n} exceeds table guard {EXTRACTION_GUARD_N}")
        if m < 0:
            raise ValueError("m must be nonnegative")
        size = 1 << (2 * n)
        if len(entries) != size:
            raise ValueError(f"need {size} entries, got {len(entries)}")
        top = 1 << m
        ent = list(entries)
        if any(not 0 <= e < top for e in ent):
            raise ValueError("entry out of range")
        self.n = n
        self.m = m
        self.entries = ent
        self.seed = seed

    def lookup(self, x: int, y: int) -> int:
        return self.entries[(x << self.n) | y]

    def as_array(self) -> np.ndarray:
        size = 1 << self.n
        return np.asarray(self.entries, dtype=np.int64).reshape(size, size)

    def truncated(self, k: int) -> "ExtractorTable":
        """Keep only the first k output bits."""
        if not 0 <= k <= self.m:
            raise ValueError("bad truncation width")
        mask = (1 << k) - 1
        return ExtractorTable(self.n, k, [e & mask for e in self.entries], self.seed)

    # -- serialization: one JSON header line, then a little-endian bitstream

    def save(self, fp) -> None:
        header = {"n": self.n, "m": self.m}
        if self.seed is not None:
            header["seed"] = self.seed.to_json()
        fp.write(json.dumps(header).encode() + b"\n")
        acc = 0
        for i, e in enumerate(self.entries):
            acc |= e << (i * self.m)
        nbytes = (len(self.entries) * self.m + 7) // 8
        fp.write(acc.to_bytes(nbytes, "little"))

    @classmethod
    def load(cls, fp) -> "ExtractorTable":
        header = json.loads(fp.readline().decode())
        n, m = header["n"], header["m"]
        count = 1 << (2 * n)
        raw = int.from_bytes(fp.read((count * m + 7) // 8), "little")
        mask = (1 << m) - 1
        entries = [(raw >> (i * m)) & mask for i in range(count)]
        seed = RngSeed.from_json(header["seed"]) if "seed" in header else None
        return cls(n, m, entries, seed)

    def __repr__(self):
        return f"ExtractorTable(n={self.n}, m={self.m})"


def sample_random_extractor(n: int, m: int, seed: RngSeed) -> ExtractorTable:
    rng = seed.stream("nmext.sample")
    size = 1 << (2 * n)
    return ExtractorTable(n, m, [rng.getrandbits(m) for _ in range(size)], seed)


def inner_product_table(n: int) -> ExtractorTable:
    entries = [
        ((x & y).bit_count() & 1)
        for x in range(1 << n)
        for y in range(1 << n)
    ]
    return ExtractorTable(n, 1, entries)


def parity_table(n: int) -> ExtractorTable:
    entries = [
        ((x << n | y).bit_count() & 1)
        for x in range(1 << n)
        for y in range(1 << n)
    ]
    return ExtractorTable(n, 1, entries)


@dataclass(frozen=True)
class FlatSourcePair:
    """Two independent flat sources given by their supports."""

    xs: Tuple[int, ...]
    ys: Tuple[int, ...]

    def __post_init__(self):
        if not self.xs or not self.ys:
            raise ValueError("supports must be nonempty")
        if len(set(self.xs)) != len(self.xs) or len(set(self.ys)) != len(self.ys):
            raise ValueError("support entries must be distinct")

    @classmethod
    def full(cls, n: int) -> "FlatSourcePair":
        space = tuple(range(1 << n))
        return cls(space, space)

    @property
    def min_entropy1(self) -> float:
        return log2(len(self.xs))

    @property
    def min_entropy2(self) -> float:
        return log2(len(self.ys))

    @property
    def pairs(self) -> int:
        return len(self.xs) * len(self.ys)


def _fixed_point_free_on(table: Sequence[int], support: Sequence[int]) -> bool:
    return all(table[x] != x for x in support)


def repair_fixed_points(table: Sequence[int], size: int) -> List[int]:
    """Nearest fixed-point-free modification: bump fixed points by one."""
    out = list(table)
    for x in range(size):
        if out[x] == x:
            out[x] = (x + 1) % size
    return out


# ---------------------------------------------------------------------------
# Exact checks
# ---------------------------------------------------------------------------


def output_dist(ext: ExtractorTable, src: FlatSourcePair) -> Dict[int, Fraction]:
    counts: Dict[int, int] = {}
    for x in src.xs:
        base = x << ext.n
        for y in src.ys:
            v = ext.entries[base | y]
            counts[v] = counts.get(v, 0) + 1
    total = src.pairs
    return {v: Fraction(c, total) for v, c in counts.items()}


def check_extraction(ext: ExtractorTable, src: FlatSourcePair) -> Fraction:
    """Exact distance of the output distribution from uniform."""
    dist = output_dist(ext, src)
    unif = Fraction(1, 1 << ext.m)
    acc = sum((abs(p - unif) for p in dist.values()), Fraction(0))
    acc += ((1 << ext.m) - len(dist)) * unif
    return acc / 2


def joint_output_dist(
    ext: ExtractorTable,
    src: FlatSourcePair,
    f1: Optional[Sequence[int]],
    f2: Optional[Sequence[int]],
) -> Dict[Tuple[int, int], Fraction]:
    """Joint law of (output, tampered output) under the given half-tamperings."""
    counts: Dict[Tuple[int, int], int] = {}
    n = ext.n
    for x in src.xs:
        tx = f1[x] if f1 is not None else x
        for y in src.ys:
            ty = f2[y] if f2 is not None else y
            key = (ext.entries[(x << n) | y], ext.entries[(tx << n) | ty])
            counts[key] = counts.get(key, 0) + 1
    total = src.pairs
    return {k: Fraction(c, total) for k, c in counts.items()}


def _first_marginal(joint: Dict[Tuple[int, int], Fraction]) -> Dict[int, Fraction]:
    marg: Dict[int, Fraction] = {}
    for (a, _), p in joint.items():
        marg[a] = marg.get(a, Fraction(0)) + p
    return marg


def _second_marginal(joint: Dict[Tuple[int, int], Fraction]) -> Dict[int, Fraction]:
    marg: Dict[int, Fraction] = {}
    for (_, b), p in joint.items():
        marg[b] = marg.get(b, Fraction(0)) + p
    return marg


def product_with_uniform_distance(
    joint: Dict[Tuple[int, int], Fraction], m: int
) -> Fraction:
    """Distance between the joint and (uniform first coordinate) x (same
    second marginal): the sufficient-condition quantity for relaxed
    non-malleability."""
    second = _second_marginal(joint)
    unif = Fraction(1, 1 << m)
    acc = Fraction(0)
    for b, pb in second.items():
        for a in range(1 << m):
            acc += abs(joint.get((a, b), Fraction(0)) - unif * pb)
    return acc / 2


def optimal_reference_distance(
    joint: Dict[Tuple[int, int], Fraction], m: int
) -> Tuple[Fraction, Dict[object, Fraction]]:
    """Minimum distance to an explanation by an independent reference
    output plus a SAME marker; exact closed form at m = 1, exact LP above."""
    marginal = _first_marginal(joint)
    if m == 1:
        return min_copy_distance_m1(joint, marginal)
    return min_copy_distance(joint, marginal, list(range(1 << m)))


@dataclass
class NmVerdict:
    extraction_distance: Fraction
    nm_distances: Dict[str, Fraction]
    optimal_distances: Dict[str, Fraction] = field(default_factory=dict)
    witness: Optional[dict] = None

    @property
    def overall(self) -> Fraction:
        vals = [self.extraction_distance]
        vals.extend(self.nm_distances.values())
        return max(vals)

    @property
    def overall_optimal(self) -> Fraction:
        vals = [self.extraction_distance]
        vals.extend(self.optimal_distances.values())
        return max(vals)

    def to_json(self) -> dict:
        return {
            "extraction_distance": float(self.extraction_distance),
            "nm_distances": {k: float(v) for k, v in self.nm_distances.items()},
            "optimal_distances": {k: float(v) for k, v in self.optimal_distances.items()},
            "witness": self.witness,
        }


def _patterns(f1, f2, active: str):
    if active == "first-only":
        return f1, None
    if active == "second-only":
        return None, f2
    return f1, f2


def check_relaxed_nm(
    ext: ExtractorTable,
    src: FlatSourcePair,
    f1: Sequence[int],
    f2: Sequence[int],
) -> NmVerdict:
    """Relaxed non-malleability for fixed-point-free half-tamperings.

    For each of the three patterns (first tampered, second tampered, both)
    the reported nm distance is the joint-vs-(uniform x tampered marginal)
    quantity; the distance-minimizing reference value is carried alongside
    since it is the one the strict comparison is stated against. Active
    slots must be fixed-point-free on the relevant support.
    """
    if not _fixed_point_free_on(f1, src.xs):
        raise ValueError("first tampering has a fixed point on the support")
    if not _fixed_point_free_on(f2, src.ys):
        raise ValueError("second tampering has a fixed point on the support")
    nm: Dict[str, Fraction] = {}
    opt: Dict[str, Fraction] = {}
    worst = None
    for name in PATTERNS:
        g1, g2 = _patterns(f1, f2, name)
        joint = joint_output_dist(ext, src, g1, g2)
        nm[name] = product_with_uniform_distance(joint, ext.m)
        opt[name], _ = optimal_reference_distance(joint, ext.m)
        if worst is None or nm[name] > nm[worst]:
            worst = name
    return NmVerdict(
        extraction_distance=check_extraction(ext, src),
        nm_distances=nm,
        optimal_distances=opt,
        witness={"worst_pattern": worst},
    )


def check_strict_nm(
    ext: ExtractorTable,
    src: FlatSourcePair,
    f1: Sequence[int],
    f2: Sequence[int],
) -> NmVerdict:
    """Strict non-malleability for arbitrary half-tamperings: the exact
    minimum, over reference distributions with a SAME marker, of the
    distance between (output, tampered output) and the explained joint."""
    joint = joint_output_dist(ext, src, f1, f2)
    value, ref = optimal_reference_distance(joint, ext.m)
    return NmVerdict(
        extraction_distance=check_extraction(ext, src),
        nm_distances={"both": value},
        optimal_distances={"both": value},
        witness={"reference": {str(k): float(v) for k, v in ref.items()}},
    )


# ---------------------------------------------------------------------------
# Extractor-defined coding scheme
# ---------------------------------------------------------------------------


class ExtractorCode:
    """Split-state scheme whose decoder is the extractor table."""

    def __init__(self, ext: ExtractorTable):
        self.ext = ext
        self.message_bits = ext.m
        self.block_bits = 2 * ext.n
        buckets: List[List[int]] = [[] for _ in range(1 << ext.m)]
        n = ext.n
        for x in range(1 << n):
            for y in range(1 << n):
                # Codeword layout: first source in the low half.
                buckets[ext.entries[(x << n) | y]].append(x | (y << n))
        for s, bucket in enumerate(buckets):
            if not bucket:
                raise InfeasibleParams(f"output {s} has an empty preimage")
        self.buckets = [tuple(b) for b in buckets]

    def encode_int(self, s: int, rng: random.Random) -> int:
        bucket = self.buckets[s]
        return bucket[rng.randrange(len(bucket))]

    def decode_int(self, w: int) -> Optional[int]:
        n = self.ext.n
        x = w & ((1 << n) - 1)
        y = w >> n
        return self.ext.entries[(x << n) | y]

    def iter_encodings_int(self, s: int) -> Iterable[int]:
        return self.buckets[s]

    def encode(self, s: BitWord, rng: random.Random) -> BitWord:
        return BitWord(self.encode_int(s.value, rng), self.block_bits)

    def decode(self, w: BitWord) -> Symbol:
        return BitWord(self.decode_int(w.value), self.message_bits)

    def encoding_bias(self) -> Fraction:
        """Exact distance of the encoding of a uniform message from uniform.

        Equals the extraction distance of the table on full-entropy
        sources, coordinate for coordinate.
        """
        total = 1 << self.block_bits
        k = self.message_bits
        acc = Fraction(0)
        for bucket in self.buckets:
            acc += abs(Fraction(1, 1 << k) - Fraction(len(bucket), total))
        return acc / 2


def extractor_to_code(ext: ExtractorTable) -> ExtractorCode:
    return ExtractorCode(ext)


@dataclass
class ReductionRow:
    adversary_id: int
    extractor_error: Fraction
    code_error: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return self.code_error <= self.bound


@dataclass
class ReductionReport:
    extraction_distance: Fraction
    rows: List[ReductionRow]

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def worst(self) -> Optional[ReductionRow]:
        bad = [r for r in self.rows if not r.ok]
        if bad:
            return max(bad, key=lambda r: r.code_error - r.bound)
        return max(self.rows, key=lambda r: r.code_error) if self.rows else None


def verify_reduction(
    ext: ExtractorTable,
    adversaries: int = 100,
    seed: Optional[RngSeed] = None,
) -> ReductionReport:
    """Build the code and verify error <= (measured extractor error) * (2^k+1)
    for sampled split-state adversaries.

    Per adversary, the extractor error is the max of the exact extraction
    distance (full-entropy sources) and the exact strict non-malleability
    distance for that adversary; the code error is the exact minimax over
    reference distributions of the worst-message distance.
    """
    seed = seed or RngSeed.from_int(0)
    rng = seed.stream("nmext.reduction")
    code = extractor_to_code(ext)
    full = FlatSourcePair.full(ext.n)
    eps_ext = check_extraction(ext, full)
    size = 1 << ext.n
    blowup = (1 << ext.m) + 1
    rows: List[ReductionRow] = []
    for i in range(adversaries):
        f1 = [rng.randrange(size) for _ in range(size)]
        f2 = [rng.randrange(size) for _ in range(size)]
        verdict = check_strict_nm(ext, full, f1, f2)
        eps_f = max(eps_ext, verdict.nm_distances["both"])
        adv = SplitStateTamperFn(f1, f2)
        code_err, _ = schemes.optimal_nm_error(code, adv)
        rows.append(
            ReductionRow(
                adversary_id=i,
                extractor_error=eps_f,
                code_error=code_err,
                bound=eps_f * blowup,
            )
        )
    return ReductionReport(extraction_distance=eps_ext, rows=rows)


def rate_target_plan(n: int, alpha_prime: float, gamma: float = 0.01) -> dict:
    """Parameter sheet for the near-1/5-rate split-state target.

    No table of this size is constructible here; this only validates the
    inequality chain a random table would need: with error 2^(-k(1+a'))
    and full-entropy halves, the existence condition
        2m <= k1 + k2 - 3 log(1/eps) - loglog(1/gamma)
    pins k <= (2n - loglog(1/gamma)) / (5 + 3a'), giving rate k/(2n)
    approaching 1/5 as a' shrinks.
    """
    if alpha_prime <= 0:
        raise ValueError("alpha_prime must be positive")
    loglog = log2(log2(1.0 / gamma)) if gamma < 0.5 else 0.0
    k = int((2 * n - loglog) / (5 + 3 * alpha_prime))
    if k < 1:
        raise InfeasibleParams("no positive output length at this size")
    eps_bits = k * (1 + alpha_prime)
    lhs = 2 * k
    rhs = 2 * n - 3 * eps_bits - loglog
    return {
        "n": n,
        "k": k,
        "rate": k / (2 * n),
        "error_exponent_bits": eps_bits,
        "existence_condition": {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs},
        "min_entropy_condition": {
            "required": log2(n) + loglog,
            "available": n,
            "holds": n >= log2(n) + loglog,
        },
        "note": "parameter computation only; additive constants taken as 0",
    }


# ---------------------------------------------------------------------------
# Flat-source sweeps (vectorized, exact counts)
# ---------------------------------------------------------------------------


def _supports_of_min_size(n: int, min_size: int) -> List[Tuple[int, ...]]:
    space = range(1 << n)
    out: List[Tuple[int, ...]] = []
    for size in range(min_size, (1 << n) + 1):
        out.extend(combinations(space, size))
    return out


def relaxed_error_sweep(
    ext: ExtractorTable,
    f1: Sequence[int],
    f2: Sequence[int],
    min_support: int,
) -> Tuple[Fraction, dict]:
    """Max over all flat source pairs with supports >= min_support of
    max(extraction distance, per-pattern optimal reference distance),
    for the fixed-point-free tamperings (f1, f2).

    Exhaustive over source pairs; exact (integer counts feed exact
    arithmetic). Only m = 1 tables are supported, which keeps the
    per-pair minimization in closed form.
    """
    if ext.m != 1:
        raise GuardExceeded("sweep supports single-bit outputs only")
    if ext.n > STRICT_GUARD_N:
        raise GuardExceeded(f"sweep guard is n <= {STRICT_GUARD_N}")
    size = 1 << ext.n
    table = ext.as_array()
    f1a = np.asarray(f1, dtype=np.int64)
    f2a = np.asarray(f2, dtype=np.int64)
    pattern_tables = {
        "first-only": table[f1a, :],
        "second-only": table[:, f2a],
        "both": table[f1a, :][:, f2a],
    }
    supports = _supports_of_min_size(ext.n, min_support)
    idx = [np.asarray(s, dtype=np.int64) for s in supports]
    worst = Fraction(0)
    witness: dict = {}
    for xi, xs in enumerate(idx):
        a_rows = table[xs, :]
        p_rows = {name: t[xs, :] for name, t in pattern_tables.items()}
        for yi, ys in enumerate(idx):
            a = a_rows[:, ys]
            total = a.size
            ones = int(a.sum())
            ext_dist = abs(Fraction(ones, total) - Fraction(1, 2))
            local = ext_dist
            local_pat = "extraction"
            for name, t in p_rows.items():
                b = t[:, ys]
                cells = np.bincount((a * 2 + b).ravel(), minlength=4)
                joint = {
                    (0, 0): Fraction(int(cells[0]), total),
                    (0, 1): Fraction(int(cells[1]), total),
                    (1, 0): Fraction(int(cells[2]), total),
                    (1, 1): Fraction(int(cells[3]), total),
                }
                marg = {
                    0: joint[(0, 0)] + joint[(0, 1)],
                    1: joint[(1, 0)] + joint[(1, 1)],
                }
                val, _ = min_copy_distance_m1(joint, marg)
                if val > local:
                    local = val
                    local_pat = name
            if local > worst:
                worst = local
                witness = {
                    "x_support": supports[xi],
                    "y_support": supports[yi],
                    "pattern": local_pat,
                }
    return worst, witness
