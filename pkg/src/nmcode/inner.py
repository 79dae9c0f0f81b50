"""Probabilistic lookup-table codes with a distance exclusion zone.

Codewords are drawn one message at a time: each draw is a uniformly random
word outside the Hamming balls already claimed by earlier codewords, so
any two codewords end up more than radius apart. Encoding picks uniformly
among a message's codewords; decoding is exact-match table lookup (error
detection by distance, not correction).

The module also hosts the exhaustive verifiers the concatenated
construction leans on: the sub-cube decoding-failure property, bounded
independence of encodings, and per-adversary error detection.
"""

from __future__ import annotations

import io
import random
import struct
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import ceil, comb, log2
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .core import (
    BOTTOM,
    BitWord,
    GuardExceeded,
    InfeasibleParams,
    PropertyReport,
    RngSeed,
    Symbol,
    hamming_ball_volume,
)
from .tamper import BitTamperFn, enumerate_bit_tampers

REJECTION_BUDGET = 1 << 16
DEFAULT_CUBE_GUARD = 1 << 36
DEFAULT_DETECTION_GUARD = 1 << 26
DEFAULT_INDEP_GUARD = 1 << 24
_REMOVED_SET_GUARD = 1 << 26


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * log2(p) - (1.0 - p) * log2(1.0 - p)


def binary_entropy_inv(y: float, tol: float = 1e-12) -> float:
    """Inverse of the binary entropy on [0, 1/2], by bisection."""
    if not 0.0 <= y <= 1.0:
        raise ValueError("entropy value must lie in [0, 1]")
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


@dataclass(frozen=True)
class InnerParams:
    """Block length, message length, codewords per message, exclusion radius."""

    n: int
    k: int
    t: int
    delta: float = 0.0

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if self.t < 1:
            raise ValueError("need t >= 1")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        if self.t << self.k > 1 << self.n:
            raise InfeasibleParams(
                f"t*2^k = {self.t << self.k} exceeds 2^n = {1 << self.n}"
            )

    @property
    def radius(self) -> int:
        return int(self.delta * self.n)

    @property
    def codeword_count(self) -> int:
        return self.t << self.k

    def ball_volume(self) -> int:
        return hamming_ball_volume(self.n, self.radius)

    def sampling_headroom(self) -> Fraction:
        """t*2^k*Vol(radius) over 2^(n-1); above 1 rejection may run hot.

        The planner refuses such parameters; direct construction is still
        allowed and relies on the rejection budget to fail honestly.
        """
        return Fraction(self.codeword_count * self.ball_volume(), 1 << (self.n - 1))


@dataclass(frozen=True)
class InnerPlan:
    params: InnerParams
    alpha: float
    epsilon: float
    delta: float
    delta_effective: float
    t_raw: int
    t_cap: int

    @property
    def k_bound(self) -> float:
        """Message-length ceiling n(1-h(delta)) - log t - 3 log(1/eps); the
        additive constant is unknowable at desk scale and taken as 0."""
        p = self.params
        return (
            p.n * (1.0 - binary_entropy(self.delta))
            - log2(p.t)
            - 3.0 * log2(1.0 / self.epsilon)
        )


def plan_inner_params(
    alpha: float, n: int, t_override: Optional[int] = None
) -> InnerPlan:
    """Derive block parameters from a rate-slack target.

    epsilon = 2^(-alpha*n/27), delta inverts the binary entropy at alpha/3,
    t grows like n/epsilon^6 but is clamped so sampling stays feasible,
    and k = floor(n*(1-alpha)). The asymptotic constant inside t is not
    trustworthy at desk scale, so t may be overridden.
    """
    if not 0.0 < alpha < 1.0:
        raise InfeasibleParams("alpha must lie in (0, 1)")
    if n < 1:
        raise InfeasibleParams("n must be positive")
    k = int(n * (1.0 - alpha))
    if k < 1:
        raise InfeasibleParams(f"k = floor(n*(1-alpha)) = {k}; no message bits")
    epsilon = 2.0 ** (-alpha * n / 27.0)
    delta = binary_entropy_inv(alpha / 3.0)
    radius = int(delta * n)
    delta_effective = radius / n
    vol = hamming_ball_volume(n, radius)
    t_cap = (1 << (n - 1)) // ((1 << k) * vol)
    t_raw = ceil(n / epsilon**6)
    if t_override is not None:
        t = t_override
    else:
        t = min(t_raw, t_cap)
    if t < 1 or t > t_cap:
        raise InfeasibleParams(
            f"t = {t} violates t*2^k*Vol(radius) <= 2^(n-1) "
            f"(cap {t_cap} at n={n}, k={k}, radius={radius})"
        )
    params = InnerParams(n=n, k=k, t=t, delta=delta)
    return InnerPlan(
        params=params,
        alpha=alpha,
        epsilon=epsilon,
        delta=delta,
        delta_effective=delta_effective,
        t_raw=t_raw,
        t_cap=t_cap,
    )


class InnerCode:
    """Sampled lookup-table code; immutable once built."""

    def __init__(
        self,
        params: InnerParams,
        codebook: Sequence[Sequence[int]],
        seed: Optional[RngSeed] = None,
    ):
        self.params = params
        self.codebook: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(ws) for ws in codebook
        )
        self.seed = seed
        self.message_bits = params.k
        self.block_bits = params.n
        decode: Dict[int, int] = {}
        for s, words in enumerate(self.codebook):
            for w in words:
                if w in decode:
                    raise ValueError("duplicate codeword in codebook")
                decode[w] = s
        self._decode = decode

    # -- scheme interface ---------------------------------------------------

    def encode_int(self, s: int, rng: random.Random) -> int:
        return self.codebook[s][rng.randrange(self.params.t)]

    def decode_int(self, w: int) -> Optional[int]:
        return self._decode.get(w)

    def iter_encodings_int(self, s: int) -> Iterable[int]:
        return self.codebook[s]

    def encode(self, s: BitWord, rng: random.Random) -> BitWord:
        if len(s) != self.params.k:
            raise ValueError("message length mismatch")
        return BitWord(self.encode_int(s.value, rng), self.params.n)

    def decode(self, w: BitWord) -> Symbol:
        if len(w) != self.params.n:
            raise ValueError("block length mismatch")
        d = self.decode_int(w.value)
        return BOTTOM if d is None else BitWord(d, self.params.k)

    def min_pairwise_distance(self) -> int:
        words = [w for ws in self.codebook for w in ws]
        best = self.params.n + 1
        for i in range(len(words)):
            wi = words[i]
            for j in range(i + 1, len(words)):
                d = (wi ^ words[j]).bit_count()
                if d < best:
                    best = d
        return best

    # -- serialization --------------------------------------------------

    _MAGIC = b"NMIC1\n"

    def save(self, fp: io.BufferedIOBase) -> None:
        p = self.params
        fp.write(self._MAGIC)
        frac = Fraction(p.delta)
        num = frac.numerator.to_bytes((frac.numerator.bit_length() + 7) // 8 or 1, "little")
        den = frac.denominator.to_bytes((frac.denominator.bit_length() + 7) // 8 or 1, "little")
        seed = self.seed or RngSeed(bytes(32), 0)
        fp.write(struct.pack("<HHI", p.n, p.k, p.t))
        fp.write(struct.pack("<H", len(num)) + num)
        fp.write(struct.pack("<H", len(den)) + den)
        fp.write(seed.seed + struct.pack("<Q", seed.stream_id))
        nbytes = (p.n + 7) // 8
        for words in self.codebook:
            for w in words:
                fp.write(w.to_bytes(nbytes, "little"))

    @classmethod
    def load(cls, fp: io.BufferedIOBase) -> "InnerCode":
        if fp.read(len(cls._MAGIC)) != cls._MAGIC:
            raise ValueError("bad magic")
        n, k, t = struct.unpack("<HHI", fp.read(8))
        (num_len,) = struct.unpack("<H", fp.read(2))
        num = int.from_bytes(fp.read(num_len), "little")
        (den_len,) = struct.unpack("<H", fp.read(2))
        den = int.from_bytes(fp.read(den_len), "little")
        seed_bytes = fp.read(32)
        (stream_id,) = struct.unpack("<Q", fp.read(8))
        params = InnerParams(n=n, k=k, t=t, delta=num / den if den else 0.0)
        nbytes = (n + 7) // 8
        codebook = []
        for _ in range(1 << k):
            words = [int.from_bytes(fp.read(nbytes), "little") for _ in range(t)]
            codebook.append(words)
        return cls(params, codebook, RngSeed(seed_bytes, stream_id))


def _ball_masks(n: int, radius: int) -> List[int]:
    masks = [0]
    for w in range(1, radius + 1):
        for idxs in combinations(range(n), w):
            m = 0
            for i in idxs:
                m |= 1 << i
            masks.append(m)
    return masks


def sample_inner_code(params: InnerParams, seed: RngSeed) -> InnerCode:
    """Draw the code: messages in integer order, words by rejection sampling.

    A draw is rejected while it falls inside the exclusion ball of any
    earlier codeword; a run of 2^16 consecutive rejections aborts the
    construction and flags the parameters as infeasible.
    """
    n, k, t = params.n, params.k, params.t
    ball = _ball_masks(n, params.radius)
    if params.codeword_count * len(ball) > _REMOVED_SET_GUARD:
        raise GuardExceeded(
            f"exclusion set would hold up to {params.codeword_count * len(ball)} words"
        )
    rng = seed.stream("inner.sample")
    removed = set()
    codebook: List[List[int]] = []
    for s in range(1 << k):
        words: List[int] = []
        for _ in range(t):
            for _attempt in range(REJECTION_BUDGET):
                w = rng.getrandbits(n)
                if w not in removed:
                    break
            else:
                raise InfeasibleParams(
                    f"rejection budget exhausted at message {s}; "
                    f"t*2^k*Vol = {params.codeword_count * len(ball)} "
                    f"crowds 2^n = {1 << n}"
                )
            words.append(w)
            for m in ball:
                removed.add(w ^ m)
        codebook.append(words)
    return InnerCode(params, codebook, seed)


# ---------------------------------------------------------------------------
# Property verifiers
# ---------------------------------------------------------------------------


def verify_cube_property(
    code: InnerCode, guard: int = DEFAULT_CUBE_GUARD
) -> PropertyReport:
    """Every sub-cube of size >= 2 decodes to failure with probability >= 1/2.

    A sub-cube freezes a subset of coordinates to fixed bits and leaves the
    rest uniform. Only cubes containing at least one codeword can violate
    the bound, so the sweep walks (codeword, frozen-subset) pairs instead
    of all 3^n cubes; the count is exact either way.
    """
    n = code.params.n
    if (3**n) * (1 << n) > guard:
        raise GuardExceeded(
            f"3^{n} * 2^{n} exceeds guard {guard}; use a sampled check instead"
        )
    counts: Dict[Tuple[int, int], int] = {}
    words = [w for ws in code.codebook for w in ws]
    for w in words:
        for frozen_mask in range(1 << n):
            key = (frozen_mask, w & frozen_mask)
            counts[key] = counts.get(key, 0) + 1
    worst: Fraction = Fraction(1)
    witness: Optional[Tuple[int, int]] = None
    full = (1 << n) - 1
    for (mask, vals), hits in counts.items():
        if mask == full:
            continue  # single-point cube, size < 2
        size = 1 << (n - mask.bit_count())
        bottom_frac = Fraction(size - hits, size)
        if bottom_frac < worst:
            worst = bottom_frac
            witness = (mask, vals)
    passed = worst >= Fraction(1, 2)
    counterexample = None
    if not passed and witness is not None:
        counterexample = {
            "frozen_mask": witness[0],
            "frozen_values": witness[1],
            "bottom_fraction": float(worst),
        }
    return PropertyReport(
        name="cube-property",
        passed=passed,
        worst_case=f"min over sub-cubes of failure fraction = {worst}",
        worst_value=worst,
        counterexample=counterexample,
    )


def verify_bounded_independence(
    code: InnerCode,
    ell: int,
    eps: float,
    guard: int = DEFAULT_INDEP_GUARD,
) -> PropertyReport:
    """Marginals of every encoding on every index set of size <= ell are
    within eps of uniform; distances are exact frequency arithmetic."""
    n, t = code.params.n, code.params.t
    if ell < 0 or ell > n:
        raise ValueError("need 0 <= ell <= n")
    work = sum(comb(n, j) * (1 << j) for j in range(1, ell + 1)) * (
        1 << code.params.k
    )
    if work > guard:
        raise GuardExceeded(f"sweep size {work} exceeds guard {guard}")
    worst = Fraction(0)
    witness = None
    eps_frac = Fraction(eps).limit_denominator(10**9) if isinstance(eps, float) else Fraction(eps)
    for s, words in enumerate(code.codebook):
        for size in range(1, ell + 1):
            unif = Fraction(1, 1 << size)
            for idxs in combinations(range(n), size):
                counts: Dict[int, int] = {}
                for w in words:
                    v = 0
                    for j, i in enumerate(idxs):
                        v |= ((w >> i) & 1) << j
                    counts[v] = counts.get(v, 0) + 1
                acc = Fraction(0)
                seen = 0
                for v, c in counts.items():
                    acc += abs(Fraction(c, t) - unif)
                    seen += 1
                acc += ((1 << size) - seen) * unif
                dist = acc / 2
                if dist > worst:
                    worst = dist
                    witness = (s, idxs)
    passed = worst <= eps_frac
    counterexample = None
    if not passed and witness is not None:
        counterexample = {
            "message": witness[0],
            "indices": list(witness[1]),
            "distance": float(worst),
        }
    return PropertyReport(
        name="bounded-independence",
        passed=passed,
        worst_case=f"max over (message, index set) of marginal distance = {float(worst):.6g}",
        worst_value=worst,
        counterexample=counterexample,
        details={"ell": ell, "eps": float(eps_frac), "vacuous": ell == 0},
    )


def verify_error_detection(
    code: InnerCode,
    sample_fns: Optional[int] = None,
    rng: Optional[random.Random] = None,
    guard: int = DEFAULT_DETECTION_GUARD,
) -> PropertyReport:
    """Every non-identity, non-constant per-bit adversary sends every
    message to decoder failure with probability >= 1/3.

    The probability is exact over the encoder's uniform codeword choice.
    Exhaustive over all 4^n adversaries by default; `sample_fns` switches
    to uniformly sampled adversaries when the sweep would exceed the guard.
    """
    p = code.params
    threshold = Fraction(1, 3)

    def fns() -> Iterable[BitTamperFn]:
        if sample_fns is None:
            yield from enumerate_bit_tampers(p.n, guard=guard * 4)
        else:
            if rng is None:
                raise ValueError("sampled mode needs an rng")
            for _ in range(sample_fns):
                yield BitTamperFn([rng.randrange(4) for _ in range(p.n)])

    if sample_fns is None:
        work = (4**p.n) * p.codeword_count
        if work > guard:
            raise GuardExceeded(
                f"exhaustive sweep size {work} exceeds guard {guard}; "
                "pass sample_fns for the sampled fallback"
            )

    worst = Fraction(1)
    witness = None
    tested = 0
    for f in fns():
        if f.is_identity() or f.is_constant():
            continue
        tested += 1
        for s, words in enumerate(code.codebook):
            misses = 0
            for w in words:
                if code.decode_int(f.apply_int(w)) is None:
                    misses += 1
            frac = Fraction(misses, p.t)
            if frac < worst:
                worst = frac
                witness = (f.to_str(), s)
    passed = worst >= threshold
    counterexample = None
    if not passed and witness is not None:
        counterexample = {
            "adversary": witness[0],
            "message": witness[1],
            "bottom_probability": float(worst),
        }
    return PropertyReport(
        name="error-detection",
        passed=passed,
        worst_case=f"min over (adversary, message) of failure probability = {worst}",
        worst_value=worst,
        counterexample=counterexample,
        details={"adversaries_tested": tested, "mode": "exhaustive" if sample_fns is None else "sampled"},
    )
