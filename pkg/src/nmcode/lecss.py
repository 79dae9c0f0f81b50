"""Linear error-correcting secret sharing built on Reed-Solomon codes.

The generator matrix is Vandermonde: row i evaluates x^i at the first n
field elements (0, 1, 2, ...), so the code is MDS with symbol distance
n - k + 1, and the first k0 rows span a code whose every k0 columns are
linearly independent. Encoding prepends k0 uniformly random symbols to the
message symbols, which makes any k0 codeword symbols (hence any k0
codeword bits) exactly uniform regardless of the message.

Decoding interpolates the unique degree-<k polynomial through the first k
coordinates and re-evaluates everywhere: membership testing only, no error
correction. Bits pack little-endian within each symbol, symbols in
coordinate order.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterable, List, Optional, Sequence

from .core import (
    BOTTOM,
    BitWord,
    GuardExceeded,
    InfeasibleParams,
    PropertyReport,
    RngSeed,
    Symbol,
)
from .gf import GF2m, field, invert_matrix

DEFAULT_RANDOMNESS_GUARD = 1 << 20


class LecssCode:
    def __init__(self, m: int, n: int, k: int, k0: int):
        if not 1 <= k0 < k <= n:
            raise InfeasibleParams("need 1 <= k0 < k <= n")
        fld = field(m)
        if n > fld.q:
            raise InfeasibleParams(f"n = {n} exceeds field size q = {fld.q}")
        self.field: GF2m = fld
        self.m = m
        self.q = fld.q
        self.n = n
        self.k = k
        self.k0 = k0
        self.points = list(range(n))
        # G[i][j] = points[j]^i ; rows 0..k-1
        self.generator = [
            [fld.pow(x, i) for x in self.points] for i in range(k)
        ]
        vk = [[fld.pow(self.points[r], i) for i in range(k)] for r in range(k)]
        vinv = invert_matrix(fld, vk)
        if vinv is None:
            raise InfeasibleParams("interpolation matrix singular")
        self._vinv = vinv
        self.block_bits = n * m
        self.message_bits = (k - k0) * m
        self.randomness_count = self.q**k0

    # -- derived parameters --------------------------------------------------

    @property
    def symbol_distance(self) -> int:
        """Exact minimum symbol distance (the code is MDS)."""
        return self.n - self.k + 1

    @property
    def distance_bits_bound(self) -> int:
        """Conservative bit-distance parameter used by the outer planner."""
        return self.n - self.k

    @property
    def independent_bits(self) -> int:
        """Any this-many codeword bits are exactly uniform."""
        return self.k0

    @property
    def delta(self) -> Fraction:
        return Fraction(self.symbol_distance, self.n)

    @property
    def tau(self) -> Fraction:
        return Fraction(self.k0, self.n)

    # -- symbol/bit packing ----------------------------------------------

    def pack(self, symbols: Sequence[int]) -> int:
        acc = 0
        for j, sym in enumerate(symbols):
            acc |= sym << (j * self.m)
        return acc

    def unpack(self, word: int) -> List[int]:
        mask = self.q - 1
        return [(word >> (j * self.m)) & mask for j in range(self.n)]

    def message_symbols(self, s: int) -> List[int]:
        mask = self.q - 1
        return [(s >> (j * self.m)) & mask for j in range(self.k - self.k0)]

    # -- encode / decode ------------------------------------------------------

    def encode_symbols(self, s: int, randomness: Sequence[int]) -> List[int]:
        coeffs = list(randomness) + self.message_symbols(s)
        fld = self.field
        return [fld.eval_poly(coeffs, x) for x in self.points]

    def encode_with(self, s: int, randomness: Sequence[int]) -> int:
        return self.pack(self.encode_symbols(s, randomness))

    def encode_int(self, s: int, rng: random.Random) -> int:
        randomness = [rng.randrange(self.q) for _ in range(self.k0)]
        return self.encode_with(s, randomness)

    def decode_int(self, w: int) -> Optional[int]:
        symbols = self.unpack(w)
        fld = self.field
        coeffs = [0] * self.k
        for r in range(self.k):
            row = self._vinv[r]
            acc = 0
            for i in range(self.k):
                acc ^= fld.mul(row[i], symbols[i])
            coeffs[r] = acc
        for j in range(self.k, self.n):
            if fld.eval_poly(coeffs, self.points[j]) != symbols[j]:
                return None
        msg = 0
        for j, sym in enumerate(coeffs[self.k0 :]):
            msg |= sym << (j * self.m)
        return msg

    def iter_encodings_int(self, s: int) -> Iterable[int]:
        if self.randomness_count > DEFAULT_RANDOMNESS_GUARD:
            raise GuardExceeded(
                f"q^k0 = {self.randomness_count} randomness vectors exceed guard"
            )
        for randomness in product(range(self.q), repeat=self.k0):
            yield self.encode_with(s, randomness)

    def encode(self, s: BitWord, rng: random.Random) -> BitWord:
        if len(s) != self.message_bits:
            raise ValueError("message length mismatch")
        return BitWord(self.encode_int(s.value, rng), self.block_bits)

    def decode(self, w: BitWord) -> Symbol:
        if len(w) != self.block_bits:
            raise ValueError("block length mismatch")
        d = self.decode_int(w.value)
        return BOTTOM if d is None else BitWord(d, self.message_bits)

    def descriptor(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "k": self.k,
            "k0": self.k0,
            "modulus": self.field.poly,
            "eval_points": self.points,
        }

    @classmethod
    def from_descriptor(cls, obj: dict) -> "LecssCode":
        code = cls(obj["q"].bit_length() - 1, obj["n"], obj["k"], obj["k0"])
        if code.field.poly != obj["modulus"]:
            raise ValueError("modulus mismatch")
        return code

    def __repr__(self):
        return f"LecssCode(q={self.q}, n={self.n}, k={self.k}, k0={self.k0})"


def build_lecss(n: int, alpha: float) -> LecssCode:
    """Standard instantiation: q the least power of two >= n,
    k = ceil(n(1-alpha/2)), k0 = floor(alpha*n/2)."""
    if not 0.0 < alpha < 1.0:
        raise InfeasibleParams("alpha must lie in (0, 1)")
    if n < 2:
        raise InfeasibleParams("need n >= 2")
    m = max(1, (n - 1).bit_length())
    k = -((-n * (2 - alpha)) // 2)  # ceil(n*(1-alpha/2))
    k = int(k)
    k0 = int(n * alpha / 2)
    if k0 < 1:
        raise InfeasibleParams("k0 = 0: no secrecy randomness at this n, alpha")
    if k0 >= k:
        raise InfeasibleParams(f"k0 = {k0} >= k = {k}")
    return LecssCode(m=m, n=n, k=k, k0=k0)


def build_lecss_bits(block_bits: int, alpha: float) -> LecssCode:
    """Pick (m, n) with n*m = block_bits, n <= 2^m, then instantiate.

    Smallest workable m wins; raises when no factorization fits.
    """
    for m in range(1, 13):
        if block_bits % m:
            continue
        n = block_bits // m
        if n < 2 or n > (1 << m):
            continue
        k = int(-((-n * (2 - alpha)) // 2))
        k0 = int(n * alpha / 2)
        if 1 <= k0 < k <= n:
            return LecssCode(m=m, n=n, k=k, k0=k0)
    raise InfeasibleParams(f"no (m, n) factorization of {block_bits} bits fits")


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _symbol_weight(symbols: Sequence[int]) -> int:
    return sum(1 for s in symbols if s)


def verify_lecss(
    code: LecssCode,
    trials: int = 1000,
    seed: Optional[RngSeed] = None,
    exhaustive_guard: int = 1 << 16,
) -> PropertyReport:
    """Distance, bounded independence, and linearity checks.

    Distance scans all q^k coefficient vectors when that count is under the
    guard, else `trials` random nonzero vectors (a one-sided check).
    Independence enumerates all q^k0 randomness vectors and asserts exactly
    uniform marginals on every bit-index set of size <= k0. Linearity
    checks decode(w + w') = decode(w) + decode(w') on sampled codeword pairs.
    """
    rng = (seed or RngSeed.from_int(0)).stream("lecss.verify")
    fld = code.field
    failures = []

    # (a) distance
    total = code.q**code.k
    min_weight = code.n + 1
    if total <= exhaustive_guard:
        for coeffs in product(range(code.q), repeat=code.k):
            if not any(coeffs):
                continue
            w = _symbol_weight([fld.eval_poly(coeffs, x) for x in code.points])
            if w < min_weight:
                min_weight = w
        mode = "exhaustive"
    else:
        for _ in range(trials):
            coeffs = [rng.randrange(code.q) for _ in range(code.k)]
            if not any(coeffs):
                coeffs[0] = 1 + rng.randrange(code.q - 1)
            w = _symbol_weight([fld.eval_poly(coeffs, x) for x in code.points])
            if w < min_weight:
                min_weight = w
        mode = "sampled"
    if min_weight < code.symbol_distance:
        failures.append(
            {"check": "distance", "observed": min_weight, "required": code.symbol_distance}
        )

    # (b) bounded independence: every bit-index set of size <= k0 exactly uniform
    nbits = code.block_bits
    worst_indep = Fraction(0)
    msgs = [0]
    if code.message_bits:
        msgs.append(rng.getrandbits(code.message_bits))
    for s in msgs:
        words = list(code.iter_encodings_int(s))
        r = len(words)
        for size in range(1, code.independent_bits + 1):
            unif = Fraction(1, 1 << size)
            for idxs in combinations(range(nbits), size):
                counts: Dict[int, int] = {}
                for w in words:
                    v = 0
                    for j, i in enumerate(idxs):
                        v |= ((w >> i) & 1) << j
                    counts[v] = counts.get(v, 0) + 1
                acc = sum(
                    (abs(Fraction(c, r) - unif) for c in counts.values()),
                    Fraction(0),
                )
                acc += ((1 << size) - len(counts)) * unif
                dist = acc / 2
                if dist > worst_indep:
                    worst_indep = dist
    if worst_indep != 0:
        failures.append({"check": "independence", "distance": float(worst_indep)})

    # (c) linearity on sampled decodable pairs
    violations = 0
    for _ in range(trials):
        s1 = rng.getrandbits(code.message_bits)
        s2 = rng.getrandbits(code.message_bits)
        w1 = code.encode_int(s1, rng)
        w2 = code.encode_int(s2, rng)
        d = code.decode_int(w1 ^ w2)
        if d is None or d != s1 ^ s2:
            violations += 1
    if violations:
        failures.append({"check": "linearity", "violations": violations})

    passed = not failures
    return PropertyReport(
        name="lecss-properties",
        passed=passed,
        worst_case=(
            f"min symbol weight {min_weight} ({mode}), "
            f"max marginal distance {float(worst_indep):.3g}, "
            f"linearity violations {violations}"
        ),
        worst_value=Fraction(min_weight),
        counterexample=None if passed else {"failures": failures},
        details={"distance_mode": mode, "trials": trials},
    )
