"""Concatenated tamper-resilient scheme: secret-sharing outer layer, small
lookup-table codes on fixed-width blocks, a seed-derived permutation of the
block payload, and a second small code protecting the permutation seed.

Encoding: draw a seed, encode it with the seed code (first segment);
secret-share the message, split the sharing into blocks, encode each block
with the block code, permute the concatenated payload by the seed-derived
permutation (second segment). Decoding inverts the pipeline and fails if
any block decodes to failure or the sharing is off the outer code; a seed
segment that fails to decode is identified with the all-zero seed.

A plan object carries the parameter ledger: every inequality the error
analysis leans on is evaluated and reported individually, so infeasible
toy plans are constructible but carry their violations on record.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .core import (
    BOTTOM,
    BitWord,
    FiniteDist,
    InfeasibleParams,
    RngSeed,
    Symbol,
)
from .inner import InnerCode, InnerParams, plan_inner_params, sample_inner_code
from .lecss import LecssCode, build_lecss_bits
from .perm import EXACT_TINY, PRF_SHUFFLE, PermSpec, Permutation, derive_permutation
from .tamper import KEEP, SET0, SET1, BitTamperFn
from . import schemes


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    formula: str
    status: str  # "ok" | "violated" | "assumed"
    lhs: float
    rhs: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "formula": self.formula,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


@dataclass(frozen=True)
class LecssParams:
    m: int
    n: int
    k: int
    k0: int

    def build(self) -> LecssCode:
        return LecssCode(self.m, self.n, self.k, self.k0)

    @property
    def block_bits(self) -> int:
        return self.n * self.m

    @property
    def message_bits(self) -> int:
        return (self.k - self.k0) * self.m

    @property
    def independent_bits(self) -> int:
        return self.k0

    @property
    def distance_bits_bound(self) -> int:
        return self.n - self.k


@dataclass(frozen=True)
class ConcatPlan:
    """Parameter sheet for one instance of the concatenated scheme."""

    gamma0: float
    inner: InnerParams
    c1: InnerParams
    lecss: LecssParams
    ell: int
    perm_backend: str = PRF_SHUFFLE

    def __post_init__(self):
        if self.lecss.block_bits % self.inner.k:
            raise InfeasibleParams("block width must divide the sharing length")

    # -- layout -----------------------------------------------------------

    @property
    def block_in(self) -> int:  # b: message bits per block
        return self.inner.k

    @property
    def block_out(self) -> int:  # B: encoded bits per block
        return self.inner.n

    @property
    def sharing_bits(self) -> int:  # n2
        return self.lecss.block_bits

    @property
    def block_count(self) -> int:  # n_b
        return self.sharing_bits // self.block_in

    @property
    def payload_bits(self) -> int:  # n
        return self.block_count * self.block_out

    @property
    def seed_bits(self) -> int:  # n1
        return self.c1.n

    @property
    def seed_message_bits(self) -> int:  # k1
        return self.c1.k

    @property
    def total_bits(self) -> int:  # N
        return self.seed_bits + self.payload_bits

    @property
    def message_bits(self) -> int:  # K
        return self.lecss.message_bits

    @property
    def gamma1(self) -> Fraction:
        return Fraction(self.seed_bits, self.payload_bits)

    @property
    def gamma2(self) -> Fraction:
        return 1 - Fraction(self.message_bits, self.sharing_bits)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.message_bits, self.total_bits)

    # -- analysis parameters ------------------------------------------------

    @property
    def independent_payload_bits(self) -> int:  # t2 (bits)
        return self.lecss.independent_bits

    @property
    def distance_bits(self) -> int:  # delta2 * n2 (conservative bound)
        return self.lecss.distance_bits_bound

    @property
    def delta2(self) -> Fraction:
        return Fraction(self.distance_bits, self.sharing_bits)

    @property
    def gamma2_prime(self) -> Fraction:
        return Fraction(self.independent_payload_bits, self.sharing_bits)

    @property
    def gamma2_doubleprime(self) -> Fraction:
        n2, b, n = self.sharing_bits, self.block_in, self.payload_bits
        return self.delta2 * self.gamma2_prime * Fraction(n2, 2 * b * n) ** 2

    @property
    def case1_freeze_bits(self) -> int:
        """Least payload freeze count that lands in the many-frozen case."""
        bound = self.payload_bits - Fraction(self.independent_payload_bits, self.block_in)
        return max(0, ceil(bound))

    @property
    def case21_keep_bits(self) -> int:
        """Least untouched-payload count for the few-errors sub-case."""
        bound = self.payload_bits - self.delta2 * self.block_count
        if bound.denominator == 1:
            return int(bound) + 1
        return ceil(bound)

    def perm_spec(self) -> PermSpec:
        return PermSpec(
            n=self.payload_bits,
            ell=self.ell,
            seed_bits=self.seed_message_bits,
            backend=self.perm_backend,
        )

    # -- the constraint ledger ------------------------------------------

    def constraints(self) -> List[ConstraintCheck]:
        b, big_b = self.block_in, self.block_out
        n, n2 = self.payload_bits, self.sharing_bits
        checks = [
            ConstraintCheck(
                "block-divides-sharing",
                "b | n2",
                "ok" if n2 % b == 0 else "violated",
                n2 % b,
                0,
            ),
            ConstraintCheck(
                "length-split",
                "N = n1 + n",
                "ok" if self.total_bits == self.seed_bits + n else "violated",
                self.total_bits,
                self.seed_bits + n,
            ),
            ConstraintCheck(
                "seed-slack-range",
                "gamma0/2 <= gamma1 <= gamma0",
                "ok"
                if Fraction(self.gamma0) / 2 <= self.gamma1 <= Fraction(self.gamma0)
                else "violated",
                float(self.gamma1),
                self.gamma0,
            ),
            ConstraintCheck(
                "independence-covers-distance",
                "gamma2' >= delta2",
                "ok" if self.gamma2_prime >= self.delta2 else "violated",
                float(self.gamma2_prime),
                float(self.delta2),
            ),
            ConstraintCheck(
                "payload-dominates-block",
                "n >= 32*B^2",
                "ok" if n >= 32 * big_b * big_b else "violated",
                n,
                32 * big_b * big_b,
            ),
            ConstraintCheck(
                "perm-order-vs-sharing",
                "ell <= min(delta2*n2, gamma2'*n2) / (2b)",
                "ok"
                if self.ell
                <= Fraction(min(self.distance_bits, self.independent_payload_bits), 2 * b)
                else "violated",
                self.ell,
                float(Fraction(min(self.distance_bits, self.independent_payload_bits), 2 * b)),
            ),
            ConstraintCheck(
                "perm-order-vs-payload",
                "ell <= n/2",
                "ok" if self.ell <= n // 2 else "violated",
                self.ell,
                n / 2,
            ),
        ]
        # The permutation closeness bound cannot be certified for the
        # shuffle backend; it is an assumption surfaced in the ledger.
        target = float(self.gamma2_doubleprime / 2)
        checks.append(
            ConstraintCheck(
                "perm-closeness",
                "delta <= gamma2''/2",
                "ok" if self.perm_backend == EXACT_TINY else "assumed",
                0.0,
                target,
            )
        )
        return checks

    def violated(self) -> List[ConstraintCheck]:
        return [c for c in self.constraints() if c.status == "violated"]

    def predicted_error(self, eps1: float) -> dict:
        """Headline error prediction with every constant labeled.

        eps1 is the measured (or assumed) error of the seed-protecting
        code; the two decay terms use the concrete per-case bounds with
        their unspecified asymptotic constants taken as 1 and flagged.
        """
        g2pp = float(self.gamma2_doubleprime)
        rounds = self.ell // self.block_out
        case2 = (1 - g2pp / 6) ** rounds if rounds else 1.0
        blocks_hit = max(rounds // self.block_out, 0)
        case3 = (7 / 8) ** blocks_hit if blocks_hit else 1.0
        return {
            "seed_code_error": eps1,
            "same-permutation_term": case2,
            "independent-permutation_term": case3,
            "total_upper_bound": eps1 + case2 + case3,
            "constants": "asymptotic constants set to 1; desk-scale reports rely on measured error only",
        }

    def to_json(self) -> dict:
        return {
            "gamma0": self.gamma0,
            "gamma1": float(self.gamma1),
            "gamma2": float(self.gamma2),
            "rate": float(self.rate),
            "inner": {
                "n": self.inner.n,
                "k": self.inner.k,
                "t": self.inner.t,
                "delta": self.inner.delta,
            },
            "seed_code": {
                "n": self.c1.n,
                "k": self.c1.k,
                "t": self.c1.t,
                "delta": self.c1.delta,
            },
            "lecss": {
                "q": 1 << self.lecss.m,
                "n": self.lecss.n,
                "k": self.lecss.k,
                "k0": self.lecss.k0,
            },
            "ell": self.ell,
            "perm_backend": self.perm_backend,
            "layout": {
                "N": self.total_bits,
                "n": self.payload_bits,
                "n1": self.seed_bits,
                "n2": self.sharing_bits,
                "n_b": self.block_count,
                "B": self.block_out,
                "b": self.block_in,
                "K": self.message_bits,
            },
            "constraints": [c.to_json() for c in self.constraints()],
        }


def plan_concat(
    total_bits: int,
    gamma0: float,
    seed_code_rate: float = 0.25,
    t_block: Optional[int] = None,
    t_seed: int = 2,
    strict: bool = True,
) -> ConcatPlan:
    """Derive a full plan for a target total length and rate slack.

    Searches sharing lengths whose derived seed-segment slack stays inside
    [gamma0/2, gamma0] and whose ledger holds. `strict` raises on the first
    violated inequality; with strict=False the best structural candidate is
    returned with violations recorded.
    """
    if not 0.0 < gamma0 <= 0.5:
        raise InfeasibleParams("gamma0 must lie in (0, 1/2]")
    if total_bits < 8:
        raise InfeasibleParams("total length too small")

    inner_plan = None
    for big_b in range(4, 33):
        b = round(big_b * (1.0 - gamma0))
        if not 1 <= b < big_b:
            continue
        if abs(b / big_b - (1.0 - gamma0)) > 1e-9:
            continue
        try:
            inner_plan = plan_inner_params(gamma0, big_b, t_override=t_block)
            break
        except InfeasibleParams:
            continue
    if inner_plan is None:
        raise InfeasibleParams(f"no block length realizes rate slack {gamma0}")
    inner = inner_plan.params
    b, big_b = inner.k, inner.n

    candidates: List[ConcatPlan] = []
    lo = int(total_bits / (1 + gamma0))
    hi = int(total_bits / (1 + gamma0 / 2))
    for n in range(hi, lo - 1, -1):
        if n % big_b:
            continue
        n2 = n // big_b * b
        if n2 % b:
            continue
        n1 = total_bits - n
        if n1 < 2:
            continue
        try:
            lecss = build_lecss_bits(n2, gamma0)
        except InfeasibleParams:
            continue
        k1 = max(1, int(seed_code_rate * n1))
        try:
            c1 = InnerParams(n=n1, k=k1, t=t_seed, delta=0.0)
        except InfeasibleParams:
            continue
        lp = LecssParams(lecss.m, lecss.n, lecss.k, lecss.k0)
        ell_cap = int(
            Fraction(min(lecss.distance_bits_bound, lecss.independent_bits), 2 * b)
        )
        ell = max(0, min(ell_cap, n // 2))
        plan = ConcatPlan(
            gamma0=gamma0, inner=inner, c1=c1, lecss=lp, ell=ell
        )
        if not plan.violated():
            return plan
        candidates.append(plan)
    if strict:
        if candidates:
            worst = candidates[0].violated()[0]
            raise InfeasibleParams(
                f"constraint {worst.name} violated: {worst.formula} "
                f"(lhs={worst.lhs}, rhs={worst.rhs})"
            )
        raise InfeasibleParams(f"no layout realizes {total_bits} bits at gamma0={gamma0}")
    if not candidates:
        raise InfeasibleParams(f"no layout realizes {total_bits} bits at gamma0={gamma0}")
    return candidates[0]


def toy_concat_plan(t_block: int = 4, t_seed: int = 2) -> ConcatPlan:
    """The desk-scale reference plan: 8-bit blocks carrying 4 message bits,
    16-bit sharing, 32-bit payload, 8-bit seed segment, 40 bits total.

    Several ledger inequalities are necessarily violated at this size; the
    plan records them rather than pretending otherwise.
    """
    inner = InnerParams(n=8, k=4, t=t_block, delta=0.0)
    c1 = InnerParams(n=8, k=2, t=t_seed, delta=0.0)
    lecss = LecssParams(m=4, n=4, k=3, k0=1)
    return ConcatPlan(gamma0=0.5, inner=inner, c1=c1, lecss=lecss, ell=0)


class ConcatCode:
    """Materialized instance; immutable and usable as a coding scheme."""

    def __init__(
        self,
        plan: ConcatPlan,
        block_code: InnerCode,
        seed_code: InnerCode,
        lecss: LecssCode,
        seed: RngSeed,
    ):
        self.plan = plan
        self.block_code = block_code
        self.seed_code = seed_code
        self.lecss = lecss
        self.seed = seed
        self.message_bits = plan.message_bits
        self.block_bits = plan.total_bits
        self._spec = plan.perm_spec()
        self._perms: Dict[int, Permutation] = {}
        self._seed_mask = (1 << plan.seed_bits) - 1
        self._block_mask = (1 << plan.block_out) - 1
        self._in_mask = (1 << plan.block_in) - 1
        # Hot-path caches: sharings keyed by (message, randomness index) and
        # outer decodes keyed by the reassembled sharing. Both are exact.
        self._sharing_cache: Dict[Tuple[int, int], int] = {}
        self._outer_cache: Dict[int, Optional[int]] = {}

    # -- layout helpers ---------------------------------------------------

    @property
    def seed_bits(self) -> int:
        return self.plan.seed_bits

    @property
    def payload_bits(self) -> int:
        return self.plan.payload_bits

    @property
    def case1_freeze_bits(self) -> int:
        return self.plan.case1_freeze_bits

    @property
    def case21_keep_bits(self) -> int:
        return self.plan.case21_keep_bits

    def perm_for(self, z: int) -> Permutation:
        perm = self._perms.get(z)
        if perm is None:
            perm = derive_permutation(self._spec, z)
            self._perms[z] = perm
        return perm

    def fixed_seed_codeword(self) -> int:
        return self.seed_code.codebook[0][0]

    def fixed_full_codeword(self) -> int:
        return self.encode_int(0, self.seed.stream("concat.fixed-codeword"))

    # -- scheme interface --------------------------------------------------

    def _sharing_for(self, s: int, ridx: int) -> int:
        key = (s, ridx)
        sharing = self._sharing_cache.get(key)
        if sharing is None:
            q = self.lecss.q
            randomness = []
            r = ridx
            for _ in range(self.lecss.k0):
                randomness.append(r % q)
                r //= q
            sharing = self.lecss.encode_with(s, randomness)
            self._sharing_cache[key] = sharing
        return sharing

    def encode_int(self, s: int, rng: random.Random) -> int:
        plan = self.plan
        z = rng.getrandbits(plan.seed_message_bits)
        seed_word = self.seed_code.encode_int(z, rng)
        sharing = self._sharing_for(s, rng.randrange(self.lecss.randomness_count))
        payload = 0
        for i in range(plan.block_count):
            block = (sharing >> (i * plan.block_in)) & self._in_mask
            payload |= self.block_code.encode_int(block, rng) << (i * plan.block_out)
        permuted = self.perm_for(z).apply_int(payload)
        return seed_word | (permuted << plan.seed_bits)

    def decode_int(self, w: int) -> Optional[int]:
        plan = self.plan
        z = self.seed_code.decode_int(w & self._seed_mask)
        if z is None:
            z = 0  # failed seed segments are identified with the zero seed
        payload = self.perm_for(z).invert_int(w >> plan.seed_bits)
        sharing = 0
        block_decode = self.block_code.decode_int
        for i in range(plan.block_count):
            block = (payload >> (i * plan.block_out)) & self._block_mask
            d = block_decode(block)
            if d is None:
                return None
            sharing |= d << (i * plan.block_in)
        cache = self._outer_cache
        if sharing in cache:
            return cache[sharing]
        out = self.lecss.decode_int(sharing)
        cache[sharing] = out
        return out

    def encoding_count(self, s: int) -> int:
        plan = self.plan
        return (
            (1 << plan.seed_message_bits)
            * plan.c1.t
            * self.lecss.randomness_count
            * plan.inner.t**plan.block_count
        )

    def iter_encodings_int(self, s: int) -> Iterable[int]:
        plan = self.plan
        from itertools import product

        block_words = self.block_code.codebook
        seed_words = self.seed_code.codebook
        shift = plan.seed_bits
        for z in range(1 << plan.seed_message_bits):
            perm = self.perm_for(z)
            for seed_word in seed_words[z]:
                for sharing in self.lecss.iter_encodings_int(s):
                    blocks = [
                        (sharing >> (i * plan.block_in)) & self._in_mask
                        for i in range(plan.block_count)
                    ]
                    for choice in product(range(plan.inner.t), repeat=plan.block_count):
                        payload = 0
                        for i, (blk, c) in enumerate(zip(blocks, choice)):
                            payload |= block_words[blk][c] << (i * plan.block_out)
                        yield seed_word | (perm.apply_int(payload) << shift)

    def encode(self, s: BitWord, rng: random.Random) -> BitWord:
        if len(s) != self.message_bits:
            raise ValueError("message length mismatch")
        return BitWord(self.encode_int(s.value, rng), self.block_bits)

    def decode(self, w: BitWord) -> Symbol:
        if len(w) != self.block_bits:
            raise ValueError("block length mismatch")
        d = self.decode_int(w.value)
        return BOTTOM if d is None else BitWord(d, self.message_bits)

    # -- exact experiments ------------------------------------------------

    def exact_outcome_dist(self, f, s: int) -> FiniteDist:
        """Exact distribution of decode(tamper(encode(s))) by enumerating
        every encoder choice; tampered decodes are memoized."""
        memo: Dict[int, Optional[int]] = {}
        counts: Dict[Optional[int], int] = {}
        total = 0
        for w in self.iter_encodings_int(s):
            tw = f.apply_int(w)
            if tw in memo:
                out = memo[tw]
            else:
                out = self.decode_int(tw)
                memo[tw] = out
            counts[out] = counts.get(out, 0) + 1
            total += 1
        k = self.message_bits
        probs: Dict[object, Fraction] = {}
        for out, c in counts.items():
            sym = BOTTOM if out is None else BitWord(out, k)
            probs[sym] = Fraction(c, total)
        return FiniteDist(probs)


def build_concat(plan: ConcatPlan, seed: RngSeed) -> ConcatCode:
    block_code = sample_inner_code(plan.inner, seed.child(101))
    seed_code = sample_inner_code(plan.c1, seed.child(102))
    lecss = plan.lecss.build()
    return ConcatCode(plan, block_code, seed_code, lecss, seed)


# ---------------------------------------------------------------------------
# Adversary classification and attack experiments
# ---------------------------------------------------------------------------


def classify_adversary(plan: ConcatPlan, f: BitTamperFn) -> str:
    """Place a per-bit adversary in the analysis taxonomy.

    case1: enough payload bits frozen; case2.x: seed segment untouched
    (2.1 when almost all payload bits are kept, else 2.2); case3: seed
    segment fully frozen; anything else is a convex mixture of the cases.
    """
    n1 = plan.seed_bits
    if f.n != plan.total_bits:
        raise ValueError("adversary length mismatch")
    seed_actions = f.actions[:n1]
    payload_actions = f.actions[n1:]
    frozen = sum(1 for a in payload_actions if a in (SET0, SET1))
    kept = sum(1 for a in payload_actions if a == KEEP)
    if frozen >= plan.case1_freeze_bits:
        return "case1"
    if all(a == KEEP for a in seed_actions):
        if kept >= plan.case21_keep_bits and frozen == len(payload_actions) - kept:
            return "case2.1"
        return "case2.2"
    if all(a in (SET0, SET1) for a in seed_actions):
        return "case3"
    return "general"


@dataclass
class AttackReport:
    adversary_id: str
    case_class: str
    eps_hat: float
    radius: float
    samples: int
    per_message: Dict[int, float] = field(default_factory=dict)
    reference: Optional[dict] = None

    def csv_row(self) -> str:
        return f"{self.adversary_id},{self.case_class},{self.eps_hat:.6f},{self.radius:.6f},{self.samples}"

    CSV_HEADER = "adversary_id,case_class,eps_hat,radius,samples"

    def to_json(self) -> dict:
        return {
            "adversary_id": self.adversary_id,
            "case_class": self.case_class,
            "eps_hat": self.eps_hat,
            "radius": self.radius,
            "samples": self.samples,
            "per_message": {str(k): v for k, v in self.per_message.items()},
            "reference": self.reference,
        }


def attack_experiment(
    code: ConcatCode,
    f: BitTamperFn,
    messages: Optional[Sequence[int]] = None,
    samples: int = 10000,
    seed: Optional[RngSeed] = None,
    adversary_id: str = "adversary",
) -> AttackReport:
    """Empirical tampering error of one adversary against the scheme.

    Builds the sampled reference distribution, then measures the
    per-message distance between tampered decoding and the reference with
    SAME resolved; reports the worst message and the sampling radius.
    """
    seed = seed or RngSeed.from_int(0)
    rng = seed.stream(f"attack.{adversary_id}")
    ref = schemes.reference_dist(code, f, samples=samples, rng=rng)
    if messages is None:
        msg_list: Sequence[int] = range(1 << code.message_bits)
    else:
        msg_list = messages
    report = schemes.nm_error(code, f, ref, messages=msg_list, samples=samples, rng=rng)
    return AttackReport(
        adversary_id=adversary_id,
        case_class=classify_adversary(code.plan, f),
        eps_hat=float(report.value),
        radius=report.radius,
        samples=samples,
        per_message={s: float(v) for s, v in report.per_message.items()},
        reference=ref.to_json(),
    )


def case1_outcome_dists(code: ConcatCode, f: BitTamperFn) -> List[FiniteDist]:
    """Exact outcome distribution per message; equal across messages when
    the adversary freezes enough of the payload."""
    return [code.exact_outcome_dist(f, s) for s in range(1 << code.message_bits)]
