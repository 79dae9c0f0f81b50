"""Adversary models: per-bit tampering and split-state tampering.

A bit-tampering adversary acts on each coordinate independently with one of
four actions (keep, flip, set to 0, set to 1). A split-state adversary
applies an arbitrary lookup table to each half of the word. Both are
immutable once built; generators are seeded for reproducibility.
"""

from __future__ import annotations

import random
from typing import Iterator, List, Sequence, Tuple

from .core import BitWord, GuardExceeded

KEEP, FLIP, SET0, SET1 = 0, 1, 2, 3
_ACTION_CHARS = "KF01"
_CHAR_TO_ACTION = {c: i for i, c in enumerate(_ACTION_CHARS)}


class BitTamperFn:
    """Per-bit adversary; precomputes masks so application is three int ops."""

    __slots__ = ("actions", "n", "_flip", "_set0", "_set1", "_keepflip")

    def __init__(self, actions: Sequence[int]):
        acts = tuple(actions)
        if not acts:
            raise ValueError("empty action vector")
        if any(a not in (KEEP, FLIP, SET0, SET1) for a in acts):
            raise ValueError("unknown action code")
        self.actions = acts
        self.n = len(acts)
        flip = set0 = set1 = 0
        for i, a in enumerate(acts):
            if a == FLIP:
                flip |= 1 << i
            elif a == SET0:
                set0 |= 1 << i
            elif a == SET1:
                set1 |= 1 << i
        self._flip = flip
        self._set0 = set0
        self._set1 = set1
        self._keepflip = ~(set0 | set1)

    @classmethod
    def from_str(cls, s: str) -> "BitTamperFn":
        try:
            return cls([_CHAR_TO_ACTION[c] for c in s])
        except KeyError as e:
            raise ValueError(f"bad action character {e.args[0]!r}") from None

    @classmethod
    def identity(cls, n: int) -> "BitTamperFn":
        return cls([KEEP] * n)

    @classmethod
    def complement(cls, n: int) -> "BitTamperFn":
        return cls([FLIP] * n)

    @classmethod
    def constant(cls, word: BitWord) -> "BitTamperFn":
        return cls([SET1 if b else SET0 for b in word])

    def to_str(self) -> str:
        return "".join(_ACTION_CHARS[a] for a in self.actions)

    def apply_int(self, x: int) -> int:
        return ((x ^ self._flip) & self._keepflip) | self._set1

    def apply(self, x: BitWord) -> BitWord:
        if len(x) != self.n:
            raise ValueError(f"length mismatch: word {len(x)}, adversary {self.n}")
        return BitWord(self.apply_int(x.value), self.n)

    def is_identity(self) -> bool:
        return all(a == KEEP for a in self.actions)

    def is_constant(self) -> bool:
        return all(a in (SET0, SET1) for a in self.actions)

    def partition(self) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]:
        """Disjoint cover of [n]: (frozen, flipped, kept) index sets."""
        fr, fl, idn = [], [], []
        for i, a in enumerate(self.actions):
            (fr if a in (SET0, SET1) else fl if a == FLIP else idn).append(i)
        return tuple(fr), tuple(fl), tuple(idn)

    def restrict(self, indices: Sequence[int]) -> "BitTamperFn":
        return BitTamperFn([self.actions[i] for i in indices])

    def to_json(self) -> dict:
        return {"type": "bits", "actions": self.to_str()}

    def __eq__(self, other):
        return isinstance(other, BitTamperFn) and self.actions == other.actions

    def __hash__(self):
        return hash(self.actions)

    def __repr__(self):
        return f"BitTamperFn('{self.to_str()}')"


def apply_tamper(f, x: BitWord) -> BitWord:
    return f.apply(x)


def partition_actions(f: BitTamperFn):
    return f.partition()


def enumerate_bit_tampers(n: int, guard: int = 4**10) -> Iterator[BitTamperFn]:
    """All 4^n per-bit adversaries in base-4 counting order."""
    total = 4**n
    if total > guard:
        raise GuardExceeded(f"4^{n} = {total} exceeds guard {guard}")
    for code in range(total):
        c = code
        actions = []
        for _ in range(n):
            actions.append(c & 3)
            c >>= 2
        yield BitTamperFn(actions)


def random_tamper(
    n: int,
    profile: Tuple[float, float, float],
    rng: random.Random,
) -> BitTamperFn:
    """I.i.d. per-bit actions; profile = (p_keep, p_flip, p_set).

    Frozen bits choose their value uniformly, so a (0, 0, 1) profile yields
    a constant function at a profile-dependent random word.
    """
    p_keep, p_flip, p_set = profile
    if abs(p_keep + p_flip + p_set - 1.0) > 1e-9:
        raise ValueError("profile probabilities must sum to 1")
    actions = []
    for _ in range(n):
        u = rng.random()
        if u < p_keep:
            actions.append(KEEP)
        elif u < p_keep + p_flip:
            actions.append(FLIP)
        else:
            actions.append(SET1 if rng.random() < 0.5 else SET0)
    return BitTamperFn(actions)


class SplitStateTamperFn:
    """Two arbitrary lookup tables, one per half of the word."""

    __slots__ = ("n", "half", "f1", "f2", "fixed_point_free")

    def __init__(
        self,
        f1: Sequence[int],
        f2: Sequence[int],
        fixed_point_free: Tuple[bool, bool] = (False, False),
        max_half_bits: int = 20,
    ):
        if len(f1) != len(f2):
            raise ValueError("halves must have equal table sizes")
        size = len(f1)
        half = size.bit_length() - 1
        if size != 1 << half:
            raise ValueError("table size must be a power of two")
        if half > max_half_bits:
            raise GuardExceeded(f"half width {half} exceeds guard {max_half_bits}")
        for t in (f1, f2):
            for v in t:
                if not 0 <= v < size:
                    raise ValueError("table entry out of range")
        for claimed, table, name in (
            (fixed_point_free[0], f1, "f1"),
            (fixed_point_free[1], f2, "f2"),
        ):
            if claimed and any(table[x] == x for x in range(size)):
                raise ValueError(f"{name} claimed fixed-point-free but has a fixed point")
        self.n = 2 * half
        self.half = half
        self.f1 = tuple(f1)
        self.f2 = tuple(f2)
        self.fixed_point_free = fixed_point_free

    def apply_int(self, x: int) -> int:
        mask = (1 << self.half) - 1
        lo = self.f1[x & mask]
        hi = self.f2[(x >> self.half) & mask]
        return lo | (hi << self.half)

    def apply(self, x: BitWord) -> BitWord:
        if len(x) != self.n:
            raise ValueError(f"length mismatch: word {len(x)}, adversary {self.n}")
        return BitWord(self.apply_int(x.value), self.n)

    def to_json(self) -> dict:
        return {"type": "split", "f1": list(self.f1), "f2": list(self.f2)}

    def __repr__(self):
        return f"SplitStateTamperFn(half={self.half})"


def random_split_tamper(
    n: int,
    fixed_point_free: bool,
    rng: random.Random,
) -> SplitStateTamperFn:
    if n % 2:
        raise ValueError("split-state adversaries need an even length")
    half = n // 2
    size = 1 << half
    tables = []
    for _ in range(2):
        t = []
        for x in range(size):
            v = rng.randrange(size)
            if fixed_point_free:
                # Resample the single forbidden value away (derangement-style repair).
                while v == x:
                    v = rng.randrange(size)
            t.append(v)
        tables.append(t)
    return SplitStateTamperFn(
        tables[0], tables[1], (fixed_point_free, fixed_point_free)
    )


# ---------------------------------------------------------------------------
# Canonical adversary families for the concatenated scheme
# ---------------------------------------------------------------------------


def _freeze_actions_for(word_bits: int, value: int) -> List[int]:
    return [SET1 if (value >> i) & 1 else SET0 for i in range(word_bits)]


def canonical_adversaries(plan, rng: random.Random):
    """Named adversaries that sit on the analysis case boundaries of `plan`.

    `plan` only needs the layout fields (seed_bits/payload_bits and the
    thresholds case1_freeze_bits and case21_keep_bits); any concatenation
    plan object provides them.
    """
    n1 = plan.seed_bits
    n = plan.payload_bits
    total = n1 + n
    out = []

    # Freeze the payload at (or past) the many-frozen-bits boundary.
    boundary = plan.case1_freeze_bits
    frozen_value = rng.getrandbits(n) if n else 0
    acts = [KEEP] * total
    frozen_positions = rng.sample(range(n), boundary)
    for j in frozen_positions:
        acts[n1 + j] = SET1 if (frozen_value >> j) & 1 else SET0
    out.append(("case1-freeze-boundary", BitTamperFn(acts)))

    # Identity on the seed segment, payload intact: the keep-heavy side.
    out.append(("case2-keep-all", BitTamperFn.identity(total)))

    # Identity on the seed segment plus payload flips, below and above the
    # few-errors threshold when it is wide enough to separate them.
    for label, flips in (("case2-flip-one", 1), ("case2-flip-several", max(2, n // 4))):
        acts = [KEEP] * total
        for j in rng.sample(range(n), min(flips, n)):
            acts[n1 + j] = FLIP
        out.append((label, BitTamperFn(acts)))

    # Freeze the seed segment to a fixed valid seed codeword, payload arbitrary.
    seed_word = plan.fixed_seed_codeword()
    acts = _freeze_actions_for(n1, seed_word) + [KEEP] * n
    out.append(("case3-freeze-seed-keep-payload", BitTamperFn(acts)))
    acts = _freeze_actions_for(n1, seed_word) + [
        FLIP if rng.random() < 0.5 else KEEP for _ in range(n)
    ]
    out.append(("case3-freeze-seed-mixed-payload", BitTamperFn(acts)))

    out.append(("single-bit-flip", BitTamperFn([FLIP] + [KEEP] * (total - 1))))
    out.append(("complement", BitTamperFn.complement(total)))

    cw = plan.fixed_full_codeword()
    out.append(("constant-valid-codeword", BitTamperFn.constant(BitWord(cw, total))))
    return out


def case1_family(plan, count: int, rng: random.Random):
    """`count` adversaries freezing at least case1_freeze_bits of the payload.

    Frozen patterns and seed-segment actions vary so the family exercises
    distinct outcome distributions; all land in the many-frozen-bits case.
    """
    n1 = plan.seed_bits
    n = plan.payload_bits
    boundary = plan.case1_freeze_bits
    out = []
    for i in range(count):
        nfrozen = rng.randrange(boundary, n + 1)
        frozen_value = rng.getrandbits(n) if n else 0
        acts = [KEEP] * (n1 + n)
        for j in rng.sample(range(n), nfrozen):
            acts[n1 + j] = SET1 if (frozen_value >> j) & 1 else SET0
        # Vary the seed-segment action across the family.
        mode = i % 4
        if mode == 1:
            for j in range(n1):
                acts[j] = FLIP
        elif mode == 2:
            seedv = rng.getrandbits(n1)
            for j in range(n1):
                acts[j] = SET1 if (seedv >> j) & 1 else SET0
        elif mode == 3:
            acts[rng.randrange(n1)] = FLIP
        out.append((f"case1-{i}", BitTamperFn(acts)))
    return out
