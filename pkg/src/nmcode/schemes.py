"""Scheme-generic tamper experiments.

Any coding scheme exposing the small int-level interface below can be run
through these experiments:

    message_bits, block_bits : int
    encode_int(s, rng) -> int
    decode_int(w) -> int | None        (None encodes decoder failure)
    iter_encodings_int(s) -> iterable  (uniform support; exact mode only)

The reference distribution for an adversary is built by the standard
sampler: draw a uniform message, tamper its encoding, and emit SAME when
the decoder returns the original message, else the decoded value. The
scheme's tampering error for the adversary is the worst statistical
distance, over messages, between the tampered-decode distribution and the
reference with SAME resolved to the message at hand.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Optional, Protocol, Tuple

from .core import (
    BOTTOM,
    SAME,
    BitWord,
    FiniteDist,
    confidence_radius,
    push_copy,
    statistical_distance,
)
from . import lp


class CodingScheme(Protocol):
    message_bits: int
    block_bits: int

    def encode_int(self, s: int, rng: random.Random) -> int: ...

    def decode_int(self, w: int) -> Optional[int]: ...

    def iter_encodings_int(self, s: int) -> Iterable[int]: ...


def _outcome(scheme, tampered: int, s: int, k: int):
    d = scheme.decode_int(tampered)
    if d is None:
        return BOTTOM
    if d == s:
        return SAME
    return BitWord(d, k)


def reference_dist(
    scheme,
    f,
    samples: Optional[int] = None,
    rng: Optional[random.Random] = None,
) -> FiniteDist:
    """Message-independent outcome distribution for adversary f.

    Exact mode (samples=None) enumerates every message and every encoder
    choice; sampled mode draws `samples` runs of the experiment.
    """
    k = scheme.message_bits
    if samples is None:
        weights: Dict[object, Fraction] = {}
        nmsg = 1 << k
        for s in range(nmsg):
            words = list(scheme.iter_encodings_int(s))
            share = Fraction(1, nmsg * len(words))
            for w in words:
                sym = _outcome(scheme, f.apply_int(w), s, k)
                weights[sym] = weights.get(sym, Fraction(0)) + share
        return FiniteDist(weights)
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    draws = []
    for _ in range(samples):
        s = rng.getrandbits(k) if k else 0
        w = scheme.encode_int(s, rng)
        draws.append(_outcome(scheme, f.apply_int(w), s, k))
    return FiniteDist.from_samples(draws)


def tampered_output_dist(
    scheme,
    f,
    s: int,
    samples: Optional[int] = None,
    rng: Optional[random.Random] = None,
) -> FiniteDist:
    """Distribution of decode(f(encode(s))); no SAME marking."""
    k = scheme.message_bits

    def sym_of(w: int):
        d = scheme.decode_int(f.apply_int(w))
        return BOTTOM if d is None else BitWord(d, k)

    if samples is None:
        words = list(scheme.iter_encodings_int(s))
        share = Fraction(1, len(words))
        weights: Dict[object, Fraction] = {}
        for w in words:
            sym = sym_of(w)
            weights[sym] = weights.get(sym, Fraction(0)) + share
        return FiniteDist(weights)
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    return FiniteDist.from_samples(
        [sym_of(scheme.encode_int(s, rng)) for _ in range(samples)]
    )


@dataclass
class NmErrorReport:
    value: Fraction
    radius: float
    per_message: Dict[int, Fraction] = field(repr=False, default_factory=dict)
    samples: Optional[int] = None

    @property
    def worst_message(self) -> int:
        return max(self.per_message, key=self.per_message.get)


def nm_error(
    scheme,
    f,
    ref: FiniteDist,
    messages: Optional[Iterable[int]] = None,
    samples: Optional[int] = None,
    rng: Optional[random.Random] = None,
    eta: float = 1e-6,
) -> NmErrorReport:
    """Worst-case distance between tampered decoding and the resolved reference.

    The returned radius separates sampling noise from the reported value:
    0.0 in exact mode, the two-sided Hoeffding radius at confidence 1-eta
    otherwise.
    """
    k = scheme.message_bits
    if messages is None:
        messages = range(1 << k)
    per: Dict[int, Fraction] = {}
    for s in messages:
        dist = tampered_output_dist(scheme, f, s, samples=samples, rng=rng)
        target = push_copy(ref, BitWord(s, k))
        per[s] = statistical_distance(dist, target)
    radius = 0.0 if samples is None else confidence_radius(samples, eta)
    return NmErrorReport(value=max(per.values()), radius=radius, per_message=per, samples=samples)


def optimal_nm_error(
    scheme,
    f,
    messages: Optional[Iterable[int]] = None,
) -> Tuple[Fraction, FiniteDist]:
    """Exact minimum, over reference distributions, of the worst-case distance.

    Solves the minimax as a rational LP over the outcome alphabet
    (all messages plus decoder failure) extended with SAME. Exact-mode
    enumeration of the scheme is required; meant for toy scales.
    """
    k = scheme.message_bits
    if messages is None:
        messages = list(range(1 << k))
    else:
        messages = list(messages)
    dists = {s: tampered_output_dist(scheme, f, s) for s in messages}

    outcomes = list(range(1 << k)) + [None]  # None stands for decoder failure

    def pval(s: int, o) -> Fraction:
        d = dists[s]
        if o is None:
            return d.prob(BOTTOM)
        return d.prob(BitWord(o, k))

    nb = len(outcomes)
    nd = nb + 1  # + SAME
    nmsg = len(messages)
    # Variables: d[0..nb-1], d_same, t, e[s][o]
    idx_t = nd
    idx_e = lambda si, oi: nd + 1 + si * nb + oi
    nvars = nd + 1 + nmsg * nb

    zero = Fraction(0)
    one = Fraction(1)
    c = [zero] * nvars
    c[idx_t] = one
    a_ub = []
    b_ub = []
    for si, s in enumerate(messages):
        row = [zero] * nvars
        for oi in range(nb):
            row[idx_e(si, oi)] = one
        row[idx_t] = Fraction(-2)
        a_ub.append(row)
        b_ub.append(zero)
        for oi, o in enumerate(outcomes):
            target = pval(s, o)
            same_hits = o == s
            row1 = [zero] * nvars
            row1[idx_e(si, oi)] = -one
            row1[oi] = -one
            if same_hits:
                row1[nb] = -one
            a_ub.append(row1)
            b_ub.append(-target)
            row2 = [zero] * nvars
            row2[idx_e(si, oi)] = -one
            row2[oi] = one
            if same_hits:
                row2[nb] = one
            a_ub.append(row2)
            b_ub.append(target)
    a_eq = [[one if i < nd else zero for i in range(nvars)]]
    b_eq = [one]
    value, x = lp.solve_lp(c, a_ub, b_ub, a_eq, b_eq)
    probs: Dict[object, Fraction] = {}
    for oi, o in enumerate(outcomes):
        if x[oi] > 0:
            probs[BOTTOM if o is None else BitWord(o, k)] = x[oi]
    if x[nb] > 0:
        probs[SAME] = x[nb]
    return value, FiniteDist(probs)


def roundtrip_exhaustive(scheme) -> bool:
    """decode(encode(s)) == s over every message and every encoder choice."""
    for s in range(1 << scheme.message_bits):
        for w in scheme.iter_encodings_int(s):
            if scheme.decode_int(w) != s:
                return False
    return True
