import io
import random
from fractions import Fraction

import pytest

from nmcode.core import (
    BOTTOM,
    SAME,
    BitWord,
    FiniteDist,
    GuardExceeded,
    InfeasibleParams,
    RngSeed,
)
from nmcode.lp import copy_distance
from nmcode.nmext import (
    ExtractorTable,
    FlatSourcePair,
    check_extraction,
    check_relaxed_nm,
    check_strict_nm,
    extractor_to_code,
    inner_product_table,
    joint_output_dist,
    parity_table,
    product_with_uniform_distance,
    relaxed_error_sweep,
    repair_fixed_points,
    sample_random_extractor,
    verify_reduction,
)
from nmcode.tamper import SplitStateTamperFn
from nmcode import schemes


def oracle_extraction_distance(table, src):
    # Independent double-loop oracle for extraction distance.
    counts = {}
    for x in src.xs:
        for y in src.ys:
            v = table.lookup(x, y)
            counts[v] = counts.get(v, 0) + 1
    total = len(src.xs) * len(src.ys)
    unif = Fraction(1, 1 << table.m)
    acc = sum(abs(Fraction(c, total) - unif) for c in counts.values())
    acc += ((1 << table.m) - len(counts)) * unif
    return acc / 2


class TestExtraction:
    def test_inner_product_two_bits(self):
        # Oracle-enumerated over all 16 pairs: 6 ones, 10 zeros.
        table = inner_product_table(2)
        src = FlatSourcePair.full(2)
        ones = sum(table.lookup(x, y) for x in range(4) for y in range(4))
        assert ones == 6
        expected = Fraction(abs(10 - 8), 16)  # half-L1 of (10/16, 6/16) vs uniform
        assert check_extraction(table, src) == expected == Fraction(1, 8)

    def test_constant_table(self):
        const1 = ExtractorTable(2, 1, [0] * 16)
        assert check_extraction(const1, FlatSourcePair.full(2)) == Fraction(1, 2)
        const2 = ExtractorTable(2, 2, [3] * 16)
        assert check_extraction(const2, FlatSourcePair.full(2)) == Fraction(3, 4)

    def test_zero_width_output(self):
        table = ExtractorTable(2, 0, [0] * 16)
        assert check_extraction(table, FlatSourcePair.full(2)) == 0

    def test_matches_oracle_on_random_tables_and_sources(self):
        rng = random.Random(0)
        for i in range(10):
            table = sample_random_extractor(3, rng.choice([1, 2]), RngSeed.from_int(i))
            xs = tuple(sorted(rng.sample(range(8), rng.randint(1, 8))))
            ys = tuple(sorted(rng.sample(range(8), rng.randint(1, 8))))
            src = FlatSourcePair(xs, ys)
            assert check_extraction(table, src) == oracle_extraction_distance(table, src)

    def test_truncation_never_hurts_extraction(self):
        for i in range(6):
            table = sample_random_extractor(3, 3, RngSeed.from_int(100 + i))
            src = FlatSourcePair.full(3)
            d_full = check_extraction(table, src)
            for k in range(0, 3):
                assert check_extraction(table.truncated(k), src) <= d_full


class TestTableMechanics:
    def test_sampling_deterministic(self):
        a = sample_random_extractor(3, 2, RngSeed.from_int(5))
        b = sample_random_extractor(3, 2, RngSeed.from_int(5))
        assert a.entries == b.entries
        assert a.entries != sample_random_extractor(3, 2, RngSeed.from_int(6)).entries

    def test_size_and_lookup_layout(self):
        table = sample_random_extractor(2, 2, RngSeed.from_int(7))
        assert len(table.entries) == 16
        arr = table.as_array()
        for x in range(4):
            for y in range(4):
                assert arr[x, y] == table.lookup(x, y) == table.entries[(x << 2) | y]

    def test_entry_histogram_roughly_uniform(self):
        table = sample_random_extractor(4, 2, RngSeed.from_int(8))
        counts = [0] * 4
        for e in table.entries:
            counts[e] += 1
        assert all(40 <= c <= 90 for c in counts)  # 256 entries over 4 values

    def test_serialization_round_trip(self):
        table = sample_random_extractor(3, 2, RngSeed.from_int(9))
        buf = io.BytesIO()
        table.save(buf)
        buf.seek(0)
        back = ExtractorTable.load(buf)
        assert back.entries == table.entries
        assert back.seed == table.seed

    def test_guard_on_table_size(self):
        with pytest.raises(GuardExceeded):
            ExtractorTable(9, 1, [0] * (1 << 18))

    def test_source_validation(self):
        with pytest.raises(ValueError):
            FlatSourcePair((), (1,))
        with pytest.raises(ValueError):
            FlatSourcePair((1, 1), (0,))


class TestRelaxed:
    def test_fixed_points_rejected_on_support(self):
        table = sample_random_extractor(2, 1, RngSeed.from_int(10))
        src = FlatSourcePair.full(2)
        ident = [0, 1, 2, 3]
        fpf = [1, 2, 3, 0]
        with pytest.raises(ValueError):
            check_relaxed_nm(table, src, ident, fpf)
        with pytest.raises(ValueError):
            check_relaxed_nm(table, src, fpf, ident)

    def test_matches_local_oracle(self):
        table = sample_random_extractor(2, 1, RngSeed.from_int(11))
        src = FlatSourcePair.full(2)
        f1, f2 = [1, 2, 3, 0], [3, 0, 1, 2]
        verdict = check_relaxed_nm(table, src, f1, f2)
        # Oracle for the both-tampered pattern.
        joint = {}
        for x in range(4):
            for y in range(4):
                key = (table.lookup(x, y), table.lookup(f1[x], f2[y]))
                joint[key] = joint.get(key, Fraction(0)) + Fraction(1, 16)
        second = {}
        for (a, b), p in joint.items():
            second[b] = second.get(b, Fraction(0)) + p
        acc = Fraction(0)
        for a in (0, 1):
            for b in (0, 1):
                acc += abs(joint.get((a, b), Fraction(0)) - Fraction(1, 2) * second.get(b, Fraction(0)))
        assert verdict.nm_distances["both"] == acc / 2

    def test_table_ignoring_first_source_is_degenerate(self):
        # Tampering the ignored source changes nothing: the joint is
        # diagonal, the sufficient-condition distance collapses to
        # 1 - 2^-m for full-support outputs, and the reference-optimal
        # distance is 0 via a pure SAME explanation.
        rng = random.Random(12)
        g = [rng.getrandbits(1) for _ in range(4)]
        entries = [g[y] for x in range(4) for y in range(4)]
        table = ExtractorTable(2, 1, entries)
        src = FlatSourcePair.full(2)
        f1 = [1, 2, 3, 0]
        verdict = check_relaxed_nm(table, src, f1, [3, 2, 1, 0])
        joint = joint_output_dist(table, src, f1, None)
        assert all(a == b for (a, b) in joint)  # diagonal
        assert verdict.nm_distances["first-only"] == product_with_uniform_distance(
            joint, 1
        )
        assert verdict.optimal_distances["first-only"] == 0

    def test_xor_share_with_complement_regression(self):
        # Output = parity of x xor y; complementing one half flips the
        # output deterministically. Frozen oracle values: the sufficient
        # condition and the optimal reference both sit at exactly 1/2.
        table = ExtractorTable(3, 1, [((x ^ y).bit_count() & 1) for x in range(8) for y in range(8)])
        src = FlatSourcePair.full(3)
        comp = [x ^ 7 for x in range(8)]
        fpf = [y ^ 1 for y in range(8)]
        verdict = check_relaxed_nm(table, src, comp, fpf)
        assert verdict.nm_distances["first-only"] == Fraction(1, 2)
        assert verdict.optimal_distances["first-only"] == Fraction(1, 2)


class TestStrict:
    def test_identity_explained_by_same(self):
        table = sample_random_extractor(3, 1, RngSeed.from_int(13))
        ident = list(range(8))
        verdict = check_strict_nm(table, FlatSourcePair.full(3), ident, ident)
        assert verdict.nm_distances["both"] == 0
        assert verdict.witness["reference"]["SAME"] == 1.0

    def test_constant_tampering_leaves_only_extraction_error(self):
        table = sample_random_extractor(3, 1, RngSeed.from_int(14))
        verdict = check_strict_nm(table, FlatSourcePair.full(3), [5] * 8, [2] * 8)
        assert verdict.nm_distances["both"] == 0
        assert verdict.overall == verdict.extraction_distance

    def test_optimal_reference_beats_candidates(self):
        table = sample_random_extractor(3, 1, RngSeed.from_int(15))
        src = FlatSourcePair.full(3)
        rng = random.Random(16)
        f1 = [rng.randrange(8) for _ in range(8)]
        f2 = [rng.randrange(8) for _ in range(8)]
        verdict = check_strict_nm(table, src, f1, f2)
        joint = joint_output_dist(table, src, f1, f2)
        marg = {}
        for (a, _), p in joint.items():
            marg[a] = marg.get(a, Fraction(0)) + p
        for _ in range(100):
            raw = [rng.randint(0, 9) for _ in range(3)]
            tot = sum(raw) or 1
            cand = {
                0: Fraction(raw[0], tot),
                1: Fraction(raw[1], tot),
                SAME: Fraction(raw[2], tot),
            }
            assert copy_distance(joint, marg, cand, [0, 1]) >= verdict.nm_distances["both"]

    def test_strict_bounded_by_relaxed_for_fpf_adversaries(self):
        # For already fixed-point-free tampering the strict check at the
        # same sources is within the factor-4 relation to the relaxed one.
        rng = random.Random(17)
        for i in range(5):
            table = sample_random_extractor(3, 1, RngSeed.from_int(18 + i))
            f1 = repair_fixed_points([rng.randrange(8) for _ in range(8)], 8)
            f2 = repair_fixed_points([rng.randrange(8) for _ in range(8)], 8)
            sweep, _ = relaxed_error_sweep(table, f1, f2, min_support=4)
            strict = check_strict_nm(table, FlatSourcePair.full(3), f1, f2)
            assert strict.overall_optimal <= 4 * max(sweep, Fraction(1, 1000))


class TestCodeReduction:
    def test_parity_buckets_and_bias(self):
        code = extractor_to_code(parity_table(3))
        assert all(len(b) == 32 for b in code.buckets)
        assert schemes.roundtrip_exhaustive(code)
        assert code.encoding_bias() == 0

    def test_encoding_bias_equals_extraction_distance(self):
        for i in range(5):
            table = sample_random_extractor(3, 1, RngSeed.from_int(30 + i))
            code = extractor_to_code(table)
            assert code.encoding_bias() == check_extraction(
                table, FlatSourcePair.full(3)
            )

    def test_empty_preimage_rejected(self):
        with pytest.raises(InfeasibleParams):
            extractor_to_code(ExtractorTable(2, 1, [0] * 16))

    def test_identity_adversary_has_zero_code_error(self):
        code = extractor_to_code(parity_table(2))
        ident = list(range(4))
        err, ref = schemes.optimal_nm_error(code, SplitStateTamperFn(ident, ident))
        assert err == 0 and ref.prob(SAME) == 1

    def test_constant_to_codeword_adversary_within_bound(self):
        table = sample_random_extractor(3, 1, RngSeed.from_int(40))
        code = extractor_to_code(table)
        f1, f2 = [6] * 8, [1] * 8
        err, _ = schemes.optimal_nm_error(code, SplitStateTamperFn(f1, f2))
        verdict = check_strict_nm(table, FlatSourcePair.full(3), f1, f2)
        eps = max(verdict.extraction_distance, verdict.nm_distances["both"])
        assert err <= eps * 3

    def test_reduction_report(self):
        table = sample_random_extractor(3, 1, RngSeed.from_int(41))
        report = verify_reduction(table, adversaries=25, seed=RngSeed.from_int(42))
        assert len(report.rows) == 25
        assert report.passed
        assert report.worst is not None


class TestSweep:
    def test_sweep_agrees_with_single_checks_at_full_support(self):
        table = sample_random_extractor(3, 1, RngSeed.from_int(50))
        rng = random.Random(51)
        f1 = repair_fixed_points([rng.randrange(8) for _ in range(8)], 8)
        f2 = repair_fixed_points([rng.randrange(8) for _ in range(8)], 8)
        worst, witness = relaxed_error_sweep(table, f1, f2, min_support=8)
        src = FlatSourcePair.full(3)
        verdict = check_relaxed_nm(table, src, f1, f2)
        expected = max(
            verdict.extraction_distance, max(verdict.optimal_distances.values())
        )
        assert worst == expected

    def test_sweep_guards(self):
        table = sample_random_extractor(3, 2, RngSeed.from_int(52))
        with pytest.raises(GuardExceeded):
            relaxed_error_sweep(table, [0] * 8, [0] * 8, min_support=4)


class TestRateTargetPlan:
    def test_inequality_chain_validated(self):
        from nmcode.nmext import rate_target_plan

        plan = rate_target_plan(10_000, 0.05)
        assert plan["existence_condition"]["holds"]
        assert plan["min_entropy_condition"]["holds"]
        assert plan["rate"] < 0.2

    def test_rate_approaches_one_fifth(self):
        from nmcode.nmext import rate_target_plan

        rates = [rate_target_plan(10**6, a)["rate"] for a in (0.2, 0.05, 0.005)]
        assert rates == sorted(rates)
        assert abs(rates[-1] - 0.2) < 0.002


class TestRandomTableBudget:
    def test_most_random_tables_meet_existence_budget(self):
        # At n=4, m=1 and full entropy the existence condition tolerates
        # error 1/4; most sampled tables beat it against a complementing
        # adversary on the first half.
        comp = [x ^ 0xF for x in range(16)]
        fpf = [y ^ 1 for y in range(16)]
        src = FlatSourcePair.full(4)
        within = 0
        for i in range(10):
            table = sample_random_extractor(4, 1, RngSeed.from_int(60 + i))
            verdict = check_relaxed_nm(table, src, comp, fpf)
            if max(verdict.nm_distances.values()) <= Fraction(1, 4):
                within += 1
        assert within >= 7
