"""Exact rational linear programming, sized for toy-scale minimizations.

The strict non-malleability checks need the distance-minimizing reference
distribution over outputs plus a SAME marker. That minimization is a small
linear program; solving it in exact arithmetic keeps every reported error
an exact Fraction, which the factor-4 and reduction inequalities rely on.

A closed form exists for one output bit and is validated against both the
simplex solver and a brute-force grid in the test suite.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

from .core import SAME, NmcodeError

_ZERO = Fraction(0)
_ONE = Fraction(1)


class LpInfeasible(NmcodeError):
    pass


def _pivot(tab: List[List[Fraction]], basis: List[int], row: int, col: int) -> None:
    piv = tab[row][col]
    inv = _ONE / piv
    tab[row] = [v * inv for v in tab[row]]
    prow = tab[row]
    for r, line in enumerate(tab):
        if r != row and line[col] != 0:
            f = line[col]
            tab[r] = [a - f * b for a, b in zip(line, prow)]
    basis[row] = col


def _simplex(tab: List[List[Fraction]], basis: List[int], ncols: int) -> None:
    # Bland's rule on both choices: guaranteed termination.
    while True:
        obj = tab[-1]
        col = next((j for j in range(ncols) if obj[j] < 0), None)
        if col is None:
            return
        best_row = None
        best_ratio = None
        for r in range(len(tab) - 1):
            a = tab[r][col]
            if a > 0:
                ratio = tab[r][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = r
        if best_row is None:
            raise LpInfeasible("objective unbounded below")
        _pivot(tab, basis, best_row, col)


def solve_lp(
    c: Sequence[Fraction],
    a_ub: Sequence[Sequence[Fraction]] = (),
    b_ub: Sequence[Fraction] = (),
    a_eq: Sequence[Sequence[Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
) -> Tuple[Fraction, List[Fraction]]:
    """Minimize c.x subject to a_ub.x <= b_ub, a_eq.x = b_eq, x >= 0.

    Two-phase simplex over Fractions. Returns (optimal value, solution).
    """
    n = len(c)
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    nslack = len(a_ub)
    for i, row in enumerate(a_ub):
        line = [Fraction(v) for v in row] + [_ZERO] * nslack
        line[n + i] = _ONE
        rows.append(line)
        rhs.append(Fraction(b_ub[i]))
    for i, row in enumerate(a_eq):
        rows.append([Fraction(v) for v in row] + [_ZERO] * nslack)
        rhs.append(Fraction(b_eq[i]))
    m = len(rows)
    total = n + nslack
    # Normalize to nonnegative rhs, then add artificials for phase 1.
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    width = total + m + 1
    tab: List[List[Fraction]] = []
    basis: List[int] = []
    for i in range(m):
        line = rows[i] + [_ZERO] * m + [rhs[i]]
        line[total + i] = _ONE
        tab.append(line)
        basis.append(total + i)
    phase1 = [_ZERO] * width
    for i in range(m):
        phase1 = [a - b for a, b in zip(phase1, tab[i])]
    # Artificial columns contribute cost 1 each; cancel them in the objective row.
    for i in range(m):
        phase1[total + i] += _ONE
    tab.append(phase1)
    _simplex(tab, basis, total)
    # Objective-row invariant: last entry holds minus the current value.
    if tab[-1][-1] < 0:
        raise LpInfeasible("no feasible point")
    # Drive any artificial variables remaining in the basis out of it.
    for r in range(m):
        if basis[r] >= total:
            col = next((j for j in range(total) if tab[r][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, r, col)
    tab.pop()
    obj = [Fraction(v) for v in c] + [_ZERO] * (nslack + m) + [_ZERO]
    # Express the objective in terms of the nonbasic variables.
    for r in range(m):
        j = basis[r]
        if obj[j] != 0:
            f = obj[j]
            obj = [a - f * b for a, b in zip(obj, tab[r])]
    tab.append(obj)
    _simplex(tab, basis, total)
    solution = [_ZERO] * n
    for r in range(m):
        if basis[r] < n:
            solution[basis[r]] = tab[r][-1]
    return -tab[-1][-1], solution


# ---------------------------------------------------------------------------
# Distance to the nearest "independent output + SAME marker" explanation
# ---------------------------------------------------------------------------


def copy_distance(
    joint: Mapping[Tuple[int, int], Fraction],
    marginal: Mapping[int, Fraction],
    d: Mapping[object, Fraction],
    outputs: Sequence[int],
) -> Fraction:
    """Statistical distance between `joint` and the explanation induced by d.

    d assigns mass to each output value and to SAME; the explanation places
    probability p_a * (d[b] + d[SAME]*[a==b]) on the pair (a, b).
    """
    ds = Fraction(d.get(SAME, 0))
    acc = _ZERO
    for a, pa in marginal.items():
        for b in outputs:
            model = pa * (Fraction(d.get(b, 0)) + (ds if a == b else _ZERO))
            acc += abs(joint.get((a, b), _ZERO) - model)
    return acc / 2


def min_copy_distance(
    joint: Mapping[Tuple[int, int], Fraction],
    marginal: Mapping[int, Fraction],
    outputs: Sequence[int],
) -> Tuple[Fraction, Dict[object, Fraction]]:
    """Exact minimizer of `copy_distance` over all reference distributions.

    Solved as a rational LP; exact for any output alphabet size, but meant
    for toy scales (the LP has O(|A|*|outputs|) variables).
    """
    support = [a for a, pa in marginal.items() if pa > 0]
    nb = len(outputs)
    # Variables: d[b] (nb), d_same, e[a][b] (len(support)*nb)
    nd = nb + 1
    nvars = nd + len(support) * nb
    idx_e = lambda ai, bi: nd + ai * nb + bi

    c = [_ZERO] * nvars
    for ai in range(len(support)):
        for bi in range(nb):
            c[idx_e(ai, bi)] = Fraction(1, 2)
    a_ub: List[List[Fraction]] = []
    b_ub: List[Fraction] = []
    for ai, a in enumerate(support):
        pa = Fraction(marginal[a])
        for bi, b in enumerate(outputs):
            j = Fraction(joint.get((a, b), _ZERO))
            row = [_ZERO] * nvars
            # p_a*d_b + p_a*[a==b]*d_same + e >= j
            row[bi] = -pa
            if a == b:
                row[nb] = -pa
            row[idx_e(ai, bi)] = -_ONE
            a_ub.append(row)
            b_ub.append(-j)
            row2 = [_ZERO] * nvars
            row2[bi] = pa
            if a == b:
                row2[nb] = pa
            row2[idx_e(ai, bi)] = -_ONE
            a_ub.append(row2)
            b_ub.append(j)
    a_eq = [[_ONE if i < nd else _ZERO for i in range(nvars)]]
    b_eq = [_ONE]
    value, x = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
    d: Dict[object, Fraction] = {b: x[bi] for bi, b in enumerate(outputs)}
    d[SAME] = x[nb]
    return value, d


def min_copy_distance_m1(
    joint: Mapping[Tuple[int, int], Fraction],
    marginal: Mapping[int, Fraction],
) -> Tuple[Fraction, Dict[object, Fraction]]:
    """Closed form of `min_copy_distance` for a single output bit.

    With outputs {0,1} the objective collapses to
        |J(0,1) - p0*d1| + |J(1,0) - p1*d0|,
    minimized subject to d0, d1 >= 0 and d0 + d1 <= 1. When the
    unconstrained optimum fits inside the simplex the distance is 0;
    otherwise the optimum sits on the d_same = 0 face and is found among
    the breakpoints of the two absolute values.
    """
    p0 = Fraction(marginal.get(0, _ZERO))
    p1 = Fraction(marginal.get(1, _ZERO))
    j01 = Fraction(joint.get((0, 1), _ZERO))
    j10 = Fraction(joint.get((1, 0), _ZERO))
    if p0 == 0 or p1 == 0:
        # One branch vanishes; the other reaches 0 inside the simplex.
        if p0 == 0 and p1 == 0:
            return _ZERO, {0: _ZERO, 1: _ZERO, SAME: _ONE}
        if p0 == 0:
            u = j10 / p1
            return _ZERO, {0: u, 1: _ZERO, SAME: _ONE - u}
        v = j01 / p0
        return _ZERO, {0: _ZERO, 1: v, SAME: _ONE - v}
    u0 = j10 / p1
    v0 = j01 / p0
    if u0 + v0 <= 1:
        return _ZERO, {0: u0, 1: v0, SAME: _ONE - u0 - v0}

    def g(v: Fraction) -> Fraction:
        return abs(j01 - p0 * v) + abs(j10 - p1 * (_ONE - v))

    candidates = {_ZERO, _ONE}
    for v in (v0, _ONE - u0):
        if _ZERO <= v <= _ONE:
            candidates.add(v)
    best_v = min(candidates, key=g)
    val = g(best_v)
    return val, {0: _ONE - best_v, 1: best_v, SAME: _ZERO}
