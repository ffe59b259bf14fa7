"""Exact arithmetic over functions p(rho) exp(-a rho) with Laurent polynomial p.

Every coefficient and rate is a Fraction, so equality of functions is literal
equality of the representation.  The carrier type PolyExp covers hydrogenic
bound states, their dipole ladder functions, and the inhomogeneous solutions
needed for negative-order sums.

Irrational overall normalizations (1/sqrt(8), 1/sqrt(24), ...) are never
stored in coefficients; callers carry a separate squared factor norm2 and the
bilinear overlap picks up norm2_f * norm2_g, which is rational in every
pairing that occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (
    DivergentAtOrigin,
    ExponentFloorExceeded,
    NoPolynomialSolution,
    NonPolynomialPotential,
    RateMismatch,
    ResonanceUnprojected,
)
from .potentials import Potential

#: most singular admissible stored function: rho**-2 functions occur in the
#: third ladder rung, their pairwise products reach rho**-4.
MIN_EXPONENT = -4


@dataclass(frozen=True)
class PolyExp:
    """p(rho) * exp(-rate * rho) with sparse exact Laurent coefficients."""

    terms: tuple[tuple[int, Fraction], ...]
    rate: Fraction

    def coeff(self, exponent: int) -> Fraction:
        for e, c in self.terms:
            if e == exponent:
                return c
        return Fraction(0)

    def min_exponent(self) -> int | None:
        return self.terms[0][0] if self.terms else None

    def max_exponent(self) -> int | None:
        return self.terms[-1][0] if self.terms else None

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        if not self.terms:
            return f"0 * exp(-{self.rate} rho)"
        parts = [f"({c}) rho^{e}" for e, c in self.terms]
        return " + ".join(parts) + f" exp(-{self.rate} rho)"


def polyexp(coeffs: Mapping[int, object] | Iterable[tuple[int, object]], rate) -> PolyExp:
    """Build a PolyExp from {exponent: coefficient}; prunes exact zeros."""
    rate = Fraction(rate)
    if rate <= 0:
        raise ValueError("decay rate must be positive")
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    acc: dict[int, Fraction] = {}
    for e, c in items:
        c = Fraction(c)
        if c != 0:
            acc[int(e)] = acc.get(int(e), Fraction(0)) + c
    terms = tuple(sorted((e, c) for e, c in acc.items() if c != 0))
    if terms and terms[0][0] < MIN_EXPONENT:
        raise ExponentFloorExceeded(
            f"minimum exponent {terms[0][0]} below floor {MIN_EXPONENT}"
        )
    return PolyExp(terms=terms, rate=rate)


def monomial(exponent: int, coefficient, rate) -> PolyExp:
    return polyexp({exponent: coefficient}, rate)


def add(f: PolyExp, g: PolyExp) -> PolyExp:
    """Coefficient-wise sum; both operands must share the decay rate."""
    if f.rate != g.rate:
        raise RateMismatch(f"rates {f.rate} and {g.rate} differ")
    acc = dict(f.terms)
    for e, c in g.terms:
        acc[e] = acc.get(e, Fraction(0)) + c
    return polyexp(acc, f.rate)


def scale(f: PolyExp, c) -> PolyExp:
    c = Fraction(c)
    if c == 0:
        return PolyExp(terms=(), rate=f.rate)
    return PolyExp(terms=tuple((e, k * c) for e, k in f.terms), rate=f.rate)


def sub(f: PolyExp, g: PolyExp) -> PolyExp:
    return add(f, scale(g, -1))


def shift(f: PolyExp, k: int) -> PolyExp:
    """Multiply by rho**k.  Plumbing for overlaps and expectation weights, so
    the stored-function exponent floor is not enforced here."""
    return PolyExp(terms=tuple((e + k, c) for e, c in f.terms), rate=f.rate)


def mul(f: PolyExp, g: PolyExp) -> PolyExp:
    """Product; rates add.  Used for overlaps and Wronskians, so the exponent
    floor is not enforced on the result."""
    acc: dict[int, Fraction] = {}
    for e1, c1 in f.terms:
        for e2, c2 in g.terms:
            e = e1 + e2
            acc[e] = acc.get(e, Fraction(0)) + c1 * c2
    terms = tuple(sorted((e, c) for e, c in acc.items() if c != 0))
    return PolyExp(terms=terms, rate=f.rate + g.rate)


def differentiate(f: PolyExp) -> PolyExp:
    """Exact d/drho: (p' - a p) exp(-a rho)."""
    acc: dict[int, Fraction] = {}
    for e, c in f.terms:
        if e != 0:
            acc[e - 1] = acc.get(e - 1, Fraction(0)) + e * c
        acc[e] = acc.get(e, Fraction(0)) - f.rate * c
    terms = tuple(sorted((e, c) for e, c in acc.items() if c != 0))
    return PolyExp(terms=terms, rate=f.rate)


def origin_limit(f: PolyExp) -> Fraction | None:
    """lim rho->0 of f; None when negative powers survive (infinite limit)."""
    me = f.min_exponent()
    if me is None:
        return Fraction(0)
    if me < 0:
        return None
    return f.coeff(0)


def integrate(f: PolyExp) -> Fraction:
    """Exact int_0^inf f drho via int rho^n exp(-a rho) = n!/a^(n+1)."""
    total = Fraction(0)
    for e, c in f.terms:
        if e < 0:
            raise DivergentAtOrigin(f"term rho^{e} is not integrable at the origin")
        total += c * math.factorial(e) / f.rate ** (e + 1)
    return total


def overlap(f: PolyExp, g: PolyExp) -> Fraction:
    """Exact int_0^inf f g drho.  Rates need not match (they add)."""
    return integrate(mul(f, g))


def apply_h(f: PolyExp, l: int, ksq, v0: Potential) -> PolyExp:
    """Image under the shifted radial Hamiltonian

        (-d^2/drho^2 + l(l+1)/rho^2 + 2 v0 + ksq) f

    exactly; one rung of the positive ladder.  Requires a potential whose
    product with a Laurent polynomial stays polynomial.
    """
    pshift = v0.polyexp_shift()
    if pshift is None:
        raise NonPolynomialPotential(f"{v0.kind} potential does not act polynomially")
    k, cpot = pshift
    ksq = Fraction(ksq)
    lam = Fraction(l * (l + 1))
    acc: dict[int, Fraction] = {}

    def put(e: int, c: Fraction) -> None:
        if c != 0:
            acc[e] = acc.get(e, Fraction(0)) + c

    a = f.rate
    for e, c in f.terms:
        # -(p'' - 2 a p' + a^2 p) term by term for c rho^e
        put(e - 2, -c * e * (e - 1))
        put(e - 1, 2 * a * e * c)
        put(e, -a * a * c)
        put(e - 2, lam * c)
        put(e + k, cpot * c)
        put(e, ksq * c)
    return polyexp(acc, a)


def solve_inhomogeneous(
    rhs: PolyExp,
    l: int,
    ksq,
    v0: Potential,
    homogeneous: PolyExp | None = None,
) -> PolyExp:
    """Unique G with (h_l + ksq) G = rhs, regular at the origin and decaying.

    Undetermined coefficients over rho^(l+1..deg+2) exp(-a rho).  When a
    normalizable homogeneous solution exists the caller supplies it; the
    right-hand side must already be orthogonal to it and the returned G is
    fixed by <homogeneous|G> = 0.
    """
    ksq = Fraction(ksq)
    a = rhs.rate
    if a * a != ksq:
        raise NoPolynomialSolution(
            f"rhs rate {a} is not the bound rate for ksq={ksq}"
        )
    if v0.polyexp_shift() is None:
        raise NonPolynomialPotential(f"{v0.kind} potential does not act polynomially")
    if homogeneous is not None and overlap(homogeneous, rhs) != 0:
        raise ResonanceUnprojected("rhs has a component along the homogeneous solution")
    if rhs.is_zero():
        return PolyExp(terms=(), rate=a)

    e_lo = l + 1
    e_hi = max(rhs.max_exponent() + 2, e_lo)
    basis = list(range(e_lo, e_hi + 1))
    images = [apply_h(monomial(e, 1, a), l, ksq, v0) for e in basis]

    row_exps = sorted(
        {e for img in images for e, _ in img.terms} | {e for e, _ in rhs.terms}
    )
    nrow, ncol = len(row_exps), len(basis)
    row_of = {e: i for i, e in enumerate(row_exps)}
    mat = [[Fraction(0)] * (ncol + 1) for _ in range(nrow)]
    for j, img in enumerate(images):
        for e, c in img.terms:
            mat[row_of[e]][j] = c
    for e, c in rhs.terms:
        mat[row_of[e]][ncol] = c
    if homogeneous is not None:
        row = [overlap(homogeneous, monomial(e, 1, a)) for e in basis]
        row.append(Fraction(0))
        mat.append(row)
        nrow += 1

    # exact Gaussian elimination
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncol):
        pr = next((i for i in range(r, nrow) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        piv = mat[r][c]
        mat[r] = [x / piv for x in mat[r]]
        for i in range(nrow):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [x - factor * y for x, y in zip(mat[i], mat[r])]
        pivots.append((r, c))
        r += 1
    for i in range(r, nrow):
        if mat[i][ncol] != 0:
            raise NoPolynomialSolution("inconsistent linear system for the ansatz")
    if len(pivots) < ncol:
        free = set(range(ncol)) - {c for _, c in pivots}
        raise NoPolynomialSolution(
            f"solution not unique (free directions {sorted(free)}); "
            "a normalizable homogeneous solution must be supplied"
        )
    coeffs = {basis[c]: mat[i][ncol] for i, c in pivots}
    sol = polyexp(coeffs, a)
    if not sub(apply_h(sol, l, ksq, v0), rhs).is_zero():
        raise NoPolynomialSolution("verification failed: (h + ksq) G != rhs")
    return sol


def normed_equal(f: PolyExp, nf, g: PolyExp, ng) -> bool:
    """Whether f*sqrt(nf) and g*sqrt(ng) are the same function.

    True when f = c g with rational c > 0 and c^2 nf == ng ... inverted:
    c^2 * nf == ng is required with g = c f.
    """
    nf, ng = Fraction(nf), Fraction(ng)
    if f.is_zero() or g.is_zero():
        return f.is_zero() and g.is_zero()
    if f.rate != g.rate or len(f.terms) != len(g.terms):
        return False
    e0, c0 = f.terms[0]
    e1, c1 = g.terms[0]
    if e0 != e1:
        return False
    ratio = c1 / c0  # g = ratio * f
    if ratio < 0:
        return False
    if any(eg != ef or cg != ratio * cf for (ef, cf), (eg, cg) in zip(f.terms, g.terms)):
        return False
    return nf == ratio * ratio * ng
