"""Coulomb bound and continuum states in the scaled variable rho = r/a0.

Bound states are exact: the reduced radial function u_nl = rho R_nl(full) is a
rational polynomial times exp(-rho/n) together with a rational squared
normalization factor norm2, so that u = radial * sqrt(norm2) and
int u^2 drho = 1 holds as an identity.

Continuum states are energy-normalized in wavenumber: asymptotically

    u_q(rho) -> sqrt(2/pi) sin(q rho + log(2 q rho)/q - l pi/2 + sigma_l).

They are integrated outward with Numerov and normalized by matching one
interior point against the exact regular solution evaluated by power series
(with the closed-form amplitude constant), which stays accurate at every q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson

from . import exactalg as xa
from .errors import (
    ChannelMismatch,
    DivergentAtOrigin,
    GridTooShort,
    InvalidQuantumNumbers,
    NonPositiveQ,
)
from .exactalg import PolyExp

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Channel:
    """One dipole branch l -> l+1 ("plus") or l -> l-1 ("minus")."""

    direction: str
    l: int
    weight: Fraction  # squared angular factor

    @property
    def target_l(self) -> int:
        return self.l + 1 if self.direction == "plus" else self.l - 1


def channel(direction: str, l: int) -> Channel:
    if direction not in ("plus", "minus"):
        raise InvalidQuantumNumbers(f"unknown channel direction {direction!r}")
    if l < 0:
        raise InvalidQuantumNumbers("l must be non-negative")
    if direction == "plus":
        w = Fraction((l + 1) ** 2, (2 * l + 1) * (2 * l + 3))
    else:
        if l == 0:
            raise InvalidQuantumNumbers("minus channel is forbidden for l = 0")
        w = Fraction(l**2, (2 * l + 1) * (2 * l - 1))
    return Channel(direction=direction, l=l, weight=w)


# ---------------------------------------------------------------------------
# bound states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundState:
    """Radial eigenstate (n, l) with exact reduced radial function."""

    n: int
    l: int
    ksq: Fraction             # 1/n^2
    radial: PolyExp           # rational part, leading coefficient positive
    norm2: Fraction           # u = radial * sqrt(norm2)

    def values(self, rho: np.ndarray) -> np.ndarray:
        return polyexp_values(self.radial, self.norm2, rho)

    def c_origin_sq(self) -> Fraction:
        """C_l^2 with u -> C_l rho^(l+1) at the origin."""
        return self.radial.coeff(self.l + 1) ** 2 * self.norm2


def _laguerre_coeffs(k: int, alpha: int, lam: Fraction) -> dict[int, Fraction]:
    """Coefficients of L_k^alpha(lam * rho) as {power of rho: Fraction}."""
    out: dict[int, Fraction] = {}
    for i in range(k + 1):
        out[i] = Fraction((-1) ** i * math.comb(k + alpha, k - i), math.factorial(i)) * lam**i
    return out


@lru_cache(maxsize=None)
def bound_state(n: int, l: int) -> BoundState:
    """Exact normalized reduced radial function, rate 1/n.

    Built from the associated-Laguerre series with the sign fixed so the
    highest power of rho has positive coefficient.
    """
    if n < 1 or l < 0 or l > n - 1:
        raise InvalidQuantumNumbers(f"(n, l) = ({n}, {l})")
    lam = Fraction(2, n)
    lag = _laguerre_coeffs(n - l - 1, 2 * l + 1, lam)
    coeffs = {e + l + 1: c for e, c in lag.items()}
    poly = xa.polyexp(coeffs, Fraction(1, n))
    if poly.terms[-1][1] < 0:
        poly = xa.scale(poly, -1)
    norm2 = 1 / xa.overlap(poly, poly)
    # fold perfect integer square factors into the polynomial for readability
    root = math.isqrt(norm2.numerator)
    if root * root == norm2.numerator and norm2.denominator == 1:
        poly = xa.scale(poly, root)
        norm2 = Fraction(1)
    return BoundState(n=n, l=l, ksq=Fraction(1, n * n), radial=poly, norm2=norm2)


def polyexp_values(poly: PolyExp, norm2, rho: np.ndarray) -> np.ndarray:
    """Float samples of poly * sqrt(norm2) on an array of rho values."""
    rho = np.asarray(rho, dtype=float)
    acc = np.zeros_like(rho)
    for e, c in poly.terms:
        acc += float(c) * rho ** int(e)
    return acc * np.exp(-float(poly.rate) * rho) * math.sqrt(float(norm2))


# ---------------------------------------------------------------------------
# bound-bound squared dipole matrix elements
# ---------------------------------------------------------------------------


def _laplace_laguerre_moment(m: int, k: int, alpha: int, lam: Fraction, s: Fraction) -> Fraction:
    """Exact T = int_0^inf rho^m exp(-s rho) L_k^alpha(lam rho) drho for m >= alpha.

    With V(s) = prod_{i=1..alpha}(k+i) * (s-lam)^k / s^(alpha+k+1),

        T = (-1)^j V^(j)(s),   j = m - alpha,

    so each moment costs O(j) big-integer powers instead of O(k) terms.
    """
    j = m - alpha
    if j < 0:
        raise ValueError("moment collapse requires m >= alpha")
    pref = Fraction(1)
    for i in range(1, alpha + 1):
        pref *= k + i
    b = alpha + k + 1
    d = s - lam
    total = Fraction(0)
    for i in range(0, min(j, k) + 1):
        fall = Fraction(1)
        for t in range(i):
            fall *= k - t
        rise = Fraction(1)
        for t in range(j - i):
            rise *= b + t
        term = math.comb(j, i) * fall * rise * (-1) ** (j - i) * d ** (k - i) / s ** (b + j - i)
        total += term
    return pref * total * (-1) ** j


def bound_bound_z2(state: BoundState, to_n: int, chan: Channel) -> Fraction:
    """Exact squared dipole matrix element |<n,l| z |to_n, l+-1>|^2.

    Value equals chan.weight * (int u_from rho u_to drho)^2; evaluated through
    the collapsed Laplace-transform moments so it stays cheap for to_n in the
    thousands.  bound_bound_z2_overlap is the direct route for cross-checks.
    """
    if chan.l != state.l:
        raise InvalidQuantumNumbers("channel does not start at the state's l")
    lp = chan.target_l
    if lp < 0 or to_n < lp + 1:
        raise InvalidQuantumNumbers(f"no target state ({to_n}, {lp})")
    n = to_n
    k = n - lp - 1
    alpha = 2 * lp + 1
    lam = Fraction(2, n)
    s = Fraction(1, state.n) + Fraction(1, n)
    total = Fraction(0)
    for e, c in state.radial.terms:
        total += c * _laplace_laguerre_moment(e + lp + 2, k, alpha, lam, s)
    csq = Fraction(1, n * n)
    for i in range(n - lp, n + lp + 1):
        csq /= i
    return chan.weight * total**2 * lam ** (2 * lp + 2) * csq * state.norm2


def bound_bound_z2_overlap(state: BoundState, to_n: int, chan: Channel) -> Fraction:
    """Same value via the explicit polynomial overlap (slow for large to_n)."""
    to = bound_state(to_n, chan.target_l)
    integral = xa.overlap(xa.shift(state.radial, 1), to.radial)
    return chan.weight * integral**2 * state.norm2 * to.norm2


def z2_1s_to_np(n: int) -> Fraction:
    """Closed form for |<1S| z |nP>|^2 including the angular factor 1/3."""
    if n < 2:
        raise InvalidQuantumNumbers("final nP state requires n >= 2")
    return Fraction(2**8, 3) * Fraction(n**7 * (n - 1) ** (2 * n),
                                        (n * n - 1) ** 5 * (n + 1) ** (2 * n))


def continuum_z2_1s(q: float) -> float:
    """Closed form for |<1S| z |q, l=1>|^2 (angular factor included).

    (1/3) 2^8 q (1+q^2)^-5 exp(-4 atan(q)/q) / (1 - exp(-2 pi / q)),
    with the final factor evaluated as 1 for very small q where the
    exponential underflows.
    """
    if q <= 0:
        raise NonPositiveQ("q must be positive")
    expo = 2.0 * math.pi / q
    denom = 1.0 if expo > 700.0 else 1.0 - math.exp(-expo)
    return (256.0 / 3.0) * q * (1.0 + q * q) ** -5 * math.exp(-4.0 * math.atan(q) / q) / denom


# ---------------------------------------------------------------------------
# expectation values
# ---------------------------------------------------------------------------


def expectation_rho_power(state: BoundState, p: int) -> Fraction:
    """Exact <rho^p> for the bound state; integrability needs p >= -(2l+2)."""
    if p < -(2 * state.l + 2):
        raise DivergentAtOrigin(f"<rho^{p}> diverges for l = {state.l}")
    return xa.overlap(state.radial, xa.shift(state.radial, p)) * state.norm2


def reference_expectation(m: int, l: int, p: int) -> Fraction:
    """Known closed forms for Coulomb <rho^p>, p in {2,1,-1,-2,-3,-4}."""
    lam = l * (l + 1)
    if p == 2:
        return Fraction(m**4, 2) * (5 + Fraction(1 - 3 * lam, m * m))
    if p == 1:
        return Fraction(m * m, 2) * (3 - Fraction(lam, m * m))
    if p == -1:
        return Fraction(1, m * m)
    if p == -2:
        return Fraction(2, m**3 * (2 * l + 1))
    if p == -3:
        if l < 1:
            raise DivergentAtOrigin("<rho^-3> requires l >= 1")
        return Fraction(2, m**3 * lam * (2 * l + 1))
    if p == -4:
        if l < 1:
            raise DivergentAtOrigin("<rho^-4> requires l >= 1")
        return (Fraction(1, m**3) * (3 - Fraction(lam, m * m))
                * Fraction(4, lam * (2 * l + 3) * (2 * l + 1) * (2 * l - 1)))
    raise ValueError("no closed form tabulated for this power")


# ---------------------------------------------------------------------------
# continuum waves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WaveSpec:
    """Grid policy for continuum integration.

    rho_max = None applies max(40, 30/q); the oracle passes a fixed cap since
    its matrix elements only need the bound-state support.
    """

    rho_max: float | None = None
    step_cap: float = 1.0 / 40.0
    steps_per_wavelength: float = 20.0
    match_x: float = 3.0


DEFAULT_WAVE_SPEC = WaveSpec()


@dataclass
class ContinuumWave:
    l: int
    q: float
    grid: np.ndarray
    values: np.ndarray
    h: float


def _series_u(l: int, q: float, rho: float, terms: int = 26) -> float:
    """Regular-origin Frobenius series rho^(l+1) sum a_j rho^j (unnormalized)."""
    a_prev2 = 0.0
    a_prev = 1.0
    s = 1.0
    p = 1.0
    for j in range(1, terms):
        a = (-2.0 * a_prev - q * q * a_prev2) / (j * (2 * l + 1 + j))
        p *= rho
        s += a * p
        a_prev2, a_prev = a_prev, a
    return rho ** (l + 1) * s


def coulomb_f_regular(l: int, q: float, x: float) -> float:
    """Exact regular Coulomb function F_l(eta=-1/q, x) with unit asymptotic
    amplitude, via its normalized power series.

    ln C_l^2 = l ln 4 + ln(2 pi |eta|) - ln(1 - exp(-2 pi |eta|))
               + sum_{j=1..l} ln(j^2 + eta^2) - 2 ln (2l+1)!

    Accurate while the series cancellation stays mild; callers keep
    x <= min(3, 20 q) so the working loss is under ~6 digits.
    """
    eta = -1.0 / q
    ae = abs(eta)
    ln_c2 = l * math.log(4.0) + math.log(2.0 * math.pi * ae)
    if 2.0 * math.pi * ae < 700.0:
        ln_c2 -= math.log1p(-math.exp(-2.0 * math.pi * ae))
    for j in range(1, l + 1):
        ln_c2 += math.log(j * j + eta * eta)
    ln_c2 -= 2.0 * math.lgamma(2 * l + 2)

    a_prev2 = 0.0
    a_prev = 1.0
    s = 1.0
    p = 1.0
    for j in range(1, 400):
        a = (2.0 * eta * a_prev - a_prev2) / (j * (j + 2 * l + 1))
        p *= x
        term = a * p
        s += term
        a_prev2, a_prev = a_prev, a
        if j > 8 and abs(term) < 1e-18 * max(1.0, abs(s)):
            break
    return math.exp(0.5 * ln_c2) * x ** (l + 1) * s


def continuum_wave(l: int, q: float, spec: WaveSpec | None = None) -> ContinuumWave:
    """Energy-normalized continuum wave by outward Numerov integration.

    The overall scale is fixed by matching one interior grid point against
    sqrt(2/pi) * F_l evaluated from the exact series; a second point checks
    consistency.
    """
    if q <= 0:
        raise NonPositiveQ("q must be positive")
    spec = spec or DEFAULT_WAVE_SPEC
    rho_max = spec.rho_max if spec.rho_max is not None else max(40.0, 30.0 / q)
    h = min(spec.step_cap, 1.0 / (spec.steps_per_wavelength * q))
    n = int(math.ceil(rho_max / h)) + 1
    rho = h * np.arange(1, n + 1)
    w = l * (l + 1) / rho**2 - 2.0 / rho - q * q
    f = 1.0 - (h * h / 12.0) * w

    u = np.empty(n)
    u[0] = _series_u(l, q, rho[0])
    u[1] = _series_u(l, q, rho[1])
    flist = f.tolist()
    ulist = u.tolist()
    up, uc = ulist[0], ulist[1]
    fp, fc = flist[0], flist[1]
    for i in range(2, n):
        fn = flist[i]
        un = ((12.0 - 10.0 * fc) * uc - fp * up) / fn
        ulist[i] = un
        up, uc = uc, un
        fp, fc = fc, fn
    u = np.asarray(ulist)

    # normalization: match the exact regular solution where the series is safe
    x_m = min(spec.match_x, 20.0 * q)
    idx0 = min(int(round(x_m / (q * h))), n - 1)
    candidates = sorted({max(2, idx0 - k) for k in range(0, idx0 // 2 + 1, max(1, idx0 // 8))})
    best = max(candidates, key=lambda i: abs(u[i]))
    scale = SQRT_2_OVER_PI * coulomb_f_regular(l, q, q * rho[best]) / u[best]
    others = [i for i in candidates if i != best and abs(u[i]) > 0.2 * abs(u[best])]
    if others:
        alt = others[-1]
        scale_alt = SQRT_2_OVER_PI * coulomb_f_regular(l, q, q * rho[alt]) / u[alt]
        if abs(scale_alt / scale - 1.0) > 1e-6:
            raise GridTooShort("normalization points disagree; grid or series unsafe")
    return ContinuumWave(l=l, q=q, grid=rho, values=u * scale, h=h)


def envelope_amplitude(wave: ContinuumWave) -> float:
    """Asymptotic amplitude from a sine/cosine fit over the last three local
    wavelengths, with the leading WKB envelope factor removed.

    Diagnostic: for a normalized wave this returns sqrt(2/pi) up to the
    residual O(1/(q rho)^2) asymptotic corrections.
    """
    q, rho, u = wave.q, wave.grid, wave.values
    lam = 2.0 * math.pi / q
    lo = rho[-1] - 3.0 * lam
    if lo < max(10.0, 4.0 * lam / (2.0 * math.pi)):
        raise GridTooShort("fewer than three asymptotic wavelengths on the grid")
    sel = rho >= lo
    if np.count_nonzero(sel) < 24:
        raise GridTooShort("too few points in the asymptotic window")
    r = rho[sel]
    k_local = np.sqrt(q * q + 2.0 / r - wave.l * (wave.l + 1) / r**2)
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (k_local[1:] + k_local[:-1]) * np.diff(r))])
    y = u[sel] * np.sqrt(k_local / q)
    design = np.column_stack([np.sin(phase), np.cos(phase)])
    (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(math.hypot(a, b))


def _channel_for_wave(state: BoundState, wave: ContinuumWave) -> Channel:
    if wave.l == state.l + 1:
        return channel("plus", state.l)
    if wave.l == state.l - 1:
        return channel("minus", state.l)
    raise ChannelMismatch(f"wave l={wave.l} is not a dipole partner of l={state.l}")


def _simpson_from_origin(integrand: np.ndarray, h: float) -> float:
    """Simpson including the implicit (0, 0) sample before the first grid point."""
    return float(simpson(np.concatenate([[0.0], integrand]), dx=h))


def bound_free_z2(state: BoundState, wave: ContinuumWave) -> float:
    """|<n,l| z |q, l+-1>|^2 with the angular weight, by grid quadrature."""
    chan = _channel_for_wave(state, wave)
    integrand = state.values(wave.grid) * wave.grid * wave.values
    integral = _simpson_from_origin(integrand, wave.h)
    return float(chan.weight) * integral**2


@lru_cache(maxsize=None)
def _reduced_dipole_weight(n: int, l: int, target_l: int) -> PolyExp:
    """g with <rho R | u_q> = <g | u_q> / q^2, from the wave equation:

        g = (l'(l'+1)/rho^2 - 2/rho) f - f'',   f = rho R.

    Exact integration by parts; the boundary terms vanish for every dipole
    channel here because g ~ rho^l and u_q ~ rho^(l'+1) with l + l' >= 1.
    """
    state = bound_state(n, l)
    f = xa.shift(state.radial, 1)
    lam = target_l * (target_l + 1)
    g = xa.scale(xa.shift(f, -2), lam)
    g = xa.add(g, xa.scale(xa.shift(f, -1), -2))
    g = xa.sub(g, xa.differentiate(xa.differentiate(f)))
    return g


def bound_free_z2_reduced(state: BoundState, wave: ContinuumWave) -> float:
    """Same value as bound_free_z2 through the q^2-reduced integrand.

    Pulls two powers of q out analytically, which keeps the quadrature
    well-conditioned where the raw oscillatory integral cancels to below
    the Simpson noise floor (large q).
    """
    chan = _channel_for_wave(state, wave)
    g = _reduced_dipole_weight(state.n, state.l, wave.l)
    integrand = polyexp_values(g, state.norm2, wave.grid) * wave.values
    integral = _simpson_from_origin(integrand, wave.h) / wave.q**2
    return float(chan.weight) * integral**2


def bound_free_amplitude_reduced(state: BoundState, wave: ContinuumWave) -> float:
    """Signed reduced radial integral <rho R | u_q> (no channel weight)."""
    _channel_for_wave(state, wave)
    g = _reduced_dipole_weight(state.n, state.l, wave.l)
    integrand = polyexp_values(g, state.norm2, wave.grid) * wave.values
    return _simpson_from_origin(integrand, wave.h) / wave.q**2
