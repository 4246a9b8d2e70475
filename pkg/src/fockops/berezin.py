"""The Berezin-type transform of an operator pair and derived global quantities.

For a pair with weight function W (that is |g'| / (1 + |z|) or |u|), map
psi(z) = a z + b and exponent power, the transform at w is

    B(w) = integral over C of
           exp(c (2 Re(psi(z) conj(w)) - |z|^2 - |w|^2)) W(z)^power dm(z)

with c = power * alpha / 2.  The exponent is maximised exactly at z =
conj(a) w, where its linear term vanishes identically, so substituting
z = conj(a) w + zeta gives

    B(w) = exp(c ((|a|^2 - 1) |w|^2 + 2 Re(b conj(w))))
           * integral of W(conj(a) w + zeta)^power exp(-c |zeta|^2) dm(zeta).

All evaluation happens in this recentred form, and in log space: the
shifted integral is a plain Gaussian integral whose integrand never sees
the large cancelling exponents of the defining formula, so the transform
is computable at any |w| without overflow.  Exponential symbol factors are
split the same way: the value exp(power Re q(conj(a) w)) joins the log
prefactor and only the increment q(v + zeta) - q(v) stays under the
integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentTail, NonConvergence
from .quadrature import Tolerance, build_scheme, gaussian_integral
from .symbols import SymbolPair, weight_at

__all__ = [
    "GridSpec",
    "BerezinProfile",
    "berezin_at",
    "berezin_log_profile",
    "berezin_profile",
    "vanishes_at_infinity",
    "berezin_power_integral",
    "lp_integral",
    "hilbert_schmidt_integral",
]

# Divergence margin: the shifted integrand W^power exp(-c |zeta|^2) is
# declared non-integrable when the quadratic growth of W^power reaches
# this fraction of c.
_DIVERGENCE_MARGIN = 0.02

# Per-level sample cap for batched profile evaluation.
_BATCH_BUDGET = 1 << 22

_POLY = np.polynomial.polynomial


def _decay_and_growth(pair: SymbolPair, power: float) -> tuple[float, float]:
    """(c, quadratic growth of W^power); raises DivergentTail when unusable."""
    if power <= 0:
        raise ValueError("power must be positive")
    c = 0.5 * power * pair.alpha
    growth = power * pair.weight_symbol.gaussian_growth
    if growth >= c * (1.0 - _DIVERGENCE_MARGIN):
        raise DivergentTail(
            f"weight growth {growth:.6g} reaches the Gaussian decay "
            f"{c:.6g}; the transform integral diverges at every w")
    return c, growth


def _log_shifted_integrals(pair: SymbolPair, power: float, v: np.ndarray,
                           scheme) -> np.ndarray:
    """log of integral W(v + zeta)^power exp(-c |zeta|^2) dm over zeta.

    The whole exponent, Gaussian included, is assembled per sample and
    summed by log-sum-exp, which keeps every intermediate finite.
    """
    weight = pair.weight_symbol
    q0, q1, q2 = weight.expo
    coeffs = np.asarray(weight.poly)
    zeta, bare = scheme.complex_nodes()
    log_bare = np.log(bare)
    gauss = -scheme.decay * np.abs(zeta) ** 2
    out = np.empty(v.size, dtype=float)
    chunk = max(1, _BATCH_BUDGET // max(zeta.size, 1))
    for lo in range(0, v.size, chunk):
        vs = v[lo:lo + chunk, None]
        args = vs + zeta[None, :]
        with np.errstate(divide="ignore"):
            log_mag = power * np.log(np.abs(_POLY.polyval(args, coeffs)))
        if pair.has_metric_factor:
            log_mag = log_mag - power * np.log1p(np.abs(args))
        if q1 != 0 or q2 != 0:
            q_lin = q1 + 2.0 * q2 * vs
            log_mag = log_mag + power * np.real(
                zeta[None, :] * (q_lin + q2 * zeta[None, :]))
        total = log_mag + gauss[None, :] + log_bare[None, :]
        peak = np.max(total, axis=1)
        safe = np.where(np.isfinite(peak), peak, 0.0)
        sums = np.sum(np.exp(total - safe[:, None]), axis=1)
        with np.errstate(divide="ignore"):
            out[lo:lo + chunk] = np.where(np.isfinite(peak),
                                          safe + np.log(sums), -np.inf)
    return out


def berezin_log_profile(pair: SymbolPair, power: float, points,
                        rel_tol: float = 1e-4,
                        tol: Tolerance | None = None,
                        radial_count: int = 48,
                        angular_count: int = 48) -> np.ndarray:
    """log B(w) at each point of ``points``, to ``rel_tol`` log-accuracy.

    One quadrature scheme (sized for the worst point) is shared by the
    whole batch and refined until two levels agree.  Raises DivergentTail
    when the shifted integral diverges and NonConvergence when refinement
    runs out.

    The default tolerance is deliberately modest: for metric-weighted
    pairs the shifted integrand has a conical point at zeta = -v, which
    caps the tensor rule's convergence rate, and profile batches cannot
    afford the deep refinements that squeezing it further would need.
    Single points go through :func:`berezin_at`, which evaluates in
    origin-centred coordinates where that point is resolved exactly.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    tol = tol or Tolerance()
    c, growth = _decay_and_growth(pair, power)
    weight = pair.weight_symbol
    a, b = pair.psi.a, pair.psi.b
    v = np.conj(a) * pts
    q0, q1, q2 = weight.expo
    if pts.size:
        linear = power * float(np.max(np.abs(q1 + 2.0 * q2 * v)))
    else:
        linear = power * abs(q1)
    cap = int(math.ceil(power * weight.degree)) + 8
    scheme = build_scheme(c, tol, growth, linear_bound=linear,
                          poly_degree_cap=cap, radial_count=radial_count,
                          angular_count=angular_count)
    log_pref = (c * ((abs(a) ** 2 - 1.0) * np.abs(pts) ** 2
                     + 2.0 * np.real(b * np.conj(pts)))
                + power * np.real(q0 + v * (q1 + q2 * v)))

    prev = None
    for level in range(tol.max_refinements + 1):
        sch = scheme if level == 0 else scheme.refined(level)
        if sch.radial_nodes.size * sch.angular_count > _BATCH_BUDGET:
            raise NonConvergence(
                "profile refinement exceeded the sample budget",
                value=None if prev is None else prev + log_pref)
        cur = _log_shifted_integrals(pair, power, v, sch)
        if prev is not None:
            both = np.isfinite(cur) & np.isfinite(prev)
            delta = float(np.max(np.abs(cur[both] - prev[both]))) \
                if np.any(both) else 0.0
            if delta <= rel_tol and np.array_equal(np.isfinite(cur),
                                                  np.isfinite(prev)):
                return cur + log_pref
        prev = cur
    raise NonConvergence("profile refinement cap hit before log agreement",
                         value=prev + log_pref)


def _shifted_integrand_smooth(pair: SymbolPair, power: float) -> bool:
    """True when the shifted integrand has no conical points.

    The metric factor kinks at zeta = -v; |P|^power kinks at the zeros of
    P unless the power is an even integer (then |P|^power is a polynomial
    in z and conj(z)).
    """
    if pair.has_metric_factor:
        return False
    if pair.weight_symbol.degree == 0:
        return True
    half = 0.5 * power
    return abs(half - round(half)) < 1e-12


def _log_direct_single(pair: SymbolPair, power: float, w: complex,
                       tol: Tolerance) -> float:
    """log B(w) by quadrature in origin-centred coordinates.

    The integrand W(z)^power exp(2 c Re(a conj(w) z) - c |z|^2) is smooth
    in polar coordinates about 0 (the metric kink sits at the origin,
    where the radial variable resolves it), so refinement converges
    spectrally; the price is a truncation radius and angular resolution
    that grow with |w|, which is fine for one point at a time.
    """
    c, growth = _decay_and_growth(pair, power)
    weight = pair.weight_symbol
    a, b = pair.psi.a, pair.psi.b
    lam = 2.0 * c * a * np.conj(w)
    q0, q1, q2 = weight.expo
    coeffs = np.asarray(weight.poly)
    linear = float(abs(lam)) + power * abs(q1)
    cap = int(math.ceil(power * weight.degree)) + 8
    scheme = build_scheme(c, tol, growth, linear_bound=linear,
                         poly_degree_cap=cap)
    log_pref = c * (2.0 * np.real(b * np.conj(w)) - abs(w) ** 2)

    def level_value(sch) -> float:
        z, bare = sch.complex_nodes()
        with np.errstate(divide="ignore"):
            log_mag = power * np.log(np.abs(_POLY.polyval(z, coeffs)))
        if pair.has_metric_factor:
            log_mag = log_mag - power * np.log1p(np.abs(z))
        if q1 != 0 or q2 != 0:
            log_mag = log_mag + power * np.real(z * (q1 + q2 * z))
        total = (log_mag + np.real(lam * z)
                 - sch.decay * np.abs(z) ** 2 + np.log(bare))
        peak = float(np.max(total))
        if not np.isfinite(peak):
            return -math.inf
        return peak + math.log(float(np.sum(np.exp(total - peak))))

    prev = None
    for level in range(tol.max_refinements + 1):
        sch = scheme if level == 0 else scheme.refined(level)
        if sch.radial_nodes.size * sch.angular_count > _BATCH_BUDGET:
            raise NonConvergence("single-point refinement exceeded the "
                                 "sample budget", value=prev)
        cur = level_value(sch)
        if prev is not None and (cur == prev == -math.inf
                                 or abs(cur - prev) <= tol.rel_tol):
            return cur + log_pref
        prev = cur
    raise NonConvergence("single-point refinement cap hit",
                         value=None if prev is None else prev + log_pref)


def berezin_at(pair: SymbolPair, power: float, w: complex,
               tol: Tolerance | None = None) -> float:
    """B(w) for a single point; +inf on overflow of the finite log value."""
    tol = tol or Tolerance()
    if _shifted_integrand_smooth(pair, power):
        logb = berezin_log_profile(pair, power, [w], rel_tol=tol.rel_tol,
                                   tol=tol)[0]
    else:
        logb = _log_direct_single(pair, power, complex(w), tol)
    if logb == -np.inf:
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.exp(logb))


@dataclass(frozen=True)
class GridSpec:
    """Geometric-radii times uniform-angles evaluation grid."""

    w_max: float | None = None
    radial_count: int = 24
    angular_count: int = 16
    r_min: float = 0.25

    def resolve_w_max(self, alpha: float) -> float:
        return self.w_max if self.w_max is not None else 8.0 / math.sqrt(alpha)

    def radii(self, alpha: float) -> np.ndarray:
        return np.geomspace(self.r_min, self.resolve_w_max(alpha),
                            self.radial_count)

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count

    def points(self, alpha: float) -> np.ndarray:
        return np.multiply.outer(self.radii(alpha),
                                 np.exp(1j * self.angles()))


@dataclass(frozen=True)
class BerezinProfile:
    """Transform values on a grid, with its sup and outer-ring statistics."""

    pair: SymbolPair
    power: float
    radii: np.ndarray
    angles: np.ndarray
    values: np.ndarray
    unbounded: bool = False
    note: str = ""

    @property
    def ring_maxima(self) -> np.ndarray:
        return np.max(self.values, axis=1)

    @property
    def sup(self) -> float:
        return float(np.max(self.values))

    @property
    def argmax(self) -> complex:
        i, j = np.unravel_index(int(np.argmax(self.values)),
                                self.values.shape)
        return complex(self.radii[i] * np.exp(1j * self.angles[j]))

    @property
    def tail_max(self) -> float:
        return float(np.max(self.values[-1]))

    def csv_rows(self):
        """(w_re, w_im, value) rows for plotting, header included."""
        yield ("w_re", "w_im", "value")
        for i, r in enumerate(self.radii):
            for j, t in enumerate(self.angles):
                w = r * np.exp(1j * t)
                yield (float(w.real), float(w.imag),
                       float(self.values[i, j]))


def berezin_profile(pair: SymbolPair, power: float,
                    grid: GridSpec | None = None,
                    tol: Tolerance | None = None,
                    rel_tol: float = 1e-4) -> BerezinProfile:
    """Evaluate the transform over the grid; divergence marks unbounded."""
    grid = grid or GridSpec()
    radii = grid.radii(pair.alpha)
    angles = grid.angles()
    pts = grid.points(pair.alpha)
    try:
        logb = berezin_log_profile(pair, power, pts.ravel(), rel_tol=rel_tol,
                                   tol=tol)
    except DivergentTail as exc:
        values = np.full(pts.shape, np.inf)
        return BerezinProfile(pair=pair, power=power, radii=radii,
                              angles=angles, values=values, unbounded=True,
                              note=str(exc))
    with np.errstate(over="ignore"):
        values = np.exp(logb).reshape(pts.shape)
    return BerezinProfile(pair=pair, power=power, radii=radii, angles=angles,
                          values=values, unbounded=bool(np.any(np.isinf(values))))


def vanishes_at_infinity(profile: BerezinProfile, eps: float = 1e-4,
                         floor: float = 1e-30) -> tuple[bool, np.ndarray]:
    """Strict decay test: small outer ring and non-increasing last rings.

    Returns (verdict, ring maxima sequence as evidence).
    """
    if profile.unbounded:
        raise ValueError("vanishing test requires a bounded profile")
    rings = profile.ring_maxima
    small = profile.tail_max < eps * max(profile.sup, floor)
    tail = rings[-3:]
    monotone = bool(np.all(np.diff(tail) <= 1e-12 * max(profile.sup, floor)))
    return small and monotone, rings


def _segment_nodes(lo: float, hi: float, radial: int = 24,
                   angular: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Polar product nodes and area weights on the annulus lo < |w| < hi."""
    x, gw = np.polynomial.legendre.leggauss(radial)
    r = 0.5 * (hi - lo) * (x + 1.0) + lo
    wr = 0.5 * (hi - lo) * gw * r * (2.0 * np.pi / angular)
    phases = np.exp(2j * np.pi * np.arange(angular) / angular)
    pts = np.multiply.outer(r, phases).ravel()
    wts = np.repeat(wr, angular)
    return pts, wts


def berezin_power_integral(pair: SymbolPair, power: float, s_exp: float,
                           rel_tol: float = 1e-4, abs_tol: float = 1e-12,
                           max_annuli: int = 12,
                           profile_rel: float = 1e-3) -> tuple[float, str]:
    """integral of B(w)^s_exp dm(w), marched over doubling annuli.

    Returns (value, status) with status one of "converged", "diverged",
    "inconclusive".  Divergence is data here: the value is +inf and no
    exception escapes.  The march compares consecutive annulus sums; a
    ratio staying near or above 1 certifies divergence (the borderline
    log-divergent case has ratio exactly 1), while a stable ratio below 1
    is extrapolated geometrically.
    """
    if s_exp <= 0:
        raise ValueError("s_exp must be positive")
    try:
        c, _ = _decay_and_growth(pair, power)
    except DivergentTail:
        return math.inf, "diverged"
    if pair.weight_symbol.is_zero:
        return 0.0, "converged"

    r_edge = 6.0 / math.sqrt(c)
    lo = 0.0
    total = 0.0
    prev_sum = None
    prev_rho = None
    for k in range(max_annuli + 1):
        hi = r_edge * (2.0 ** k)
        # The inner disk holds the mass that decides convergent values,
        # so it gets the dense rule; outer annuli only steer the ratio
        # test and can run coarse.
        if k == 0:
            pts, wts = _segment_nodes(lo, hi, radial=24, angular=32)
        else:
            pts, wts = _segment_nodes(lo, hi, radial=12, angular=24)
        try:
            logb = berezin_log_profile(pair, power, pts, rel_tol=profile_rel,
                                       radial_count=32, angular_count=32)
        except NonConvergence:
            return total, "inconclusive"
        with np.errstate(over="ignore"):
            seg = float(np.sum(wts * np.exp(s_exp * logb)))
        if not math.isfinite(seg):
            return math.inf, "diverged"
        if k == 0:
            total = seg
            lo = hi
            continue
        if seg <= max(abs_tol, rel_tol * max(total, abs_tol)):
            return total + seg, "converged"
        rho = seg / prev_sum if prev_sum and prev_sum > 0 else None
        total += seg
        if rho is not None and prev_rho is not None:
            if rho >= 0.92 and prev_rho >= 0.92:
                return math.inf, "diverged"
            if rho < 0.9 and abs(rho - prev_rho) <= 0.15 * rho:
                return total + seg * rho / (1.0 - rho), "converged"
        prev_sum = seg
        prev_rho = rho
        lo = hi
    return total, "inconclusive"


def lp_integral(pair: SymbolPair, q: float, s: float,
                rel_tol: float = 1e-4) -> float:
    """The p > q norm surrogate (integral of B^s dm)^(1 / (s q)); +inf verdict.

    ``s`` is p / (p - q) for the requested exponents.
    """
    if s <= 1:
        raise ValueError("s must exceed 1 (requires p > q)")
    value, status = berezin_power_integral(pair, q, s, rel_tol=rel_tol)
    if status == "converged":
        return float(value) ** (1.0 / (s * q))
    if status == "diverged":
        return math.inf
    raise NonConvergence("annulus march was inconclusive", value=value)


def hilbert_schmidt_integral(pair: SymbolPair,
                             tol: Tolerance | None = None) -> float:
    """integral of W(z)^2 exp(alpha (|psi(z)|^2 - |z|^2)) dm(z); +inf verdict.

    Recentred as exp(alpha |b|^2) times a Gaussian integral with decay
    alpha (1 - |a|^2), which keeps the exponential argument small whenever
    the integral converges at all.
    """
    weight = pair.weight_symbol
    if weight.is_zero:
        return 0.0
    alpha = pair.alpha
    a, b = pair.psi.a, pair.psi.b
    decay = alpha * (1.0 - abs(a) ** 2)
    growth = 2.0 * weight.gaussian_growth
    if decay <= 0 or growth >= decay * (1.0 - _DIVERGENCE_MARGIN):
        return math.inf
    cross = 2.0 * alpha * a * np.conj(b)

    def integrand(z):
        return weight_at(pair, z) ** 2 * np.exp(np.real(cross * z))

    linear = 2.0 * weight.linear_growth + float(abs(cross))
    cap = 2 * weight.degree + 8
    try:
        res = gaussian_integral(integrand, decay, tol, growth_bound=growth,
                                linear_bound=linear, poly_degree_cap=cap)
    except DivergentTail:
        return math.inf
    return float(math.exp(alpha * abs(b) ** 2) * res.value.real)
