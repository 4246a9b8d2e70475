"""Boundedness, compactness, and Schatten classification with cross-checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .berezin import (BerezinProfile, GridSpec, berezin_power_integral,
                      berezin_profile, hilbert_schmidt_integral,
                      vanishes_at_infinity)
from .errors import NonConvergence
from .operator_rep import build_matrix, spectral_summary
from .quadrature import Tolerance
from .symbols import Symbol, SymbolPair

__all__ = [
    "Verdict",
    "Classification",
    "classify_berezin",
    "schatten_membership",
    "oracle_classify",
    "random_volterra_family",
    "consistency_report",
    "ConsistencyReport",
]


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


# Ring-growth thresholds for the sup-profile classifier.  A tail ring may
# exceed its predecessor by 5% before it counts as growth; a decelerating
# sequence is extrapolated only when the Aitken denominator is safely away
# from cancellation, and the extrapolated sup may not exceed 8x the last
# ring before the answer degrades to inconclusive.
_FLAT_RATIO = 1.05
_DECELERATION = 0.97
_AITKEN_GUARD = 0.05
_AITKEN_CEILING = 8.0

# Limit-fit thresholds for compactness: the extrapolated ring limit is
# compared against the outermost ring maximum.
_LIMIT_SMALL = 0.02
_LIMIT_LARGE = 0.25


@dataclass
class Classification:
    """Verdicts plus numeric estimates and the evidence behind them."""

    bounded: Verdict
    compact: Verdict
    schatten: dict = field(default_factory=dict)
    norm_estimate: float = math.nan
    essential_norm_estimate: float = math.nan
    source: str = "berezin"
    evidence: dict = field(default_factory=dict)


def _reconcile(cls: Classification) -> Classification:
    """Repair verdict-lattice violations, demoting to INCONCLUSIVE.

    Order: compact YES forces bounded YES; bounded NO forces compact NO;
    any Schatten YES needs compact YES; Schatten memberships are upward
    monotone in the order.  A conflict between two definite verdicts is
    softened on the side with weaker evidence (the implied one) and noted.
    """
    notes = cls.evidence.setdefault("conflicts", [])
    if cls.compact is Verdict.YES and cls.bounded is Verdict.NO:
        notes.append("compact=yes vs bounded=no; both demoted")
        cls.compact = Verdict.INCONCLUSIVE
        cls.bounded = Verdict.INCONCLUSIVE
    if cls.bounded is Verdict.NO and cls.compact is not Verdict.NO:
        cls.compact = Verdict.NO
    any_schatten_yes = any(v is Verdict.YES for v in cls.schatten.values())
    if any_schatten_yes and cls.compact is Verdict.NO:
        notes.append("schatten=yes vs compact=no; schatten demoted")
        for t, v in cls.schatten.items():
            if v is Verdict.YES:
                cls.schatten[t] = Verdict.INCONCLUSIVE
    orders = sorted(cls.schatten)
    for lo, hi in zip(orders, orders[1:]):
        if (cls.schatten[lo] is Verdict.YES
                and cls.schatten[hi] is Verdict.NO):
            notes.append(f"schatten monotonicity broken at {lo}->{hi}")
            cls.schatten[hi] = Verdict.INCONCLUSIVE
    if not notes:
        cls.evidence.pop("conflicts", None)
    return cls


def _ring_triple(profile: BerezinProfile, w_ref: float):
    radii = profile.radii
    rings = profile.ring_maxima
    idx = [int(np.argmin(np.abs(radii - t)))
           for t in (0.5 * w_ref, w_ref, 2.0 * w_ref)]
    return idx, radii[idx], rings[idx]


def _fit_ring_limit(r: np.ndarray, v: np.ndarray) -> float:
    """Limit of v(r) as r -> inf under the model A + B/r + C/r^2."""
    m = np.vstack([np.ones(3), 1.0 / r, 1.0 / r ** 2]).T
    return float(np.linalg.solve(m, v)[0])


def _classify_sup(pair: SymbolPair, q: float, grid: GridSpec,
                  tol: Tolerance | None, rel_tol: float) -> Classification:
    w_ref = 0.5 * grid.resolve_w_max(pair.alpha)
    profile = berezin_profile(pair, q, grid=grid, tol=tol, rel_tol=rel_tol)
    ev: dict = {"mode": "sup", "w_ref": w_ref,
                "radii": profile.radii.tolist(),
                "ring_maxima": profile.ring_maxima.tolist()}
    if profile.unbounded:
        ev["note"] = profile.note
        return Classification(bounded=Verdict.NO, compact=Verdict.NO,
                              norm_estimate=math.inf,
                              essential_norm_estimate=math.inf, evidence=ev)

    sup_raw = profile.sup
    if sup_raw <= 1e-280:
        ev["note"] = "transform vanishes identically"
        return Classification(bounded=Verdict.YES, compact=Verdict.YES,
                              norm_estimate=0.0, essential_norm_estimate=0.0,
                              evidence=ev)

    _, r3, v3 = _ring_triple(profile, w_ref)
    g21 = v3[1] / max(v3[0], 1e-300)
    g32 = v3[2] / max(v3[1], 1e-300)
    ev.update(growth21=g21, growth32=g32)

    bounded = Verdict.NO
    sup_est = math.inf
    if g32 <= _FLAT_RATIO:
        bounded, sup_est = Verdict.YES, sup_raw
    elif g32 < _DECELERATION * g21:
        d1, d2 = v3[1] - v3[0], v3[2] - v3[1]
        if d1 - d2 > _AITKEN_GUARD * d1 > 0:
            limit = v3[2] + d2 * d2 / (d1 - d2)
            ev["aitken_sup"] = limit
            if limit <= _AITKEN_CEILING * v3[2]:
                bounded, sup_est = Verdict.YES, max(limit, sup_raw)
            else:
                bounded, sup_est = Verdict.INCONCLUSIVE, math.nan

    if bounded is not Verdict.YES:
        return Classification(bounded=bounded, compact=Verdict.NO,
                              norm_estimate=sup_est,
                              essential_norm_estimate=sup_est, evidence=ev)

    strict, _ = vanishes_at_infinity(profile)
    ev["strict_vanishing"] = strict
    tail = profile.tail_max
    if strict:
        compact = Verdict.YES
    else:
        limit0 = max(_fit_ring_limit(r3, v3), 0.0)
        ev["limit_fit"] = limit0
        if limit0 < max(_LIMIT_SMALL * v3[2], 1e-4 * sup_est):
            compact = Verdict.YES
        elif limit0 > _LIMIT_LARGE * v3[2]:
            compact = Verdict.NO
            tail = max(tail, limit0)
        else:
            compact = Verdict.INCONCLUSIVE
    return Classification(bounded=Verdict.YES, compact=compact,
                          norm_estimate=sup_est ** (1.0 / q),
                          essential_norm_estimate=tail ** (1.0 / q),
                          evidence=ev)


def _classify_integral(pair: SymbolPair, p: float, q: float) -> Classification:
    s = p / (p - q)
    value, status = berezin_power_integral(pair, q, s)
    ev = {"mode": "integral", "s": s, "value": value, "status": status}
    if status == "converged":
        norm = value ** (1.0 / (s * q)) if value > 0 else 0.0
        return Classification(bounded=Verdict.YES, compact=Verdict.YES,
                              norm_estimate=norm, essential_norm_estimate=0.0,
                              evidence=ev)
    if status == "diverged":
        return Classification(bounded=Verdict.NO, compact=Verdict.NO,
                              norm_estimate=math.inf,
                              essential_norm_estimate=math.inf, evidence=ev)
    return Classification(bounded=Verdict.INCONCLUSIVE,
                          compact=Verdict.INCONCLUSIVE, evidence=ev)


def schatten_membership(pair: SymbolPair, order: float):
    """Verdict and norm estimate for the order-t class, p = q = 2 source.

    Membership reduces to finiteness of the integral of B^{t/2}; the
    estimate returned is the integral's value to the power 1/t.
    """
    if order <= 0:
        raise ValueError("order must be positive")
    value, status = berezin_power_integral(pair, 2.0, 0.5 * order)
    if status == "converged":
        est = value ** (1.0 / order) if value > 0 else 0.0
        return Verdict.YES, est, status
    if status == "diverged":
        return Verdict.NO, math.inf, status
    return Verdict.INCONCLUSIVE, math.nan, status


def classify_berezin(pair: SymbolPair, p: float, q: float,
                     grid: GridSpec | None = None,
                     tol: Tolerance | None = None,
                     rel_tol: float = 1e-4,
                     schatten_orders=()) -> Classification:
    """Classify boundedness and compactness from the transform alone.

    For p <= q the sup/vanishing behaviour of the transform over a
    geometric ring grid decides; for p > q finiteness of the s-th power
    integral (s the conjugate exponent of p/q) decides both at once.
    Schatten verdicts are attached when p = q = 2 and orders are given.
    """
    if p <= 0 or q <= 0:
        raise ValueError("exponents must be positive")
    if pair.weight_symbol.is_zero:
        cls = Classification(bounded=Verdict.YES, compact=Verdict.YES,
                             norm_estimate=0.0, essential_norm_estimate=0.0,
                             evidence={"mode": "zero"})
        cls.schatten = {float(t): Verdict.YES for t in schatten_orders}
        return cls

    if p <= q:
        span = grid if grid is not None else GridSpec()
        wide = GridSpec(w_max=2.0 * span.resolve_w_max(pair.alpha),
                        radial_count=span.radial_count,
                        angular_count=span.angular_count,
                        r_min=span.r_min)
        cls = _classify_sup(pair, q, wide, tol, rel_tol)
    else:
        cls = _classify_integral(pair, p, q)

    if schatten_orders and p == 2.0 and q == 2.0:
        details = {}
        for t in schatten_orders:
            verdict, est, status = schatten_membership(pair, float(t))
            cls.schatten[float(t)] = verdict
            details[float(t)] = {"estimate": est, "status": status}
        cls.evidence["schatten"] = details
    return _reconcile(cls)


# Boundary bands inside which the closed-form families refuse to answer,
# because the numeric side cannot be expected to resolve the edge.
_SCALE_BAND = 1e-3
_EXPONENT_BAND = 0.05


def _oracle_volterra_identity(pair: SymbolPair, p: float, q: float,
                              schatten_orders) -> Classification | None:
    g = pair.symbol
    deg = g.derivative().degree if not g.derivative().is_zero else -1
    if deg < 0:  # constant g, zero operator
        cls = Classification(bounded=Verdict.YES, compact=Verdict.YES,
                             norm_estimate=0.0, essential_norm_estimate=0.0,
                             source="oracle", evidence={"family": "zero"})
        cls.schatten = {float(t): Verdict.YES for t in schatten_orders}
        return cls
    ev = {"family": "polynomial-symbol, identity map", "degree": deg + 1}
    if p <= q:
        bounded = Verdict.YES if deg + 1 <= 2 else Verdict.NO
        compact = Verdict.YES if deg + 1 <= 1 else Verdict.NO
    else:
        edge = q * (p + 2.0) - 2.0 * p
        if abs(edge) < _EXPONENT_BAND * 2.0 * p:
            return None
        ok = deg + 1 <= 1 and edge > 0
        bounded = compact = Verdict.YES if ok else Verdict.NO
    cls = Classification(bounded=bounded, compact=compact, source="oracle",
                         evidence=ev)
    if p == 2.0 and q == 2.0:
        for t in schatten_orders:
            member = deg + 1 <= 1 and float(t) > 2.0
            cls.schatten[float(t)] = Verdict.YES if member else Verdict.NO
    return cls


def _oracle_weighted(pair: SymbolPair, p: float, q: float,
                     schatten_orders) -> Classification | None:
    u = pair.symbol
    a_mod = abs(pair.psi.a)
    if u.is_polynomial and u.degree == 0:
        if u.poly[0] == 0:
            cls = Classification(bounded=Verdict.YES, compact=Verdict.YES,
                                 norm_estimate=0.0,
                                 essential_norm_estimate=0.0,
                                 source="oracle", evidence={"family": "zero"})
            cls.schatten = {float(t): Verdict.YES for t in schatten_orders}
            return cls
        if abs(a_mod - 1.0) < _SCALE_BAND and a_mod != 1.0:
            return None
        ev = {"family": "constant weight, affine map", "a_mod": a_mod}
        contracting = a_mod < 1.0
        if p <= q:
            bounded_ok = contracting or (a_mod == 1.0 and pair.psi.b == 0)
        else:
            bounded_ok = contracting
        bounded = Verdict.YES if bounded_ok else Verdict.NO
        compact = Verdict.YES if contracting else Verdict.NO
        cls = Classification(bounded=bounded, compact=compact,
                             source="oracle", evidence=ev)
        if p == 2.0 and q == 2.0:
            for t in schatten_orders:
                cls.schatten[float(t)] = (Verdict.YES if contracting
                                          else Verdict.NO)
        return cls
    if not u.is_polynomial and u.poly == (1 + 0j,):
        # Gaussian-type weight: the quadratic-exponent margin decides
        # every Schatten class at once, and membership implies the rest.
        margin = pair.alpha * (1.0 - a_mod ** 2) - 2.0 * u.gaussian_growth
        if a_mod < 1.0 and abs(margin) < _SCALE_BAND * pair.alpha:
            return None
        member = a_mod < 1.0 and margin > 0
        ev = {"family": "gaussian weight, affine map", "margin": margin}
        if p == 2.0 and q == 2.0 and schatten_orders:
            verdict = Verdict.YES if member else Verdict.NO
            if member:
                cls = Classification(bounded=Verdict.YES,
                                     compact=Verdict.YES,
                                     source="oracle", evidence=ev)
            else:
                cls = Classification(bounded=Verdict.INCONCLUSIVE,
                                     compact=Verdict.INCONCLUSIVE,
                                     source="oracle", evidence=ev)
            cls.schatten = {float(t): verdict for t in schatten_orders}
            return cls
        return None
    return None


def _oracle_volterra_scaling(pair: SymbolPair, p: float,
                             q: float) -> Classification | None:
    g = pair.symbol
    beta = abs(pair.psi.a)
    if pair.psi.b != 0 or beta >= 1.0 or g.is_polynomial:
        return None
    gamma = 2.0 * g.gaussian_growth / pair.alpha
    if gamma + beta ** 2 < 1.0 - _SCALE_BAND:
        ev = {"family": "gaussian symbol, contracting map",
              "gamma": gamma, "beta": beta}
        return Classification(bounded=Verdict.YES,
                              compact=Verdict.INCONCLUSIVE,
                              source="oracle", evidence=ev)
    return None


def oracle_classify(pair: SymbolPair, p: float, q: float,
                    schatten_orders=()) -> Classification | None:
    """Closed-form verdicts for the symbol families that admit them.

    Returns None outside the supported families or inside the boundary
    bands where a numeric comparison would be meaningless.
    """
    if pair.kind == "volterra":
        if pair.symbol.is_polynomial and pair.psi.is_identity:
            return _oracle_volterra_identity(pair, p, q, schatten_orders)
        return _oracle_volterra_scaling(pair, p, q)
    return _oracle_weighted(pair, p, q, schatten_orders)


def random_volterra_family(count: int, seed: int = 1729,
                           degree_max: int = 5, alpha: float = 1.0,
                           lead_floor: float = 0.05) -> list:
    """Random polynomial symbols with the identity map, degrees 1..max.

    Coefficients are uniform on the unit disk; the leading one is redrawn
    until its modulus clears the floor, so the degree (and with it the
    closed-form verdict) is numerically unambiguous.
    """
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        deg = int(rng.integers(1, degree_max + 1))
        coeffs = np.empty(deg + 1, dtype=complex)
        for k in range(deg + 1):
            while True:
                c = math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
                if k < deg or abs(c) >= lead_floor:
                    break
            coeffs[k] = c
        pairs.append(SymbolPair.volterra(Symbol.polynomial(coeffs),
                                         alpha=alpha))
    return pairs


@dataclass
class ConsistencyReport:
    comparisons: int
    agreements: int
    mismatches: list
    lattice_conflicts: list
    spectral_disagreements: list
    op_norm_ratios: list
    hs_ratios: list
    entries: list

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.lattice_conflicts


def _verdicts_disagree(lhs: Verdict, rhs: Verdict) -> bool:
    definite = (Verdict.YES, Verdict.NO)
    return lhs in definite and rhs in definite and lhs is not rhs


def consistency_report(pairs, p: float, q: float, size: int = 128,
                       schatten_orders=(1.0, 2.0, 4.0)) -> ConsistencyReport:
    """Cross-validate transform verdicts against oracles and spectra.

    Every definite disagreement with a closed-form verdict is a mismatch;
    spectral partial sums only vote when their convergence flag is set.
    Norm ratios are collected for the equivalence-band regression.
    """
    mismatches, conflicts, spectral_dis = [], [], []
    op_ratios, hs_ratios, entries = [], [], []
    comparisons = agreements = 0
    want_schatten = p == 2.0 and q == 2.0
    orders = tuple(schatten_orders) if want_schatten else ()
    for i, pair in enumerate(pairs):
        cls = classify_berezin(pair, p, q, schatten_orders=orders)
        orc = oracle_classify(pair, p, q, schatten_orders=orders)
        entry = {"index": i, "classified": cls, "oracle": orc}
        entries.append(entry)
        if "conflicts" in cls.evidence:
            conflicts.append((i, cls.evidence["conflicts"]))
        if orc is not None:
            for attr in ("bounded", "compact"):
                lhs, rhs = getattr(cls, attr), getattr(orc, attr)
                if rhs is Verdict.INCONCLUSIVE:
                    continue
                comparisons += 1
                if lhs is rhs:
                    agreements += 1
                if _verdicts_disagree(lhs, rhs):
                    mismatches.append((i, attr, lhs, rhs))
            for t, rhs in orc.schatten.items():
                lhs = cls.schatten.get(t)
                if lhs is None or rhs is Verdict.INCONCLUSIVE:
                    continue
                comparisons += 1
                if lhs is rhs:
                    agreements += 1
                if _verdicts_disagree(lhs, rhs):
                    mismatches.append((i, f"schatten[{t}]", lhs, rhs))
        if want_schatten:
            summary = spectral_summary(build_matrix(pair, size), orders)
            entry["spectral"] = summary
            for t, partial in summary.schatten.items():
                lhs = cls.schatten.get(t)
                if lhs is None or lhs is Verdict.INCONCLUSIVE:
                    continue
                spectral_says = (Verdict.YES if partial.converged
                                 else Verdict.NO)
                if lhs is not spectral_says:
                    spectral_dis.append((i, t, lhs, spectral_says))
            if (cls.bounded is Verdict.YES
                    and math.isfinite(cls.norm_estimate)
                    and cls.norm_estimate > 0):
                op_ratios.append(summary.op_norm / cls.norm_estimate)
            try:
                direct = hilbert_schmidt_integral(pair)
            except NonConvergence:
                direct = math.nan
            hs_partial = summary.schatten.get(2.0)
            if math.isfinite(direct) and summary.hs_norm > 0 \
                    and hs_partial is not None and hs_partial.converged:
                hs_ratios.append(direct / summary.hs_norm ** 2)
    return ConsistencyReport(comparisons=comparisons, agreements=agreements,
                             mismatches=mismatches,
                             lattice_conflicts=conflicts,
                             spectral_disagreements=spectral_dis,
                             op_norm_ratios=op_ratios, hs_ratios=hs_ratios,
                             entries=entries)
