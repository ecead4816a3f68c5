"""Normalized spectroscopic outputs.

Everything is normalized to the radiative rate of the same dipole embedded in
an unbounded medium equal to the one at the dipole position, so the dipole
magnitude and any local-field correction cancel.  With the scattered
self-coupling g of the channel solver (engine-normalized so a contrast-free
sphere gives g = 0):

* total rate        W_t / W_h   = 1 + Im(g)
* frequency shift   (w - w0)/W_h = -Re(g) / 2
* radiative rate    from the ambient outgoing amplitudes (multipole power sum)
* Ohmic rate        volume integral of eps'' |E|^2 over absorbing shells,
                    angular part folded analytically, radial part by
                    adaptive Gauss-Legendre panels.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import model, transfer
from . import scaledmath as sm
from .errors import DomainError, QuadratureError, RangeError
from .specfun import riccati_scaled

# dipole closer than this (times outer radius) to a metal interface is
# reported as unconverged rather than silently inaccurate
NEAR_METAL_FRACTION = 0.005

_SPREAD_ORDERS = 10
_WT_SPREAD_TOL = 1e-8
_WRAD_SPREAD_TOL = 1e-8
_WOHM_SPREAD_TOL = 1e-6


@dataclass(frozen=True)
class QuadratureConfig:
    rtol: float = 1e-7
    metal_offset_nm: float = 1.0
    max_panels: int = 400


@dataclass(frozen=True)
class SelfField:
    """Scattered self-coupling g with per-order partial sums retained."""

    g: complex
    partial: np.ndarray  # cumulative complex sums over l = 1..l_max
    l_max: int


def _per_l_arrays(coeffs):
    """Per-order complex self-coupling terms and radiative power terms."""
    l_max = coeffs.l_max
    g_terms = np.zeros(l_max + 1, dtype=complex)  # index by l, entry 0 unused
    rad_terms = np.zeros(l_max + 1)
    ambient = coeffs.host_region == coeffs.ctx.n_regions
    for ch in coeffs.channels:
        g_terms[ch.l] += 1j * ch.weight * ch.g
        if ambient:
            rad_terms[ch.l] += ch.weight * (
                2.0 * (np.conj(ch.q_out_val) * ch.scat_out).real + abs(ch.scat_out) ** 2
            )
        else:
            rad_terms[ch.l] += ch.weight * abs(ch.b_out) ** 2
    return g_terms, rad_terms, ambient


def _medium_ratio(coeffs):
    """Power normalization between the ambient and the dipole's medium."""
    ctx = coeffs.ctx
    n = coeffs.host_region
    eps_n = ctx.eps[n - 1].real
    eps_h = ctx.eps[-1].real
    mu_n = ctx.mu[n - 1]
    mu_h = ctx.mu[-1]
    return math.sqrt(eps_n / eps_h) * (mu_n / mu_h) ** 1.5


def _spread(partial):
    tail = partial[-_SPREAD_ORDERS:]
    last = abs(partial[-1])
    if last == 0.0:
        return 0.0 if np.ptp(tail) == 0.0 else math.inf
    return float(np.ptp(tail) / last)


def _geometric_tail(terms):
    """Tail estimate of a truncated series from its last two terms."""
    if len(terms) < 2:
        return math.inf
    t_last, t_prev = abs(terms[-1]), abs(terms[-2])
    if t_last == 0.0:
        return 0.0
    if t_prev == 0.0 or t_last >= t_prev:
        return math.inf
    q = t_last / t_prev
    return t_last * q / (1.0 - q)


def self_field(sphere, dipole, l_max=60):
    """Engine-normalized scattered self-coupling: wt = 1 + Im g,
    shift = -Re g / 2."""
    coeffs = transfer.solve_dipole_fields(sphere, dipole, l_max)
    g_terms, _, _ = _per_l_arrays(coeffs)
    partial = np.cumsum(g_terms[1:])
    return SelfField(g=complex(partial[-1]), partial=partial, l_max=l_max)


def total_rate(sphere, dipole, l_max=60):
    return 1.0 + self_field(sphere, dipole, l_max).g.imag


def frequency_shift(sphere, dipole, l_max=60):
    return -0.5 * self_field(sphere, dipole, l_max).g.real


def radiative_rate(sphere, dipole, l_max=60):
    coeffs = transfer.solve_dipole_fields(sphere, dipole, l_max)
    _, rad_terms, ambient = _per_l_arrays(coeffs)
    total = float(np.sum(rad_terms))
    return 1.0 + total if ambient else _medium_ratio(coeffs) * total


def fluorescence_yield(wt_norm, wrad_norm):
    """wrad/wt; an upper bound on the yield actually realized, since only
    the Ohmic channel of the nonradiative decay is modeled."""
    if wt_norm <= 0:
        raise DomainError(f"total rate must be positive, got {wt_norm}")
    return wrad_norm / wt_norm


def orientation_average(radial_value, tangential_value):
    """Isotropic (degeneracy-weighted) dipole-orientation average."""
    return (radial_value + 2.0 * tangential_value) / 3.0


def photostability_ratio(wrad_norm):
    """Detected photons before photobleaching, relative to the free dye:
    the enhancement of the excited-state turnover times the escape
    probability collapses to the normalized radiative rate."""
    return wrad_norm


def quasistatic_shift(eps1, eps2, k2_rs, kd_rd, orientation):
    """Non-retarded image-limit frequency shift for a single interface;
    the radial result is exactly twice the tangential one."""
    denom_sum = eps1 + eps2
    if denom_sum == 0:
        raise DomainError("quasistatic pole: eps1 + eps2 = 0")
    gap = k2_rs - kd_rd
    if gap == 0:
        raise DomainError("dipole on the interface")
    factor = 3.0 / 32.0 if orientation == model.TANGENTIAL else 3.0 / 16.0
    value = factor * (eps1 - eps2) / denom_sum / gap**3
    return value.real if isinstance(value, complex) else value


# ---------------------------------------------------------------------------
# Ohmic loss quadrature


_GL_CACHE = {}


def _gl_nodes(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def _scaled_field_sum(c1m, c1e, t1m, t1e, c2m, c2e, t2m, t2e):
    """c1*t1 + c2*t2 for (mantissa, log) arrays, collapsed to plain complex.

    Individual products may dwarf the physical sum (growing/decaying wave
    pairs), so exponents are clipped and genuine overflow is flagged.
    """
    e1 = np.clip(c1e + t1e, sm.LOG_TINY, sm.LOG_HUGE)
    e2 = np.clip(c2e + t2e, sm.LOG_TINY, sm.LOG_HUGE)
    f = c1m * t1m * np.exp(e1) + c2m * t2m * np.exp(e2)
    if not np.all(np.isfinite(f)):
        raise RangeError("field amplitude overflows double precision in absorption integrand")
    return f


def _region_integrand(coeffs, region):
    """Vector integrand: per-order angular-folded |E|^2 density in one region.

    Angular integrals are done analytically (the vector-wave families are
    orthogonal over the sphere), leaving a 1D radial integral of Riccati
    bilinears.
    """
    ctx = coeffs.ctx
    k = ctx.k[region - 1]
    abs_k2 = abs(k) ** 2
    l_max = coeffs.l_max
    ls = np.arange(1, l_max + 1, dtype=float)
    parts = {}
    for pol in (transfer.TM, transfer.TE):
        parts[pol] = {
            "c1m": np.zeros(l_max, dtype=complex),
            "c1e": np.zeros(l_max),
            "c2m": np.zeros(l_max, dtype=complex),
            "c2e": np.zeros(l_max),
            "w": np.zeros(l_max),
        }
    for ch in coeffs.channels:
        st = ch.states[region - 1][1]  # inner/outer only differ in the host
        p = parts[ch.pol]
        p["c1m"][ch.l - 1], p["c1e"][ch.l - 1] = st[0]
        p["c2m"][ch.l - 1], p["c2e"][ch.l - 1] = st[1]
        p["w"][ch.l - 1] = ch.weight

    def integrand(r):
        tab = riccati_scaled(l_max, k * r)
        out = np.zeros(l_max)
        for pol, p in parts.items():
            if not p["w"].any():
                continue
            f = _scaled_field_sum(
                p["c1m"], p["c1e"], tab.psi[1:], tab.psi_e[1:],
                p["c2m"], p["c2e"], tab.xi[1:], tab.xi_e[1:],
            )
            if pol == transfer.TM:
                fd = _scaled_field_sum(
                    p["c1m"], p["c1e"], tab.dpsi[1:], tab.dpsi_e[1:],
                    p["c2m"], p["c2e"], tab.dxi[1:], tab.dxi_e[1:],
                )
                out += p["w"] * (
                    ls * (ls + 1.0) * np.abs(f) ** 2 / (abs_k2 * r * r) + np.abs(fd) ** 2
                ) / abs_k2
            else:
                out += p["w"] * np.abs(f) ** 2 / abs_k2
        return out

    return integrand


def _adaptive_region_integral(fn, a, b, breakpoints, rtol, max_panels):
    """Adaptive bisection with embedded GL(10)/GL(20) error estimates.

    Deterministic: the worst panel (ties broken by position) is split until
    the summed per-order discrepancy meets the tolerance.
    """
    x10, w10 = _gl_nodes(10)
    x20, w20 = _gl_nodes(20)

    def panel(lo, hi):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        i10 = sum(w * fn(mid + half * x) for x, w in zip(x10, w10)) * half
        i20 = sum(w * fn(mid + half * x) for x, w in zip(x20, w20)) * half
        return [lo, hi, i20, float(np.sum(np.abs(i20 - i10)))]

    edges = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    panels = [panel(lo, hi) for lo, hi in zip(edges, edges[1:])]
    while True:
        total = np.sum([p[2] for p in panels], axis=0)
        err = sum(p[3] for p in panels)
        norm = float(np.sum(np.abs(total)))
        if norm == 0.0 or err <= rtol * norm:
            return total, (err / norm if norm else 0.0)
        if len(panels) >= max_panels:
            return total, err / norm
        worst = max(panels, key=lambda p: (p[3], -p[0]))
        panels.remove(worst)
        mid = 0.5 * (worst[0] + worst[1])
        panels.append(panel(worst[0], mid))
        panels.append(panel(mid, worst[1]))


def ohmic_rate_per_l(coeffs, quad=None):
    """Per-order normalized Ohmic rate contributions (summed gives the rate).

    Returns (per_l array indexed 1..l_max, achieved relative error).
    """
    quad = quad or QuadratureConfig()
    ctx = coeffs.ctx
    per_l = np.zeros(coeffs.l_max)
    worst = (0.0, None)
    for region in range(1, ctx.n_regions):
        if not ctx.absorbing[region - 1]:
            continue
        if region == coeffs.host_region:
            raise DomainError("dipole inside an absorbing shell")
        a = ctx.radii[region - 2] if region >= 2 else 0.0
        b = ctx.radii[region - 1]
        a = max(a, 1e-6 * b)  # keep the 1/r^2 factor finite; j_l kills it anyway
        breaks = [a + quad.metal_offset_nm, b - quad.metal_offset_nm]
        fn = _region_integrand(coeffs, region)
        integral, rel = _adaptive_region_integral(
            fn, a, b, breaks, quad.rtol, quad.max_panels
        )
        per_l += ctx.eps[region - 1].imag * integral
        if rel > worst[0]:
            worst = (rel, region)

    n = coeffs.host_region
    pref = ctx.k0**3 * math.sqrt(ctx.eps[n - 1].real) * ctx.mu[n - 1] ** 1.5
    return pref * per_l, worst


def ohmic_rate(sphere, dipole, l_max=60, quad=None):
    """Normalized rate of decay into absorption inside lossy shells."""
    quad = quad or QuadratureConfig()
    coeffs = transfer.solve_dipole_fields(sphere, dipole, l_max)
    per_l, (rel, region) = ohmic_rate_per_l(coeffs, quad)
    if region is not None and rel > quad.rtol:
        near = _near_metal(coeffs)
        if not near:
            raise QuadratureError(region, rel, quad.rtol)
    return float(np.sum(per_l))


def _near_metal(coeffs):
    margin = model.interface_margin_nm(
        coeffs.sphere,
        coeffs.dipole.radial_position_nm,
        absorbing_only=True,
        wavelength_nm=coeffs.dipole.wavelength_nm,
    )
    return margin < NEAR_METAL_FRACTION * coeffs.sphere.outer_radius_nm


def evaluate_from_coefficients(coeffs, quad=None):
    """Full normalized result set from solved channel coefficients."""
    quad = quad or QuadratureConfig()
    g_terms, rad_terms, ambient = _per_l_arrays(coeffs)
    g_partial = np.cumsum(g_terms[1:])
    wt_partial = 1.0 + np.imag(g_partial)
    shift_partial = -0.5 * np.real(g_partial)
    if ambient:
        wrad_partial = 1.0 + np.cumsum(rad_terms[1:])
    else:
        wrad_partial = _medium_ratio(coeffs) * np.cumsum(rad_terms[1:])
    wt = float(wt_partial[-1])
    shift = float(shift_partial[-1])
    wrad = float(wrad_partial[-1])

    any_absorbing = any(coeffs.ctx.absorbing[:-1])
    quad_rel = 0.0
    wohm_spread = 0.0
    if any_absorbing:
        per_l, (rel, region) = ohmic_rate_per_l(coeffs, quad)
        wohm = float(np.sum(per_l))
        wohm_partial = np.cumsum(per_l)
        wohm_spread = _spread(wohm_partial)
        quad_rel = rel
        if region is not None and rel > quad.rtol and not _near_metal(coeffs):
            raise QuadratureError(region, rel, quad.rtol)
    else:
        wohm = 0.0

    wt_spread = _spread(wt_partial)
    wrad_spread = _spread(wrad_partial)
    shift_tail = _geometric_tail((-0.5 * np.real(g_terms[1:])))
    converged = (
        wt_spread < _WT_SPREAD_TOL
        and wrad_spread < _WRAD_SPREAD_TOL
        and (not any_absorbing or (wohm_spread < _WOHM_SPREAD_TOL and quad_rel <= quad.rtol))
        and not (any_absorbing and _near_metal(coeffs))
    )
    y = fluorescence_yield(wt, wrad)
    return model.SpectroResult(
        shift_norm=shift,
        wt_norm=wt,
        wrad_norm=wrad,
        wohm_norm=wohm,
        fluorescence_yield=y,
        photostability=photostability_ratio(wrad),
        l_used=coeffs.l_max,
        converged=bool(converged),
        wt_spread=wt_spread,
        wrad_spread=wrad_spread,
        wohm_spread=wohm_spread,
        shift_tail=shift_tail,
        quad_rel_err=quad_rel,
        orientation=coeffs.dipole.orientation,
    )


def evaluate(sphere, dipole, l_max=60, quad=None):
    """One-stop evaluation of every normalized output for one query."""
    coeffs = transfer.solve_dipole_fields(sphere, dipole, l_max)
    return evaluate_from_coefficients(coeffs, quad)


def evaluate_orientations(sphere, r_nm, wavelength_nm, l_max=60, quad=None):
    """Radial, tangential, and orientation-averaged results at one radius.

    The averaged entry averages the rates (physical ensembles average rates,
    not ratios) and then forms yield and photostability from the averages.
    """
    results = {}
    for orientation in model.ORIENTATIONS:
        dip = model.DipoleSource(r_nm, orientation, wavelength_nm)
        results[orientation] = evaluate(sphere, dip, l_max, quad)
    ra, ta = results[model.RADIAL], results[model.TANGENTIAL]
    wt = orientation_average(ra.wt_norm, ta.wt_norm)
    wrad = orientation_average(ra.wrad_norm, ta.wrad_norm)
    wohm = orientation_average(ra.wohm_norm, ta.wohm_norm)
    results["average"] = replace(
        ra,
        shift_norm=orientation_average(ra.shift_norm, ta.shift_norm),
        wt_norm=wt,
        wrad_norm=wrad,
        wohm_norm=wohm,
        fluorescence_yield=fluorescence_yield(wt, wrad),
        photostability=photostability_ratio(wrad),
        converged=ra.converged and ta.converged,
        wt_spread=max(ra.wt_spread, ta.wt_spread),
        wrad_spread=max(ra.wrad_spread, ta.wrad_spread),
        wohm_spread=max(ra.wohm_spread, ta.wohm_spread),
        shift_tail=max(ra.shift_tail, ta.shift_tail),
        quad_rel_err=max(ra.quad_rel_err, ta.quad_rel_err),
        orientation="average",
    )
    return results
