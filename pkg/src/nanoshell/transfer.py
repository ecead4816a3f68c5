"""Per-angular-momentum 2x2 interface solver.

For each (l, polarization) channel the radial problem is a two-point boundary
problem: regularity at the origin, an outgoing-only scattered wave in the
ambient, and the point-source jump at the dipole radius.  Interface
continuity (tangential E and H) couples the (regular, outgoing) amplitude
pair of adjacent regions through 2x2 matrices built from Riccati-Bessel
functions; the solution composes ordered matrix products from the core
outward and from the ambient inward and closes them with a single 2x2 solve
per channel.  No large block system is ever formed.

Azimuthal sums are folded analytically: a radial dipole drives only
electric-type (TM) waves, a tangential dipole drives TM and TE, and each
channel carries an m-summed scalar weight.  Amplitudes are propagated as
(mantissa, log) pairs so products of strongly growing/decaying Riccati
functions never overflow; scale factors cancel in every observable.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import materials, model, scaledmath as sm
from .errors import DegenerateSystemError, GeometryError
from .specfun import riccati_scaled

TM = "TM"
TE = "TE"

# relative log-magnitude loss at which the 2x2 closure is declared singular
_DEGENERACY_LOG = math.log(1e-13)


@dataclass(frozen=True)
class LayerContext:
    """Sphere geometry resolved at one wavelength (region index 1-based)."""

    radii: tuple  # interface radii [nm]
    k: tuple  # complex wavenumber per region [1/nm]
    mu: tuple
    eps: tuple
    absorbing: tuple
    k0: float  # vacuum wavenumber [1/nm]
    wavelength_nm: float

    @property
    def n_regions(self):
        return len(self.k)


def layer_context(sphere, wavelength_nm):
    k0 = 2.0 * math.pi / wavelength_nm
    ks, mus, epss, absorbing = [], [], [], []
    for j in range(1, sphere.n_regions + 1):
        mat = sphere.region_material(j)
        n = materials.refractive_index(mat, wavelength_nm)
        eps = materials.permittivity(mat, wavelength_nm)
        ks.append(k0 * n)
        mus.append(mat.mu)
        epss.append(eps)
        absorbing.append(eps.imag > 1e-12)
    if absorbing[-1]:
        raise GeometryError("ambient medium must be lossless at the queried wavelength")
    return LayerContext(
        radii=sphere.radii,
        k=tuple(ks),
        mu=tuple(mus),
        eps=tuple(epss),
        absorbing=tuple(absorbing),
        k0=k0,
        wavelength_nm=wavelength_nm,
    )


class _InterfaceTables:
    """Riccati tables per (region, interface) pair, built on demand."""

    def __init__(self, ctx, l_max):
        self.ctx = ctx
        self.l_max = l_max
        self._cache = {}

    def get(self, region, interface):
        key = (region, interface)
        if key not in self._cache:
            z = self.ctx.k[region - 1] * self.ctx.radii[interface - 1]
            self._cache[key] = riccati_scaled(self.l_max, z)
        return self._cache[key]


def _entries(tables, ctx, region, interface, l, pol):
    """Continuity-matrix entries of one region at one interface.

    Columns (regular, outgoing); rows (tangential-E, tangential-H).  For TM
    the E row carries the Riccati derivatives, for TE the functions
    themselves; k- and mu-weighting implement the field matching.
    """
    t = tables.get(region, interface)
    k = ctx.k[region - 1]
    mu = ctx.mu[region - 1]
    if pol == TM:
        e_p = sm.scale(t.dpsi_at(l), 1.0 / k)
        e_x = sm.scale(t.dxi_at(l), 1.0 / k)
        h_p = sm.scale(t.psi_at(l), 1.0 / mu)
        h_x = sm.scale(t.xi_at(l), 1.0 / mu)
        det = -1j / (k * mu)
    else:
        e_p = sm.scale(t.psi_at(l), 1.0 / k)
        e_x = sm.scale(t.xi_at(l), 1.0 / k)
        h_p = sm.scale(t.dpsi_at(l), 1.0 / mu)
        h_x = sm.scale(t.dxi_at(l), 1.0 / mu)
        det = 1j / (k * mu)
    return e_p, e_x, h_p, h_x, det


def _cross(state, tables, ctx, interface, from_region, to_region, l, pol):
    """Carry a (regular, outgoing) amplitude pair across one interface."""
    c1, c2 = state
    e_p, e_x, h_p, h_x, _ = _entries(tables, ctx, from_region, interface, l, pol)
    y_e = sm.add(sm.mul(c1, e_p), sm.mul(c2, e_x))
    y_h = sm.add(sm.mul(c1, h_p), sm.mul(c2, h_x))
    e_p, e_x, h_p, h_x, det = _entries(tables, ctx, to_region, interface, l, pol)
    d = sm.from_complex(det)
    n1 = sm.div(sm.sub(sm.mul(h_x, y_e), sm.mul(e_x, y_h)), d)
    n2 = sm.div(sm.sub(sm.mul(e_p, y_h), sm.mul(h_p, y_e)), d)
    return (n1, n2)


def interface_matrix(l, pol, n_in, n_out, radius_nm, wavelength_nm, mu_in=1.0, mu_out=1.0):
    """Plain 2x2 matrix carrying (regular, outgoing) amplitudes from the
    inner medium to the outer one across a single interface."""
    k0 = 2.0 * math.pi / wavelength_nm
    k_in = k0 * complex(n_in)
    k_out = k0 * complex(n_out)
    t_in = riccati_scaled(max(l, 1), k_in * radius_nm)
    t_out = riccati_scaled(max(l, 1), k_out * radius_nm)

    def entries(t, k, mu):
        if pol == TM:
            return (
                sm.scale(t.dpsi_at(l), 1.0 / k),
                sm.scale(t.dxi_at(l), 1.0 / k),
                sm.scale(t.psi_at(l), 1.0 / mu),
                sm.scale(t.xi_at(l), 1.0 / mu),
                -1j / (k * mu),
            )
        return (
            sm.scale(t.psi_at(l), 1.0 / k),
            sm.scale(t.xi_at(l), 1.0 / k),
            sm.scale(t.dpsi_at(l), 1.0 / mu),
            sm.scale(t.dxi_at(l), 1.0 / mu),
            1j / (k * mu),
        )

    ep_i, ex_i, hp_i, hx_i, _ = entries(t_in, k_in, mu_in)
    ep_o, ex_o, hp_o, hx_o, det_o = entries(t_out, k_out, mu_out)
    d = sm.from_complex(det_o)
    m = np.empty((2, 2), dtype=complex)
    for col, (ye, yh) in enumerate(((ep_i, hp_i), (ex_i, hx_i))):
        m[0, col] = sm.collapse(sm.div(sm.sub(sm.mul(hx_o, ye), sm.mul(ex_o, yh)), d))
        m[1, col] = sm.collapse(sm.div(sm.sub(sm.mul(ep_o, yh), sm.mul(hp_o, ye)), d))
    return m


@dataclass
class ChannelSolution:
    """Solved amplitudes of one (l, polarization) channel."""

    l: int
    pol: str
    weight: float  # m-folded channel weight, orientation included
    g: complex  # scattered self-coupling at the dipole
    b_out: complex  # total outgoing amplitude in the ambient
    q_out_val: complex  # free-dipole outgoing source amplitude
    scat_out: complex  # scattered-only outgoing amplitude in the ambient
    states: tuple  # per region 1..N+1: (inner_state, outer_state) scaled pairs


@dataclass
class MultipoleCoefficients:
    """All channel solutions for one (sphere, dipole) query."""

    sphere: object
    dipole: object
    ctx: LayerContext
    host_region: int
    l_max: int
    channels: list
    at_center: bool

    def channel(self, l, pol):
        for ch in self.channels:
            if ch.l == l and ch.pol == pol:
                return ch
        raise KeyError((l, pol))


def _channel_plan(orientation, dip_table, rho):
    """(pol, weight(l), s_reg(l), s_out(l)) generators for one orientation.

    The profile pair is the projection of the regular/outgoing wave of that
    channel onto the dipole axis at the dipole radius; the same pair sets the
    source amplitudes (outgoing content above the source is proportional to
    the regular profile and vice versa).
    """
    inv_rho = 1.0 / rho
    inv_rho2 = inv_rho * inv_rho
    if orientation == model.RADIAL:
        return [
            (
                TM,
                lambda l: 1.5 * l * (l + 1) * (2 * l + 1),
                lambda l: sm.scale(dip_table.psi_at(l), inv_rho2),
                lambda l: sm.scale(dip_table.xi_at(l), inv_rho2),
            )
        ]
    return [
        (
            TM,
            lambda l: 0.75 * (2 * l + 1),
            lambda l: sm.scale(dip_table.dpsi_at(l), inv_rho),
            lambda l: sm.scale(dip_table.dxi_at(l), inv_rho),
        ),
        (
            TE,
            lambda l: 0.75 * (2 * l + 1),
            lambda l: sm.scale(dip_table.psi_at(l), inv_rho),
            lambda l: sm.scale(dip_table.xi_at(l), inv_rho),
        ),
    ]


_ONE = (1.0 + 0j, 0.0)


def _solve_channel(ctx, tables, n_host, l, pol, q_reg, q_out, s_reg, s_out):
    n_regions = ctx.n_regions
    u_states = {1: (_ONE, sm.ZERO)}
    for i in range(1, n_host):
        u_states[i + 1] = _cross(u_states[i], tables, ctx, i, i, i + 1, l, pol)
    v_states = {n_regions: (sm.ZERO, _ONE)}
    for i in range(n_regions - 1, n_host - 1, -1):
        v_states[i] = _cross(v_states[i + 1], tables, ctx, i, i + 1, i, l, pol)

    u1, u2 = u_states[n_host]
    v1, v2 = v_states[n_host]
    t1 = sm.mul(u1, v2)
    t2 = sm.mul(u2, v1)
    delta = sm.sub(t1, t2)
    scale_log = max(sm.log_abs(t1), sm.log_abs(t2))
    if delta[0] == 0 or (
        math.isfinite(scale_log) and sm.log_abs(delta) < scale_log + _DEGENERACY_LOG
    ):
        raise DegenerateSystemError(l, pol)

    a1 = sm.div(sm.add(sm.mul(v1, q_out), sm.mul(v2, q_reg)), delta)
    b_out = sm.div(sm.add(sm.mul(u1, q_out), sm.mul(u2, q_reg)), delta)
    # scattered field in the host region; these product forms are exact and
    # avoid the cancellation in (total - primary)
    a_s = sm.mul(v1, b_out)
    b_s = sm.mul(u2, a1)
    g = sm.collapse(sm.add(sm.mul(a_s, s_reg), sm.mul(b_s, s_out)), f"g at l={l}")

    states = []
    for j in range(1, n_regions + 1):
        if j < n_host:
            st = (sm.mul(a1, u_states[j][0]), sm.mul(a1, u_states[j][1]))
            states.append((st, st))
        elif j > n_host:
            st = (sm.mul(b_out, v_states[j][0]), sm.mul(b_out, v_states[j][1]))
            states.append((st, st))
        else:
            inner = (sm.mul(a1, u1), sm.mul(a1, u2))
            outer = (sm.mul(b_out, v1), sm.mul(b_out, v2))
            states.append((inner, outer))
    return g, b_out, b_s, tuple(states)


def _solve_center(ctx, tables, pol, q_out_ideal):
    """Dipole exactly at the origin: a pure l=1 source; the divergent
    outgoing profile cancels analytically against the regular response."""
    n_regions = ctx.n_regions
    v_states = {n_regions: (sm.ZERO, _ONE)}
    for i in range(n_regions - 1, 0, -1):
        v_states[i] = _cross(v_states[i + 1], tables, ctx, i, i + 1, i, 1, pol)
    v1, v2 = v_states[1]
    if v2[0] == 0:
        raise DegenerateSystemError(1, pol)
    q_out = sm.from_complex(q_out_ideal)
    a_s = sm.mul(sm.div(v1, v2), q_out)
    b_out = sm.div(q_out, v2)
    g = sm.collapse(sm.mul(a_s, q_out), "g at center")

    states = []
    for j in range(1, n_regions + 1):
        if j == 1:
            st = (a_s, q_out)
            states.append((st, st))
        else:
            st = (sm.mul(b_out, v_states[j][0]), sm.mul(b_out, v_states[j][1]))
            states.append((st, st))
    return g, b_out, tuple(states)


def solve_dipole_fields(sphere, dipole, l_max):
    """Field coefficients of every (l, polarization) channel in all regions.

    The overall source normalization is fixed so that a contrast-free sphere
    returns zero scattered amplitudes and unit normalized rates.
    """
    if l_max < 1:
        raise GeometryError("l_max must be >= 1")
    ctx = layer_context(sphere, dipole.wavelength_nm)
    n_host = model.validate_dipole(sphere, dipole)
    tables = _InterfaceTables(ctx, l_max)
    channels = []

    if dipole.radial_position_nm == 0.0:
        # centered source: only the l = 1 electric channel is driven
        q_ideal = 1.0 / 3.0 if dipole.orientation == model.RADIAL else 2.0 / 3.0
        weight = 9.0 if dipole.orientation == model.RADIAL else 2.25
        g, b_out, states = _solve_center(ctx, tables, TM, q_ideal)
        channels.append(
            ChannelSolution(
                l=1,
                pol=TM,
                weight=weight,
                g=g,
                b_out=sm.collapse(b_out),
                q_out_val=q_ideal,
                scat_out=0j,
                states=states,
            )
        )
        return MultipoleCoefficients(
            sphere=sphere,
            dipole=dipole,
            ctx=ctx,
            host_region=n_host,
            l_max=l_max,
            channels=channels,
            at_center=True,
        )

    rho = ctx.k[n_host - 1] * dipole.radial_position_nm
    dip_table = riccati_scaled(l_max, rho)
    for pol, weight_fn, s_reg_fn, s_out_fn in _channel_plan(
        dipole.orientation, dip_table, rho
    ):
        for l in range(1, l_max + 1):
            s_reg = s_reg_fn(l)
            s_out = s_out_fn(l)
            g, b_out, b_s, states = _solve_channel(
                ctx, tables, n_host, l, pol, q_reg=s_out, q_out=s_reg,
                s_reg=s_reg, s_out=s_out,
            )
            channels.append(
                ChannelSolution(
                    l=l,
                    pol=pol,
                    weight=weight_fn(l),
                    g=g,
                    b_out=sm.collapse(b_out, f"ambient amplitude at l={l}"),
                    q_out_val=sm.collapse(s_reg, f"source amplitude at l={l}"),
                    scat_out=sm.collapse(b_s, f"scattered amplitude at l={l}"),
                    states=states,
                )
            )
    channels.sort(key=lambda ch: (ch.l, ch.pol))
    return MultipoleCoefficients(
        sphere=sphere,
        dipole=dipole,
        ctx=ctx,
        host_region=n_host,
        l_max=l_max,
        channels=channels,
        at_center=False,
    )


def ambient_far_field(coeffs):
    """Per-(l, pol) outgoing amplitudes in the ambient; together with the
    channel weights these fully determine the radiated power."""
    return {(ch.l, ch.pol): ch.b_out for ch in coeffs.channels}


def region_amplitudes(coeffs, region, side="outer"):
    """Collapsed (regular, outgoing) amplitudes of every channel in one
    region; side picks the sub- or super-source part of the host region."""
    idx = 0 if side == "inner" else 1
    out = {}
    for ch in coeffs.channels:
        st = ch.states[region - 1][idx]
        out[(ch.l, ch.pol)] = (
            sm.collapse(st[0], f"region {region} amplitude at l={ch.l}"),
            sm.collapse(st[1], f"region {region} amplitude at l={ch.l}"),
        )
    return out
