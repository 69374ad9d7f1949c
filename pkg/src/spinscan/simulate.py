"""Reduced 2D Landau-Lifshitz-Gilbert dynamics on masked film grids.

The model keeps the terms that matter for shaped thin strips driven far
below saturation: Zeeman, uniform out-of-plane microwave drive, 5-point
exchange with mirror (Neumann) boundaries at the mask edge, a local
thin-film demag term -Ms*m_z along z, and a static stray field computed
once from the magnetic surface charges of the relaxed in-plane state.
That last term is what gives each outline its own internal-field landscape
(and therefore its own mode structure); without it a uniform film state
is an exact solution for every shape and all five strips would ring alike.

All fields are handled in tesla internally (B = mu0*H); the public
effective_field returns A/m.  Integration is fixed-step RK4 with per-cell
renormalization after every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import IntegrationError, ParameterError, RelaxationError
from .field import GridSpec, ScalarFieldSeries, VectorField
from .shapes import ShapeMask

MU0 = 4.0e-7 * math.pi
MU_B = 9.2740100783e-24
HBAR = 1.054571817e-34


def gyromagnetic_ratio(g_factor: float) -> float:
    """gamma = g * mu_B / hbar, in rad/s per tesla."""
    return g_factor * MU_B / HBAR


@dataclass(frozen=True)
class MaterialParams:
    ms: float = 730e3          # saturation magnetization, A/m
    alpha: float = 0.008       # Gilbert damping
    aex: float = 13e-12        # exchange stiffness, J/m
    g_factor: float = 2.12

    def __post_init__(self):
        if min(self.ms, self.aex, self.g_factor) <= 0 or self.alpha < 0:
            raise ParameterError("material parameters out of range")

    @property
    def gamma(self) -> float:
        return gyromagnetic_ratio(self.g_factor)


# default in-plane field direction: tilted off the short axis.  A direction
# on a symmetry axis makes the driven pattern mirror-symmetric, which halves
# the scanned waveform's period and moves every strip's pitch an octave up;
# the tilt breaks that degeneracy for all five outlines.
DEFAULT_FIELD_DIR = (math.sin(math.radians(25.0)), math.cos(math.radians(25.0)))


@dataclass(frozen=True)
class ExcitationParams:
    b_static: float = 87e-3            # static field mu0*H, tesla
    field_dir: tuple = DEFAULT_FIELD_DIR  # in-plane unit vector (x, y)
    b_mw: float = 1e-3                 # microwave amplitude mu0*h, tesla
    f_mw: float = 9.4e9                # drive frequency, Hz
    frames_per_period: int = 20
    periods: int = 50

    def __post_init__(self):
        if self.b_static < 0 or self.b_mw < 0:
            raise ParameterError("field amplitudes must be non-negative")
        if self.f_mw <= 0:
            raise ParameterError("drive frequency must be positive")
        if self.frames_per_period < 1 or self.periods < 1:
            raise ParameterError("frame schedule must be positive")
        norm = math.hypot(*self.field_dir)
        if not math.isclose(norm, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ParameterError("field_dir must be an in-plane unit vector")

    @property
    def period(self) -> float:
        return 1.0 / self.f_mw

    @property
    def frame_count(self) -> int:
        return self.frames_per_period * self.periods


def dt_stability_cap(grid: GridSpec, material: MaterialParams) -> float:
    """Fixed-step budget dominated by the exchange term."""
    b_sat = MU0 * material.ms
    b_ex = 8.0 * material.aex * (1.0 / grid.dx**2 + 1.0 / grid.dy**2) / material.ms
    return 0.25 * b_sat / (material.gamma * (b_sat + b_ex))


@dataclass(frozen=True)
class SimConfig:
    mask: ShapeMask
    material: MaterialParams = MaterialParams()
    excitation: ExcitationParams = ExcitationParams()
    dt: float | None = None            # requested step; None = T_mw/400
    relax_tolerance: float = 1e-4      # max |m x B|, tesla
    max_relax_steps: int = 200_000
    edge_field: bool = True
    use_fast_kernel: bool = True

    def __post_init__(self):
        dt = self.dt if self.dt is not None else self.excitation.period / 400.0
        if dt <= 0:
            raise ParameterError("dt must be positive")
        if dt > self.excitation.period / 200.0:
            raise ParameterError(
                f"dt={dt:g} under-resolves the drive (need <= {self.excitation.period / 200.0:g})"
            )
        cap = dt_stability_cap(self.mask.grid, self.material)
        if dt > cap:
            raise ParameterError(f"dt={dt:g} exceeds the stability cap {cap:g}")
        if self.relax_tolerance <= 0:
            raise ParameterError("relax_tolerance must be positive")

    @property
    def grid(self) -> GridSpec:
        return self.mask.grid

    @property
    def dt_effective(self) -> float:
        """Actual step: the frame interval split into a whole number of steps."""
        dt_req = self.dt if self.dt is not None else self.excitation.period / 400.0
        interval = self.excitation.period / self.excitation.frames_per_period
        spf = max(1, int(round(interval / dt_req)))
        if interval / spf > dt_req * (1.0 + 1e-12):
            spf += 1
        return interval / spf

    @property
    def steps_per_frame(self) -> int:
        interval = self.excitation.period / self.excitation.frames_per_period
        return int(round(interval / self.dt_effective))


# ---------------------------------------------------------------------------
# geometry preparation


class _Prep:
    """Flattened mask geometry plus precomputed fields, shared by both paths."""

    def __init__(self, cfg: SimConfig):
        grid = cfg.grid
        inside = cfg.mask.inside
        self.cell_index = np.full(inside.shape, -1, dtype=np.int64)
        js, is_ = np.nonzero(inside)
        n = len(js)
        self.cell_index[js, is_] = np.arange(n)
        self.js, self.is_ = js, is_
        self.n_cells = n

        nb = np.full((n, 4), -1, dtype=np.int64)
        for col, (dj, di) in enumerate(((0, -1), (0, 1), (-1, 0), (1, 0))):
            jn, in_ = js + dj, is_ + di
            ok = (jn >= 0) & (jn < grid.ny) & (in_ >= 0) & (in_ < grid.nx)
            idx = np.full(n, -1, dtype=np.int64)
            idx[ok] = self.cell_index[jn[ok], in_[ok]]
            nb[:, col] = idx
        self.nb = nb

        self.inv_dx2 = 1.0 / grid.dx**2
        self.inv_dy2 = 1.0 / grid.dy**2
        mat, exc = cfg.material, cfg.excitation
        self.gamma_eff = mat.gamma / (1.0 + mat.alpha**2)
        self.alpha = mat.alpha
        self.cex = 2.0 * mat.aex / mat.ms          # tesla * m^2
        self.b_sat = MU0 * mat.ms                  # local demag scale, tesla
        self.b_static = np.array(
            [exc.b_static * exc.field_dir[0], exc.b_static * exc.field_dir[1], 0.0]
        )
        self.omega = 2.0 * math.pi * exc.f_mw
        self.b_mw = exc.b_mw
        if cfg.edge_field:
            self.b_edge = _edge_stray_field(cfg.mask, grid, mat.ms, exc.field_dir)
        else:
            self.b_edge = np.zeros((n, 3))
        self.cell_volume = grid.dx * grid.dy * grid.thickness


def _edge_stray_field(mask: ShapeMask, grid: GridSpec, ms: float, field_dir) -> np.ndarray:
    """Static in-plane stray field of the saturated state, in tesla.

    Magnetic surface charges sigma = Ms*(m.n) sit on mask faces whose
    neighbor is empty.  Each charged face of width w and height equal to the
    film thickness contributes, at in-plane distance s in the midplane,

        dB = mu0 * sigma * w * th / (4 pi) * (r - r') / (s^2 sqrt(s^2 + th^2/4))

    which is the exact thin-strip result integrated over the face height.
    A cell's own faces are skipped: the local -Ms*m_z term already stands in
    for the self-demag of the cell.
    """
    inside = mask.inside
    js, is_ = np.nonzero(inside)
    n = len(js)
    cell_index = np.full(inside.shape, -1, dtype=np.int64)
    cell_index[js, is_] = np.arange(n)

    ux, uy = field_dir
    faces = []  # (x, y, sigma*w, owner)
    for (dj, di, nxh, nyh) in ((0, -1, -1.0, 0.0), (0, 1, 1.0, 0.0), (-1, 0, 0.0, -1.0), (1, 0, 0.0, 1.0)):
        jn, in_ = js + dj, is_ + di
        open_face = ~inside[jn, in_]  # mask margin keeps indices in range
        if not open_face.any():
            continue
        sigma = ms * (ux * nxh + uy * nyh)
        if sigma == 0.0:
            continue
        w = grid.dy if di != 0 else grid.dx
        fx = (is_[open_face] + 0.5 + 0.5 * di) * grid.dx
        fy = (js[open_face] + 0.5 + 0.5 * dj) * grid.dy
        owner = cell_index[js[open_face], is_[open_face]]
        faces.append((fx, fy, np.full(fx.shape, sigma * w), owner))
    if not faces:
        return np.zeros((n, 3))

    fx = np.concatenate([f[0] for f in faces])
    fy = np.concatenate([f[1] for f in faces])
    sw = np.concatenate([f[2] for f in faces])
    owner = np.concatenate([f[3] for f in faces])

    cx = (is_ + 0.5) * grid.dx
    cy = (js + 0.5) * grid.dy
    th = grid.thickness
    pref = MU0 * th / (4.0 * math.pi)
    out = np.zeros((n, 3))
    block = max(1, int(2e7) // max(n, 1))
    for lo in range(0, len(fx), block):
        hi = min(lo + block, len(fx))
        rx = cx[np.newaxis, :] - fx[lo:hi, np.newaxis]
        ry = cy[np.newaxis, :] - fy[lo:hi, np.newaxis]
        s2 = rx * rx + ry * ry
        own = owner[lo:hi]
        rows = np.arange(lo, hi) - lo
        s2[rows, own] = np.inf  # self-face exclusion
        g = pref * sw[lo:hi, np.newaxis] / (s2 * np.sqrt(s2 + 0.25 * th * th))
        out[:, 0] += np.einsum("fc,fc->c", g, rx)
        out[:, 1] += np.einsum("fc,fc->c", g, ry)
    return out


# ---------------------------------------------------------------------------
# right-hand side, reference numpy path


def _b_eff_flat(m: np.ndarray, prep: _Prep, t: float, b_mw: float) -> np.ndarray:
    """Effective field in tesla on the flat cell list."""
    idx = np.arange(prep.n_cells)
    b = np.empty_like(m)
    b[:] = prep.b_static
    b += prep.b_edge
    for col, invd2 in ((0, prep.inv_dx2), (1, prep.inv_dx2), (2, prep.inv_dy2), (3, prep.inv_dy2)):
        nb = prep.nb[:, col]
        src = np.where(nb >= 0, nb, idx)
        b += prep.cex * invd2 * (m[src] - m)
    b[:, 2] += b_mw * math.sin(prep.omega * t) - prep.b_sat * m[:, 2]
    return b


def _torque(m: np.ndarray, b: np.ndarray, gamma_eff: float, alpha: float) -> np.ndarray:
    """dm/dt for unit-like m and field b in tesla, damping via the triple product."""
    cross = np.cross(m, b)
    mdotb = np.einsum("...i,...i->...", m, b)[..., np.newaxis]
    m2 = np.einsum("...i,...i->...", m, m)[..., np.newaxis]
    return -gamma_eff * (cross + alpha * (m * mdotb - b * m2))


def _rhs_flat(m: np.ndarray, prep: _Prep, t: float, b_mw: float, alpha: float, gamma_eff: float):
    return _torque(m, _b_eff_flat(m, prep, t, b_mw), gamma_eff, alpha)


def _rk4_steps_numpy(
    m: np.ndarray, prep: _Prep, t0: float, dt: float, n_steps: int, b_mw: float,
    alpha: float, gamma_eff: float,
) -> None:
    for i in range(n_steps):
        t = t0 + i * dt
        k1 = _rhs_flat(m, prep, t, b_mw, alpha, gamma_eff)
        k2 = _rhs_flat(m + 0.5 * dt * k1, prep, t + 0.5 * dt, b_mw, alpha, gamma_eff)
        k3 = _rhs_flat(m + 0.5 * dt * k2, prep, t + 0.5 * dt, b_mw, alpha, gamma_eff)
        k4 = _rhs_flat(m + dt * k3, prep, t + dt, b_mw, alpha, gamma_eff)
        m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        m /= np.linalg.norm(m, axis=1, keepdims=True)


def _advance(m, prep, t0, dt, n_steps, b_mw, alpha, gamma_eff, fast: bool) -> None:
    if fast:
        from . import _kernels

        _kernels.rk4_steps(
            m, prep.nb, prep.inv_dx2, prep.inv_dy2, prep.b_static, prep.b_edge,
            prep.cex, prep.b_sat, b_mw, prep.omega, gamma_eff, alpha, t0, dt, n_steps,
        )
    else:
        _rk4_steps_numpy(m, prep, t0, dt, n_steps, b_mw, alpha, gamma_eff)


# ---------------------------------------------------------------------------
# public operations


def initial_state(cfg: SimConfig) -> VectorField:
    """Uniform in-plane magnetization along the static field direction."""
    grid = cfg.grid
    m = np.zeros((grid.ny, grid.nx, 3))
    ux, uy = cfg.excitation.field_dir
    m[cfg.mask.inside] = (ux, uy, 0.0)
    return VectorField(grid=grid, m=m, mask=cfg.mask.inside)


def effective_field(state: VectorField, cfg: SimConfig, t: float, _prep: _Prep | None = None) -> VectorField:
    """All field terms at time t, in A/m, zero outside the mask."""
    prep = _prep or _Prep(cfg)
    m_flat = state.m[cfg.mask.inside]
    b = _b_eff_flat(m_flat, prep, t, cfg.excitation.b_mw)
    h = np.zeros_like(state.m)
    h[cfg.mask.inside] = b / MU0
    return VectorField(grid=cfg.grid, m=h, mask=cfg.mask.inside)


def llg_rhs(m: np.ndarray, h_eff: np.ndarray, material: MaterialParams) -> np.ndarray:
    """dm/dt for magnetization m and effective field in A/m."""
    b = MU0 * np.asarray(h_eff, dtype=np.float64)
    gamma_eff = material.gamma / (1.0 + material.alpha**2)
    return _torque(np.asarray(m, dtype=np.float64), b, gamma_eff, material.alpha)


def step(state: VectorField, cfg: SimConfig, t: float, _prep: _Prep | None = None) -> VectorField:
    """One RK4 step of length dt_effective, renormalized, mask untouched."""
    prep = _prep or _Prep(cfg)
    m_flat = np.ascontiguousarray(state.m[cfg.mask.inside])
    _advance(
        m_flat, prep, t, cfg.dt_effective, 1, cfg.excitation.b_mw,
        cfg.material.alpha, prep.gamma_eff, cfg.use_fast_kernel,
    )
    if not np.isfinite(m_flat).all():
        raise IntegrationError(step=0)
    m = np.zeros_like(state.m)
    m[cfg.mask.inside] = m_flat
    return VectorField(grid=cfg.grid, m=m, mask=cfg.mask.inside)


def energy(state_flat: np.ndarray, prep: _Prep) -> float:
    """Zeeman (static + stray) + exchange + local demag energy, joules."""
    m = state_flat
    v = prep.cell_volume
    ms = prep.b_sat / MU0
    b_dc = prep.b_static + prep.b_edge
    e_zee = -ms * v * float(np.einsum("ci,ci->", m, b_dc))
    e_demag = 0.5 * MU0 * ms * ms * v * float(np.sum(m[:, 2] ** 2))
    aex = prep.cex * ms / 2.0
    e_ex = 0.0
    for col, invd2 in ((1, prep.inv_dx2), (3, prep.inv_dy2)):  # +x and +y bonds once
        nb = prep.nb[:, col]
        ok = nb >= 0
        diff = m[nb[ok]] - m[ok]
        e_ex += aex * v * invd2 * float(np.sum(diff * diff))
    return e_zee + e_demag + e_ex


@dataclass
class RelaxResult:
    state: VectorField
    steps: int
    converged: bool
    energy_trace: np.ndarray


def relax(cfg: SimConfig, m0: VectorField | None = None) -> RelaxResult:
    """Damp toward equilibrium: drive off, damping raised to 1.

    Runs until max |m x B| drops below relax_tolerance (tesla), checking
    every few steps; energy is sampled every 100 steps for monitoring.
    """
    prep = _Prep(cfg)
    state = m0 if m0 is not None else initial_state(cfg)
    m = np.ascontiguousarray(state.m[cfg.mask.inside])
    dt = cfg.dt_effective
    gamma_relax = cfg.material.gamma / 2.0  # alpha = 1
    energies = [energy(m, prep)]
    steps_done = 0
    check_every = 20
    converged = False
    while steps_done < cfg.max_relax_steps:
        b = _b_eff_flat(m, prep, 0.0, 0.0)
        torque = np.cross(m, b)
        if float(np.max(np.linalg.norm(torque, axis=1))) < cfg.relax_tolerance:
            converged = True
            break
        n_chunk = min(check_every, cfg.max_relax_steps - steps_done)
        _advance(m, prep, 0.0, dt, n_chunk, 0.0, 1.0, gamma_relax, cfg.use_fast_kernel)
        if not np.isfinite(m).all():
            raise IntegrationError(step=steps_done)
        steps_done += n_chunk
        if steps_done % 100 < check_every:
            energies.append(energy(m, prep))
    if not converged:
        raise RelaxationError(
            f"no equilibrium after {steps_done} steps (tolerance {cfg.relax_tolerance} T)"
        )
    out = np.zeros_like(state.m)
    out[cfg.mask.inside] = m
    return RelaxResult(
        state=VectorField(grid=cfg.grid, m=out, mask=cfg.mask.inside),
        steps=steps_done,
        converged=True,
        energy_trace=np.asarray(energies),
    )


def run_excitation(cfg: SimConfig, progress=None) -> ScalarFieldSeries:
    """Relax, then drive and record m_z frames.

    Frame k is sampled at t = k * T_mw / frames_per_period exactly, starting
    with the relaxed state at t = 0.  Out-of-mask cells stay zero.  Returns
    float32 frames with the playback rate frames_per_period/2 per second.
    """
    prep = _Prep(cfg)
    relaxed = relax(cfg)
    m = np.ascontiguousarray(relaxed.state.m[cfg.mask.inside])

    exc = cfg.excitation
    n_frames = exc.frame_count
    spf = cfg.steps_per_frame
    dt = cfg.dt_effective
    interval = exc.period / exc.frames_per_period
    frames = np.zeros((n_frames, cfg.grid.ny, cfg.grid.nx), dtype=np.float32)
    jj, ii = prep.js, prep.is_

    for k in range(n_frames):
        frames[k, jj, ii] = m[:, 2].astype(np.float32)
        if k == n_frames - 1:
            break
        t0 = k * interval
        _advance(m, prep, t0, dt, spf, exc.b_mw, cfg.material.alpha, prep.gamma_eff,
                 cfg.use_fast_kernel)
        if not np.isfinite(m).all():
            raise IntegrationError(step=(k + 1) * spf)
        if progress is not None and (k + 1) % max(1, n_frames // 20) == 0:
            progress((k + 1) / n_frames)

    return ScalarFieldSeries(
        grid=cfg.grid,
        frames=frames,
        frame_dt=interval,
        frame_rate_playback=exc.frames_per_period / 2.0,
    )
