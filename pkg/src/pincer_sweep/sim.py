"""Worst-case wavefront simulation of the spiral pincer protocol.

The evader region is a boolean raster.  It spreads isotropically at ``VT``
and is erased wherever a sweeper's fan footprint passes.  To keep the
spread Euclidean over hundreds of cells, each contaminated cell carries a
disk ``(source, radius)`` that lies inside the evader region; the disks
grow with time and a clean cell turns contaminated once a neighbour's disk
reaches its centre.  Contaminated neighbours of freshly cleared cells are
reset to point sources so that no disk pokes into cleared ground.

Sweeper motion follows a kinematic plan computed up front (:class:`SimPlan`)
from the same spiral law as the analytic schedule; the raster is never
consulted to steer the sweepers.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .analytics import resolve_speed, spiral_time
from .errors import GridTooSmall, InfeasibleSpeed, PhaseDesync, ValidationError
from .geometry import (
    RotationSense,
    SensorGeometry,
    SweeperPose,
    footprint_mask,
    gamma_offset,
    initial_deployment,
    travel_heading,
)
from .scenario import ScenarioParams

log = logging.getLogger(__name__)

_NEIGHBOURS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
# source points are kept this many cells behind the cell they belong to
_LEVER_CELLS = 2.0


class Verdict(enum.Enum):
    CLEARED = "CLEARED"
    ESCAPED = "ESCAPED"
    TIMEOUT = "TIMEOUT"


class SectorMode(enum.Enum):
    # each sweeper spirals through the full 2*pi/n so that neighbouring
    # pairs superimpose at the sector boundary
    MEETING = "meeting"
    # each sweeper spirals through 2*pi/n - gamma, as in the analytic schedule
    ANALYTIC = "analytic"


class PhaseKind(enum.Enum):
    SPIRAL = "SPIRAL"
    DASH = "DASH"
    FINAL_DASH = "FINAL_DASH"
    FINAL_CIRCLE = "FINAL_CIRCLE"
    FINAL_SPIRAL = "FINAL_SPIRAL"

    @property
    def angular(self) -> bool:
        return self in (PhaseKind.SPIRAL, PhaseKind.FINAL_CIRCLE, PhaseKind.FINAL_SPIRAL)


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.  ``None`` fields are derived by :meth:`resolve`."""

    dt: Optional[float] = None
    frame_interval: float = 0.0
    escape_radius: Optional[float] = None
    max_sim_time: Optional[float] = None
    cell_size: Optional[float] = None
    grid_cells: Optional[int] = None
    clear_during_dash: bool = False
    sector_mode: SectorMode = SectorMode.MEETING
    dash_margin_cells: float = 0.0
    half_extent: Optional[float] = None

    def resolve(self, params: ScenarioParams, Vs: float) -> "SimConfig":
        R0, r = params.R0, params.r
        reach = R0 + 2.0 * r
        if self.cell_size is not None:
            cell = self.cell_size
        elif self.grid_cells is not None:
            if self.grid_cells < 16:
                raise ValidationError("grid_cells must be >= 16", "grid_cells")
            # leave four cells beyond R0 + 2r so the escape ring fits on the grid
            cell = 2.0 * reach / (self.grid_cells - 8)
        else:
            cell = R0 / 300.0
        if not cell > 0:
            raise ValidationError("cell_size must be positive", "cell_size")
        half = self.half_extent
        if half is None:
            n_side = self.grid_cells or int(math.ceil(2.0 * reach / cell)) + 8
            half = 0.5 * n_side * cell
        dt = self.dt if self.dt is not None else cell / (2.0 * Vs)
        if not dt > 0:
            raise ValidationError("dt must be positive", "dt")
        if Vs * dt >= cell:
            raise ValidationError(
                f"Vs*dt = {Vs * dt:g} must stay below cell_size = {cell:g}", "dt")
        esc = self.escape_radius if self.escape_radius is not None else reach + 2.0 * cell
        return SimConfig(dt, self.frame_interval, esc, self.max_sim_time, cell,
                         int(round(2.0 * half / cell)), self.clear_during_dash,
                         SectorMode(self.sector_mode), self.dash_margin_cells, half)


@dataclass(frozen=True)
class Phase:
    kind: PhaseKind
    cycle: int
    t_start: float
    duration: float
    rho_start: float
    rho_end: float
    sweep_angle: float = 0.0
    clearing: bool = True

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration


@dataclass
class SimPlan:
    """Sweeper kinematics for the whole run, worked out before stepping."""

    phases: List[Phase]
    Vs: float
    sweep_angle: float
    predicted_radii: List[float]  # modelled evader-region radius at each cycle start
    eta: int
    complete: bool  # False if the plan was cut off at the time horizon

    @property
    def duration(self) -> float:
        return self.phases[-1].t_end if self.phases else 0.0


def build_plan(params: ScenarioParams, Vs: float, config: SimConfig,
               horizon: float) -> SimPlan:
    """Cycle-by-cycle kinematic plan.

    Each spiral starts with the sensor's outer tip on the modelled wavefront.
    After the spiral the region is a disk bounded by the inner tips; the
    dash stops when the outer tip meets that disk's expanding edge (less a
    safety margin of ``dash_margin_cells`` cells).  Once the next region
    would fit inside ``2r`` the sweepers run the end-game instead.
    """
    R0, r, VT, n = params.R0, params.r, params.VT, params.n
    if config.sector_mode is SectorMode.MEETING:
        sweep = 2.0 * math.pi / n
    else:
        sweep = 2.0 * math.pi / n - gamma_offset(R0, r, params.alpha)
    margin = config.dash_margin_cells * config.cell_size
    dash = (2.0 * r - margin) * Vs / (Vs + VT)
    clear_dash = config.clear_during_dash

    phases: List[Phase] = []
    radii = [R0]
    S = R0 - r
    t = 0.0
    i = 0
    complete = False
    while True:
        T = spiral_time(S, sweep, Vs, VT)
        S_end = S + VT * T
        phases.append(Phase(PhaseKind.SPIRAL, i, t, T, S, S_end, sweep))
        t += T
        inner = S_end - r
        C_next = inner + dash * VT / Vs
        if C_next <= 2.0 * r:
            break
        if t >= horizon:
            return SimPlan(phases, Vs, sweep, radii, 0, False)
        phases.append(Phase(PhaseKind.DASH, i, t, dash / Vs, S_end, S_end - dash,
                            clearing=clear_dash))
        t += dash / Vs
        S = S_end - dash
        radii.append(C_next)
        i += 1

    # end-game: inner tips to the centre, circular sweep, optional spiral
    d_final = max(S_end - r, 0.0)
    phases.append(Phase(PhaseKind.FINAL_DASH, i, t, d_final / Vs, S_end, r,
                        clearing=clear_dash))
    t += d_final / Vs
    C_end = inner + VT * d_final / Vs
    T_circle = sweep * r / Vs
    phases.append(Phase(PhaseKind.FINAL_CIRCLE, i, t, T_circle, r, r, sweep))
    t += T_circle
    eta = 1 if C_end + VT * T_circle > 2.0 * r else 0
    if eta:
        T_l = spiral_time(r, sweep, Vs, VT)
        phases.append(Phase(PhaseKind.FINAL_SPIRAL, i, t, T_l, r, r + VT * T_l, sweep))
        t += T_l
    complete = True
    return SimPlan(phases, Vs, sweep, radii, eta, complete)


class WorldGrid:
    """Square raster of the evader region centred on the region centre."""

    def __init__(self, cell_size: float, half_extent: float):
        self.cell_size = float(cell_size)
        n = int(round(2.0 * half_extent / cell_size))
        self.n_side = n
        self.half_extent = 0.5 * n * self.cell_size
        c = (np.arange(n) + 0.5) * self.cell_size - self.half_extent
        self.xs = c
        self.X, self.Y = np.meshgrid(c, c)
        self.R = np.hypot(self.X, self.Y)
        self.contamination = np.zeros((n, n), dtype=bool)
        self.source_x = np.zeros((n, n))
        self.source_y = np.zeros((n, n))
        # stored disk radius; the effective radius adds ``spread_total``
        self.distance_buffer = np.zeros((n, n))
        self.spread_total = 0.0
        self.pending = 0.0
        self.sim_time = 0.0
        self.count = 0
        self.ever_cleared = np.zeros((n, n), dtype=bool)

    @property
    def lever(self) -> float:
        return _LEVER_CELLS * self.cell_size

    def copy_state(self) -> np.ndarray:
        return self.contamination.copy()

    def index_box(self, x0, x1, y0, y1, pad=1):
        """Slices of the raster covering the axis-aligned box, padded by ``pad`` cells."""
        cs, h, n = self.cell_size, self.half_extent, self.n_side
        i0 = max(int(math.floor((y0 + h) / cs)) - pad, 0)
        i1 = min(int(math.floor((y1 + h) / cs)) + pad + 1, n)
        j0 = max(int(math.floor((x0 + h) / cs)) - pad, 0)
        j1 = min(int(math.floor((x1 + h) / cs)) + pad + 1, n)
        return slice(i0, max(i0, i1)), slice(j0, max(j0, j1))

    def contamination_box(self, pad=2):
        rows = np.flatnonzero(self.contamination.any(axis=1))
        if rows.size == 0:
            return None
        cols = np.flatnonzero(self.contamination.any(axis=0))
        n = self.n_side
        return (slice(max(rows[0] - pad, 0), min(rows[-1] + pad + 1, n)),
                slice(max(cols[0] - pad, 0), min(cols[-1] + pad + 1, n)))

    def outer_radius(self) -> float:
        box = self.contamination_box(pad=0)
        if box is None:
            return 0.0
        return float(self.R[box][self.contamination[box]].max())

    def seed_disk(self, radius: float) -> None:
        inside = self.R <= radius
        self.contamination[:] = inside
        L = self.lever
        rho = self.R
        scale = np.where(rho > L, 1.0 - L / np.maximum(rho, 1e-300), 0.0)
        self.source_x[:] = np.where(inside, self.X * scale, 0.0)
        self.source_y[:] = np.where(inside, self.Y * scale, 0.0)
        self.distance_buffer[:] = np.where(
            inside, np.where(rho > L, L + radius - rho, radius), 0.0) - self.spread_total
        self.count = int(inside.sum())

    def reset_sources(self, mask_sl, mask: np.ndarray) -> None:
        """Turn the contaminated cells under ``mask`` into point sources."""
        sub = mask & self.contamination[mask_sl]
        if not sub.any():
            return
        self.source_x[mask_sl][sub] = self.X[mask_sl][sub]
        self.source_y[mask_sl][sub] = self.Y[mask_sl][sub]
        self.distance_buffer[mask_sl][sub] = -(self.spread_total + self.pending)

    def trim_sources(self, box, cleared: np.ndarray) -> None:
        """Shrink disks in ``box`` so none contains a cell centre in ``cleared``.

        Contaminated cells whose disk would no longer contain their own centre
        become point sources.
        """
        con = self.contamination[box]
        if not con.any():
            return
        cs = self.cell_size
        # distance from each cell centre to the nearest freshly cleared centre
        d = ndimage.distance_transform_edt(~cleared, sampling=cs)
        G = self.spread_total + self.pending
        rho = self.distance_buffer[box] + G
        sx, sy = self.source_x[box], self.source_y[box]
        X, Y = self.X[box], self.Y[box]
        lever = np.hypot(X - sx, Y - sy)
        # the disk stays clear of cleared centres if rho < d - |p - x|
        limit = d - lever - 1e-9 * cs
        fix = con & (rho > limit)
        if not fix.any():
            return
        keep = fix & (limit >= lever)
        point = fix & ~keep
        self.distance_buffer[box][keep] = limit[keep] - G
        self.source_x[box][point] = X[point]
        self.source_y[box][point] = Y[point]
        self.distance_buffer[box][point] = -G

    def propagate(self, s: float, max_passes: int = 8) -> int:
        """Grow every disk by ``s`` and contaminate the cells they now reach."""
        self.spread_total += s
        if self.count == 0:
            return 0
        G = self.spread_total
        L = self.lever
        n = self.n_side
        added = 0
        for _ in range(max_passes):
            box = self.contamination_box(pad=2)
            if box is None:
                break
            con = self.contamination[box]
            front = _dilate3(con) & ~con
            iy, ix = np.nonzero(front)
            if iy.size == 0:
                break
            iy = iy + box[0].start
            ix = ix + box[1].start
            zx = self.X[iy, ix]
            zy = self.Y[iy, ix]
            best = np.full(iy.size, -np.inf)
            src_y = np.zeros(iy.size, dtype=np.intp)
            src_x = np.zeros(iy.size, dtype=np.intp)
            for dy, dx in _NEIGHBOURS:
                ny = iy + dy
                nx = ix + dx
                ok = (ny >= 0) & (ny < n) & (nx >= 0) & (nx < n)
                ny = np.where(ok, ny, 0)
                nx = np.where(ok, nx, 0)
                live = ok & self.contamination[ny, nx]
                reach = (self.distance_buffer[ny, nx] + G
                         - np.hypot(zx - self.source_x[ny, nx], zy - self.source_y[ny, nx]))
                better = live & (reach > best)
                best = np.where(better, reach, best)
                src_y = np.where(better, ny, src_y)
                src_x = np.where(better, nx, src_x)
            hit = best >= 0.0
            if not hit.any():
                break
            iy, ix, src_y, src_x = iy[hit], ix[hit], src_y[hit], src_x[hit]
            zx, zy = zx[hit], zy[hit]
            px = self.source_x[src_y, src_x]
            py = self.source_y[src_y, src_x]
            rho = self.distance_buffer[src_y, src_x]
            dist = np.hypot(zx - px, zy - py)
            shift = np.maximum(dist - L, 0.0)
            frac = np.where(dist > 0, shift / np.maximum(dist, 1e-300), 0.0)
            self.source_x[iy, ix] = px + (zx - px) * frac
            self.source_y[iy, ix] = py + (zy - py) * frac
            self.distance_buffer[iy, ix] = rho - shift
            self.contamination[iy, ix] = True
            added += iy.size
        self.count += added
        return added


def _dilate3(mask: np.ndarray) -> np.ndarray:
    """3x3 binary dilation by shifted ORs (much cheaper than a generic kernel)."""
    out = mask.copy()
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    rows = out.copy()
    out[:, 1:] |= rows[:, :-1]
    out[:, :-1] |= rows[:, 1:]
    return out


def init_world(params: ScenarioParams, config: SimConfig) -> WorldGrid:
    """Raster with every cell centre within ``R0`` of the origin contaminated."""
    if config.cell_size is None or config.half_extent is None:
        config = config.resolve(params, resolve_speed(params))
    need = params.R0 + 2.0 * params.r
    if config.half_extent < need:
        raise GridTooSmall(
            f"grid half-extent {config.half_extent:g} < R0 + 2r = {need:g}")
    world = WorldGrid(config.cell_size, config.half_extent)
    world.seed_disk(params.R0)
    return world


def spread_step(world: WorldGrid, VT: float, dt: float, flush: bool = False) -> WorldGrid:
    """Advance the wavefront by ``VT * dt``.

    Spread is accumulated and applied in increments of a quarter cell (or
    immediately when ``flush`` is set).
    """
    world.pending += VT * dt
    if world.pending > 0 and (flush or world.pending >= 0.25 * world.cell_size):
        s = world.pending
        world.pending = 0.0
        world.propagate(s)
    return world


def _trim_around(world: WorldGrid, sl, hit: np.ndarray) -> None:
    """Trim disks near freshly cleared cells (``hit`` is indexed by ``sl``)."""
    ii, jj = np.nonzero(hit)
    pad = int(math.ceil(2 * _LEVER_CELLS)) + 3
    n = world.n_side
    i0 = max(sl[0].start + ii.min() - pad, 0)
    i1 = min(sl[0].start + ii.max() + pad + 1, n)
    j0 = max(sl[1].start + jj.min() - pad, 0)
    j1 = min(sl[1].start + jj.max() + pad + 1, n)
    box = (slice(i0, i1), slice(j0, j1))
    cleared = np.zeros((i1 - i0, j1 - j0), dtype=bool)
    cleared[ii + sl[0].start - i0, jj + sl[1].start - j0] = True
    world.trim_sources(box, cleared)


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def clear_step(world: WorldGrid, poses, sensor: SensorGeometry, prev_poses=None) -> int:
    """Erase contamination under every pose's footprint; returns cells cleared.

    With ``prev_poses`` the annular sector swept by each sensor's central
    line since the previous step is erased as well.  That sector lies in the
    union of footprints along any continuous path between the two poses, so
    this adds no clearing the sweepers did not earn; it only stops cells
    close to the fan apex, where the fan is narrower than one time step of
    motion, from slipping between samples.
    """
    total = 0
    reach = 2.0 * sensor.r
    for k, pose in enumerate(poses):
        ux, uy = math.cos(pose.polar_angle), math.sin(pose.polar_angle)
        apex = pose.radial_distance - sensor.r
        ax, ay = apex * ux, apex * uy
        x0, x1, y0, y1 = ax - reach, ax + reach, ay - reach, ay + reach
        prev = prev_poses[k] if prev_poses is not None else None
        sweep = 0.0
        if prev is not None:
            sweep = float(_wrap(pose.polar_angle - prev.polar_angle))
            if abs(sweep) > math.pi / 4:
                sweep = 0.0
        if sweep:
            p_apex = prev.radial_distance - sensor.r
            bx = p_apex * math.cos(prev.polar_angle)
            by = p_apex * math.sin(prev.polar_angle)
            x0, x1 = min(x0, bx - reach), max(x1, bx + reach)
            y0, y1 = min(y0, by - reach), max(y1, by + reach)
        sl = world.index_box(x0, x1, y0, y1, pad=1)
        con = world.contamination[sl]
        if not con.any():
            continue
        X, Y = world.X[sl], world.Y[sl]
        inside = footprint_mask(pose, sensor, X, Y)
        if sweep:
            lo = max(apex, p_apex, 0.0)
            hi = max(min(apex, p_apex), 0.0) + reach
            rad = world.R[sl]
            d = _wrap(np.arctan2(Y, X) - prev.polar_angle)
            between = (d >= 0) & (d <= sweep) if sweep > 0 else (d <= 0) & (d >= sweep)
            inside |= between & (rad >= lo) & (rad <= hi)
        hit = inside & con
        if not hit.any():
            continue
        con[hit] = False
        world.ever_cleared[sl] |= hit
        world.count -= int(hit.sum())
        world.reset_sources(sl, _dilate3(hit))
        _trim_around(world, sl, hit)
        total += int(hit.sum())
    return total


def _angular_rate_step(rho, dt, Vs, VT):
    """Polar-angle increment over ``dt`` on the wavefront-tracking spiral."""
    if VT == 0:
        return Vs * dt / rho
    return math.sqrt(Vs * Vs - VT * VT) / VT * math.log1p(VT * dt / rho)


def sweeper_step(poses: List[SweeperPose], phase: Phase, params: ScenarioParams,
                 dt: float, swept: Optional[List[float]] = None):
    """Advance every sweeper by ``dt`` inside ``phase``.

    Returns ``(poses, swept)`` where ``swept`` accumulates the polar angle
    travelled in the current angular phase.  ``params.Vs`` must be set.
    """
    Vs, VT = params.Vs, params.VT
    if Vs is None:
        raise ValidationError("sweeper_step needs a resolved sweeper speed", "Vs")
    phi = math.asin(VT / Vs) if VT < Vs else math.pi / 2
    swept = list(swept) if swept is not None else [0.0] * len(poses)
    out = []
    for j, p in enumerate(poses):
        sense = int(p.rotation_sense)
        if phase.kind in (PhaseKind.SPIRAL, PhaseKind.FINAL_SPIRAL):
            d_theta = _angular_rate_step(p.radial_distance, dt, Vs, VT)
            rho = p.radial_distance + VT * dt
            theta = p.polar_angle + sense * d_theta
            heading = travel_heading(theta, p.rotation_sense, phi)
        elif phase.kind is PhaseKind.FINAL_CIRCLE:
            d_theta = Vs * dt / p.radial_distance
            rho = p.radial_distance
            theta = p.polar_angle + sense * d_theta
            heading = travel_heading(theta, p.rotation_sense, 0.0)
        else:
            d_theta = 0.0
            step = Vs * dt
            if phase.rho_end <= p.radial_distance:
                rho = max(p.radial_distance - step, phase.rho_end)
                heading = p.polar_angle + math.pi
            else:
                rho = min(p.radial_distance + step, phase.rho_end)
                heading = p.polar_angle
            theta = p.polar_angle
        swept[j] += d_theta
        if phase.kind.angular and swept[j] > phase.sweep_angle * (1 + 1e-9) + 1e-9:
            raise PhaseDesync(
                f"sweeper {j} swept {swept[j]:.12g} rad, more than the sector "
                f"{phase.sweep_angle:.12g} rad in {phase.kind.value}")
        out.append(SweeperPose(rho, theta, heading, p.rotation_sense))
    return out, swept


@dataclass
class SimOutcome:
    verdict: Verdict
    clear_time: Optional[float]
    escape_time: Optional[float]
    final_time: float
    max_radius_trace: List[Tuple[float, float]]
    cycle_boundaries: List[Tuple[float, str]]
    meeting_errors: List[float] = field(default_factory=list)
    # (cycle, simulated outer-tip radius, planned outer-tip radius) after each dash
    post_dash_radii: List[Tuple[int, float, float]] = field(default_factory=list)
    plan_duration: float = 0.0
    plan_eta: int = 0
    steps: int = 0
    cell_size: float = 0.0
    dt: float = 0.0
    Vs: float = 0.0
    frames: int = 0

    @property
    def peak_radius(self) -> float:
        return max((r for _, r in self.max_radius_trace), default=0.0)


def _meeting_error(poses: List[SweeperPose]) -> float:
    """Largest distance from any sweeper to its nearest teammate."""
    pts = np.array([p.xy for p in poses])
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    np.fill_diagonal(d, np.inf)
    return float(d.min(axis=1).max())


def run(params: ScenarioParams, config: SimConfig = SimConfig(), *, force: bool = False,
        frame_sink: Optional[Callable] = None) -> SimOutcome:
    """Simulate the protocol against the worst-case evader region.

    Unless ``force`` is set, speeds at or below the exact critical speed are
    rejected with InfeasibleSpeed (the same gate as the analytic schedule).
    ``frame_sink(world, poses, sim_time, index)`` is called every
    ``frame_interval`` time units when the interval is positive.
    """
    from .analytics import critical_speed

    Vs = resolve_speed(params)
    if params.VT > 0 and not force:
        vc = critical_speed(params).v_critical
        if not Vs > vc:
            raise InfeasibleSpeed(
                f"sweeper speed {Vs:.6g} does not exceed the critical speed {vc:.6g}",
                v_critical=vc, speed=Vs)
    params = params.with_speed(Vs)
    cfg = config.resolve(params, Vs)
    world = init_world(params, cfg)
    sensor = SensorGeometry(params.r, params.alpha)
    VT, r = params.VT, params.r

    horizon = cfg.max_sim_time if cfg.max_sim_time is not None else math.inf
    plan_cap = horizon if math.isfinite(horizon) else 50.0 * params.R0 / max(VT, 1e-12)
    plan = build_plan(params, Vs, cfg, plan_cap)
    if not math.isfinite(horizon):
        horizon = 1.5 * plan.duration + 10.0 * cfg.dt

    deployment = initial_deployment(params, phi=math.asin(VT / Vs))
    poses = list(deployment.poses)
    swept = [0.0] * len(poses)

    trace = [(0.0, world.outer_radius())]
    boundaries: List[Tuple[float, str]] = []
    meeting: List[float] = []
    post_dash: List[Tuple[int, float, float]] = []
    dt = cfg.dt
    t = 0.0
    steps = 0
    frames = 0
    verdict = None
    clear_time = escape_time = None

    def emit_frame():
        nonlocal frames
        if frame_sink is not None:
            frame_sink(world, poses, t, frames)
        frames += 1

    fi = cfg.frame_interval
    if fi and fi > 0:
        emit_frame()

    phase_idx = 0
    phase_t = 0.0  # time elapsed inside the current phase
    angular_seen = False
    phase = plan.phases[0]
    boundaries.append((0.0, f"{phase.kind.value}:{phase.cycle}"))
    angular_seen = True

    while True:
        # sweepers, splitting the step at phase boundaries
        prev_poses = poses
        remaining = dt
        while remaining > 0 and phase is not None:
            h = min(remaining, phase.duration - phase_t)
            if h > 0:
                poses, swept = sweeper_step(poses, phase, params, h, swept)
                phase_t += h
                remaining -= h
            if phase.duration - phase_t <= 1e-12 * max(1.0, phase.duration):
                if phase.kind is PhaseKind.SPIRAL:
                    meeting.append(_meeting_error(poses))
                phase_idx += 1
                if phase_idx >= len(plan.phases):
                    phase = None
                    break
                prev, phase = phase, plan.phases[phase_idx]
                phase_t = 0.0
                if phase.kind is PhaseKind.SPIRAL and prev.kind is PhaseKind.DASH:
                    post_dash.append((phase.cycle,
                                      poses[0].radial_distance + r,
                                      phase.rho_start + r))
                if phase.kind.angular:
                    if angular_seen:
                        poses = [SweeperPose(p.radial_distance, p.polar_angle, p.heading,
                                             p.rotation_sense.flipped()) for p in poses]
                    angular_seen = True
                    swept = [0.0] * len(poses)
                boundaries.append((t + dt - remaining, f"{phase.kind.value}:{phase.cycle}"))
        t += dt
        steps += 1
        world.sim_time = t

        # clear before spreading: the swept sector between the two poses
        # then meets the front as it stood when the sensor passed
        clearing = phase is None or phase.clearing
        if clearing and world.count:
            clear_step(world, poses, sensor, prev_poses)
            if world.count == 0:
                verdict, clear_time = Verdict.CLEARED, t
                trace.append((t, 0.0))
        if verdict is None:
            spread_step(world, VT, dt)
            if world.pending == 0.0:
                outer = world.outer_radius()
                trace.append((t, outer))
                if outer > cfg.escape_radius:
                    verdict, escape_time = Verdict.ESCAPED, t
        if fi and fi > 0 and t >= frames * fi - 1e-9:
            emit_frame()
        if verdict is not None:
            break
        if t >= horizon:
            verdict = Verdict.TIMEOUT
            break

    if verdict is not Verdict.CLEARED and trace[-1][0] != t:
        trace.append((t, world.outer_radius()))
    return SimOutcome(
        verdict=verdict, clear_time=clear_time, escape_time=escape_time, final_time=t,
        max_radius_trace=trace, cycle_boundaries=boundaries, meeting_errors=meeting,
        post_dash_radii=post_dash, plan_duration=plan.duration, plan_eta=plan.eta,
        steps=steps, cell_size=cfg.cell_size, dt=dt, Vs=Vs, frames=frames)
