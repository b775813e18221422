"""Functions sampled on uniform grids, balls, ball families and the
cell-centre quadrature that norms and operators share.

Cell ``i`` covers ``[origin + i h, origin + (i+1) h)`` and is represented by
its centre ``origin + (i + 1/2) h``.  A cell belongs to a ball when its centre
lies strictly inside it.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

UNIT_BALL_VOLUME = {1: 2.0, 2: math.pi}
MAGIC = b"OKF1"
HEADER = struct.Struct("<4sHH2I2f2f")  # 32 bytes


@dataclass(frozen=True)
class Grid:
    shape: tuple
    spacing: tuple
    origin: tuple

    def __post_init__(self):
        shape = tuple(int(s) for s in np.atleast_1d(self.shape))
        dim = len(shape)
        if dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        spacing = tuple(float(h) for h in np.broadcast_to(np.asarray(self.spacing, dtype=float), (dim,)))
        origin = tuple(float(o) for o in np.broadcast_to(np.asarray(self.origin, dtype=float), (dim,)))
        if any(s < 1 for s in shape):
            raise ValueError("grid needs at least one cell per axis")
        if any(not (h > 0 and math.isfinite(h)) for h in spacing):
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def h(self):
        return max(self.spacing)

    def axes(self):
        return [o + (np.arange(n) + 0.5) * h for n, h, o in zip(self.shape, self.spacing, self.origin)]

    def centers(self):
        """Cell-centre coordinates, shape ``shape + (dim,)``."""
        ax = self.axes()
        if self.dim == 1:
            return ax[0][:, None]
        X, Y = np.meshgrid(ax[0], ax[1], indexing="ij")
        return np.stack([X, Y], axis=-1)

    def bounds(self):
        lo = np.asarray(self.origin)
        return lo, lo + np.asarray(self.shape) * np.asarray(self.spacing)

    def diameter(self):
        lo, hi = self.bounds()
        return float(np.linalg.norm(hi - lo))

    def sample(self, func):
        """``func`` gets coordinate arrays (one per axis, broadcast to the grid)."""
        c = self.centers()
        vals = func(*[c[..., k] for k in range(self.dim)])
        return SampledFunction(np.broadcast_to(vals, self.shape), self.spacing, self.origin)

    def zeros(self):
        return SampledFunction(np.zeros(self.shape), self.spacing, self.origin)

    def refine(self, factor=2):
        return Grid(tuple(n * factor for n in self.shape), tuple(h / factor for h in self.spacing), self.origin)

    def to_dict(self):
        return {"shape": list(self.shape), "spacing": list(self.spacing), "origin": list(self.origin)}


def uniform_grid(dim, half_width, cells):
    """Grid on ``[-half_width, half_width]^dim`` with ``cells`` cells per axis."""
    h = 2.0 * half_width / cells
    return Grid((cells,) * dim, (h,) * dim, (-half_width,) * dim)


class SampledFunction:
    """Immutable real array on a :class:`Grid`."""

    def __init__(self, values, spacing, origin=None):
        vals = np.array(values, dtype=float)
        if vals.ndim not in (1, 2):
            raise ValueError("values must be a 1-D or 2-D array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite (NaN/inf rejected at ingestion)")
        if origin is None:
            sp = np.broadcast_to(np.asarray(spacing, dtype=float), (vals.ndim,))
            origin = tuple(-0.5 * n * h for n, h in zip(vals.shape, sp))
        self.grid = Grid(vals.shape, spacing, origin)
        vals.setflags(write=False)
        self._values = vals

    @property
    def values(self):
        return self._values

    @property
    def dim(self):
        return self.grid.dim

    @property
    def shape(self):
        return self.grid.shape

    @property
    def spacing(self):
        return self.grid.spacing

    @property
    def origin(self):
        return self.grid.origin

    @property
    def cell_volume(self):
        return self.grid.cell_volume

    def with_values(self, values):
        return SampledFunction(values, self.spacing, self.origin)

    def same_grid(self, other):
        return self.grid == other.grid

    def support_box(self):
        """Bounding box ``(lo, hi)`` of the centres of nonzero cells, or None."""
        nz = np.nonzero(self._values)
        if nz[0].size == 0:
            return None
        ax = self.grid.axes()
        lo = np.array([ax[k][nz[k].min()] for k in range(self.dim)])
        hi = np.array([ax[k][nz[k].max()] for k in range(self.dim)])
        return lo, hi

    def integral(self):
        return float(self._values.sum() * self.cell_volume)

    def __add__(self, other):
        _check_same(self, other)
        return self.with_values(self._values + other.values)

    def __sub__(self, other):
        _check_same(self, other)
        return self.with_values(self._values - other.values)

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            _check_same(self, other)
            return self.with_values(self._values * other.values)
        return self.with_values(self._values * float(other))

    __rmul__ = __mul__

    def __abs__(self):
        return self.with_values(np.abs(self._values))

    def __repr__(self):
        return f"SampledFunction(shape={self.shape}, spacing={self.spacing}, origin={self.origin})"


def _check_same(a, b):
    if not a.same_grid(b):
        raise ValueError("fields live on different grids")


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(x) for x in np.atleast_1d(self.center))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    @property
    def volume(self):
        return UNIT_BALL_VOLUME[self.dim] * self.radius**self.dim

    def to_dict(self):
        return {"center": list(self.center), "radius": self.radius}


def ball_mask(grid_or_field, ball: Ball):
    grid = grid_or_field.grid if isinstance(grid_or_field, SampledFunction) else grid_or_field
    if ball.dim != grid.dim:
        raise ValueError("ball and grid dimensions differ")
    c = grid.centers()
    d2 = np.sum((c - np.asarray(ball.center)) ** 2, axis=-1)
    return d2 < ball.radius**2


def integrate_over_ball(f: SampledFunction, ball: Ball, with_flag=False):
    """Midpoint rule over cells whose centres lie in the ball.

    With ``with_flag`` returns ``(value, empty)`` where ``empty`` marks a ball
    that contains no cell centre.
    """
    m = ball_mask(f, ball)
    val = float(f.values[m].sum() * f.cell_volume)
    if with_flag:
        return val, not bool(m.any())
    return val


def ball_measure(grid, ball):
    """Discrete measure of the ball: number of member cells times the cell volume."""
    return float(ball_mask(grid, ball).sum() * grid.cell_volume)


def restrict(f: SampledFunction, ball: Ball) -> SampledFunction:
    return f.with_values(np.where(ball_mask(f, ball), f.values, 0.0))


def split(f: SampledFunction, ball: Ball):
    """``(f χ_B, f χ_{complement})``; the parts sum to ``f`` exactly."""
    m = ball_mask(f, ball)
    return f.with_values(np.where(m, f.values, 0.0)), f.with_values(np.where(m, 0.0, f.values))


# ---------------------------------------------------------------------------
# Ball families


@dataclass(frozen=True)
class BallFamily:
    centers: np.ndarray
    radii: np.ndarray
    config: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.centers, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        r = np.array(self.radii, dtype=float).ravel()
        if c.shape[0] == 0 or r.size == 0:
            raise ValueError("ball family must be nonempty")
        if np.any(r <= 0):
            raise ValueError("radii must be positive")
        c.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    @property
    def dim(self):
        return self.centers.shape[1]

    def __len__(self):
        return self.centers.shape[0] * self.radii.size

    def balls(self):
        """Fixed order: centres outer, radii inner."""
        for c in self.centers:
            for r in self.radii:
                yield Ball(tuple(c), float(r))

    def ball(self, ci, ri):
        return Ball(tuple(self.centers[ci]), float(self.radii[ri]))

    @property
    def family_id(self):
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(self.centers).tobytes())
        h.update(np.ascontiguousarray(self.radii).tobytes())
        return h.hexdigest()[:12]

    def to_dict(self):
        return {
            "family_id": self.family_id,
            "n_centers": int(self.centers.shape[0]),
            "radii": self.radii.tolist(),
            "center_box": [self.centers.min(axis=0).tolist(), self.centers.max(axis=0).tolist()],
            "config": self.config,
        }


def log_radii(r_min, r_max, count):
    """``r_min (r_max/r_min)^{i/count}`` for ``i = 1..count``; nested when ``count`` doubles."""
    i = np.arange(1, int(count) + 1)
    return r_min * (r_max / r_min) ** (i / count)


def make_ball_family(f: SampledFunction, stride=4, n_radii=16, kappa=1.0, dilation=2.0,
                     r_min=None, r_max=None) -> BallFamily:
    """Centres on a sub-lattice of the grid inside the dilated support box;
    radii log-spaced up to ``kappa`` times the diameter of that box."""
    grid = f.grid
    config = {"stride": int(stride), "n_radii": int(n_radii), "kappa": float(kappa), "dilation": float(dilation)}
    box = f.support_box()
    h = grid.h
    if box is None:
        centers = np.zeros((1, grid.dim))
        diam = grid.diameter()
    else:
        lo, hi = box
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) + 0.5 * np.asarray(grid.spacing)
        lo_d, hi_d = mid - dilation * half, mid + dilation * half
        glo, ghi = grid.bounds()
        lo_d, hi_d = np.maximum(lo_d, glo), np.minimum(hi_d, ghi)
        axes = []
        for k, ax in enumerate(grid.axes()):
            sub = ax[::int(stride)]
            sel = sub[(sub >= lo_d[k]) & (sub <= hi_d[k])]
            if sel.size == 0:
                sel = np.array([mid[k]])
            axes.append(sel)
        if grid.dim == 1:
            centers = axes[0][:, None]
        else:
            X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
            centers = np.column_stack([X.ravel(), Y.ravel()])
        diam = float(np.linalg.norm(hi_d - lo_d))
    r_lo = h if r_min is None else float(r_min)
    r_hi = kappa * diam if r_max is None else float(r_max)
    config.update({"r_min": r_lo, "r_max": r_hi})
    return BallFamily(centers, log_radii(r_lo, r_hi, n_radii), config)


def family_on_grid(grid: Grid, centers, radii, **config) -> BallFamily:
    return BallFamily(np.asarray(centers, dtype=float), np.asarray(radii, dtype=float), dict(config))


# ---------------------------------------------------------------------------
# Fast ball sums


class BallIndex:
    """Row-wise index ranges of every ball of a family on a grid.

    ``sums(g)`` integrates any array ``g`` over every ball with prefix sums,
    so that sweeps over a family cost O(rows) per ball.
    """

    def __init__(self, grid: Grid, family: BallFamily):
        if grid.dim != family.dim:
            raise ValueError("family and grid dimensions differ")
        self.grid = grid
        self.family = family
        ax = grid.axes()
        nc, nr = family.centers.shape[0], family.radii.size
        if grid.dim == 1:
            x = ax[0]
            c = family.centers[:, 0][:, None]
            r = family.radii[None, :]
            self.i0 = np.searchsorted(x, c - r, side="right")
            self.i1 = np.searchsorted(x, c + r, side="left")
        else:
            x, y = ax
            cx = family.centers[:, 0][:, None, None]
            cy = family.centers[:, 1][:, None, None]
            r = family.radii[None, :, None]
            dy2 = (y[None, None, :] - cy) ** 2
            inside = dy2 < r**2
            w = np.sqrt(np.where(inside, r**2 - dy2, 0.0))
            i0 = np.searchsorted(x, (cx - w).ravel(), side="right").reshape(w.shape)
            i1 = np.searchsorted(x, (cx + w).ravel(), side="left").reshape(w.shape)
            # rows with w == 0 are empty
            self.i0 = np.where(inside, i0, 0)
            self.i1 = np.where(inside, np.maximum(i1, i0), 0)
        self.shape = (nc, nr)

    def counts(self):
        n = self.i1 - self.i0
        return n if self.grid.dim == 1 else n.sum(axis=-1)

    def measures(self):
        return self.counts() * self.grid.cell_volume

    def sums(self, g):
        g = np.asarray(g, dtype=float)
        if self.grid.dim == 1:
            P = np.concatenate([[0.0], np.cumsum(g)])
            return (P[self.i1] - P[self.i0]) * self.grid.cell_volume
        # g has shape (nx, ny); rows indexed by y -> use columns along x
        P = np.concatenate([np.zeros((1, g.shape[1])), np.cumsum(g, axis=0)], axis=0)
        ny = g.shape[1]
        cols = np.arange(ny)[None, None, :]
        s = P[self.i1, cols] - P[self.i0, cols]
        return s.sum(axis=-1) * self.grid.cell_volume

    def mask(self, ci, ri):
        m = np.zeros(self.grid.shape, dtype=bool)
        if self.grid.dim == 1:
            m[self.i0[ci, ri]:self.i1[ci, ri]] = True
        else:
            for j in range(self.grid.shape[1]):
                m[self.i0[ci, ri, j]:self.i1[ci, ri, j], j] = True
        return m


# ---------------------------------------------------------------------------
# Generators


def indicator_ball(grid: Grid, center=0.0, radius=1.0):
    ball = Ball(np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,)), radius)
    return SampledFunction(ball_mask(grid, ball).astype(float), grid.spacing, grid.origin)


def indicator_box(grid: Grid, lo, hi):
    c = grid.centers()
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (grid.dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (grid.dim,))
    m = np.all((c >= lo) & (c <= hi), axis=-1)
    return SampledFunction(m.astype(float), grid.spacing, grid.origin)


def _radius(grid, center):
    c = grid.centers()
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    return np.sqrt(np.sum((c - center) ** 2, axis=-1))


def power_bump(grid: Grid, exponent, center=0.0, radius=1.0, floor=None):
    """``|x - center|^exponent`` on the ball, zero outside; ``|x|`` floored at half a cell."""
    d = _radius(grid, center)
    floor = 0.5 * grid.h if floor is None else floor
    vals = np.where(d < radius, np.maximum(d, floor) ** exponent, 0.0)
    return SampledFunction(vals, grid.spacing, grid.origin)


def log_field(grid: Grid, floor=None, center=0.0):
    """``ln max(|x - center|, floor)``; the floor defaults to half a cell."""
    floor = 0.5 * grid.h if floor is None else float(floor)
    d = _radius(grid, center)
    return SampledFunction(np.log(np.maximum(d, floor)), grid.spacing, grid.origin)


def step_field(grid: Grid, axis=0):
    """Indicator of the half-space ``x_axis >= 0``."""
    c = grid.centers()[..., axis]
    return SampledFunction((c >= 0).astype(float), grid.spacing, grid.origin)


def random_bumps(grid: Grid, seed, count=4, support=1.0, width=(0.05, 0.3), nonneg=True):
    """Sum of compactly supported smooth bumps ``(1 - |x-c|^2/w^2)^2``, reproducible by seed.

    Centres and widths are drawn in physical units so that the same seed gives
    the same function at every resolution.
    """
    rng = np.random.default_rng(seed)
    c = grid.centers()
    vals = np.zeros(grid.shape)
    for _ in range(int(count)):
        w = rng.uniform(*width)
        ctr = rng.uniform(-support + w, support - w, size=grid.dim)
        amp = rng.uniform(0.2, 1.0) if nonneg else rng.uniform(-1.0, 1.0)
        q = np.sum((c - ctr) ** 2, axis=-1) / w**2
        vals += amp * np.where(q < 1, (1 - q) ** 2, 0.0)
    return SampledFunction(vals, grid.spacing, grid.origin)


# ---------------------------------------------------------------------------
# I/O


def _fmt(v):
    return ",".join(repr(float(x)) if isinstance(x, float) else str(x) for x in v)


def write_csv(f: SampledFunction, path):
    with open(path, "w", newline="") as fh:
        fh.write(f"# dim={f.dim} shape={_fmt(f.shape)} origin={_fmt(f.origin)} spacing={_fmt(f.spacing)}\n")
        w = csv.writer(fh)
        for idx in np.ndindex(*f.shape):
            w.writerow(list(idx) + [repr(float(f.values[idx]))])


def _parse_header(line):
    meta = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            meta[k] = v
    return meta


def read_csv(path, spacing=None, origin=None) -> SampledFunction:
    """CSV of ``i[,j],value`` rows.  Grid metadata comes from a ``# dim= shape= origin= spacing=``
    header line or from the arguments."""
    text = Path(path).read_text()
    meta = {}
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            meta.update(_parse_header(s))
            continue
        rows.append(next(csv.reader(io.StringIO(s))))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    if width not in (2, 3) or any(len(r) != width for r in rows):
        raise ValueError(f"{path}: rows must be 'i,value' or 'i,j,value'")
    dim = width - 1
    idx = np.array([[int(float(x)) for x in r[:dim]] for r in rows])
    vals = np.array([float(r[dim]) for r in rows])
    if "shape" in meta:
        shape = tuple(int(x) for x in meta["shape"].split(","))
    else:
        shape = tuple(int(m) + 1 for m in idx.max(axis=0))
    if len(shape) != dim:
        raise ValueError(f"{path}: header shape does not match the row width")
    if spacing is None:
        if "spacing" not in meta:
            raise ValueError(f"{path}: grid spacing missing (header or argument)")
        spacing = tuple(float(x) for x in meta["spacing"].split(","))
    if origin is None and "origin" in meta:
        origin = tuple(float(x) for x in meta["origin"].split(","))
    if np.any(idx < 0) or np.any(idx >= np.array(shape)):
        raise ValueError(f"{path}: index out of range")
    arr = np.zeros(shape)
    arr[tuple(idx.T)] = vals
    return SampledFunction(arr, spacing, origin)


def write_binary(f: SampledFunction, path):
    shape = tuple(f.shape) + (1,) * (2 - f.dim)
    spacing = tuple(f.spacing) + (0.0,) * (2 - f.dim)
    origin = tuple(f.origin) + (0.0,) * (2 - f.dim)
    head = HEADER.pack(MAGIC, f.dim, 0, *shape, *spacing, *origin)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_binary(path) -> SampledFunction:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, dim, _, n0, n1, h0, h1, o0, o1 = HEADER.unpack(data[:HEADER.size])
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if dim not in (1, 2):
        raise ValueError(f"{path}: unsupported dimension {dim}")
    shape = (n0,) if dim == 1 else (n0, n1)
    count = int(np.prod(shape))
    body = data[HEADER.size:]
    if len(body) != 8 * count:
        raise ValueError(f"{path}: expected {count} values, found {len(body) // 8}")
    vals = np.frombuffer(body, dtype="<f8").reshape(shape)
    spacing = (h0,) if dim == 1 else (h0, h1)
    origin = (o0,) if dim == 1 else (o0, o1)
    return SampledFunction(vals, spacing, origin)


def load_field(path) -> SampledFunction:
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return read_csv(p)
    if p.suffix.lower() in (".okf", ".bin"):
        return read_binary(p)
    if p.suffix.lower() == ".json":
        d = json.loads(p.read_text())
        return SampledFunction(d["values"], d["spacing"], d.get("origin"))
    raise ValueError(f"{path}: unknown field format (use .csv, .okf/.bin or .json)")


def save_field(f: SampledFunction, path):
    p = Path(path)
    if p.suffix.lower() == ".csv":
        write_csv(f, p)
    elif p.suffix.lower() in (".okf", ".bin"):
        write_binary(f, p)
    else:
        raise ValueError(f"{path}: unknown field format (use .csv or .okf/.bin)")
