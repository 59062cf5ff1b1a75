"""Connection functions, box geometry and Poisson point sampling.

The model is the planar random connection model: a homogeneous Poisson
process of intensity ``lam`` (points per unit area), either restricted to
the centred box B(s) = [-s/2, s/2]^2 or explored over the whole plane,
with an edge between points at distance r drawn independently with
probability phi(r).  phi is a nonincreasing [0,1]-valued function with a
finite range r_max = sup{r : phi(r) > 0}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import _rng
from ._kernels import phi_many

KIND_IDS = {"hard-disk": 0, "linear-ramp": 1, "truncated-exponential": 2, "step-table": 3}

_MONOTONE_GRID = 2048


@dataclass(frozen=True)
class BoxSpec:
    """The sampling box B(s) = [-s/2, s/2]^2, centred at the origin."""

    side_s: float

    def __post_init__(self):
        if not (math.isfinite(self.side_s) and self.side_s > 0):
            raise ValueError(f"box side must be a positive finite real, got {self.side_s}")

    @property
    def half(self) -> float:
        return self.side_s / 2.0

    @property
    def area(self) -> float:
        return self.side_s * self.side_s

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return (np.abs(pts) <= self.half + 1e-12).all(axis=1)


@dataclass(frozen=True)
class ConnectionFunction:
    """A nonincreasing connection function with finite range.

    kind is one of 'hard-disk', 'linear-ramp', 'truncated-exponential',
    'step-table'.  rate is used by the truncated exponential only; breaks
    and values hold the step table (phi equals values[i] on the interval
    (breaks[i-1], breaks[i]], with breaks[-1] == r_max).
    """

    kind: str
    r_max: float = 1.0
    rate: float = 0.0
    breaks: tuple = ()
    values: tuple = ()
    _arrs: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KIND_IDS:
            raise ValueError(f"unknown connection function kind {self.kind!r}")
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            raise ValueError(f"r_max must be a positive finite real, got {self.r_max}")
        if self.kind == "truncated-exponential":
            if not (math.isfinite(self.rate) and self.rate >= 0):
                raise ValueError(f"rate must be a nonnegative finite real, got {self.rate}")
        if self.kind == "step-table":
            self._validate_steps()
        breaks = np.asarray(self.breaks, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "_arrs", (breaks, values))
        self._validate_monotone_grid()

    def _validate_steps(self):
        b = np.asarray(self.breaks, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if b.size == 0 or b.size != v.size:
            raise ValueError("step-table needs matching, nonempty breakpoints and values")
        if not (np.isfinite(b).all() and np.isfinite(v).all()):
            raise ValueError("step-table entries must be finite")
        if b[0] <= 0 or (np.diff(b) <= 0).any():
            raise ValueError("step-table breakpoints must be positive and strictly increasing")
        if (v < 0).any() or (v > 1).any():
            raise ValueError("step-table values must lie in [0, 1]")
        if (np.diff(v) > 0).any():
            raise ValueError("step-table values must be nonincreasing")
        if v[-1] <= 0:
            raise ValueError("last step value must be positive (it defines the range)")
        if abs(b[-1] - self.r_max) > 1e-12:
            raise ValueError("last breakpoint must equal r_max")

    def _validate_monotone_grid(self):
        # continuous kinds are checked on a fine grid; step tables were
        # inspected exactly above
        grid = np.linspace(0.0, self.r_max * 1.05, _MONOTONE_GRID)
        vals = self(grid)
        if (vals < 0).any() or (vals > 1).any():
            raise ValueError("phi must take values in [0, 1]")
        if (np.diff(vals) > 1e-12).any():
            raise ValueError("phi must be nonincreasing")
        if self(np.array([self.r_max * (1 + 1e-9) + 1e-12]))[0] != 0.0:
            raise ValueError("phi must vanish beyond r_max")

    @property
    def kind_id(self) -> int:
        return KIND_IDS[self.kind]

    def kernel_args(self):
        """(kind_id, p0, r_max, breaks, values) as consumed by the kernels."""
        breaks, values = self._arrs
        return self.kind_id, float(self.rate), float(self.r_max), breaks, values

    def __call__(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
        kind_id, p0, r_max, breaks, values = self.kernel_args()
        out = phi_many(kind_id, p0, r_max, breaks, values, np.ascontiguousarray(r_arr))
        return out if np.ndim(r) else float(out[0])

    # -- constructors -------------------------------------------------

    @classmethod
    def hard_disk(cls, r_max: float = 1.0) -> "ConnectionFunction":
        return cls("hard-disk", r_max=r_max)

    @classmethod
    def linear_ramp(cls, r_max: float = 1.0) -> "ConnectionFunction":
        return cls("linear-ramp", r_max=r_max)

    @classmethod
    def truncated_exponential(cls, rate: float, r_max: float = 1.0) -> "ConnectionFunction":
        return cls("truncated-exponential", r_max=r_max, rate=rate)

    @classmethod
    def step_table(cls, steps) -> "ConnectionFunction":
        steps = [(float(b), float(v)) for b, v in steps]
        breaks = tuple(b for b, _ in steps)
        values = tuple(v for _, v in steps)
        return cls("step-table", r_max=breaks[-1], breaks=breaks, values=values)

    # -- config round trip --------------------------------------------

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "r_max": self.r_max}
        if self.kind == "truncated-exponential":
            cfg["rate"] = self.rate
        if self.kind == "step-table":
            cfg["steps"] = [[b, v] for b, v in zip(self.breaks, self.values)]
            del cfg["r_max"]
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "ConnectionFunction":
        if not isinstance(cfg, dict) or "kind" not in cfg:
            raise ValueError("phi config must be a mapping with a 'kind' entry")
        kind = cfg["kind"]
        if kind == "step-table":
            return cls.step_table(cfg["steps"])
        if kind == "truncated-exponential":
            return cls.truncated_exponential(cfg.get("rate", 1.0), cfg.get("r_max", 1.0))
        if kind in ("hard-disk", "linear-ramp"):
            return cls(kind, r_max=cfg.get("r_max", 1.0))
        raise ValueError(f"unknown connection function kind {kind!r}")

    @classmethod
    def from_text(cls, text: str) -> "ConnectionFunction":
        """Parse a phi description: a kind name with optional key=value
        parameters ('hard-disk', 'truncated-exponential:rate=2,r_max=1.5'),
        inline JSON, or '@path' to a JSON file."""
        text = text.strip()
        if text.startswith("@"):
            with open(text[1:], encoding="utf-8") as f:
                return cls.from_config(json.load(f))
        if text.startswith("{"):
            return cls.from_config(json.loads(text))
        name, _, params = text.partition(":")
        cfg = {"kind": name.strip()}
        if params:
            for item in params.split(","):
                key, _, val = item.partition("=")
                key = key.strip()
                if key == "steps":
                    raise ValueError("step tables must be given as JSON or @file")
                cfg[key] = float(val)
        return cls.from_config(cfg)


@dataclass(frozen=True)
class PointSet:
    """A sampled Poisson configuration in B(s) with seed provenance."""

    points: np.ndarray
    box: BoxSpec
    intensity: float
    seed: int
    replicate: int = 0

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64).reshape(-1, 2))
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if len(pts) and not self.box.contains(pts).all():
            raise ValueError("points must lie inside the box")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def vertex_keys(self) -> np.ndarray:
        return np.arange(self.n, dtype=np.uint64)


@dataclass(frozen=True)
class PalmPointSet:
    """A PointSet plus up to two deterministic extra vertices.

    The added points (the origin, or uniform points drawn for the Mecke
    identities) are always vertices of the graph and are listed after the
    base points in vertex indexing.
    """

    base: PointSet
    added: np.ndarray

    def __post_init__(self):
        extra = np.ascontiguousarray(np.asarray(self.added, dtype=np.float64).reshape(-1, 2))
        if extra.shape[0] > 2:
            raise ValueError("at most two Palm points are supported")
        extra.flags.writeable = False
        object.__setattr__(self, "added", extra)

    @property
    def n(self) -> int:
        return self.base.n + self.added.shape[0]

    @property
    def box(self) -> BoxSpec:
        return self.base.box

    def all_points(self) -> np.ndarray:
        if self.added.shape[0] == 0:
            return self.base.points
        return np.vstack([self.base.points, self.added])

    def vertex_keys(self) -> np.ndarray:
        keys = np.empty(self.n, dtype=np.uint64)
        keys[: self.base.n] = np.arange(self.base.n, dtype=np.uint64)
        for j in range(self.added.shape[0]):
            keys[self.base.n + j] = _rng.PALM_KEY_BASE + j
        return keys


def _check_intensity(lam: float) -> float:
    lam = float(lam)
    if not (math.isfinite(lam) and lam >= 0):
        raise ValueError(f"intensity must be a nonnegative finite real, got {lam}")
    return lam


def sample_points(lam: float, box: BoxSpec, seed: int, replicate: int = 0) -> PointSet:
    """Sample a Poisson(lam * s^2) number of uniform points in B(s).

    Bit-identical for identical (lam, box, seed, replicate); independent
    across replicates.
    """
    lam = _check_intensity(lam)
    seed = _rng.check_seed(seed)
    gen = _rng.points_stream(seed, replicate)
    count = int(gen.poisson(lam * box.area))
    pts = gen.uniform(-box.half, box.half, size=(count, 2))
    return PointSet(points=pts, box=box, intensity=lam, seed=seed, replicate=int(replicate))


def with_palm_origin(ps: PointSet) -> PalmPointSet:
    """Add the origin as a Palm vertex."""
    return PalmPointSet(base=ps, added=np.zeros((1, 2)))


def with_palm_uniform(ps: PointSet, count: int = 1) -> PalmPointSet:
    """Add `count` independent uniform Palm vertices (V_s and W_s).

    Drawn from the Palm substream of (ps.seed, ps.replicate), so they are
    independent of the base configuration and reproducible.
    """
    if count not in (1, 2):
        raise ValueError("count must be 1 or 2")
    gen = _rng.palm_stream(ps.seed, ps.replicate)
    extra = gen.uniform(-ps.box.half, ps.box.half, size=(2, 2))[:count]
    return PalmPointSet(base=ps, added=extra)


def phi_eval(phi: ConnectionFunction, r):
    """Evaluate phi at distance(s) r >= 0; exactly 0 beyond r_max."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if not np.isfinite(r_arr).all() or (r_arr < 0).any():
        raise ValueError("distances must be nonnegative finite reals")
    out = phi(r_arr)
    return out if np.ndim(r) else float(out)


def expected_degree(phi: ConnectionFunction, lam: float) -> float:
    """Mean degree of a typical vertex in the infinite model.

    lam * 2*pi * integral of phi(r) r dr, in closed form for the built-in
    continuous kinds and by adaptive quadrature for step tables.
    """
    lam = _check_intensity(lam)
    r = phi.r_max
    if phi.kind == "hard-disk":
        integral = r * r / 2.0
    elif phi.kind == "linear-ramp":
        integral = r * r / 6.0
    elif phi.kind == "truncated-exponential":
        c = phi.rate
        if c == 0.0:
            integral = r * r / 2.0
        else:
            integral = (1.0 - math.exp(-c * r) * (1.0 + c * r)) / (c * c)
    else:
        integral, _ = quad(lambda x: phi(np.array([x]))[0] * x, 0.0, r,
                           points=list(phi.breaks), limit=200)
    return lam * 2.0 * math.pi * integral
