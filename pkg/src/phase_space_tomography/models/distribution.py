"""Distribution models: radial profiles, phase-space grids and quadrature datasets."""

from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from phase_space_tomography.constants import (
    ANGLE_GRID_TOL,
    DECAY_EDGE_TOL,
    MIN_PROFILE_POINTS,
)
from phase_space_tomography.exceptions import GridError

ArrayFn = Callable[[np.ndarray], np.ndarray]
DensityFn = Callable[[np.ndarray, float], np.ndarray]


def _strictly_increasing(axis: np.ndarray, name: str) -> np.ndarray:
    arr = np.array(axis, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError(f"{name} must be a 1-D grid with at least 2 points")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if not np.all(np.diff(arr) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    arr.setflags(write=False)
    return arr


def gaussian_scaled(values: np.ndarray, points: np.ndarray, rate: float) -> np.ndarray:
    """values·exp(rate·t²) in log-compensated form; exact zeros stay zero."""
    values = np.asarray(values, dtype=np.complex128)
    magnitude = np.abs(values)
    nonzero = magnitude > 0
    with np.errstate(divide="ignore"):
        log_magnitude = np.where(nonzero, np.log(np.where(nonzero, magnitude, 1.0)), 0.0)
    phase = np.where(nonzero, values / np.where(nonzero, magnitude, 1.0), 0.0)
    return np.where(nonzero, np.exp(log_magnitude + rate * points**2) * phase, 0.0)


class ProfileFamily(str, Enum):
    """Which distribution a Fourier component belongs to."""

    QUADRATURE = "quadrature"
    LAMBDA = "lambda"


class ProfileKind(str, Enum):
    """How a profile is evaluated."""

    CLOSED_FORM = "closed_form"
    SAMPLED = "sampled"


class RadialProfile(BaseModel):
    """One angular Fourier component: r ↦ W^λ_{ρ,k}(r) or x ↦ W^qd_{ρ,k}(x).

    Closed-form profiles carry an evaluator; sampled ones carry a grid and are
    interpolated by cubic splines. ``scale_rate`` is the Gaussian rate γ such that
    value·exp(γ t²) is the weight-stripped profile consumed by the quadratures.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    family: ProfileFamily = Field(..., description="Quadrature or lambda component")
    kind: ProfileKind = Field(..., description="Closed-form or sampled")
    k: int = Field(..., ge=0, description="Angular index")
    lam: Optional[float] = Field(None, description="Lambda of a lambda-family profile")
    scale_rate: float = Field(1.0, description="Gaussian decay rate γ of the profile")
    evaluator: Optional[ArrayFn] = Field(None, exclude=True)
    scaled_evaluator: Optional[ArrayFn] = Field(
        None, exclude=True, description="Profile times exp(γ t²), evaluated without overflow"
    )
    magnitude_evaluator: Optional[ArrayFn] = Field(
        None, exclude=True, description="Sum of absolute terms of the scaled evaluator"
    )
    grid: Optional[np.ndarray] = Field(None, description="Sample points (sampled kind)")
    values: Optional[np.ndarray] = Field(None, description="Complex samples (sampled kind)")
    metadata: Dict[str, Any] = Field(default_factory=dict)

    _splines: Optional[Tuple[CubicSpline, CubicSpline]] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_kind(self) -> "RadialProfile":
        if self.kind == ProfileKind.CLOSED_FORM:
            if self.evaluator is None:
                raise ValueError("closed-form profile needs an evaluator")
            return self
        if self.grid is None or self.values is None:
            raise ValueError("sampled profile needs grid and values")
        grid = _strictly_increasing(self.grid, "profile grid")
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != grid.shape:
            raise ValueError("profile values must match the grid")
        if grid.size < MIN_PROFILE_POINTS:
            raise ValueError(
                f"sampled profiles need at least {MIN_PROFILE_POINTS} points, got {grid.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        if self.family == ProfileFamily.LAMBDA and (grid[0] < 0.0 or grid[-1] <= 0.0):
            raise ValueError("radial grids live on [0, r_max] with r_max > 0")
        self.grid = grid
        self.values = values
        return self

    @property
    def decays(self) -> bool:
        """Closed forms decay by construction; samples must be negligible at the open ends."""
        if self.kind == ProfileKind.CLOSED_FORM:
            return True
        assert self.values is not None
        peak = float(np.max(np.abs(self.values)))
        if peak == 0.0:
            return True
        ends = [abs(self.values[-1])]
        if self.family == ProfileFamily.QUADRATURE:
            ends.append(abs(self.values[0]))
        return max(ends) <= DECAY_EDGE_TOL * peak

    def covers(self, points: np.ndarray) -> bool:
        if self.kind == ProfileKind.CLOSED_FORM:
            return True
        assert self.grid is not None
        points = np.asarray(points, dtype=np.float64)
        return bool(np.all((points >= self.grid[0]) & (points <= self.grid[-1])))

    def _spline_pair(self) -> Tuple[CubicSpline, CubicSpline]:
        if self._splines is None:
            assert self.grid is not None and self.values is not None
            self._splines = (
                CubicSpline(self.grid, self.values.real),
                CubicSpline(self.grid, self.values.imag),
            )
        return self._splines

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if self.kind == ProfileKind.CLOSED_FORM:
            assert self.evaluator is not None
            return np.asarray(self.evaluator(points), dtype=np.complex128)
        assert self.grid is not None
        below = points < self.grid[0]
        above = points > self.grid[-1]
        outside = below | above
        if np.any(below) and self.family == ProfileFamily.LAMBDA:
            raise GridError(f"radial profile k={self.k} starts at r={self.grid[0]}, not at 0")
        if np.any(outside) and not self.decays:
            raise GridError(
                f"sampled profile k={self.k} on [{self.grid[0]}, {self.grid[-1]}] does not "
                f"cover {int(np.sum(outside))} requested nodes and does not decay at its edges"
            )
        spline_re, spline_im = self._spline_pair()
        inside = np.clip(points, self.grid[0], self.grid[-1])
        values = spline_re(inside) + 1j * spline_im(inside)
        return np.where(outside, 0.0, values)

    def scaled(self, points: np.ndarray) -> np.ndarray:
        """Profile times exp(γ t²)."""
        points = np.asarray(points, dtype=np.float64)
        if self.scaled_evaluator is not None:
            return np.asarray(self.scaled_evaluator(points), dtype=np.complex128)
        return gaussian_scaled(self(points), points, self.scale_rate)

    def magnitude(self, points: np.ndarray) -> np.ndarray:
        """Rounding scale of ``scaled``: the sum of absolute terms when the evaluator knows it."""
        points = np.asarray(points, dtype=np.float64)
        if self.magnitude_evaluator is not None:
            return np.abs(np.asarray(self.magnitude_evaluator(points)))
        return np.abs(self.scaled(points))


class CoordinateKind(str, Enum):
    """Phase-space coordinates of a grid."""

    CARTESIAN = "cartesian"
    POLAR = "polar"


AXIS_NAMES: Dict[CoordinateKind, Tuple[str, str]] = {
    CoordinateKind.CARTESIAN: ("q", "p"),
    CoordinateKind.POLAR: ("r", "theta"),
}


class AxisSpec(BaseModel):
    """Uniform axis start:stop:count."""

    start: float
    stop: float
    count: int = Field(..., ge=2)

    @model_validator(mode="after")
    def _ordered(self) -> "AxisSpec":
        if not self.stop > self.start:
            raise ValueError(f"axis stop must exceed start, got {self.start}:{self.stop}")
        return self

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


class GridSpec(BaseModel):
    """Rectangular grid in cartesian (q, p) or polar (r, θ) coordinates."""

    coords: CoordinateKind = CoordinateKind.CARTESIAN
    axis1: AxisSpec
    axis2: AxisSpec

    @classmethod
    def parse(cls, text: str, coords: CoordinateKind = CoordinateKind.CARTESIAN) -> "GridSpec":
        """Parse "x0:x1:n,y0:y1:n"."""
        try:
            first, second = text.split(",")
            axes = []
            for part in (first, second):
                start, stop, count = part.split(":")
                axes.append(AxisSpec(start=float(start), stop=float(stop), count=int(count)))
        except ValueError as e:
            raise ValueError(f"Invalid grid spec '{text}' (expected x0:x1:n,y0:y1:n): {e}")
        return cls(coords=coords, axis1=axes[0], axis2=axes[1])

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis1.points(), self.axis2.points(), indexing="ij")


class DistributionGrid(BaseModel):
    """Complex distribution values on a rectangular grid; values[i, j] at (axis1[i], axis2[j])."""

    model_config = ConfigDict(arbitrary_types_allowed=True, use_enum_values=False)

    coords: CoordinateKind
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    valid: Optional[np.ndarray] = Field(
        None, description="Boolean mask of trusted points (None means all)"
    )
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("axis1", "axis2", mode="before")
    @classmethod
    def _axis(cls, value: object) -> np.ndarray:
        return _strictly_increasing(np.asarray(value), "grid axis")

    @model_validator(mode="after")
    def _shape(self) -> "DistributionGrid":
        values = np.array(self.values, dtype=np.complex128)
        shape = (self.axis1.size, self.axis2.size)
        if values.shape != shape:
            raise ValueError(f"grid values have shape {values.shape}, axes imply {shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        self.values = values
        if self.valid is not None:
            mask = np.asarray(self.valid, dtype=bool)
            if mask.shape != shape:
                raise ValueError("valid mask must match the grid shape")
            self.valid = mask
        return self

    @property
    def axis_names(self) -> Tuple[str, str]:
        return AXIS_NAMES[CoordinateKind(self.coords)]

    @property
    def valid_mask(self) -> np.ndarray:
        if self.valid is None:
            return np.ones(self.values.shape, dtype=bool)
        return self.valid


class QuadratureDataset(BaseModel):
    """Quadrature densities x ↦ W^qd(x, θ_t) at a finite list of angles.

    Closed-form datasets hold a density function of (x, θ) (and optionally its
    exp(x²)-scaled form); sampled datasets hold one row of samples per angle on a
    common x-grid.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    angles: List[float] = Field(..., min_length=1)
    density: Optional[DensityFn] = Field(None, exclude=True)
    scaled_density: Optional[DensityFn] = Field(None, exclude=True)
    x_grid: Optional[np.ndarray] = None
    samples: Optional[np.ndarray] = Field(None, description="shape (len(angles), len(x_grid))")
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "QuadratureDataset":
        angles = np.asarray(self.angles, dtype=np.float64)
        if np.any(angles < 0.0) or np.any(angles >= 2.0 * np.pi):
            raise ValueError("angles must lie in [0, 2π)")
        if np.unique(angles).size != angles.size:
            raise ValueError("angles must be distinct")
        if self.density is not None:
            return self
        if self.x_grid is None or self.samples is None:
            raise ValueError("dataset needs either a density function or samples on an x-grid")
        grid = _strictly_increasing(self.x_grid, "x grid")
        samples = np.array(self.samples, dtype=np.float64)
        if samples.shape != (angles.size, grid.size):
            raise ValueError(
                f"samples have shape {samples.shape}, expected {(angles.size, grid.size)}"
            )
        if grid.size < MIN_PROFILE_POINTS:
            raise ValueError(f"x grids need at least {MIN_PROFILE_POINTS} points")
        norms = trapezoid(samples, grid, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-6)
        if bad.size:
            raise ValueError(
                f"densities must integrate to 1 ± 1e-6; angle index {int(bad[0])} gives "
                f"{norms[bad[0]]:.12g}"
            )
        self.x_grid = grid
        self.samples = samples
        return self

    @property
    def p(self) -> int:
        return len(self.angles)

    @property
    def is_closed_form(self) -> bool:
        return self.density is not None

    def is_equidistant(self) -> bool:
        """True when the angles are exactly 2πt/p, t = 0..p-1 (to 1e-12)."""
        expected = 2.0 * np.pi * np.arange(self.p) / self.p
        return bool(np.all(np.abs(np.asarray(self.angles) - expected) <= ANGLE_GRID_TOL))

    def profile(self, index: int) -> RadialProfile:
        """Density at angle index as a quadrature-family profile (k records the angle index)."""
        theta = self.angles[index]
        if self.density is not None:
            density = self.density
            scaled = self.scaled_density
            return RadialProfile(
                family=ProfileFamily.QUADRATURE,
                kind=ProfileKind.CLOSED_FORM,
                k=0,
                evaluator=lambda x: density(x, theta),
                scaled_evaluator=(lambda x: scaled(x, theta)) if scaled is not None else None,
                metadata={"theta": theta},
            )
        assert self.samples is not None
        return RadialProfile(
            family=ProfileFamily.QUADRATURE,
            kind=ProfileKind.SAMPLED,
            k=0,
            grid=self.x_grid,
            values=self.samples[index],
            metadata={"theta": theta},
        )


class DistributionTarget(str, Enum):
    """What sample_grid tabulates."""

    QUADRATURE = "quadrature"
    LAMBDA = "lambda"


class DistributionSpec(BaseModel):
    """Generating spec of a tabulated distribution, recorded in output metadata."""

    target: DistributionTarget
    lam: Optional[float] = Field(None, description="Lambda for lambda distributions")
    angles: Optional[int] = Field(None, ge=1, description="Equidistant angle count")
