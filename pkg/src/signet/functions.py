"""Per-edge functions: closed-form trig/hyperbolic terms or sampled Hermite data.

Closed forms with a reference point are normalised by their value there, so a
term like sinh(w x)/sinh(w L) stays finite for large w L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import ShapeMismatch

KINDS = ("sin", "cos", "sinh", "cosh", "affine")


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_rule(breakpoints: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights on every panel delimited by ``breakpoints``."""
    t, w = gauss_legendre(order)
    a = np.asarray(breakpoints[:-1], dtype=float)[:, None]
    b = np.asarray(breakpoints[1:], dtype=float)[:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * t[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def _sinh_ratio(z: np.ndarray, zr: float) -> np.ndarray:
    # sinh(z)/sinh(zr) without overflow
    if abs(zr) < 1.0:
        return np.sinh(z) / math.sinh(zr)
    az, azr = np.abs(z), abs(zr)
    return (
        np.sign(z) * math.copysign(1.0, zr)
        * np.exp(az - azr)
        * (-np.expm1(-2 * az))
        / (-math.expm1(-2 * azr))
    )


def _cosh_ratio(z: np.ndarray, zr: float) -> np.ndarray:
    az, azr = np.abs(z), abs(zr)
    return np.exp(az - azr) * (1 + np.exp(-2 * az)) / (1 + math.exp(-2 * azr))


def _sinh_ratio_derivative(z: np.ndarray, zr: float) -> np.ndarray:
    # cosh(z)/sinh(zr)
    az, azr = np.abs(z), abs(zr)
    if azr < 1.0:
        return np.cosh(z) / math.sinh(zr)
    return math.copysign(1.0, zr) * np.exp(az - azr) * (1 + np.exp(-2 * az)) / (-math.expm1(-2 * azr))


def _cosh_ratio_derivative(z: np.ndarray, zr: float) -> np.ndarray:
    # sinh(z)/cosh(zr)
    az, azr = np.abs(z), abs(zr)
    return np.sign(z) * np.exp(az - azr) * (-np.expm1(-2 * az)) / (1 + math.exp(-2 * azr))


@dataclass(frozen=True)
class ClosedForm:
    """amplitude * g(frequency * (x - shift)), optionally divided by its value at ``ref``.

    For ``affine`` the value is amplitude * (x - shift) + offset.
    """

    kind: str
    amplitude: float
    frequency: float = 0.0
    shift: float = 0.0
    ref: float | None = None
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown closed-form kind {self.kind!r}")
        if self.frequency < 0:
            raise ValueError("frequency must be nonnegative")

    def _ratio(self, x: np.ndarray, derivative: bool) -> np.ndarray:
        w = self.frequency
        z = w * (x - self.shift)
        if self.ref is None:
            if self.kind == "sin":
                return w * np.cos(z) if derivative else np.sin(z)
            if self.kind == "cos":
                return -w * np.sin(z) if derivative else np.cos(z)
            if self.kind == "sinh":
                return w * np.cosh(z) if derivative else np.sinh(z)
            return w * np.sinh(z) if derivative else np.cosh(z)
        zr = w * (self.ref - self.shift)
        if self.kind == "sin":
            return (w * np.cos(z) if derivative else np.sin(z)) / math.sin(zr)
        if self.kind == "cos":
            return (-w * np.sin(z) if derivative else np.cos(z)) / math.cos(zr)
        if self.kind == "sinh":
            return w * _sinh_ratio_derivative(z, zr) if derivative else _sinh_ratio(z, zr)
        return w * _cosh_ratio_derivative(z, zr) if derivative else _cosh_ratio(z, zr)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "affine":
            return self.amplitude * (x - self.shift) + self.offset
        return self.amplitude * self._ratio(x, False)

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "affine":
            return np.full_like(x, self.amplitude)
        return self.amplitude * self._ratio(x, True)

    def scaled(self, factor: float) -> "ClosedForm":
        return ClosedForm(
            self.kind, self.amplitude * factor, self.frequency, self.shift, self.ref, self.offset * factor
        )


@dataclass(frozen=True)
class Terms:
    """Sum of closed-form terms on one edge; an empty sum is the zero function."""

    edge_id: int
    length: float
    terms: tuple[ClosedForm, ...] = ()

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for term in self.terms:
            out = out + term(x)
        return out

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for term in self.terms:
            out = out + term.derivative(x)
        return out

    @property
    def max_frequency(self) -> float:
        return max((t.frequency for t in self.terms), default=0.0)

    @property
    def breakpoints(self) -> np.ndarray | None:
        return None

    def scaled(self, factor) -> "Terms":
        return Terms(self.edge_id, self.length, tuple(t.scaled(factor) for t in self.terms))

    def is_zero(self) -> bool:
        return all(t.amplitude == 0 and t.offset == 0 for t in self.terms)


@dataclass(frozen=True, eq=False)
class Sampled:
    """Samples on an increasing grid from 0 to ``length``, read by cubic Hermite interpolation.

    Without explicit slopes, second-order finite-difference slopes are used.
    Values may be complex.
    """

    edge_id: int
    length: float
    grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray | None = None
    _splines: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        if grid.ndim != 1 or grid.size < 2 or values.shape != grid.shape:
            raise ShapeMismatch("grid and values must be 1-d arrays of equal size >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("sample grid must be strictly increasing")
        if abs(grid[0]) > 1e-12 * self.length or abs(grid[-1] - self.length) > 1e-12 * self.length:
            raise ValueError("sample grid must span [0, length]")
        if not np.all(np.isfinite(values)):
            raise ValueError("samples must be finite")
        slopes = self.slopes
        if slopes is None:
            slopes = np.gradient(values, grid, edge_order=2)
        slopes = np.asarray(slopes)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "slopes", slopes)
        if np.iscomplexobj(values) or np.iscomplexobj(slopes):
            splines = (
                CubicHermiteSpline(grid, values.real, slopes.real),
                CubicHermiteSpline(grid, np.imag(values), np.imag(slopes)),
            )
        else:
            splines = (CubicHermiteSpline(grid, values, slopes),)
        object.__setattr__(self, "_splines", splines)

    def _eval(self, x, nu: int) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.length)
        if len(self._splines) == 2:
            return self._splines[0](x, nu) + 1j * self._splines[1](x, nu)
        return self._splines[0](x, nu)

    def __call__(self, x) -> np.ndarray:
        return self._eval(x, 0)

    def derivative(self, x) -> np.ndarray:
        return self._eval(x, 1)

    @property
    def max_frequency(self) -> float:
        return 0.0

    @property
    def breakpoints(self) -> np.ndarray:
        return self.grid

    def scaled(self, factor) -> "Sampled":
        return Sampled(self.edge_id, self.length, self.grid, self.values * factor, self.slopes * factor)


Piece = Terms | Sampled


@dataclass(frozen=True)
class PiecewiseFunction:
    """A function on a network: one piece per edge, in the network's edge order."""

    pieces: tuple[Piece, ...]

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(p.edge_id for p in self.pieces)

    def piece(self, edge_id: int) -> Piece:
        for p in self.pieces:
            if p.edge_id == edge_id:
                return p
        raise KeyError(edge_id)

    def __call__(self, edge_id: int, x) -> np.ndarray:
        return self.piece(edge_id)(x)

    def derivative(self, edge_id: int, x) -> np.ndarray:
        return self.piece(edge_id).derivative(x)

    def scaled(self, factor) -> "PiecewiseFunction":
        return PiecewiseFunction(tuple(p.scaled(factor) for p in self.pieces))

    def scaled_per_edge(self, factors: Mapping[int, float]) -> "PiecewiseFunction":
        return PiecewiseFunction(tuple(p.scaled(factors.get(p.edge_id, 1.0)) for p in self.pieces))

    def sampled(self, points: int = 256) -> "PiecewiseFunction":
        pieces = []
        for p in self.pieces:
            x = np.linspace(0.0, p.length, points)
            pieces.append(Sampled(p.edge_id, p.length, x, p(x), p.derivative(x)))
        return PiecewiseFunction(tuple(pieces))


def zero_function(network) -> PiecewiseFunction:
    return PiecewiseFunction(tuple(Terms(e.id, e.length) for e in network.edges))


def from_callable(network, fn: Callable[[int, np.ndarray], np.ndarray], points: int = 257) -> PiecewiseFunction:
    """Sample ``fn(edge_id, x)`` on a uniform grid per edge."""
    pieces = []
    for e in network.edges:
        x = np.linspace(0.0, e.length, points)
        pieces.append(Sampled(e.id, e.length, x, np.asarray(fn(e.id, x)) + 0.0 * x))
    return PiecewiseFunction(tuple(pieces))


def linear_combination(
    coefficients: Sequence, functions: Sequence[PiecewiseFunction]
) -> PiecewiseFunction:
    """Σ c_i f_i, closed form when every piece is; coefficients may be complex."""
    if len(coefficients) != len(functions):
        raise ShapeMismatch("coefficient count does not match function count")
    if not functions:
        raise ShapeMismatch("empty combination")
    ids = functions[0].edge_ids
    if any(f.edge_ids != ids for f in functions):
        raise ShapeMismatch("functions live on different edge sets")
    coefficients = np.asarray(coefficients)
    cast = complex if np.iscomplexobj(coefficients) else float
    pieces = []
    for i, eid in enumerate(ids):
        parts = [f.pieces[i] for f in functions]
        if all(isinstance(p, Terms) for p in parts):
            terms = []
            for c, p in zip(coefficients, parts):
                if c != 0:
                    terms.extend(t.scaled(cast(c)) for t in p.terms)
            pieces.append(Terms(eid, parts[0].length, tuple(terms)))
        else:
            grid = np.unique(np.concatenate([_dense_grid(p) for p in parts]))
            vals = sum(c * p(grid) for c, p in zip(coefficients, parts))
            slopes = sum(c * p.derivative(grid) for c, p in zip(coefficients, parts))
            pieces.append(Sampled(eid, parts[0].length, grid, vals, slopes))
    return PiecewiseFunction(tuple(pieces))


def _dense_grid(piece: Piece) -> np.ndarray:
    if isinstance(piece, Sampled):
        return piece.grid
    panels = max(64, int(math.ceil(piece.max_frequency * piece.length * 2)))
    return np.linspace(0.0, piece.length, panels + 1)


def edge_quadrature(pieces: Sequence[Piece], length: float, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on one edge, fine enough for products of the given pieces.

    Panels follow the sample grids of sampled pieces and are refined so every
    panel spans at most about two radians of the fastest closed-form term.
    """
    breaks = [np.array([0.0, length])]
    freq = 0.0
    for p in pieces:
        bp = p.breakpoints
        if bp is not None:
            breaks.append(bp)
        freq = max(freq, p.max_frequency)
    grid = np.unique(np.concatenate(breaks))
    panels = max(32, int(math.ceil(freq * length / 2.0)))
    if grid.size - 1 < panels:
        grid = np.unique(np.concatenate([grid, np.linspace(0.0, length, panels + 1)]))
    return composite_rule(grid, order)
