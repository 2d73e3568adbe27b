"""Spectral propagators e^{-iλt} (Schrödinger type) and e^{-λt} (heat type) on eigenfunction expansions.

States are coefficient vectors on the leading ``truncation`` basis functions of a
spectrum, ordered as ``Spectrum.basis()``.  Standard spectra are orthonormal, so
coefficients are plain projections; pseudo spectra are not, and coefficients come
from the biorthogonal family (Gram solve).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import gram_matrix
from .errors import NotInSubspaceX, ShapeMismatch, WrongBasis
from .functions import PiecewiseFunction, Sampled, edge_quadrature, linear_combination
from .spectra.common import PSEUDO, STANDARD, Spectrum

MEMBERSHIP_TOL = 1e-12
RECONSTRUCT_POINTS = 256


@dataclass(frozen=True)
class SubspaceX:
    """States whose coefficients vanish on every negative mode past the first ``n_f``.

    Negative modes are counted in basis order (increasing |λ|), so ``n_f`` keeps
    the ``n_f`` slowest-growing ones.
    """

    n_f: int

    def __post_init__(self):
        if self.n_f < 0:
            raise ValueError("n_f must be >= 0")

    def excluded(self, eigenvalues: np.ndarray) -> np.ndarray:
        negative = eigenvalues < 0
        rank = np.cumsum(negative)
        return negative & (rank > self.n_f)

    def contains(self, state: "SpectralState", tol: float = MEMBERSHIP_TOL) -> bool:
        mask = self.excluded(state.eigenvalues)
        return bool(np.all(np.abs(state.coefficients[mask]) <= tol))


@dataclass(frozen=True)
class SpectralState:
    spectrum: Spectrum
    coefficients: np.ndarray
    truncation: int
    time: float = 0.0
    _gram: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients)
        if c.shape != (self.truncation,):
            raise ShapeMismatch(f"expected {self.truncation} coefficients, got shape {c.shape}")
        if self.truncation > len(self.spectrum.basis_functions()):
            raise ShapeMismatch("truncation exceeds the available basis")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues()[: self.truncation]

    @property
    def functions(self) -> list[PiecewiseFunction]:
        return self.spectrum.basis_functions()[: self.truncation]

    @property
    def gram(self) -> np.ndarray:
        if self._gram is None:
            if self.spectrum.operator == STANDARD:
                G = np.eye(self.truncation)
            else:
                G = gram_matrix(self.functions)
            object.__setattr__(self, "_gram", G)
        return self._gram

    def with_coefficients(self, coefficients: np.ndarray, time: float) -> "SpectralState":
        return SpectralState(self.spectrum, coefficients, self.truncation, time, self._gram)

    def norm(self) -> float:
        """Plain L² norm of Σ c_j ψ^j."""
        c = self.coefficients
        return float(np.sqrt(max(np.real(np.conj(c) @ self.gram @ c), 0.0)))


def _moments(functions: list[PiecewiseFunction], f: PiecewiseFunction) -> np.ndarray:
    """⟨ψ^j, f⟩ for every j, one shared quadrature per edge."""
    out = np.zeros(len(functions), dtype=complex)
    for i, eid in enumerate(f.edge_ids):
        pieces = [g.pieces[i] for g in functions] + [f.pieces[i]]
        x, w = edge_quadrature(pieces, f.pieces[i].length)
        fx = w * f.pieces[i](x)
        for j, g in enumerate(functions):
            out[j] += np.conj(g.pieces[i](x)) @ fx
    return out.real.copy() if not np.any(out.imag) else out


def project(f: PiecewiseFunction, spectrum: Spectrum, truncation: int) -> SpectralState:
    basis = spectrum.basis_functions()
    if truncation < 1 or truncation > len(basis):
        raise ShapeMismatch(f"truncation must lie in [1, {len(basis)}]")
    if f.edge_ids != basis[0].edge_ids:
        raise ShapeMismatch("function and spectrum live on different networks")
    functions = basis[:truncation]
    b = _moments(functions, f)
    state = SpectralState(spectrum, np.zeros(truncation), truncation)
    if spectrum.operator == PSEUDO:
        b = np.linalg.solve(state.gram, b)
    return state.with_coefficients(b, 0.0)


def evolve_schrodinger(state: SpectralState, t: float, allow_non_unitary: bool = False) -> SpectralState:
    """Multiply coefficients by e^{-iλ_j t}.

    The pseudo group is bounded but not unitary in plain L², so it is refused
    unless ``allow_non_unitary`` is set.
    """
    if state.spectrum.operator == PSEUDO and not allow_non_unitary:
        raise WrongBasis("pseudo eigenfunctions are not orthonormal; pass allow_non_unitary=True")
    phase = np.exp(-1j * state.eigenvalues * t)
    return state.with_coefficients(state.coefficients * phase, state.time + t)


def evolve_heat(state: SpectralState, t: float, x: SubspaceX | None = None) -> SpectralState:
    """Multiply coefficients by e^{-λ_j t}; negative modes grow.

    Without ``x`` every negative-mode coefficient must vanish; with ``x`` only
    those beyond its first ``n_f`` negative modes must.
    """
    if t < 0:
        raise ValueError("heat flow runs forward in time only")
    lam = state.eigenvalues
    mask = SubspaceX(0).excluded(lam) if x is None else x.excluded(lam)
    bad = np.abs(state.coefficients[mask]) > MEMBERSHIP_TOL
    if np.any(bad):
        raise NotInSubspaceX(
            f"{int(bad.sum())} coefficient(s) on excluded negative modes"
            + ("" if x is not None else "; pass a SubspaceX to admit growing modes")
        )
    coeffs = np.where(mask, 0.0, state.coefficients * np.exp(np.where(mask, 0.0, -lam * t)))
    return state.with_coefficients(coeffs, state.time + t)


def state_function(state: SpectralState) -> PiecewiseFunction:
    """Σ c_j ψ^j; closed form for real coefficients."""
    c = state.coefficients
    if np.iscomplexobj(c) and not np.any(c.imag):
        c = c.real
    return linear_combination(c, state.functions)


def reconstruct(state: SpectralState, points: int = RECONSTRUCT_POINTS) -> PiecewiseFunction:
    """Σ c_j ψ^j sampled on ``points`` uniform nodes per edge."""
    functions = state.functions
    pieces = []
    for i, eid in enumerate(functions[0].edge_ids):
        L = functions[0].pieces[i].length
        grid = np.linspace(0.0, L, points)
        vals = np.zeros(points, dtype=complex)
        slopes = np.zeros(points, dtype=complex)
        for c, g in zip(state.coefficients, functions):
            if c != 0:
                vals += c * g.pieces[i](grid)
                slopes += c * g.pieces[i].derivative(grid)
        if not np.any(vals.imag) and not np.any(slopes.imag):
            vals, slopes = vals.real, slopes.real
        pieces.append(Sampled(eid, L, grid, vals, slopes))
    return PiecewiseFunction(tuple(pieces))
