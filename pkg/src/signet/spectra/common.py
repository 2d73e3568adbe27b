"""Shared spectral machinery: eigenpair containers, bracketed root solving, and the
junction secular function used by every star and tadpole family."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..errors import NoSignChange, RationalRatioSuspected
from ..functions import ClosedForm, PiecewiseFunction, Terms, edge_quadrature
from ..graph import Network

STANDARD = "standard"
PSEUDO = "pseudo"

NU = "NuPositiveTrig"
THETA = "ThetaNegativeTrig"
DISP_A = "DispersionA"
DISP_B = "DispersionB"
PSEUDO_HALF = "PseudoHalfInteger"
PSEUDO_INT = "PseudoInteger"
TRANSCENDENTAL = "Transcendental"
ANTISYMMETRIC = "Antisymmetric"
SYMMETRIC = "Symmetric"
COINCIDENCE = "Coincidence"
ZERO_MODE = "ZeroMode"


def mixed_family(i: int) -> str:
    return f"MixedFamily({i})"


@dataclass(frozen=True)
class EigenPair:
    lam: float
    multiplicity: int
    family: str
    functions: tuple[PiecewiseFunction, ...]
    bracket: tuple[float, float] | None = None
    index: int = 0

    def __post_init__(self):
        if self.multiplicity < 1 or len(self.functions) != self.multiplicity:
            raise ValueError("eigenspace basis size must equal the multiplicity")


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs with λ >= 0 ascending and λ < 0 descending, kept separately."""

    pairs: tuple[EigenPair, ...]
    negative_pairs: tuple[EigenPair, ...]
    operator: str
    truncation: int
    network: Network
    metadata: dict = field(default_factory=dict, compare=False)

    def all_pairs(self) -> list[EigenPair]:
        """Every pair ordered by |λ|, positive before negative on ties."""
        merged = list(self.pairs) + list(self.negative_pairs)
        return sorted(merged, key=lambda p: (abs(p.lam), p.lam < 0))

    def basis(self) -> list[tuple[EigenPair, PiecewiseFunction]]:
        return [(p, f) for p in self.all_pairs() for f in p.functions]

    def basis_functions(self) -> list[PiecewiseFunction]:
        return [f for _, f in self.basis()]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, ordered by |λ|."""
        return np.array([p.lam for p, _ in self.basis()])

    def complete_count(self) -> int:
        """Length of the leading basis prefix with no eigenvalue missing below its largest |λ|.

        Only families cut off by the truncation limit the prefix; finite families
        are always complete.
        """
        cutoff = math.inf
        for fam, side in self.metadata.get("truncated", ()):
            members = [abs(p.lam) for p in self.all_pairs() if p.family == fam and np.sign(p.lam) == side]
            if members:
                cutoff = min(cutoff, max(members))
        return sum(1 for p, _ in self.basis() if abs(p.lam) <= cutoff * (1 + 1e-12))


def make_spectrum(pairs: Sequence[EigenPair], operator: str, truncation: int, network: Network, **metadata) -> Spectrum:
    pos = sorted((p for p in pairs if p.lam >= 0), key=lambda p: (p.lam, p.family))
    neg = sorted((p for p in pairs if p.lam < 0), key=lambda p: (-p.lam, p.family))
    return Spectrum(tuple(pos), tuple(neg), operator, truncation, network, dict(metadata))


# ---------------------------------------------------------------- roots


def solve_bracketed_roots(
    g: Callable[[float], float], brackets: Sequence[tuple[float, float]], tol: float = 1e-9
) -> list[float]:
    """One root per bracket: bisection to width 1e-13, then one centred-difference Newton step."""
    roots = []
    for lo, hi in brackets:
        roots.append(_bisect(g, float(lo), float(hi), tol))
    return roots


def _bisect(g, lo: float, hi: float, tol: float) -> float:
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if not (np.isfinite(glo) and np.isfinite(ghi)) or glo * ghi > 0:
        raise NoSignChange((lo, hi))
    a, b, ga = lo, hi, glo
    while b - a > 1e-13 * max(1.0, abs(a)):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (ga > 0):
            a, ga = mid, gm
        else:
            b = mid
    root = 0.5 * (a + b)
    step = 1e-7 * max(1.0, abs(root))
    slope = (g(root + step) - g(root - step)) / (2 * step)
    if slope != 0 and np.isfinite(slope):
        polished = root - g(root) / slope
        if lo < polished < hi and abs(g(polished)) <= abs(g(root)):
            root = polished
    scale = max(1.0, abs(glo), abs(ghi))
    if abs(g(root)) > tol * scale and b - a > 1e-12 * max(1.0, abs(a)):
        raise NoSignChange((lo, hi))
    return root


# ---------------------------------------------------------------- irrationality


def suspected_rational(ratio: float, max_denominator: int = 64, tol: float = 1e-9) -> Fraction | None:
    """Best continued-fraction convergent p/q (q <= max_denominator) within ``tol`` of ``ratio``."""
    frac = Fraction(ratio).limit_denominator(max_denominator)
    if abs(float(frac) - ratio) <= tol * max(1.0, abs(ratio)):
        return frac
    return None


def require_irrational_ratios(lengths: Sequence[float]) -> None:
    for i in range(len(lengths)):
        for j in range(i + 1, len(lengths)):
            frac = suspected_rational(lengths[i] / lengths[j])
            if frac is not None:
                raise RationalRatioSuspected(
                    f"lengths {lengths[i]} and {lengths[j]} look commensurate (ratio ~ {frac})"
                )


# ---------------------------------------------------------------- secular engine


@dataclass(frozen=True)
class Branch:
    """One arm hanging off the junction.

    ``weight`` multiplies the arm's flux at the junction; ``stiffness`` is the
    coefficient of the edge equation -stiffness ψ'' = λ ψ; ``end`` is the
    condition at the far end.  The arm profile is normalised to 1 at the junction.
    """

    weight: float
    stiffness: float
    length: float
    end: str  # "dirichlet" | "neumann"

    def frequency(self, lam: float) -> tuple[float, bool]:
        """(ω, oscillatory?) with ω = sqrt(|λ / stiffness|)."""
        q = lam / self.stiffness
        return math.sqrt(abs(q)), q > 0

    def flux(self, lam: float) -> float:
        """weight * ψ'(junction) for the unit-junction profile."""
        w, trig = self.frequency(lam)
        z = w * self.length
        if w == 0.0:
            return self.weight / self.length if self.end == "dirichlet" else 0.0
        if trig:
            if self.end == "dirichlet":
                return self.weight * w * math.cos(z) / math.sin(z)
            return -self.weight * w * math.tan(z)
        if self.end == "dirichlet":
            return self.weight * w / math.tanh(z)
        return self.weight * w * math.tanh(z)

    def poles(self, sign: int, omega_max: float) -> list[float]:
        """√|λ| positions in (0, omega_max] where the unit-junction profile blows up."""
        if (sign > 0) != (self.stiffness > 0):
            return []
        scale = math.sqrt(abs(self.stiffness)) / self.length
        offset = 0.0 if self.end == "dirichlet" else 0.5
        out = []
        m = 1
        while True:
            p = (m - offset) * math.pi * scale
            if p > omega_max:
                return out
            out.append(p)
            m += 1

    def profile(self, lam: float, amplitude: float = 1.0) -> ClosedForm:
        """Closed form on an edge whose junction end is at x = length."""
        w, trig = self.frequency(lam)
        if w == 0.0:
            if self.end == "dirichlet":
                return ClosedForm("affine", amplitude / self.length)
            return ClosedForm("affine", 0.0, offset=amplitude)
        if self.end == "dirichlet":
            kind = "sin" if trig else "sinh"
        else:
            kind = "cos" if trig else "cosh"
        return ClosedForm(kind, amplitude, w, 0.0, self.length)


def secular(branches: Sequence[Branch], lam: float) -> float:
    return sum(b.flux(lam) for b in branches)


def _scaled_secular(branches, sign: int) -> Callable[[float], float]:
    # in terms of ω = √|λ|, divided by ω to keep magnitudes tame
    def g(omega: float) -> float:
        return secular(branches, sign * omega * omega) / max(omega, 1e-300)

    return g


def _term_scale(branches, sign: int) -> Callable[[float], float]:
    """Σ |branch flux| / ω: the size below which the secular sum is rounding noise."""

    def scale(omega: float) -> float:
        return sum(abs(b.flux(sign * omega * omega)) for b in branches) / max(omega, 1e-300)

    return scale


# sign changes where the secular sum has cancelled to this fraction of its terms are noise
CANCELLATION_FLOOR = 1e-12


SCAN_POINTS = 64


def secular_roots(
    branches: Sequence[Branch], sign: int, count: int, omega_cap: float | None = None
) -> list[tuple[float, tuple[float, float]]]:
    """First ``count`` roots ω = √|λ| of the junction secular function on one half-line.

    Roots are isolated between consecutive poles with a 64-point sign scan and
    returned with the pole-free interval that contains them.
    """
    g = _scaled_secular(branches, sign)
    scale = _term_scale(branches, sign)
    found: list[tuple[float, tuple[float, float]]] = []
    if count <= 0:
        return found
    oscillatory = any((sign > 0) == (b.stiffness > 0) for b in branches)
    min_scale = min(math.sqrt(abs(b.stiffness)) / b.length for b in branches)
    if omega_cap is None:
        if oscillatory:
            omega_cap = math.inf
        else:
            # hyperbolic arms saturate once ω L/√|stiffness| is large
            omega_cap = 60.0 * max(math.sqrt(abs(b.stiffness)) / b.length for b in branches) + 60.0
    window = 8 * math.pi * min_scale
    # give up after this many pole intervals without a root; some sign patterns
    # push the remaining eigenvalues off the real axis
    patience = 8 * (count + 8) * len(branches)
    barren = 0
    start = 0.0
    while len(found) < count and start < omega_cap and barren <= patience:
        stop = min(start + window, omega_cap)
        poles = sorted({p for b in branches for p in b.poles(sign, stop) if p > start})
        edges = [start] + poles + ([stop] if not poles or poles[-1] < stop else [])
        if stop < omega_cap and poles and poles[-1] < stop:
            edges = edges[:-1]  # keep the tail interval for the next window
        for lo, hi in zip(edges[:-1], edges[1:]):
            roots = _roots_between(g, lo, hi, scale)
            found.extend(roots)
            barren = 0 if roots else barren + 1
            if len(found) >= count:
                break
        new_start = edges[-1]
        if new_start <= start:
            new_start = stop
        start = new_start
    found.sort(key=lambda r: r[0])
    return found[:count]


def _roots_between(g, lo: float, hi: float, scale=None) -> list[tuple[float, tuple[float, float]]]:
    width = hi - lo
    eps = 1e-10 * max(width, 1e-12)
    ts = lo + width * (np.arange(SCAN_POINTS + 1) / SCAN_POINTS)
    ts[0] += max(eps, 1e-9 * width)
    ts[-1] -= max(eps, 1e-9 * width)
    vals = np.array([g(t) for t in ts])
    if scale is not None:
        floor = CANCELLATION_FLOOR * np.array([scale(t) for t in ts])
        noise = np.abs(vals) <= floor
    else:
        noise = np.zeros(ts.size, dtype=bool)
    out = []
    for i in range(SCAN_POINTS):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if noise[i] and noise[i + 1]:
            continue
        if a == 0:
            out.append((float(ts[i]), (lo, hi)))
        elif a * b < 0:
            out.append((_bisect(g, float(ts[i]), float(ts[i + 1]), 1e-6), (lo, hi)))
    return out


# ---------------------------------------------------------------- eigenfunction helpers


def l2_gram(functions: Sequence[PiecewiseFunction], weights: dict[int, float] | None = None) -> np.ndarray:
    """Gram matrix Σ_edges w_e ∫ f_i f_j by composite Gauss quadrature (real functions)."""
    n = len(functions)
    G = np.zeros((n, n))
    if n == 0:
        return G
    for i, eid in enumerate(functions[0].edge_ids):
        pieces = [f.pieces[i] for f in functions]
        nonzero = [j for j, p in enumerate(pieces) if not (isinstance(p, Terms) and p.is_zero())]
        if not nonzero:
            continue
        x, w = edge_quadrature([pieces[j] for j in nonzero], pieces[0].length)
        vals = np.array([pieces[j](x) for j in nonzero])
        block = (vals * w) @ vals.T
        if weights is not None:
            block = block * weights.get(eid, 1.0)
        G[np.ix_(nonzero, nonzero)] += block
    return G


def normalized(fn: PiecewiseFunction) -> PiecewiseFunction:
    norm = math.sqrt(l2_gram([fn])[0, 0])
    return fn.scaled(1.0 / norm)


def network_function(network: Network, terms: dict[int, Sequence[ClosedForm]]) -> PiecewiseFunction:
    return PiecewiseFunction(tuple(Terms(e.id, e.length, tuple(terms.get(e.id, ()))) for e in network.edges))


def orthonormal_combinations(
    vectors: np.ndarray, metric: np.ndarray
) -> np.ndarray:
    """Modified Gram-Schmidt of the rows of ``vectors`` under ``metric``; sign fixed so
    the first nonzero coefficient is positive."""
    basis: list[np.ndarray] = []
    for v in np.asarray(vectors, float):
        u = v.copy()
        for b in basis:
            u = u - (b @ metric @ u) * b
        nrm = math.sqrt(max(u @ metric @ u, 0.0))
        if nrm < 1e-12 * max(1.0, math.sqrt(abs(v @ metric @ v))):
            continue
        basis.append(u / nrm)
    return np.array([_fix_sign(b) for b in basis])


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    return -v if nz.size and v[nz[0]] < 0 else v


def constraint_spanning_set(row: np.ndarray) -> np.ndarray:
    """Consecutive-pair vectors spanning {α : row·α = 0}."""
    m = row.size
    vecs = []
    for i in range(m - 1):
        v = np.zeros(m)
        v[i], v[i + 1] = row[i + 1], -row[i]
        if np.any(v):
            vecs.append(v)
    return np.array(vecs).reshape(-1, m)


def eigenspace_from_poles(
    network: Network,
    profiles: dict[int, ClosedForm],
    flux_row: dict[int, float],
    joint_metric: Callable[[np.ndarray], np.ndarray] | None = None,
) -> list[PiecewiseFunction]:
    """Orthonormal basis of Σ α_e profile_e with Σ flux_row_e α_e = 0.

    ``joint_metric`` optionally maps the plain Gram of the profiles to a second
    metric; the basis then diagonalises both simultaneously.
    """
    ids = [e.id for e in network.edges if e.id in profiles]
    funcs = [network_function(network, {eid: [profiles[eid]]}) for eid in ids]
    W = l2_gram(funcs)
    row = np.array([flux_row[eid] for eid in ids])
    span = constraint_spanning_set(row)
    if joint_metric is None:
        coeffs = orthonormal_combinations(span, W)
    else:
        Q = np.linalg.qr(span.T)[0]
        # W-orthonormal basis of the constraint space
        Wq = Q.T @ W @ Q
        evals, evecs = np.linalg.eigh(Wq)
        C = Q @ evecs / np.sqrt(evals)
        second = C.T @ joint_metric(W) @ C
        _, rot = np.linalg.eigh(0.5 * (second + second.T))
        coeffs = np.array([_fix_sign(v) for v in (C @ rot).T])
    out = []
    for c in coeffs:
        terms = {eid: [profiles[eid].scaled(float(ci))] for eid, ci in zip(ids, c) if ci != 0.0}
        out.append(network_function(network, terms))
    return out
