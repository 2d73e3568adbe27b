"""Inner products, Gram diagnostics, the edge-rescaling transform and biorthogonal families."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import IllConditionedGram, ShapeMismatch, WrongOperator
from .functions import PiecewiseFunction, edge_quadrature, linear_combination
from .graph import STAR_TOPOLOGIES, Network, Topology
from .spectra.common import PSEUDO, PSEUDO_INT, TRANSCENDENTAL, EigenPair, Spectrum, l2_gram

Weight = Mapping[int, float] | None

GRAM_CONDITION_LIMIT = 1e8


def conductivity_weights(network: Network) -> dict[int, float]:
    """Edge weights of the conductivity-weighted (indefinite) form."""
    return {e.id: e.conductivity for e in network.edges}


def _check_pair(f: PiecewiseFunction, g: PiecewiseFunction) -> None:
    if f.edge_ids != g.edge_ids:
        raise ShapeMismatch("functions live on different edges")
    for p, q in zip(f.pieces, g.pieces):
        if abs(p.length - q.length) > 1e-12 * p.length:
            raise ShapeMismatch(f"edge {p.edge_id} lengths differ")


def inner_product(f: PiecewiseFunction, g: PiecewiseFunction, weight: Weight = None):
    """Σ_e w_e ∫ conj(f) g over the edges; plain L² when ``weight`` is None."""
    _check_pair(f, g)
    total = 0.0
    for p, q in zip(f.pieces, g.pieces):
        x, w = edge_quadrature([p, q], p.length)
        value = np.sum(w * np.conj(p(x)) * q(x))
        total = total + (1.0 if weight is None else weight[p.edge_id]) * value
    if np.iscomplexobj(total) and total.imag == 0:
        return float(total.real)
    return total if np.iscomplexobj(total) else float(total)


def gram_matrix(functions: Sequence[PiecewiseFunction], weight: Weight = None) -> np.ndarray:
    if not functions:
        return np.zeros((0, 0))
    for f in functions[1:]:
        _check_pair(functions[0], f)
    return l2_gram(list(functions), None if weight is None else dict(weight))


@dataclass(frozen=True)
class GramReport:
    size: int
    max_offdiag: float
    max_diag_dev: float
    condition_estimate: float

    def render(self) -> str:
        return (
            f"size               {self.size:d}\n"
            f"max_offdiag        {self.max_offdiag:.3e}\n"
            f"max_diag_dev       {self.max_diag_dev:.3e}\n"
            f"condition_estimate {self.condition_estimate:.6g}\n"
        )


def report_from_gram(G: np.ndarray) -> GramReport:
    n = G.shape[0]
    off = G - np.diag(np.diag(G))
    sv = np.linalg.svd(G, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    return GramReport(
        n,
        float(np.max(np.abs(off))) if n > 1 else 0.0,
        float(np.max(np.abs(np.diag(G) - 1.0))),
        max(cond, 1.0),
    )


def gram_report(spectrum: Spectrum, weight: Weight = None, size: int | None = None) -> GramReport:
    functions = spectrum.basis_functions()
    if not functions:
        raise ValueError("spectrum has no eigenfunctions")
    if size is not None:
        functions = functions[:size]
    return report_from_gram(gram_matrix(functions, weight))


# ---------------------------------------------------------------- transform


def _edge_factors(spectrum: Spectrum, pair: EigenPair, k_minus: float) -> dict[int, float]:
    net = spectrum.network
    if net.topology in STAR_TOPOLOGIES:
        if pair.family in (PSEUDO_INT, TRANSCENDENTAL):
            return {e.id: 1.0 / k_minus for e in net.edges if e.conductivity > 0}
        return {}
    if net.topology is Topology.TADPOLE2:
        return {e.id: 1.0 / k_minus for e in net.edges if e.conductivity < 0}
    return {}


def riesz_transform(
    spectrum: Spectrum, k_minus: float | None = None, normalize: bool = True, inverse: bool = False
) -> Spectrum:
    """Rescale pseudo eigenfunctions edge by edge by 1/k⁻ (or k⁻ when ``inverse``).

    Stars: positive edges, on the integer family and on secular-root modes; the
    half-integer family is left unchanged.  Tadpoles: the tail edge, on every
    mode.  With ``normalize`` each transformed function is rescaled to unit norm;
    without it the map is exactly invertible.
    """
    if spectrum.operator != PSEUDO:
        raise WrongOperator("the transform applies to pseudo-operator spectra only")
    if k_minus is None:
        k_minus = spectrum.metadata.get("k_minus")
        if k_minus is None:
            k_minus = min(e.conductivity for e in spectrum.network.edges)
    pairs = []
    for pair in spectrum.all_pairs():
        factors = _edge_factors(spectrum, pair, k_minus)
        if inverse:
            factors = {eid: 1.0 / v for eid, v in factors.items()}
        funcs = []
        for f in pair.functions:
            g = f.scaled_per_edge(factors) if factors else f
            if normalize:
                g = g.scaled(1.0 / math.sqrt(l2_gram([g])[0, 0]))
            funcs.append(g)
        pairs.append(replace(pair, functions=tuple(funcs)))
    pos = tuple(p for p in pairs if p.lam >= 0)
    neg = tuple(p for p in pairs if p.lam < 0)
    pos = tuple(sorted(pos, key=lambda p: (p.lam, p.family)))
    neg = tuple(sorted(neg, key=lambda p: (-p.lam, p.family)))
    return Spectrum(pos, neg, spectrum.operator, spectrum.truncation, spectrum.network, dict(spectrum.metadata))


# ---------------------------------------------------------------- biorthogonal family


@dataclass(frozen=True)
class BiorthogonalFamily:
    """σ^k = Σ_j C[k, j] ψ^j with ⟨ψ^n, σ^k⟩ = δ_nk on the truncated block."""

    truncation: int
    coefficients: np.ndarray
    basis: tuple[PiecewiseFunction, ...]
    gram: np.ndarray
    residual: float

    @property
    def sigma(self) -> tuple[PiecewiseFunction, ...]:
        return tuple(linear_combination(row, self.basis) for row in self.coefficients)


def biorthogonal_family(spectrum: Spectrum, truncation: int) -> BiorthogonalFamily:
    functions = spectrum.basis_functions()
    if truncation < 1 or truncation > len(functions):
        raise ValueError(f"truncation must lie in [1, {len(functions)}], got {truncation}")
    basis = tuple(functions[:truncation])
    G = gram_matrix(basis)
    cond = np.linalg.cond(G)
    if not cond < GRAM_CONDITION_LIMIT:
        raise IllConditionedGram(f"Gram condition number {cond:.3e} exceeds {GRAM_CONDITION_LIMIT:.0e}")
    C = np.linalg.inv(G)
    C = 0.5 * (C + C.T)
    # ⟨ψ^n, σ^k⟩ = Σ_j C[k, j] G[n, j]
    residual = float(np.max(np.abs(G @ C.T - np.eye(truncation))))
    return BiorthogonalFamily(truncation, C, basis, G, residual)
