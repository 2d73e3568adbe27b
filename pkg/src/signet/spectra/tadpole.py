"""Eigenpairs of the two-edge tadpole (loop of length L1 with k = 1, tail of length L2 with k⁻).

Eigenfunctions are antisymmetric about the loop midpoint (zero on the tail) or
symmetric.  A symmetric mode restricted to half the loop is a Neumann arm of
length L1/2 whose junction flux counts twice, so the symmetric family reuses
the star secular engine with that arm.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..errors import ValidationError
from ..functions import ClosedForm
from ..graph import Network, build_tadpole2
from .common import (
    ANTISYMMETRIC,
    COINCIDENCE,
    PSEUDO,
    STANDARD,
    SYMMETRIC,
    Branch,
    EigenPair,
    Spectrum,
    make_spectrum,
    network_function,
    normalized,
    secular_roots,
)

SYMMETRY_CLASSES = (ANTISYMMETRIC, SYMMETRIC)


def _check(L1: float, L2: float, k_minus: float, n_max: int) -> None:
    if not (L1 > 0 and L2 > 0):
        raise ValidationError("lengths must be positive")
    if not k_minus < 0:
        raise ValidationError("k_minus must be negative")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")


def _arms(L1: float, L2: float, k_minus: float, operator: str) -> tuple[Branch, Branch]:
    head = Branch(2.0, 1.0, 0.5 * L1, "neumann")
    tail = Branch(k_minus, k_minus if operator == STANDARD else 1.0, L2, "dirichlet")
    return head, tail


def _symmetric_mode(network: Network, head: Branch, tail: Branch, lam: float):
    omega, trig = head.frequency(lam)
    L1 = network.edges[0].length
    head_form = ClosedForm("cos" if trig else "cosh", 1.0, omega, 0.5 * L1, L1)
    fn = network_function(network, {1: [head_form], 2: [tail.profile(lam)]})
    return normalized(fn)


def _antisymmetric(network: Network, n_max: int) -> list[EigenPair]:
    L1 = network.edges[0].length
    out = []
    for j in range(1, n_max + 1):
        w = 2 * j * math.pi / L1
        fn = normalized(network_function(network, {1: [ClosedForm("sin", 1.0, w)]}))
        out.append(EigenPair(w * w, 1, ANTISYMMETRIC, (fn,), None, j))
    return out


def _symmetric(network: Network, head: Branch, tail: Branch, n_max: int) -> list[EigenPair]:
    out = []
    for sign in (1, -1):
        for n, (omega, bracket) in enumerate(secular_roots((head, tail), sign, n_max), start=1):
            lam = sign * omega * omega
            fn = _symmetric_mode(network, head, tail, lam)
            out.append(EigenPair(lam, 1, SYMMETRIC, (fn,), bracket, n))
    return out


def spectrum_tadpole_standard(L1: float, L2: float, k_minus: float, n_max: int) -> Spectrum:
    """Antisymmetric ν_j = 4j²π²/L1² plus symmetric roots of
    2 tan(√λ L1/2) + s coth(√λ L2/s) = 0 (λ > 0) and 2 tanh(a L1/2) = s cot(a L2/s) (λ = -a²)."""
    _check(L1, L2, k_minus, n_max)
    network = build_tadpole2(L1, L2, 1.0, k_minus)
    head, tail = _arms(L1, L2, k_minus, STANDARD)
    pairs = _antisymmetric(network, n_max) + _symmetric(network, head, tail, n_max)
    truncated = ((ANTISYMMETRIC, 1), (SYMMETRIC, 1), (SYMMETRIC, -1))
    return make_spectrum(pairs, STANDARD, n_max, network, truncated=truncated, k_minus=k_minus)


def coincidence_levels(ratio: Fraction, n_max: int) -> list[int]:
    """Odd integers r = 2n₁-1 with (2n₁-1)/L1 = n₂/L2 for L1/L2 = p/q, i.e. r = p·m with m odd.

    Empty when p is even.  The returned r give λ = r²π²/L1².
    """
    p = ratio.numerator
    if p % 2 == 0:
        return []
    return [p * m for m in range(1, 2 * n_max, 2)]


def spectrum_tadpole_pseudo(
    L1: float, L2: float, k_minus: float, n_max: int, ratio: Fraction | None = None
) -> Spectrum:
    """Antisymmetric family, symmetric roots of 2 tan(√λ L1/2) - k⁻ cot(√λ L2) = 0, and,
    only for a declared rational ratio L1/L2 = p/q, the coincidence levels where
    cos(√λ L1/2) = sin(√λ L2) = 0.  The negative half-line is scanned too."""
    _check(L1, L2, k_minus, n_max)
    network = build_tadpole2(L1, L2, 1.0, k_minus)
    head, tail = _arms(L1, L2, k_minus, PSEUDO)
    pairs = _antisymmetric(network, n_max) + _symmetric(network, head, tail, n_max)
    truncated = [(ANTISYMMETRIC, 1), (SYMMETRIC, 1)]
    if ratio is not None:
        ratio = Fraction(ratio)
        if abs(float(ratio) - L1 / L2) > 1e-12 * (L1 / L2):
            raise ValidationError(f"declared ratio {ratio} does not match L1/L2 = {L1 / L2}")
        for i, r in enumerate(coincidence_levels(ratio, n_max), start=1):
            w = r * math.pi / L1
            amp = 2 * math.sin(w * L1 / 2) / (k_minus * math.cos(w * L2))
            fn = network_function(
                network,
                {1: [ClosedForm("cos", 1.0, w, 0.5 * L1)], 2: [ClosedForm("sin", amp, w)]},
            )
            pairs.append(EigenPair(w * w, 1, COINCIDENCE, (normalized(fn),), None, i))
    return make_spectrum(pairs, PSEUDO, n_max, network, truncated=tuple(truncated), k_minus=k_minus)
