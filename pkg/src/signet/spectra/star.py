"""Eigenpairs of star networks for the standard and the pseudo operator.

Standard: -k ψ'' = λ ψ on every edge.  Pseudo: -ψ'' = λ ψ on every edge.  Both
share the Kirchhoff junction (continuity, Σ k ψ'(L) = 0) and the external
conditions.  Eigenvalues split into explicit trigonometric families, whose
eigenfunctions vanish at the junction, and roots of the junction secular
function.
"""

from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from ..errors import BadPartition, ResonantConductivity, ValidationError
from ..functions import ClosedForm
from ..graph import Kind, Network, PartitionSummary, build_star
from ..wellposed import resonance_verdict
from .common import (
    DISP_A,
    DISP_B,
    NU,
    PSEUDO,
    PSEUDO_HALF,
    PSEUDO_INT,
    STANDARD,
    THETA,
    TRANSCENDENTAL,
    ZERO_MODE,
    Branch,
    EigenPair,
    Spectrum,
    eigenspace_from_poles,
    make_spectrum,
    mixed_family,
    network_function,
    normalized,
    require_irrational_ratios,
    secular_roots,
    solve_bracketed_roots,
)

_SCALE_THRESHOLD = 30.0
_NEAR_ZERO = 1e-9


def dispersion_equilateral(mu: float, D: int, N: int, s: float) -> float:
    """cos μ sinh(sμ) - x sin μ cosh(sμ) with x = D/(s(N-D)).

    For |sμ| > 30 the value is multiplied by 2e^{-s|μ|}; only its sign and zeros matter.
    """
    x = D / (s * (N - D))
    z = s * mu
    if abs(z) <= _SCALE_THRESHOLD:
        return math.cos(mu) * math.sinh(z) - x * math.sin(mu) * math.cosh(z)
    e = math.exp(-2.0 * abs(z))
    return math.cos(mu) * math.copysign(1.0 - e, z) - x * math.sin(mu) * (1.0 + e)


def _dispersion_b(b: float, D: int, N: int, s: float) -> float:
    # D cos b sinh(b/s) - s(N-D) sin b cosh(b/s), scaled like dispersion_equilateral
    z = b / s
    if abs(z) <= _SCALE_THRESHOLD:
        return D * math.cos(b) * math.sinh(z) - s * (N - D) * math.sin(b) * math.cosh(z)
    e = math.exp(-2.0 * abs(z))
    return D * math.cos(b) * math.copysign(1.0 - e, z) - s * (N - D) * math.sin(b) * (1.0 + e)


def det2_positivity(a: float, b: float, s: float) -> float:
    """¼(sinh(2sa) sinh(2b) - sin(2a) sin(2sb))."""
    with np.errstate(over="ignore"):
        return 0.25 * (np.sinh(2 * s * a) * np.sinh(2 * b) - np.sin(2 * a) * np.sin(2 * s * b))


# ---------------------------------------------------------------- helpers


def _check_partition(D: int, N: int) -> None:
    if not (1 <= D < N):
        raise BadPartition(f"need 1 <= D < N, got D={D}, N={N}")


def _check_k_minus(k_minus: float) -> None:
    if not k_minus < 0:
        raise ValidationError("k_minus must be negative")


def two_phase_star(D: int, N: int, k_minus: float, lengths: Sequence[float] | float = 1.0) -> Network:
    _check_partition(D, N)
    _check_k_minus(k_minus)
    if np.isscalar(lengths):
        lengths = [float(lengths)] * N
    if len(lengths) != N:
        raise ValidationError("need one length per edge")
    return build_star(list(lengths), [1.0] * D + [k_minus] * (N - D), [Kind.DIRICHLET] * N)


def mixed_star(counts: PartitionSummary, k_minus: float, lengths: Sequence[float] | float = 1.0) -> Network:
    """Edges ordered Dirichlet⁺, Neumann⁺, Dirichlet⁻, Neumann⁻."""
    _check_k_minus(k_minus)
    N = counts.N
    if np.isscalar(lengths):
        lengths = [float(lengths)] * N
    if len(lengths) != N:
        raise ValidationError("need one length per edge")
    ks = [1.0] * counts.D + [k_minus] * (N - counts.D)
    kinds = (
        [Kind.DIRICHLET] * counts.Nd_plus
        + [Kind.NEUMANN] * counts.Nn_plus
        + [Kind.DIRICHLET] * counts.Nd_minus
        + [Kind.NEUMANN] * counts.Nn_minus
    )
    return build_star(list(lengths), ks, kinds)


def branches_of(network: Network, operator: str) -> list[Branch]:
    out = []
    for e in network.edges:
        end = "neumann" if network.external_kind(e) is Kind.NEUMANN else "dirichlet"
        stiffness = e.conductivity if operator == STANDARD else 1.0
        out.append(Branch(e.conductivity, stiffness, e.length, end))
    return out


def junction_mode(network: Network, branches: Sequence[Branch], lam: float):
    """Normalised eigenfunction with unit junction value."""
    terms = {e.id: [b.profile(lam)] for e, b in zip(network.edges, branches)}
    return normalized(network_function(network, terms))


def _require_well_posed(network: Network, allow_resonant: bool) -> bool:
    verdict = resonance_verdict(network)
    if not verdict.well_posed and not allow_resonant:
        raise ResonantConductivity(
            f"conductivities are resonant ({verdict.criterion}, margin {verdict.margin:.3e})"
        )
    return not verdict.well_posed


def _zero_mode(network: Network, branches: Sequence[Branch]) -> EigenPair:
    return EigenPair(0.0, 1, ZERO_MODE, (junction_mode(network, branches, 0.0),))


def _pole_family(
    network: Network,
    edges,
    lam: float,
    omega: float,
    kind: str,
    family: str,
    index: int,
    joint_metric=None,
):
    """Eigenspace of functions supported on ``edges`` vanishing at the junction."""
    if len(edges) < 2:
        return None
    profiles = {e.id: ClosedForm(kind, 1.0, omega) for e in edges}
    row = {e.id: e.conductivity * float(profiles[e.id].derivative(e.length)) for e in edges}
    funcs = eigenspace_from_poles(network, profiles, row, joint_metric)
    return EigenPair(lam, len(funcs), family, tuple(funcs), None, index)


def _transcendental(network, branches, n_max, sides=(1, -1), family=TRANSCENDENTAL, caps=None):
    pairs = []
    for sign in sides:
        cap = None if caps is None else caps.get(sign)
        for n, (omega, bracket) in enumerate(secular_roots(branches, sign, n_max, cap), start=1):
            lam = sign * omega * omega
            fn = junction_mode(network, branches, lam)
            pairs.append(EigenPair(lam, 1, family, (fn,), bracket, n))
    return pairs


def _truncated_sides(network: Network, branches, operator: str) -> list[tuple[str, int]]:
    out = []
    for sign in (1, -1):
        if any((sign > 0) == (b.stiffness > 0) for b in branches):
            out.append((TRANSCENDENTAL, sign))
    return out


def _warn_coincidences(explicit: Sequence[EigenPair], secular: Sequence[EigenPair], rtol: float = 1e-8) -> None:
    """Warn when a secular root lands on an explicit-family level; multiplicities there are unreliable."""
    levels = [p.lam for p in explicit]
    for p in secular:
        for lam in levels:
            if abs(p.lam - lam) <= rtol * max(abs(lam), 1.0):
                warnings.warn(
                    f"secular root {p.lam:.12g} coincides with an explicit level {lam:.12g}", RuntimeWarning
                )


# ---------------------------------------------------------------- standard operator


def spectrum_star_equilateral_standard(
    D: int, N: int, k_minus: float, n_max: int, allow_resonant: bool = False, length: float = 1.0
) -> Spectrum:
    """Four families on the unit-length two-phase Dirichlet star (k⁺ = 1).

    ν_n = n²π² (multiplicity D-1), θ_n = k⁻n²π² (multiplicity N-D-1), b_n² with
    tan b = D/(s(N-D)) tanh(b/s) and k⁻a_n² with tan a = s(N-D)/D tanh(sa).
    Each transcendental family may also own a root below π, reported with n = 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    network = two_phase_star(D, N, k_minus, length)
    resonant = _require_well_posed(network, allow_resonant)
    branches = branches_of(network, STANDARD)
    s = math.sqrt(-k_minus)
    L = float(length)
    pos = [e for e in network.edges if e.conductivity > 0]
    neg = [e for e in network.edges if e.conductivity < 0]
    pairs: list[EigenPair] = []
    truncated = []
    if resonant:
        pairs.append(_zero_mode(network, branches))
    if D >= 2:
        truncated.append((NU, 1))
        for n in range(1, n_max + 1):
            w = n * math.pi / L
            pairs.append(_pole_family(network, pos, w * w, w, "sin", NU, n))
    if N - D >= 2:
        truncated.append((THETA, -1))
        for n in range(1, n_max + 1):
            w = n * math.pi / L
            pairs.append(_pole_family(network, neg, k_minus * w * w, w, "sin", THETA, n))
    truncated += [(DISP_B, 1), (DISP_A, -1)]
    ga = lambda mu: dispersion_equilateral(mu, D, N, s)  # noqa: E731
    gb = lambda b: _dispersion_b(b, D, N, s)  # noqa: E731
    for family, g, to_lam in (
        (DISP_A, ga, lambda r: k_minus * (r / L) ** 2),
        (DISP_B, gb, lambda r: (r / L) ** 2),
    ):
        brackets = [(n * math.pi, (n + 1) * math.pi) for n in range(1, n_max + 1)]
        indices = list(range(1, n_max + 1))
        if g(_NEAR_ZERO) * g(math.pi) < 0:
            brackets.insert(0, (0.0, math.pi))
            indices.insert(0, 0)
        solve = [(max(lo, _NEAR_ZERO), hi) for lo, hi in brackets]
        for n, bracket, root in zip(indices, brackets, solve_bracketed_roots(g, solve)):
            lam = to_lam(root)
            fn = junction_mode(network, branches, lam)
            pairs.append(EigenPair(lam, 1, family, (fn,), bracket, n))
    return make_spectrum(pairs, STANDARD, n_max, network, truncated=tuple(truncated), k_minus=k_minus)


def spectrum_star_irrational_standard(
    lengths: Sequence[float], D: int, k_minus: float, n_max: int
) -> Spectrum:
    """Simple eigenvalues from Σ₊ k ω cot(ωL) + Σ₋ k ω' coth(ω'L) = 0 and its mirror image."""
    lengths = [float(L) for L in lengths]
    require_irrational_ratios(lengths)
    network = two_phase_star(D, len(lengths), k_minus, lengths)
    _require_well_posed(network, False)
    branches = branches_of(network, STANDARD)
    pairs = _transcendental(network, branches, n_max)
    truncated = _truncated_sides(network, branches, STANDARD)
    return make_spectrum(pairs, STANDARD, n_max, network, truncated=tuple(truncated), k_minus=k_minus)


def spectrum_star_mixed_standard(
    counts: PartitionSummary,
    k_minus: float,
    lengths: Sequence[float] | float,
    n_max: int,
    allow_resonant: bool = False,
) -> Spectrum:
    """Explicit families on each (sign, boundary) class plus the secular roots."""
    network = mixed_star(counts, k_minus, lengths)
    ls = network.lengths
    equilateral = len(set(ls)) == 1
    if not equilateral:
        require_irrational_ratios(list(ls))
    resonant = _require_well_posed(network, allow_resonant)
    branches = branches_of(network, STANDARD)
    pairs: list[EigenPair] = []
    truncated = _truncated_sides(network, branches, STANDARD)
    if resonant:
        pairs.append(_zero_mode(network, branches))
    if equilateral:
        L = ls[0]
        classes = _classes(network)
        for i, (sign, kind) in enumerate(((1, "d"), (1, "n"), (-1, "d"), (-1, "n")), start=1):
            edges = classes[(sign, kind)]
            if len(edges) < 2:
                continue
            truncated.append((mixed_family(i), sign))
            for n in range(1, n_max + 1):
                w = (n if kind == "d" else n - 0.5) * math.pi / L
                lam = w * w * (1.0 if sign > 0 else k_minus)
                profile = "sin" if kind == "d" else "cos"
                pairs.append(_pole_family(network, edges, lam, w, profile, mixed_family(i), n))
    secular = _transcendental(network, branches, n_max)
    _warn_coincidences(pairs, secular)
    pairs += secular
    return make_spectrum(pairs, STANDARD, n_max, network, truncated=tuple(truncated), k_minus=k_minus)


def _classes(network: Network) -> dict[tuple[int, str], list]:
    out = {(1, "d"): [], (1, "n"): [], (-1, "d"): [], (-1, "n"): []}
    for e in network.edges:
        kind = "n" if network.external_kind(e) is Kind.NEUMANN else "d"
        out[(1 if e.conductivity > 0 else -1, kind)].append(e)
    return out


# ---------------------------------------------------------------- pseudo operator


def _t_metric(network: Network, edges, k_minus: float):
    """Metric of the transform dividing positive edges by k⁻, on coefficient space."""
    scale = np.array([1.0 / k_minus if e.conductivity > 0 else 1.0 for e in edges])

    def metric(W: np.ndarray) -> np.ndarray:
        return W * np.outer(scale, scale)

    return metric


def spectrum_star_equilateral_pseudo(
    D: int, N: int, k_minus: float, n_max: int, length: float = 1.0
) -> Spectrum:
    """λ_n = n²π²/4: odd n simple (same sine on every edge), even n of multiplicity N-1.

    The even-level eigenspace basis is orthonormal and stays orthogonal after
    dividing the positive edges by k⁻.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    network = two_phase_star(D, N, k_minus, length)
    _require_well_posed(network, False)
    branches = branches_of(network, PSEUDO)
    L = float(length)
    pairs = []
    for n in range(1, n_max + 1):
        w = n * math.pi / (2 * L)
        lam = w * w
        if n % 2:
            fn = junction_mode(network, branches, lam)
            pairs.append(EigenPair(lam, 1, PSEUDO_HALF, (fn,), None, n))
        else:
            metric = _t_metric(network, network.edges, k_minus)
            pairs.append(_pole_family(network, list(network.edges), lam, w, "sin", PSEUDO_INT, n, metric))
    truncated = ((PSEUDO_HALF, 1), (PSEUDO_INT, 1))
    return make_spectrum(pairs, PSEUDO, n_max, network, truncated=truncated, k_minus=k_minus)


def spectrum_star_irrational_pseudo(
    lengths: Sequence[float], D: int, k_minus: float, n_max: int
) -> Spectrum:
    """Simple roots of Σ k ω cot(ωL) = 0; the negative half-line is scanned as well."""
    lengths = [float(L) for L in lengths]
    require_irrational_ratios(lengths)
    network = two_phase_star(D, len(lengths), k_minus, lengths)
    _require_well_posed(network, False)
    branches = branches_of(network, PSEUDO)
    pairs = _transcendental(network, branches, n_max)
    return make_spectrum(
        pairs, PSEUDO, n_max, network, truncated=((TRANSCENDENTAL, 1),), k_minus=k_minus
    )


def spectrum_star_mixed_pseudo(
    counts: PartitionSummary,
    k_minus: float,
    lengths: Sequence[float] | float,
    n_max: int,
) -> Spectrum:
    """Equilateral: n²π² on the Dirichlet edges and (2n-1)²π²/4 on the Neumann edges,
    plus the secular roots; otherwise secular roots only."""
    network = mixed_star(counts, k_minus, lengths)
    ls = network.lengths
    equilateral = len(set(ls)) == 1
    if not equilateral:
        require_irrational_ratios(list(ls))
    _require_well_posed(network, False)
    branches = branches_of(network, PSEUDO)
    pairs: list[EigenPair] = []
    truncated = [(TRANSCENDENTAL, 1)]
    if equilateral:
        L = ls[0]
        classes = _classes(network)
        dirichlet = classes[(1, "d")] + classes[(-1, "d")]
        neumann = classes[(1, "n")] + classes[(-1, "n")]
        for edges, family, offset, profile in (
            (dirichlet, PSEUDO_INT, 0.0, "sin"),
            (neumann, PSEUDO_HALF, 0.5, "cos"),
        ):
            if len(edges) < 2:
                continue
            truncated.append((family, 1))
            for n in range(1, n_max + 1):
                w = (n - offset) * math.pi / L
                pairs.append(_pole_family(network, edges, w * w, w, profile, family, n))
    secular = _transcendental(network, branches, n_max)
    _warn_coincidences([p for p in pairs if p is not None], secular)
    pairs += secular
    return make_spectrum(pairs, PSEUDO, n_max, network, truncated=tuple(truncated), k_minus=k_minus)
