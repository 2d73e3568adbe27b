import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signet.basis import (
    biorthogonal_family,
    conductivity_weights,
    gram_matrix,
    gram_report,
    inner_product,
    report_from_gram,
    riesz_transform,
)
from signet.errors import ShapeMismatch, WrongOperator
from signet.functions import ClosedForm, PiecewiseFunction, Terms, from_callable
from signet.graph import Kind, build_star
from signet.spectra.common import PSEUDO_HALF, PSEUDO_INT, l2_gram
from signet.spectra.star import (
    spectrum_star_equilateral_pseudo,
    spectrum_star_equilateral_standard,
    spectrum_star_irrational_pseudo,
)

SQRT2 = math.sqrt(2.0)


def _single(kind, omega):
    return PiecewiseFunction((Terms(1, 1.0, (ClosedForm(kind, 1.0, omega),)),))


def test_inner_product_examples():
    s1 = _single("sin", math.pi)
    s2 = _single("sin", 2 * math.pi)
    assert abs(inner_product(s1, s2)) < 1e-15
    assert inner_product(s1, s1) == pytest.approx(0.5, abs=1e-15)
    assert inner_product(s1, s1, {1: -1.0}) == pytest.approx(-0.5, abs=1e-15)


def test_inner_product_rejects_mismatched_networks():
    s1 = _single("sin", math.pi)
    other = PiecewiseFunction((Terms(1, 2.0, (ClosedForm("sin", 1.0, math.pi),)),))
    with pytest.raises(ShapeMismatch):
        inner_product(s1, other)


_NET = build_star([1.0, 1.7, 0.6], [1.0, -0.4, 2.5], [Kind.DIRICHLET] * 3)


@st.composite
def network_functions(draw):
    coeffs = draw(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
    freqs = draw(st.lists(st.floats(0.1, 12), min_size=3, max_size=3))
    pieces = []
    for e, c, w in zip(_NET.edges, coeffs, freqs):
        pieces.append(Terms(e.id, e.length, (ClosedForm("sin", c, w), ClosedForm("cosh", 0.5 * c, w / 3))))
    return PiecewiseFunction(tuple(pieces))


@given(network_functions(), network_functions())
def test_inner_product_symmetric_for_both_weights(f, g):
    for weight in (None, conductivity_weights(_NET)):
        a, b = inner_product(f, g, weight), inner_product(g, f, weight)
        assert abs(a - b) <= 1e-13 * max(1.0, abs(a))


def test_kweighted_form_is_indefinite():
    w = conductivity_weights(_NET)
    bump = lambda eid: from_callable(_NET, lambda e, x: np.where(e == eid, np.sin(np.pi * x / _NET.edge(e).length), 0.0))  # noqa: E731
    positive = next(eid for eid, k in w.items() if k > 0)
    negative = next(eid for eid, k in w.items() if k < 0)
    assert inner_product(bump(positive), bump(positive), w) > 0
    assert inner_product(bump(negative), bump(negative), w) < 0


def test_gram_report_examples():
    sp = spectrum_star_equilateral_standard(2, 3, -0.5, 5)
    rep = gram_report(sp)
    assert rep.max_offdiag < 1e-9 and rep.max_diag_dev < 1e-9
    assert rep.condition_estimate == pytest.approx(1.0, abs=1e-8)
    single = report_from_gram(np.eye(1))
    assert (single.size, single.max_offdiag, single.max_diag_dev, single.condition_estimate) == (1, 0.0, 0.0, 1.0)


def test_pseudo_gram_is_bounded_but_not_orthogonal():
    rep = gram_report(spectrum_star_equilateral_pseudo(1, 3, -3.0, 20))
    assert rep.max_offdiag > 1e-2
    assert 1.0 <= rep.condition_estimate < 1e2


def test_gram_report_render_fixed_fields():
    text = report_from_gram(np.eye(3)).render()
    assert [line.split()[0] for line in text.splitlines()] == [
        "size", "max_offdiag", "max_diag_dev", "condition_estimate"
    ]


# ---------------------------------------------------------------- transform


def test_transform_rejects_standard_spectra():
    with pytest.raises(WrongOperator):
        riesz_transform(spectrum_star_equilateral_standard(2, 3, -0.5, 3))


def test_transform_orthogonalises_even_level_pair():
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 2)
    even = next(p for p in riesz_transform(sp).pairs if p.family == PSEUDO_INT)
    G = l2_gram(list(even.functions))
    assert abs(G[0, 1]) < 1e-12


def test_transform_leaves_half_integer_family_unchanged():
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 6)
    out = riesz_transform(sp)
    x = np.linspace(0, 1, 9)
    for before, after in zip(sp.all_pairs(), out.all_pairs()):
        if before.family != PSEUDO_HALF:
            continue
        for f, g in zip(before.functions, after.functions):
            for eid in (1, 2, 3):
                assert np.allclose(f(eid, x), g(eid, x), atol=1e-14)


def test_transformed_equilateral_gram_is_identity():
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 30)
    assert gram_report(riesz_transform(sp)).max_offdiag < 1e-9


def test_transform_round_trip():
    sp = spectrum_star_irrational_pseudo([1.0, SQRT2], 1, -3.0, 6)
    back = riesz_transform(riesz_transform(sp, normalize=False), normalize=False, inverse=True)
    for before, after in zip(sp.basis_functions(), back.basis_functions()):
        for e in sp.network.edges:
            x = np.linspace(0, e.length, 17)
            assert np.max(np.abs(before(e.id, x) - after(e.id, x))) < 1e-12


@pytest.mark.xfail(strict=True, reason="the edge rescaling does not orthogonalise the irrational pseudo family")
def test_transformed_irrational_family_orthogonal():
    sp = spectrum_star_irrational_pseudo([1.0, SQRT2], 1, -3.0, 6)
    assert gram_report(riesz_transform(sp)).max_offdiag < 1e-9


def test_transformed_irrational_family_not_orthogonal():
    sp = spectrum_star_irrational_pseudo([1.0, SQRT2], 1, -3.0, 6)
    assert gram_report(riesz_transform(sp)).max_offdiag > 0.1


# ---------------------------------------------------------------- biorthogonal family


def test_orthonormal_spectrum_gives_sigma_equal_psi():
    sp = spectrum_star_equilateral_standard(2, 3, -0.5, 4)
    fam = biorthogonal_family(sp, 8)
    assert np.allclose(fam.coefficients, np.eye(8), atol=1e-9)
    x = np.linspace(0, 1, 11)
    for s, psi in zip(fam.sigma, fam.basis):
        assert np.allclose(s(1, x), psi(1, x), atol=1e-9)


def test_pseudo_biorthogonal_residual_at_thirty():
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 30)
    fam = biorthogonal_family(sp, 30)
    assert fam.residual < 1e-8
    # independent route: quadrature of ⟨ψ^n, σ^k⟩ with the assembled σ functions
    sigma = fam.sigma
    for n in (0, 3, 17):
        for k in (0, 3, 17):
            assert abs(inner_product(fam.basis[n], sigma[k]) - (n == k)) < 1e-8


def test_truncation_out_of_range():
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 4)
    with pytest.raises(ValueError):
        biorthogonal_family(sp, len(sp.basis_functions()) + 1)
    with pytest.raises(ValueError):
        biorthogonal_family(sp, 0)


def _sigma_leading(sp, truncation, keep=10):
    return biorthogonal_family(sp, truncation).coefficients[:keep, :keep]


@pytest.mark.xfail(strict=True, reason="σ coefficients drift as O(1/truncation), far above 1e-6 at 30 → 60")
def test_sigma_truncation_stability_to_1e6():
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 60)
    assert np.max(np.abs(_sigma_leading(sp, 30) - _sigma_leading(sp, 60))) < 1e-6


def test_sigma_truncation_drift_halves_with_bounded_condition():
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 160)
    sizes = (30, 60, 120, 240)
    leading = [_sigma_leading(sp, n) for n in sizes]
    drift = [np.max(np.abs(a - b)) for a, b in zip(leading, leading[1:])]
    ratios = [a / b for a, b in zip(drift, drift[1:])]
    assert all(1.7 < r < 2.3 for r in ratios)
    conds = [np.linalg.cond(gram_matrix(sp.basis_functions()[:n])) for n in sizes]
    assert max(conds) < 10 and conds[-1] < 1.05 * conds[-2]


def test_pseudo_operator_not_symmetric():
    # ⟨Ãψ_n, ψ_m⟩ = λ_n G_nm while ⟨ψ_n, Ãψ_m⟩ = λ_m G_nm; distinct λ with G_nm ≠ 0 is a witness
    sp = spectrum_star_irrational_pseudo([1.0, SQRT2], 1, -3.0, 4)
    pairs = sp.all_pairs()
    G = l2_gram([p.functions[0] for p in pairs])
    lam = np.array([p.lam for p in pairs])
    gap = np.abs(np.subtract.outer(lam, lam) * G)
    n, m = np.unravel_index(np.argmax(gap), gap.shape)
    assert gap[n, m] > 1.0
    # direct check of the action: Ãψ = -ψ'' on every edge for the pseudo operator
    psi_n, psi_m = pairs[n].functions[0], pairs[m].functions[0]
    lhs = inner_product(psi_n.scaled(lam[n]), psi_m)
    rhs = inner_product(psi_n, psi_m.scaled(lam[m]))
    assert abs(lhs - rhs) > 1.0
