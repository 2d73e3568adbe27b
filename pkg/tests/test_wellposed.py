import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from signet.errors import BadPartition, DegeneratePartition, UnsupportedTopology
from signet.graph import Edge, Kind, Network, Topology, VertexCondition, build_star, build_tadpole2, build_tadpole3
from signet.spectra.star import two_phase_star
from signet.wellposed import (
    EdgeBound,
    assemble_transmission,
    bounds_from_network,
    coercivity_certificate,
    resonance_verdict,
    star_dirichlet_forbidden_ratio,
    star_dirichlet_forbidden_ratio_lengths,
)

D, N_ = Kind.DIRICHLET, Kind.NEUMANN


@pytest.mark.parametrize("D_, N, expected", [(2, 3, 2.0), (1, 2, 1.0), (3, 6, 1.0)])
def test_forbidden_ratio(D_, N, expected):
    assert star_dirichlet_forbidden_ratio(D_, N) == expected


@pytest.mark.parametrize("D_, N", [(0, 3), (3, 3), (4, 3)])
def test_forbidden_ratio_bad_partition(D_, N):
    with pytest.raises(BadPartition):
        star_dirichlet_forbidden_ratio(D_, N)


def test_forbidden_ratio_with_lengths():
    assert abs(star_dirichlet_forbidden_ratio_lengths(2, 5, 1, 2) - 4 / 3) < 1e-15
    assert star_dirichlet_forbidden_ratio_lengths(3, 7, 1, 1) == star_dirichlet_forbidden_ratio(3, 7)
    assert star_dirichlet_forbidden_ratio_lengths(1, 2, 2, 1) == 0.5


def test_certificate_case_one_constant_equilateral():
    net = two_phase_star(2, 3, -0.1)
    cert = coercivity_certificate(bounds_from_network(net))
    assert cert.case_used == 1 and cert.holds
    assert abs(cert.lhs - 0.2) < 1e-15 and cert.rhs == 4.0


def test_certificate_case_two():
    net = two_phase_star(1, 2, -10.0)
    cert = coercivity_certificate(bounds_from_network(net))
    assert cert.case_used == 2 and cert.holds
    assert abs(cert.lhs - 0.1) < 1e-15 and cert.rhs == 1.0


def test_certificate_at_threshold_reports_tie_as_not_holding():
    # constant coefficients at |k-| = D/(N-D): case 1 gives lhs = rhs exactly
    net = two_phase_star(2, 3, -2.0)
    cert = coercivity_certificate(bounds_from_network(net))
    assert not cert.holds
    assert abs(cert.lhs - cert.rhs) < 1e-12


def test_certificate_needs_both_signs():
    with pytest.raises(DegeneratePartition):
        coercivity_certificate([EdgeBound(1, 1, 1, 1), EdgeBound(1, 2, 1, 1)])


def test_transmission_star_flux_row():
    net = two_phase_star(2, 3, -0.7)
    sys_ = assemble_transmission(net)
    assert sys_.matrix.shape == (3, 3)
    assert np.allclose(sys_.matrix[-1], [1.0, 1.0, -0.7])
    assert np.allclose(sys_.matrix[0], [1, -1, 0]) and np.allclose(sys_.matrix[1], [0, 1, -1])
    assert len(set(sys_.unknown_labels)) == 3


def test_transmission_continuity_rows_sum_to_zero():
    net = build_star([1, 2, 3, 4], [1, -2, 3, -4], [D, N_, D, N_])
    M = assemble_transmission(net).matrix
    assert np.allclose(M[:-1].sum(axis=1), 0.0)


@pytest.mark.parametrize("k_plus, k_minus", [(1.0, -1.0), (2.0, -0.5), (0.3, -5.0)])
def test_tadpole3_equilateral_determinant(k_plus, k_minus):
    net = build_tadpole3([1, 1, 1], [k_minus, k_plus, k_plus])
    det = np.linalg.det(assemble_transmission(net).matrix)
    assert abs(det - (-k_plus * (k_plus + k_minus))) < 1e-12


@given(
    st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.1, 5),
    st.floats(-5, 5).filter(lambda k: abs(k) > 0.05), st.floats(-5, 5).filter(lambda k: abs(k) > 0.05),
    st.floats(-5, 5).filter(lambda k: abs(k) > 0.05),
)
def test_tadpole3_determinant_closed_form(L1, L2, L3, k1, k2, k3):
    det = np.linalg.det(assemble_transmission(build_tadpole3([L1, L2, L3], [k1, k2, k3])).matrix)
    expected = -(k3 / L3) * (k1 / L1 + k2 / L2)
    assert abs(det - expected) <= 1e-9 * max(1.0, abs(k3 / L3) * (abs(k1 / L1) + abs(k2 / L2)))


@pytest.mark.parametrize("k1, k2", [(1.0, 5.0), (-3.0, 2.0), (1.0, -1.0), (-0.1, -7.0)])
def test_dirichlet_neumann_interval_never_singular(k1, k2):
    net = build_star([1.0, 1.3], [k1, k2], [D, N_])
    assert resonance_verdict(net).well_posed


def test_verdict_at_forbidden_ratio():
    v = resonance_verdict(two_phase_star(2, 3, -2.0))
    assert not v.well_posed and v.margin < 1e-12
    assert v.criterion == "forbidden-ratio" and v.critical_value == 2.0


def test_verdict_cancelling_dirichlet_sum_with_neumann_edges():
    net = build_star([1, 1, 0.5, 2], [1, -1, 3, -0.2], [D, D, N_, N_])
    v = resonance_verdict(net)
    assert not v.well_posed and v.criterion == "dirichlet-sum"


def test_neumann_only_star_is_well_posed_up_to_constants():
    v = resonance_verdict(build_star([1, 2], [1, -1], [N_, N_]))
    assert v.well_posed and v.criterion == "neumann-only"


@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.1, 5), st.floats(0.1, 5), st.booleans())
def test_tadpole2_sign_changing_never_resonant(a, b, L1, L2, flip):
    k1, k2 = (a, -b) if not flip else (-a, b)
    assert resonance_verdict(build_tadpole2(L1, L2, k1, k2)).well_posed


def test_unsupported_topology():
    edges = (Edge(1, 1.0, 1.0, "a", "b"), Edge(2, 1.0, 1.0, "b", "c"), Edge(3, 1.0, 1.0, "c", "d"))
    conds = (
        VertexCondition("a", D), VertexCondition("b", Kind.KIRCHHOFF),
        VertexCondition("c", Kind.KIRCHHOFF), VertexCondition("d", D),
    )
    with pytest.raises(UnsupportedTopology):
        assemble_transmission(Network(edges, conds, Topology.GENERAL))


@pytest.mark.parametrize("N", range(2, 9))
def test_equilateral_determinant_changes_sign_only_at_threshold(N):
    ks = -np.geomspace(0.01, 10, 400)
    for D_ in range(1, N):
        threshold = -D_ / (N - D_)
        dets = np.array([np.linalg.det(assemble_transmission(two_phase_star(D_, N, k)).matrix) for k in ks])
        exact_zero = dets == 0
        # a grid point may sit exactly on the threshold; it must be the only zero
        assert np.all(np.abs(ks[exact_zero] - threshold) < 1e-14)
        kk, signs = ks[~exact_zero], np.sign(dets[~exact_zero])
        changes = np.nonzero(np.diff(signs))[0]
        assert len(changes) == 1
        i = changes[0]
        assert min(kk[i], kk[i + 1]) <= threshold <= max(kk[i], kk[i + 1])


@st.composite
def star_with_neumann(draw):
    nd = draw(st.integers(1, 4))
    nn = draw(st.integers(1, 4))
    L = draw(st.lists(st.floats(0.2, 3), min_size=nd + nn, max_size=nd + nn))
    k = draw(st.lists(st.floats(-4, 4).filter(lambda v: abs(v) > 0.1), min_size=nd + nn, max_size=nd + nn))
    return L, k, nd


@given(star_with_neumann())
def test_neumann_edges_do_not_change_resonance(data):
    L, k, nd = data
    full = build_star(L, k, [D] * nd + [N_] * (len(L) - nd))
    dirichlet_sum = sum(e.conductivity / e.length for e in full.edges if full.external_kind(e) is D)
    det_full = np.linalg.det(assemble_transmission(full).matrix)
    assert abs(abs(det_full) - abs(dirichlet_sum)) < 1e-10 * max(1.0, abs(dirichlet_sum))
    # replacing every Neumann conductivity leaves the determinant unchanged
    swapped = build_star(L, [kk if i < nd else -2.5 * kk for i, kk in enumerate(k)], [D] * nd + [N_] * (len(L) - nd))
    det_swapped = np.linalg.det(assemble_transmission(swapped).matrix)
    assert abs(abs(det_swapped) - abs(det_full)) < 1e-10 * max(1.0, abs(det_full))


@given(
    st.integers(1, 4), st.integers(1, 4),
    st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.2, 3), st.floats(0.2, 3),
)
def test_certificate_implies_well_posed(D_, extra, k_plus, k_minus_abs, L_plus, L_minus):
    N = D_ + extra
    net = build_star([L_plus] * D_ + [L_minus] * extra, [k_plus] * D_ + [-k_minus_abs] * extra, [D] * N)
    assume(abs(k_minus_abs / k_plus - star_dirichlet_forbidden_ratio_lengths(D_, N, L_plus, L_minus)) > 1e-6)
    cert = coercivity_certificate(bounds_from_network(net))
    if cert.holds:
        assert resonance_verdict(net).well_posed
