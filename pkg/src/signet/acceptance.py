"""The ten acceptance checks, each runnable on its own and timed against its budget."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .basis import biorthogonal_family, gram_matrix, gram_report, inner_product, riesz_transform
from .evolution import SpectralState, SubspaceX, evolve_heat, evolve_schrodinger
from .graph import Kind, build_star, build_tadpole2, build_tadpole3
from .oracle import fd_assemble, fd_eigenvalues, fd_pseudo_spectrum, fd_solve
from .spectra import (
    spectrum_star_equilateral_pseudo,
    spectrum_star_equilateral_standard,
    spectrum_tadpole_standard,
)
from .spectra.common import DISP_A, DISP_B, NU, PSEUDO_HALF, PSEUDO_INT, THETA
from .spectra.star import det2_positivity, two_phase_star
from .stationary import SourceTerm, solve_stationary
from .wellposed import assemble_transmission, resonance_verdict

SEED = 20240611


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] AC{self.number:02d} {self.name}: {self.detail} ({self.elapsed:.2f}s, budget {self.limit:g}s)"


def _timed(number: int, name: str, limit: float, body: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - start
    if elapsed > limit:
        detail += "; over time budget"
    return CriterionResult(number, name, ok and elapsed <= limit, detail, elapsed, limit)


# ---------------------------------------------------------------- 1


def _resonance_thresholds() -> tuple[bool, str]:
    worst = 0.0
    for N in range(2, 9):
        for D in range(1, N):
            expected = -D / (N - D)

            def det(k: float) -> float:
                return float(np.linalg.det(assemble_transmission(two_phase_star(D, N, k)).matrix))

            root = brentq(det, 3 * expected, expected / 3, xtol=1e-15, rtol=1e-15)
            worst = max(worst, abs(root - expected))
    return worst <= 1e-10, f"max |root + D/(N-D)| = {worst:.2e} over 28 (D,N) pairs"


def criterion_1() -> CriterionResult:
    return _timed(1, "resonance thresholds", 1.0, _resonance_thresholds)


# ---------------------------------------------------------------- 2


def _mixed_boundary() -> tuple[bool, str]:
    rng = np.random.default_rng(SEED)
    mismatched = 0
    worst = 0.0
    resonant = 0
    for i in range(500):
        N = int(rng.integers(2, 9))
        lengths = rng.uniform(0.2, 3.0, N)
        ks = rng.uniform(0.2, 4.0, N) * rng.choice([-1.0, 1.0], N)
        kinds = [Kind.DIRICHLET if flag else Kind.NEUMANN for flag in rng.random(N) < 0.5]
        kinds[0] = Kind.DIRICHLET
        dirichlet = [j for j in range(N) if kinds[j] is Kind.DIRICHLET]
        if i % 2 and len(dirichlet) >= 2:
            # force the Dirichlet sum to zero through the last Dirichlet edge
            j = dirichlet[-1]
            rest = sum(ks[m] / lengths[m] for m in dirichlet[:-1])
            if rest != 0:
                ks[j] = -rest * lengths[j]
        net = build_star(lengths, ks, kinds)
        total = sum(e.conductivity / e.length for e in net.edges if net.external_kind(e) is Kind.DIRICHLET)
        scale = sum(abs(e.conductivity) / e.length for e in net.edges if net.external_kind(e) is Kind.DIRICHLET)
        expected_resonant = abs(total) <= 1e-12 * scale
        resonant += expected_resonant
        verdict = resonance_verdict(net)
        mismatched += verdict.well_posed == expected_resonant
        worst = max(worst, abs(abs(verdict.determinant) - abs(total)) / max(1.0, abs(total)))
    ok = mismatched == 0 and worst <= 1e-10
    return ok, f"{mismatched} verdict mismatches ({resonant} resonant of 500), max |det|-|sum| gap {worst:.2e}"


def criterion_2() -> CriterionResult:
    return _timed(2, "mixed-boundary criterion", 5.0, _mixed_boundary)


# ---------------------------------------------------------------- 3


def _tadpoles() -> tuple[bool, str]:
    flagged = 0
    grid = np.linspace(0.1, 5.0, 40)
    for k1 in grid:
        for k2 in grid:
            for sign in (1.0, -1.0):
                if not resonance_verdict(build_tadpole2(1.3, 0.7, sign * k1, -sign * k2)).well_posed:
                    flagged += 1
    worst = 0.0
    lengths = np.linspace(0.2, 3.0, 50)
    for L1 in lengths:
        for L2 in lengths:

            def det(k1: float) -> float:
                return float(np.linalg.det(assemble_transmission(build_tadpole3([L1, L2, 1.0], [k1, 1.0, -1.0])).matrix))

            expected = -L1 / L2
            root = brentq(det, 4 * expected, expected / 4, xtol=1e-14, rtol=1e-15)
            worst = max(worst, abs(root - expected) / abs(expected))
    ok = flagged == 0 and worst <= 1e-8
    return ok, f"tadpole2 flagged {flagged}/3200; tadpole3 max rel locus error {worst:.2e} on 2500 points"


def criterion_3() -> CriterionResult:
    return _timed(3, "tadpole well-posedness", 5.0, _tadpoles)


# ---------------------------------------------------------------- 4

STANDARD_CONFIGS = ((1, 2, -1.0), (2, 3, -0.5), (2, 3, -3.0), (1, 3, -0.25))
FAMILY_HEAD = 8


def _family_targets(spectrum) -> list[tuple[str, float, int]]:
    """(family, λ, position in the complete sorted prefix) for the first 8 members of each family."""
    count = spectrum.complete_count()
    lam = spectrum.eigenvalues()[:count]
    order = np.argsort(lam, kind="stable")
    position = np.empty(count, dtype=int)
    position[order] = np.arange(count)
    basis = spectrum.basis()[:count]
    targets, seen = [], {}
    for i, (pair, _) in enumerate(basis):
        if pair.family not in (NU, THETA, DISP_A, DISP_B):
            continue
        key = (pair.family, pair.index)
        if key in seen:
            continue
        seen[key] = True
        if sum(1 for f, _ in seen if f == pair.family) <= FAMILY_HEAD:
            targets.append((pair.family, pair.lam, int(position[i])))
    return targets


def _standard_vs_oracle() -> tuple[bool, str]:
    worst_err, ratios, missing = 0.0, [], 0
    for D, N, k_minus in STANDARD_CONFIGS:
        sp = spectrum_star_equilateral_standard(D, N, k_minus, 24, allow_resonant=True)
        count = sp.complete_count()
        targets = _family_targets(sp)
        fams = {f for f, _, _ in targets}
        for fam in fams:
            missing += FAMILY_HEAD - sum(1 for f, _, _ in targets if f == fam)
        net = sp.network
        coarse = fd_eigenvalues(fd_assemble(net, 1e-3), count)
        fine = fd_eigenvalues(fd_assemble(net, 5e-4), count)
        for _, lam, pos in targets:
            e1, e2 = abs(coarse[pos] - lam), abs(fine[pos] - lam)
            worst_err = max(worst_err, e1 / abs(lam))
            ratios.append(e1 / e2 if e2 > 0 else math.inf)
    ratios = np.array(ratios)
    ok = missing == 0 and worst_err <= 1e-3 and bool(np.all((ratios >= 3.5) & (ratios <= 4.5)))
    return ok, (
        f"{ratios.size} eigenvalues, max rel err {worst_err:.2e} at h=1e-3, "
        f"h-halving ratio in [{ratios.min():.3f}, {ratios.max():.3f}], {missing} family members missing"
    )


def criterion_4() -> CriterionResult:
    return _timed(4, "standard equilateral spectrum vs oracle", 120.0, _standard_vs_oracle)


# ---------------------------------------------------------------- 5


def _orthonormality() -> tuple[bool, str]:
    star = spectrum_star_equilateral_standard(2, 3, -3.0, 20)
    tad = spectrum_tadpole_standard(2.0, 1.0, -1.0, 20)
    devs = []
    for sp in (star, tad):
        G = gram_matrix(sp.basis_functions()[:30])
        devs.append(float(np.max(np.abs(G - np.eye(30)))))
    return max(devs) < 1e-9, f"max |G - I|: star {devs[0]:.2e}, tadpole {devs[1]:.2e}"


def criterion_5() -> CriterionResult:
    return _timed(5, "orthonormality", 10.0, _orthonormality)


# ---------------------------------------------------------------- 6

PSEUDO_CONFIGS = ((1, 3, -3.0), (1, 2, -0.5))
PSEUDO_LEVELS = 10


def _pseudo_exactness() -> tuple[bool, str]:
    worst, bad_mult, bad_cluster = 0.0, 0, 0
    for D, N, k_minus in PSEUDO_CONFIGS:
        sp = spectrum_star_equilateral_pseudo(D, N, k_minus, PSEUDO_LEVELS)
        for pair in sp.all_pairs():
            n = pair.index
            exact = n * n * math.pi**2 / 4
            worst = max(worst, abs(pair.lam - exact) / exact)
            expected = 1 if n % 2 else N - 1
            bad_mult += pair.multiplicity != expected or len(pair.functions) != expected
            bad_mult += pair.family != (PSEUDO_HALF if n % 2 else PSEUDO_INT)
        lam = fd_pseudo_spectrum(fd_assemble(sp.network, 1e-3, "pseudo"))
        top = (PSEUDO_LEVELS + 0.5) ** 2 * math.pi**2 / 4
        window = lam[np.abs(lam) < top]
        assigned = 0
        for n in range(1, PSEUDO_LEVELS + 1):
            exact = n * n * math.pi**2 / 4
            size = int(np.sum(np.abs(window - exact) <= 1e-2 * exact))
            assigned += size
            bad_cluster += size != (1 if n % 2 else N - 1)
        bad_cluster += window.size != assigned
    ok = worst <= 1e-14 and bad_mult == 0 and bad_cluster == 0
    return ok, (
        f"max rel deviation from n^2 pi^2/4 {worst:.1e}, {bad_mult} multiplicity/family errors, "
        f"{bad_cluster} oracle cluster mismatches over {len(PSEUDO_CONFIGS)} stars x {PSEUDO_LEVELS} levels"
    )


def criterion_6() -> CriterionResult:
    return _timed(6, "pseudo spectrum exactness", 60.0, _pseudo_exactness)


# ---------------------------------------------------------------- 7


def _riesz() -> tuple[bool, str]:
    sp = spectrum_star_equilateral_pseudo(1, 3, -3.0, 20)
    plain = gram_report(sp, size=30)
    report = gram_report(riesz_transform(sp), size=30)
    dev = max(report.max_offdiag, report.max_diag_dev)
    family = biorthogonal_family(sp, 30)
    # second route: pair the σ functions with ψ by quadrature instead of reusing the Gram block
    sigma = family.sigma
    psi = family.basis
    cross = np.array([[inner_product(p, s) for s in sigma] for p in psi])
    residual = float(np.max(np.abs(cross - np.eye(30))))
    ok = dev < 1e-9 and residual < 1e-8
    return ok, (
        f"transformed Gram |G - I| {dev:.2e} (untransformed offdiag {plain.max_offdiag:.2f}), "
        f"biorthogonal residual {residual:.2e} at truncation 30"
    )


def criterion_7() -> CriterionResult:
    return _timed(7, "Riesz-basis certification", 10.0, _riesz)


# ---------------------------------------------------------------- 8


def _det_positivity() -> tuple[bool, str]:
    rng = np.random.default_rng(SEED)
    n = 10_000
    a = rng.uniform(0.0, 10.0, n)
    b = rng.uniform(0.0, 10.0, n)
    a = np.where(a == 0, 1e-3, a)
    b = np.where(b == 0, 1e-3, b)
    sign = rng.choice([-1.0, 1.0], n)
    a, b = sign * a, sign * b
    s = 10.0 * (1.0 - rng.uniform(0.0, 1.0, n))  # in (0, 10]
    values = det2_positivity(a, b, s)
    failures = int(np.sum(~(values > 0)))
    return failures == 0, f"{failures} non-positive values in {n} samples (min {np.min(values):.3e})"


def criterion_8() -> CriterionResult:
    return _timed(8, "2x2 determinant positivity", 1.0, _det_positivity)


# ---------------------------------------------------------------- 9


def _evolution() -> tuple[bool, str]:
    rng = np.random.default_rng(SEED)
    sp = spectrum_star_equilateral_standard(2, 3, -3.0, 20)
    size = 30
    G = gram_matrix(sp.basis_functions()[:size])
    drift = 0.0
    for _ in range(5):
        c = rng.normal(size=size) + 1j * rng.normal(size=size)
        state = SpectralState(sp, c, size)
        norm0 = math.sqrt(float(np.real(np.conj(c) @ G @ c)))
        for t in np.linspace(0.1, 1.0, 10):
            ct = evolve_schrodinger(state, t).coefficients
            drift = max(drift, abs(math.sqrt(float(np.real(np.conj(ct) @ G @ ct))) - norm0))
    # heat: one negative mode of the a-family plus positive modes
    lam = sp.eigenvalues()[:size]
    basis = sp.basis()[:size]
    first = next(i for i, (p, _) in enumerate(basis) if p.family == DISP_A)
    pair = basis[first][0]
    s = math.sqrt(3.0)

    def branch(a: float) -> float:
        # tan a = s (N-D)/D tanh(s a) for D = 2, N = 3, rewritten without poles
        return 2.0 * math.sin(a) * math.cosh(s * a) - s * math.cos(a) * math.sinh(s * a)

    a_guess = math.sqrt(-pair.lam / 3.0)
    a1 = brentq(branch, a_guess - 1e-3, a_guess + 1e-3, xtol=1e-15, rtol=1e-15)
    c = np.zeros(size)
    c[first] = 1.0
    positives = [i for i in range(size) if lam[i] > 0][:3]
    c[positives] = 0.5
    state = SpectralState(sp, c, size)
    heat_err = 0.0
    for t in (0.1, 0.5, 1.0):
        out = evolve_heat(state, t, SubspaceX(1)).coefficients
        exact = math.exp(3.0 * a1 * a1 * t)
        heat_err = max(heat_err, abs(out[first] - exact) / exact)
    ok = drift < 1e-10 and heat_err < 1e-9
    return ok, f"Schrodinger norm drift {drift:.2e}; heat growth factor rel err {heat_err:.2e}"


def criterion_9() -> CriterionResult:
    return _timed(9, "evolution", 10.0, _evolution)


# ---------------------------------------------------------------- 10


def _stationary_vs_oracle() -> tuple[bool, str]:
    cases = {
        "interval": build_star([1.0, 1.0], [1.0, -2.0], [Kind.DIRICHLET] * 2),
        "3-star": build_star([1.0, 1.0, 1.0], [1.0, 1.0, -3.0], [Kind.DIRICHLET] * 3),
    }
    out = []
    ok = True
    for name, net in cases.items():
        psi = solve_stationary(net, SourceTerm.constant(net, 1.0))
        fd = fd_solve(fd_assemble(net, 1e-4), lambda eid, x: np.ones_like(x))
        total = 0.0
        for e in net.edges:
            x = fd.grids[e.id]
            diff = (psi(e.id, x) - fd.values[e.id]) ** 2
            total += np.trapezoid(diff, x) if hasattr(np, "trapezoid") else np.trapz(diff, x)
        err = math.sqrt(total)
        ok &= err < 1e-6
        out.append(f"{name} {err:.2e}")
    return ok, "L2 discrepancy " + ", ".join(out)


def criterion_10() -> CriterionResult:
    return _timed(10, "stationary solver vs oracle", 30.0, _stationary_vs_oracle)


CRITERIA: tuple[Callable[[], CriterionResult], ...] = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
)


def run_all(selected: set[int] | None = None) -> list[CriterionResult]:
    return [fn() for i, fn in enumerate(CRITERIA, start=1) if selected is None or i in selected]
