"""Stationary solutions blow up as k⁻ approaches the forbidden ratio -D/(N-D).

For an equilateral Dirichlet star with f ≡ 1, prints the sup norm of the
solution, the transmission margin and the FD stiffness condition number along
k⁻ = -D/(N-D) + 10^-m.
"""

import argparse

import numpy as np

from signet.oracle import fd_assemble, fd_condition_estimate
from signet.spectra.star import two_phase_star
from signet.stationary import SourceTerm, solve_stationary
from signet.wellposed import resonance_verdict


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--D", type=int, default=2)
    parser.add_argument("--N", type=int, default=3)
    parser.add_argument("--max-exponent", type=int, default=8)
    args = parser.parse_args()
    critical = -args.D / (args.N - args.D)
    print(f"forbidden k- = {critical:g}")
    print(f"{'offset':>10}{'k-':>16}{'sup |psi|':>14}{'margin':>12}{'FD cond':>12}")
    for m in range(1, args.max_exponent + 1):
        k_minus = critical + 10.0**-m
        net = two_phase_star(args.D, args.N, k_minus)
        psi = solve_stationary(net, SourceTerm.constant(net, 1.0))
        sup = max(np.abs(psi(e.id, np.linspace(0, e.length, 201))).max() for e in net.edges)
        margin = resonance_verdict(net).margin
        cond = fd_condition_estimate(fd_assemble(net, 1 / 40))
        print(f"{10.0**-m:>10.0e}{k_minus:>16.10f}{sup:>14.4e}{margin:>12.3e}{cond:>12.3e}")


if __name__ == "__main__":
    main()
