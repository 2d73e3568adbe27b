"""FD eigenvalue error against the closed forms as the mesh is halved.

Prints one row per (configuration, h) with the largest relative error over the
leading eigenvalues and the ratio to the previous mesh (≈ 4 for a second-order scheme).
"""

import argparse

import numpy as np

from signet.oracle import fd_assemble, fd_eigenvalues
from signet.spectra.star import spectrum_star_equilateral_standard, two_phase_star
from signet.spectra.tadpole import spectrum_tadpole_standard
from signet.graph import build_tadpole2


def leading(spectrum, count):
    lam = spectrum.eigenvalues()[: spectrum.complete_count()]
    lam = lam[np.argsort(np.abs(lam), kind="stable")][:count]
    return np.sort(lam)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=8)
    parser.add_argument("--levels", type=int, default=4, help="number of mesh halvings, starting at h = 1/50")
    args = parser.parse_args()
    cases = {
        "star(2,3,-0.5)": (two_phase_star(2, 3, -0.5), spectrum_star_equilateral_standard(2, 3, -0.5, args.count)),
        "star(1,3,-0.25)": (two_phase_star(1, 3, -0.25), spectrum_star_equilateral_standard(1, 3, -0.25, args.count)),
        "tadpole(2,1,-1)": (build_tadpole2(2.0, 1.0, 1.0, -1.0), spectrum_tadpole_standard(2.0, 1.0, -1.0, args.count)),
    }
    print(f"{'case':<18}{'h':>12}{'max rel err':>14}{'ratio':>8}")
    for name, (network, spectrum) in cases.items():
        exact = leading(spectrum, args.count)
        previous = None
        for level in range(args.levels):
            h = 1 / (50 * 2**level)
            fd = fd_eigenvalues(fd_assemble(network, h), args.count)
            err = float(np.max(np.abs(fd - exact) / np.abs(exact)))
            ratio = "" if previous is None else f"{previous / err:8.3f}"
            print(f"{name:<18}{h:>12.3e}{err:>14.3e}{ratio:>8}")
            previous = err


if __name__ == "__main__":
    main()
