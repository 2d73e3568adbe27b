"""Real and non-real FD eigenvalues of the pseudo tadpole across k⁻.

For each k⁻ the closed-form real eigenvalues are listed next to the count of
FD eigenvalues with a non-negligible imaginary part below a modulus cap, and
the FD eigenvalue of smallest modulus among them.
"""

import argparse
import math
import warnings

import numpy as np

from signet.graph import build_tadpole2
from signet.oracle import fd_assemble, fd_pseudo_spectrum
from signet.spectra.tadpole import spectrum_tadpole_pseudo


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--L1", type=float, default=2.0)
    parser.add_argument("--L2", type=float, default=math.sqrt(2.0))
    parser.add_argument("--h", type=float, default=1 / 100)
    parser.add_argument("--cap", type=float, default=400.0, help="modulus cap for the FD eigenvalues")
    parser.add_argument("--k-minus", type=float, nargs="+", default=[-0.25, -0.7, -1.5, -2.0, -3.0, -6.0])
    args = parser.parse_args()
    for k_minus in args.k_minus:
        sp = spectrum_tadpole_pseudo(args.L1, args.L2, k_minus, 6)
        closed = sorted(p.lam for p in sp.all_pairs() if abs(p.lam) <= args.cap)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            lam = fd_pseudo_spectrum(fd_assemble(build_tadpole2(args.L1, args.L2, 1.0, k_minus), args.h, "pseudo"))
        lam = lam[np.abs(lam) <= args.cap]
        nonreal = lam[np.abs(lam.imag) > 1e-6 * np.abs(lam)]
        first = f"{nonreal[0]:.4g}" if nonreal.size else "-"
        print(f"k- = {k_minus:6.2f}: closed real {np.round(closed, 3).tolist()}")
        print(f"            FD non-real below cap: {nonreal.size}, smallest {first}")


if __name__ == "__main__":
    main()
