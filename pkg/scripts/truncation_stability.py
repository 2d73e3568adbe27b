"""Drift of the leading biorthogonal coefficients as the truncation doubles.

For an equilateral pseudo star the leading 10×10 block of the dual coefficients
changes by O(1/truncation), while the Gram condition number stays bounded.
"""

import argparse

import numpy as np

from signet.basis import biorthogonal_family, gram_matrix
from signet.spectra.star import spectrum_star_equilateral_pseudo


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--D", type=int, default=1)
    parser.add_argument("--N", type=int, default=3)
    parser.add_argument("--k-minus", type=float, default=-3.0)
    parser.add_argument("--keep", type=int, default=10)
    parser.add_argument("--sizes", type=int, nargs="+", default=[30, 60, 120, 240])
    args = parser.parse_args()
    # each pair of consecutive levels carries N basis functions
    sp = spectrum_star_equilateral_pseudo(args.D, args.N, args.k_minus, -(-2 * max(args.sizes) // args.N) + 2)
    print(f"{'truncation':>10}{'cond(G)':>12}{'drift':>12}{'ratio':>8}")
    previous, drift_prev = None, None
    for size in args.sizes:
        block = biorthogonal_family(sp, size).coefficients[: args.keep, : args.keep]
        cond = np.linalg.cond(gram_matrix(sp.basis_functions()[:size]))
        drift = None if previous is None else float(np.max(np.abs(block - previous)))
        ratio = "" if drift is None or drift_prev is None else f"{drift_prev / drift:8.3f}"
        print(f"{size:>10}{cond:>12.4f}{'' if drift is None else f'{drift:12.3e}':>12}{ratio:>8}")
        previous, drift_prev = block, drift


if __name__ == "__main__":
    main()
