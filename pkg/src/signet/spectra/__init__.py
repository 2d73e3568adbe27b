"""Closed-form and secular-root spectra of star and tadpole networks."""

from .common import (
    PSEUDO,
    STANDARD,
    EigenPair,
    Spectrum,
    solve_bracketed_roots,
)
from .star import (
    det2_positivity,
    dispersion_equilateral,
    spectrum_star_equilateral_pseudo,
    spectrum_star_equilateral_standard,
    spectrum_star_irrational_pseudo,
    spectrum_star_irrational_standard,
    spectrum_star_mixed_pseudo,
    spectrum_star_mixed_standard,
)
from .dispatch import spectrum_for_network
from .tadpole import spectrum_tadpole_pseudo, spectrum_tadpole_standard

__all__ = [
    "PSEUDO",
    "STANDARD",
    "EigenPair",
    "Spectrum",
    "det2_positivity",
    "dispersion_equilateral",
    "solve_bracketed_roots",
    "spectrum_star_equilateral_pseudo",
    "spectrum_star_equilateral_standard",
    "spectrum_star_irrational_pseudo",
    "spectrum_star_irrational_standard",
    "spectrum_star_mixed_pseudo",
    "spectrum_star_mixed_standard",
    "spectrum_for_network",
    "spectrum_tadpole_pseudo",
    "spectrum_tadpole_standard",
]
