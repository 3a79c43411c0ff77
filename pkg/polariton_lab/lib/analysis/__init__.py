"""Observables extracted from spectra: linewidths, dips, splittings, photon numbers."""

from .fitting import LorentzianFit, fit_lorentzian, linewidth_to_eta, photon_number
from .spectra import extract_splitting, find_dips

__all__ = [
    "LorentzianFit",
    "fit_lorentzian",
    "linewidth_to_eta",
    "photon_number",
    "find_dips",
    "extract_splitting",
]
