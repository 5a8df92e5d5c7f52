"""Siegel-function modular units: exact q-expansions, Galois action and freeness certificates."""

from .coeffring import CycNum, cyclotomic_polynomial, root_of_unity
from .errors import SiegelError
from .kernels import BACKEND
from .modgroup import Family, GroupElement, Subgroup, enumerate_group, enumerate_subgroups
from .qseries import QSeries
from .siegel import GConfig, IndexVector, g_expansion, siegel_power_expansion

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CycNum", "Family", "GConfig", "GroupElement", "IndexVector", "QSeries",
    "SiegelError", "Subgroup", "cyclotomic_polynomial", "enumerate_group",
    "enumerate_subgroups", "g_expansion", "root_of_unity", "siegel_power_expansion",
]
