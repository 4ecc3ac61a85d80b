"""Bateman-Horn predictions for polynomial tuples and random models of the primes."""
from .errors import (
    BHLabError,
    ConfigError,
    DomainError,
    Inadmissible,
    KindMismatch,
    NotPrime,
    OrderingImpossible,
    ProfileInvalid,
    RangeTooLarge,
)
from .localroots import nu_p, rho_p, roots_mod_p
from .models import ModelSpec, SetInstance, residue_for_prime
from .polyarith import Polynomial, PolyTuple, irreducibility_status, normalize_tuple, parse_tuple
from .singular import ThresholdProfile, main_term, singular_series, thresholds

__version__ = "0.1.0"

__all__ = [
    "BHLabError", "ConfigError", "DomainError", "Inadmissible", "KindMismatch", "NotPrime",
    "OrderingImpossible", "ProfileInvalid", "RangeTooLarge", "ModelSpec", "PolyTuple", "Polynomial",
    "SetInstance", "ThresholdProfile", "irreducibility_status", "main_term", "normalize_tuple",
    "nu_p", "parse_tuple", "residue_for_prime", "rho_p", "roots_mod_p", "singular_series", "thresholds",
]
