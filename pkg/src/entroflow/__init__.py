"""entroflow: exact analysis of network coding problems.

The package models directed acyclic networks with multi-session
connection requirements and wiretap constraints, decides admissibility of
explicit network codes exactly (zero error, perfect secrecy, alphabet
bounds), computes Shannon-type LP outer bounds in exact rational
arithmetic with verifiable certificates, and constructs the two gadget
families used throughout the test suite: the incremental-multicast
network parametrized by an entropy vector, and the secure-multicast
gadget with its multi-copy adhesion reduction.
"""

from entroflow.entropy import (
    DEFAULT_TOL,
    EntropicSearchResult,
    EntropyVector,
    GroundSet,
    JointDistribution,
    LinearFunctional,
    PolymatroidReport,
    as_fraction,
    check_functional_dependency,
    check_independence,
    elemental_inequalities,
    entropic_search,
    entropy_vector_of,
    is_polymatroid,
    is_quasi_uniform,
    quasi_uniform_vector_of,
    subset_entropy,
    zhang_yeung_check,
)

__all__ = [
    "DEFAULT_TOL",
    "EntropicSearchResult",
    "EntropyVector",
    "GroundSet",
    "JointDistribution",
    "LinearFunctional",
    "PolymatroidReport",
    "as_fraction",
    "check_functional_dependency",
    "check_independence",
    "elemental_inequalities",
    "entropic_search",
    "entropy_vector_of",
    "is_polymatroid",
    "is_quasi_uniform",
    "quasi_uniform_vector_of",
    "subset_entropy",
    "zhang_yeung_check",
]

__version__ = "0.1.0"
