"""Size-based nonmonotonic reasoning on finite models.

Submodules:

- ``prefstruct``: preferential structures and the minimal-element operator
- ``size_algebra``: big/medium/small subsets, size comparisons, coherence, fact verifiers
- ``inheritance``: defeasible inheritance diagrams with specificity and medium splits
- ``core_revision``: depth, core and iterated distance-based revision of model sets
"""

from .errors import SizeReasonError
from .prefstruct import PreferentialStructure, build_structure, mu, parse_structure
from .size_algebra import SizeClass, SizeVerdict, classify, less, less_prime, verify_fact
from .inheritance import InheritanceDiagram, infer, parse_diagram
from .core_revision import ModelSet, core, models, parse_formula, peel

__version__ = "0.1.0"

__all__ = [
    "SizeReasonError",
    "PreferentialStructure",
    "build_structure",
    "mu",
    "parse_structure",
    "SizeClass",
    "SizeVerdict",
    "classify",
    "less",
    "less_prime",
    "verify_fact",
    "InheritanceDiagram",
    "infer",
    "parse_diagram",
    "ModelSet",
    "core",
    "models",
    "parse_formula",
    "peel",
]
