"""Prepare-measure GPTs, their quotients from operational data, and exact
decisions of simplex-embeddability (equivalently, existence of a
noncontextual ontological model)."""
from .embed import (
    Embeddable,
    EmbeddingWitness,
    NotEmbeddable,
    OntologicalModel,
    bilinear_search,
    decide,
    min_d_lower_bound,
    minimize_support,
    model_to_witness,
    verify_certificate,
    verify_witness,
    witness_to_model,
)
from .errors import GptncError
from .geometry import ConvexBody, Cone, dual_body, extremal_rays, is_hypercube, is_simplex
from .gpt import (
    CATALOG,
    Gpt,
    canonical_simplicial,
    catalog,
    catalog_model,
    is_simplicial,
    satisfies_no_restriction,
    validate,
    verify_equivalence,
    weak_nonclassicality,
)

__version__ = "0.1.0"

__all__ = [
    "Embeddable",
    "EmbeddingWitness",
    "NotEmbeddable",
    "OntologicalModel",
    "bilinear_search",
    "decide",
    "min_d_lower_bound",
    "minimize_support",
    "model_to_witness",
    "verify_certificate",
    "verify_witness",
    "witness_to_model",
    "CATALOG",
    "Gpt",
    "canonical_simplicial",
    "catalog",
    "catalog_model",
    "is_simplicial",
    "satisfies_no_restriction",
    "validate",
    "verify_equivalence",
    "weak_nonclassicality",
    "GptncError",
    "ConvexBody",
    "Cone",
    "dual_body",
    "extremal_rays",
    "is_hypercube",
    "is_simplex",
]
