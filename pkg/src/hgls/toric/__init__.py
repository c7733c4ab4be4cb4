"""Toric models, dimension-reducing constructions and the threefold planner."""

from .family import (
    CoprimalityError,
    FamilyPair,
    Term,
    ToricModel,
    canonical_model,
    cayley_model,
    family_from_strings,
    gcd_pair,
    general_split_pair,
    parse_laurent,
    product_of,
    product_pair,
    quadric_bundle_twist,
    toric_model,
    twist_double_cover,
)
from .hessian import HessianWitness, hessian_check
from .lattice import GcdNotOneError, build_m_kappa
from .planner import NoPlanError, Plan, plan_threefold, reduce_to_threefold

__all__ = [
    "CoprimalityError",
    "FamilyPair",
    "GcdNotOneError",
    "HessianWitness",
    "NoPlanError",
    "Plan",
    "Term",
    "ToricModel",
    "build_m_kappa",
    "canonical_model",
    "cayley_model",
    "family_from_strings",
    "gcd_pair",
    "general_split_pair",
    "hessian_check",
    "load_reference_models",
    "parse_laurent",
    "plan_threefold",
    "product_of",
    "product_pair",
    "quadric_bundle_twist",
    "reduce_to_threefold",
    "toric_model",
    "twist_double_cover",
]


def load_reference_models() -> dict[int, FamilyPair]:
    """Hand-written threefold models for cases 28, 30 and 41, as bundled data."""
    import json
    from importlib import resources

    raw = json.loads(resources.files("hgls.data").joinpath("reference_models.json").read_text())
    out = {}
    for key, entry in raw.items():
        parts = [family_from_strings(f["equations"], f["map"], f["variables"],
                                     {"kind": "reference", "case": int(key)}) for f in entry["factors"]]
        out[int(key)] = parts[0] if len(parts) == 1 else product_of(parts)
    return out
