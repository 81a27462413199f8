"""Universal entanglers on bipartite systems: existence, certification and search."""
from .overlap import (
    CertificationReport,
    OptimizerConfig,
    OverlapEstimate,
    UnitaryGate,
    Verdict,
    certify,
    max_product_overlap,
)
from .search import haar_study, haar_unitary, search_entangler
from .segre import exists_universal_entangler, is_product, segre_embed
from .states import BipartiteDims, ProductPair, PureState

__all__ = [
    "BipartiteDims",
    "CertificationReport",
    "OptimizerConfig",
    "OverlapEstimate",
    "ProductPair",
    "PureState",
    "UnitaryGate",
    "Verdict",
    "certify",
    "exists_universal_entangler",
    "haar_study",
    "haar_unitary",
    "is_product",
    "max_product_overlap",
    "search_entangler",
    "segre_embed",
]
__version__ = "0.1.0"
