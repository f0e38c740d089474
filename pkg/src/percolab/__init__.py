"""percolab: a bond-percolation cluster-count laboratory.

Monte Carlo estimation of cluster-count moments on boxes of Z^d, exact
small-box enumeration of the same quantities as integer polynomials, and
detectors for the bond events (bypass, pivotality, two-arm) that tie the
variance of the count to the derivative of the clusters-per-vertex density.
"""

__version__ = "0.1.0"

from .clusters import ClusterLabeling, count_clusters
from .lattice import (
    Bond,
    BondConfig,
    BoxSpec,
    ReplicateStream,
    build_box,
    enumerate_configs,
    sample_config,
)
from .stats import EstimateSummary

__all__ = [
    "Bond",
    "BondConfig",
    "BoxSpec",
    "ClusterLabeling",
    "EstimateSummary",
    "ReplicateStream",
    "__version__",
    "build_box",
    "count_clusters",
    "enumerate_configs",
    "sample_config",
]
