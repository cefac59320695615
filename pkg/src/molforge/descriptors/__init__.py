from .alerts import count_alerts, matched_alerts
from .corpus import load_reference_corpus
from .crippen import crippen_breakdown, crippen_logp
from .esol import esol
from .lipinski import LipinskiReport, lipinski_from_vector, lipinski_modified
from .psa import psa
from .qed import (
    AdsParams,
    ads_raw,
    desirability,
    geometric_mean,
    load_qed_params,
    qed,
    qed_breakdown,
)
from .sa import SaBreakdown, sa_calibration, sa_score
from .setmetrics import SetMetrics, is_valid_molecule, set_metrics
from .vector import DescriptorVector, compute_descriptors

__all__ = [
    "AdsParams",
    "DescriptorVector",
    "LipinskiReport",
    "SaBreakdown",
    "SetMetrics",
    "ads_raw",
    "compute_descriptors",
    "count_alerts",
    "crippen_breakdown",
    "crippen_logp",
    "desirability",
    "esol",
    "geometric_mean",
    "is_valid_molecule",
    "lipinski_from_vector",
    "lipinski_modified",
    "load_qed_params",
    "load_reference_corpus",
    "matched_alerts",
    "psa",
    "qed",
    "qed_breakdown",
    "sa_calibration",
    "sa_score",
    "set_metrics",
]
