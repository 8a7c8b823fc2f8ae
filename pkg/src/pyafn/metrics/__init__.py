"""
Robustness gaps and metrics serialization.
"""
from pyafn.metrics.csvout import emit_metrics_csv
from pyafn.metrics.csvout import emit_sweep_csv
from pyafn.metrics.robustness import regimes
from pyafn.metrics.robustness import robustness_gaps
from pyafn.metrics.robustness import robustness_protocol
from pyafn.metrics.robustness import RobustnessReport
from pyafn.metrics.robustness import supervised_config

__all__ = (
    "RobustnessReport",
    "emit_metrics_csv",
    "emit_sweep_csv",
    "regimes",
    "robustness_gaps",
    "robustness_protocol",
    "supervised_config",
)
