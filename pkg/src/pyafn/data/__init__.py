"""
Domain datasets: synthetic shift generation, CSV ingestion, label-space handling and batching.
"""
from pyafn.data.csvio import load_csv
from pyafn.data.csvio import write_csv
from pyafn.data.synthetic import batches
from pyafn.data.synthetic import count_batches
from pyafn.data.synthetic import cycle_batches
from pyafn.data.synthetic import EmptyClassWarning
from pyafn.data.synthetic import gen_synthetic
from pyafn.data.synthetic import make_partial
from pyafn.data.synthetic import restrict_source
from pyafn.data.synthetic import split_labeled_target
from pyafn.data.synthetic import subsample_labeled_target
from pyafn.data.synthetic import take_fraction
from pyafn.data.tools import CANNED_PARTIAL_KEEP
from pyafn.data.tools import DomainDataset
from pyafn.data.tools import DomainTag
from pyafn.data.tools import ShiftSpec
from pyafn.data.tools import UnlabeledView

__all__ = (
    "CANNED_PARTIAL_KEEP",
    "DomainDataset",
    "DomainTag",
    "EmptyClassWarning",
    "ShiftSpec",
    "UnlabeledView",
    "batches",
    "count_batches",
    "cycle_batches",
    "gen_synthetic",
    "load_csv",
    "make_partial",
    "restrict_source",
    "split_labeled_target",
    "subsample_labeled_target",
    "take_fraction",
    "write_csv",
)
