"""Integer coefficient selection for compute-and-forward relays over Z[i] and Z[w]"""
from logging import NullHandler, getLogger

from .selector_constructor import create_selector
from .src.models import Channel, CoeffVector, SelectionResult
from .src.rings import RingId
from .src.thresholds import ThresholdTable, build_table, published_table

__version__ = "0.1.0"
__all__ = [
    "build_table",
    "Channel",
    "CoeffVector",
    "create_selector",
    "published_table",
    "RingId",
    "SelectionResult",
    "ThresholdTable",
]

getLogger(__name__).addHandler(NullHandler())
