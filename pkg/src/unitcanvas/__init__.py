"""unitcanvas: a headless multimodal exploration engine for flexible unit
visualizations. Points on a canvas can be systematically bound to data
attributes or manually customized; spoken/typed commands and pen/touch
gestures fuse into view mutations, with deterministic replay."""

__version__ = "0.1.0"

from .dataset import Dataset, build_lexicon, compute_stats, load_csv
from .view_state import ViewState, restore, snapshot, snapshot_json

__all__ = [
    "Dataset",
    "ViewState",
    "__version__",
    "build_lexicon",
    "compute_stats",
    "load_csv",
    "restore",
    "snapshot",
    "snapshot_json",
]
