from .initial import (
    LayoutSearch,
    affinity_layout,
    corner_removed_slots,
    initial_layout,
    layout_trial,
    random_layout,
    search_layout,
    trial_seeds,
    usable_slots,
)
from .mapping import EMPTY, Layout

__all__ = [
    "EMPTY", "Layout", "LayoutSearch", "affinity_layout", "corner_removed_slots", "initial_layout",
    "layout_trial", "random_layout", "search_layout", "trial_seeds", "usable_slots",
]
