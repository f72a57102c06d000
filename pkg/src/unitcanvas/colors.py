"""Named colors, categorical palette, and quantitative color ramp.

Point colors are stored as ``#rrggbb`` hex strings everywhere; "the blue
points" style queries resolve through nearest-neighbor lookup in RGB space
against the named color table below.
"""
from __future__ import annotations

# Color-name vocabulary available to utterances. The first nine are the
# core set; the rest give nearest-neighbor matching a sane partition of
# RGB space (otherwise everything desaturated snaps to gray).
NAMED_COLORS: dict[str, tuple[int, int, int]] = {
    "red": (255, 0, 0),
    "green": (0, 128, 0),
    "blue": (0, 0, 255),
    "orange": (255, 165, 0),
    "pink": (255, 192, 203),
    "brown": (165, 42, 42),
    "gray": (128, 128, 128),
    "purple": (128, 0, 128),
    "yellow": (255, 255, 0),
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "teal": (0, 128, 128),
    "navy": (0, 0, 128),
    "magenta": (255, 0, 255),
    "cyan": (0, 255, 255),
    "lime": (0, 255, 0),
}

# Categorical palette: a fixed 12-color cycle, assigned to categories by
# first-appearance order in the schema domain. Entries are saturated on
# purpose so their nearest named color is the intuitive one.
CATEGORICAL_PALETTE: tuple[str, ...] = (
    "#e61e1e",  # red
    "#2d2dd6",  # blue
    "#2dae2d",  # green
    "#f28e2b",  # orange
    "#8e2dd6",  # purple
    "#e377c2",  # pink
    "#8c564b",  # brown
    "#e6d62d",  # yellow
    "#2dbdbd",  # teal
    "#7f7f7f",  # gray
    "#2d2d8e",  # navy
    "#d62dd6",  # magenta
)

# Sequential ramp endpoints for quantitative color bindings.
RAMP_LOW = "#cfe0f2"
RAMP_HIGH = "#13306b"

DEFAULT_POINT_COLOR = "#888888"


def hex_to_rgb(color: str) -> tuple[int, int, int]:
    s = color.lstrip("#")
    if len(s) != 6:
        raise ValueError(f"not an #rrggbb color: {color!r}")
    return int(s[0:2], 16), int(s[2:4], 16), int(s[4:6], 16)


def rgb_to_hex(rgb: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def named_color_hex(name: str) -> str:
    return rgb_to_hex(NAMED_COLORS[name])


def nearest_named_color(color: str) -> str:
    """Name of the table entry closest to ``color`` in RGB Euclidean distance.

    Ties break alphabetically so the result is deterministic.
    """
    r, g, b = hex_to_rgb(color)
    best_name = ""
    best_dist = None
    for name in sorted(NAMED_COLORS):
        nr, ng, nb = NAMED_COLORS[name]
        dist = (r - nr) ** 2 + (g - ng) ** 2 + (b - nb) ** 2
        if best_dist is None or dist < best_dist:
            best_dist = dist
            best_name = name
    return best_name


def matches_named_color(color: str, query_name: str) -> bool:
    """True when ``color`` reads as ``query_name``: exact named value or nearest."""
    query_name = query_name.lower()
    if query_name not in NAMED_COLORS:
        return False
    if color.lower() == named_color_hex(query_name):
        return True
    return nearest_named_color(color) == query_name


def palette_color(index: int) -> str:
    return CATEGORICAL_PALETTE[index % len(CATEGORICAL_PALETTE)]


def ramp_color(t: float) -> str:
    """Interpolate the sequential ramp at ``t`` in [0, 1] (clamped)."""
    t = min(1.0, max(0.0, t))
    lo = hex_to_rgb(RAMP_LOW)
    hi = hex_to_rgb(RAMP_HIGH)
    return rgb_to_hex(tuple(round(a + (b - a) * t) for a, b in zip(lo, hi)))
