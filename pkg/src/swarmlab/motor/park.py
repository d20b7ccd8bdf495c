"""Three-phase to two-axis (stationary frame) transforms."""
from __future__ import annotations

import math

import numpy as np

_SQRT3 = math.sqrt(3.0)


def park_forward(v1, v2, v3):
    """(v1, v2, v3) -> (v_sd, v_sq); the zero-sequence part is dropped."""
    v1, v2, v3 = (np.asarray(v, dtype=float) for v in (v1, v2, v3))
    return (2.0 * v1 - v2 - v3) / 3.0, (v2 - v3) / _SQRT3


def park_inverse(i_sd, i_sq):
    """(i_sd, i_sq) -> (i1, i2, i3) with no zero-sequence component."""
    i_sd = np.asarray(i_sd, dtype=float)
    i_sq = np.asarray(i_sq, dtype=float)
    h = 0.5 * _SQRT3 * i_sq
    return i_sd, -0.5 * i_sd + h, -0.5 * i_sd - h
