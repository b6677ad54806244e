"""Deterministic CSV formatting shared by the trace and grid exporters."""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

NA = "NA"


def fmt_real(x: Optional[float]) -> str:
    """Format a real at 17 significant digits; None/NaN become ``NA``."""
    if x is None:
        return NA
    if isinstance(x, float) and math.isnan(x):
        return NA
    return format(float(x), ".17g")


def render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"
