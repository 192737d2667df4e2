"""Independent-click user model over the top of a ranked list."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..engine import RankedList
from .scenario import DwellModel


def simulate_user_clicks(shown: RankedList, relevance: Mapping[str, float], rng: np.random.Generator,
                         critical: bool = False, dwell: DwellModel | None = None, top_k: int = 10,
                         irrelevant_threshold: float = 0.2) -> tuple[list[str], list[float]]:
    """Click each of the first ``top_k`` documents with its relevance probability.

    In a critical situation the user ignores anything whose relevance is
    below ``irrelevant_threshold``. Returns the clicked ids in rank order and
    the reading time of each click, in minutes.
    """
    dwell = dwell or DwellModel()
    clicked: list[str] = []
    times: list[float] = []
    for entry in shown.entries[:top_k]:
        p = relevance.get(entry.doc_id, 0.0)
        if critical and p < irrelevant_threshold:
            p = 0.0
        # one draw per position keeps the stream aligned across policies
        u = rng.random()
        if u < p:
            clicked.append(entry.doc_id)
            times.append(dwell.draw(p, rng))
    return clicked, times
