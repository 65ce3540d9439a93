"""Result records shared by the classifier and parametric detection paths."""

from __future__ import annotations

from dataclasses import dataclass

from .core import Segmentation

__all__ = ["SplitRecord", "DetectionResult"]


@dataclass(frozen=True)
class SplitRecord:
    """One visited segment: where the search looked and what it decided.

    The classifier path fills ``p_value`` from the pseudo-permutation test;
    the parametric change-in-mean path decides by gain thresholding and
    leaves ``p_value`` as None.
    """

    u: int
    v: int
    guesses: tuple[int, ...]
    s1: int | None
    s_hat: int | None
    step1_max_gain: float
    best_gain: float
    p_value: float | None
    accepted: bool


@dataclass(frozen=True)
class DetectionResult:
    """Accepted segmentation plus the full log of visited segments."""

    segmentation: Segmentation
    split_log: tuple[SplitRecord, ...]
    engine_fits: int = 0

    @property
    def segments_visited(self) -> int:
        return len(self.split_log)

    @property
    def changepoints(self) -> tuple[int, ...]:
        return self.segmentation.changepoints
