"""Per-frame model/accelerator selection.

Each frame, the scheduler first checks whether the context is stable: the
min of frame NCC and detection-box NCC, multiplied by the current model's
confidence, must clear the accuracy threshold.  If it does, the incumbent
pair stays and nothing else runs.  Otherwise the confidence graph predicts
every model's accuracy, the predictions are smoothed over a momentum window,
models meeting the threshold form the valid set (falling back to all
predicted models when none qualify), and every profiled (model, accelerator)
pair from the valid set is scored:

    score = R[model] * w_accuracy
          + energy_score[pair] * w_energy
          + latency_score[pair] * w_latency

Energy and latency scores are min-max normalized over the catalog's profiled
pairs and inverted, so bigger is better on every axis and a plain argmax
selects the winner.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .catalog import BoundingBox, Catalog, ModelId, Pair
from .confidence_graph import Prediction, PredictionMap, predict
from .context import FrameStats, bbox_similarity, ncc_cached
from .images import GrayscaleImage


@dataclass(frozen=True)
class Knobs:
    """Relative weights of the three scheduling objectives."""

    w_accuracy: float = 1.0
    w_energy: float = 0.5
    w_latency: float = 0.5

    def __post_init__(self) -> None:
        weights = (self.w_accuracy, self.w_energy, self.w_latency)
        if any(w < 0 for w in weights):
            raise ValueError(f"knob weights must be non-negative, got {weights}")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one knob weight must be positive")


@dataclass(frozen=True)
class SchedulerConfig:
    knobs: Knobs = Knobs()
    accuracy_threshold: float = 0.25
    momentum: int = 30
    distance_threshold: float = 0.5
    bucket_width: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 <= self.accuracy_threshold <= 1.0):
            raise ValueError(
                f"accuracy threshold {self.accuracy_threshold} outside [0, 1]"
            )
        if self.momentum < 1:
            raise ValueError(f"momentum {self.momentum} must be >= 1")
        if self.distance_threshold < 0:
            raise ValueError("distance threshold must be >= 0")
        if not (0.0 < self.bucket_width <= 1.0):
            raise ValueError(f"bucket width {self.bucket_width} outside (0, 1]")


@dataclass(frozen=True)
class NormalizedCosts:
    """Inverted min-max scores per profiled pair: cheapest pair scores 1."""

    energy_score: Mapping[Pair, float]
    latency_score: Mapping[Pair, float]


@dataclass(frozen=True)
class Decision:
    pair: Pair
    rescheduled: bool
    similarity: float
    scores: Mapping[Pair, float] = field(default_factory=dict)
    predictions: tuple[Prediction, ...] = ()


def normalize_costs(catalog: Catalog) -> NormalizedCosts:
    """Precompute bigger-is-better energy/latency scores for every pair.

    A degenerate axis (single pair, or all values equal) scores 1 for
    everyone rather than dividing by zero.
    """
    pairs = catalog.profiled_pairs()
    if not pairs:
        raise ValueError("catalog has no profiled pairs to normalize")

    def axis(values: dict[Pair, float]) -> dict[Pair, float]:
        lo, hi = min(values.values()), max(values.values())
        if hi <= lo:
            return {p: 1.0 for p in values}
        return {p: 1.0 - (v - lo) / (hi - lo) for p, v in values.items()}

    return NormalizedCosts(
        energy_score=axis({p: catalog.profiles[p].avg_energy_j for p in pairs}),
        latency_score=axis({p: catalog.profiles[p].avg_latency_s for p in pairs}),
    )


def valid_set(averages: Mapping[ModelId, float], threshold: float) -> set[ModelId]:
    """Models whose averaged prediction meets the threshold; all if none do."""
    if not averages:
        raise ValueError("no averaged predictions to filter")
    valid = {m for m, r in averages.items() if r >= threshold}
    return valid if valid else set(averages)


def update_momentum(
    buffers: dict[ModelId, deque[float]],
    predictions: tuple[Prediction, ...],
    momentum: int,
) -> dict[ModelId, float]:
    """Append predictions to per-model windows and return the window means."""
    averages: dict[ModelId, float] = {}
    for pred in predictions:
        buf = buffers.get(pred.model)
        if buf is None:
            buf = buffers[pred.model] = deque(maxlen=momentum)
        buf.append(pred.accuracy)
        averages[pred.model] = sum(buf) / len(buf)
    return averages


def score_candidates(
    averages: Mapping[ModelId, float],
    valid: set[ModelId],
    costs: NormalizedCosts,
    knobs: Knobs,
    catalog: Catalog,
) -> dict[Pair, float]:
    scores: dict[Pair, float] = {}
    for pair in catalog.profiled_pairs():
        model = pair[0]
        if model not in valid or model not in averages:
            continue
        scores[pair] = (
            averages[model] * knobs.w_accuracy
            + costs.energy_score[pair] * knobs.w_energy
            + costs.latency_score[pair] * knobs.w_latency
        )
    return scores


def best_pair(scores: Mapping[Pair, float]) -> Pair:
    """Argmax with deterministic ties: lexicographic (model, accelerator)."""
    if not scores:
        raise ValueError("no candidate pairs to choose from")
    return min(scores, key=lambda p: (-scores[p], p))


class SchedulerState:
    """Mutable per-stream scheduling state (single-owner, not thread-safe)."""

    def __init__(
        self,
        catalog: Catalog,
        prediction_map: PredictionMap,
        config: SchedulerConfig | None = None,
    ) -> None:
        self.catalog = catalog
        self.prediction_map = prediction_map
        self.config = config if config is not None else SchedulerConfig()
        self.costs = normalize_costs(catalog)
        self.buffers: dict[ModelId, deque[float]] = {}
        self.current_pair: Pair | None = None
        self._last_frame: FrameStats | None = None
        self._last_box: BoundingBox | None = None

    def bootstrap(self) -> Decision:
        """Choose the starting pair before the first frame.

        With no previous frame the similarity is 0, so this is a full
        scheduling pass seeded with each model's own expected accuracy at
        its highest populated confidence bucket.
        """
        pm = self.prediction_map
        seeds = []
        for model in pm.models():
            top = pm.populated_buckets(model)[-1]
            own = next(p for p in pm.entries[(model, top)] if p.model == model)
            seeds.append(Prediction(model=model, accuracy=own.accuracy, distance=0.0))
        chosen, scores = self._select(tuple(seeds))
        return Decision(
            pair=chosen,
            rescheduled=True,
            similarity=0.0,
            scores=scores,
            predictions=tuple(seeds),
        )

    def _select(
        self, predictions: tuple[Prediction, ...]
    ) -> tuple[Pair, dict[Pair, float]]:
        cfg = self.config
        averages = update_momentum(self.buffers, predictions, cfg.momentum)
        valid = valid_set(averages, cfg.accuracy_threshold)
        scores = score_candidates(averages, valid, self.costs, cfg.knobs, self.catalog)
        if not scores:
            # Valid models may lack profiled pairs; widen to every predicted
            # model before giving up.
            scores = score_candidates(
                averages, set(averages), self.costs, cfg.knobs, self.catalog
            )
        if not scores:
            raise ValueError("no profiled (model, accelerator) pair among predictions")
        chosen = best_pair(scores)
        self.current_pair = chosen
        return chosen, scores


def schedule(
    state: SchedulerState,
    pair: Pair,
    confidence: float,
    frame: GrayscaleImage | None = None,
    box: BoundingBox | None = None,
) -> Decision:
    """Decide the pair for this frame given the incumbent pair's outcome.

    `confidence` and `box` are the incumbent model's result on `frame`; a
    frame with no detection passes confidence 0 and no box, which forces a
    full scheduling pass at any positive accuracy threshold.
    """
    if not (0.0 <= confidence <= 1.0):
        raise ValueError(f"confidence {confidence} outside [0, 1]")
    cfg = state.config
    cur = FrameStats(frame) if frame is not None else None

    if state._last_frame is None or cur is None:
        sim_score = 0.0
    else:
        frame_term = ncc_cached(state._last_frame, cur)
        if box is None or state._last_box is None:
            box_term = 0.0
        else:
            box_term = bbox_similarity(
                state._last_frame.image, state._last_box, cur.image, box
            )
        sim_score = min(frame_term, box_term)

    # The next call compares against this frame and detection, whichever
    # branch we take below.
    if cur is not None:
        state._last_frame = cur
    state._last_box = box

    if sim_score * confidence >= cfg.accuracy_threshold:
        state.current_pair = pair
        return Decision(pair=pair, rescheduled=False, similarity=sim_score)

    predictions = predict(state.prediction_map, pair[0], confidence)
    chosen, scores = state._select(predictions)
    return Decision(
        pair=chosen,
        rescheduled=True,
        similarity=sim_score,
        scores=scores,
        predictions=predictions,
    )
