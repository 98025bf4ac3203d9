"""Confidence graph: predict every model's accuracy from one confidence score.

Built offline from a characterization trace in five stages:

1. Bucket each model's confidence range into nodes carrying the mean IoU of
   the frames that landed in the bucket.
2. For every frame, add (or increment) an edge between each pair of
   distinct-model nodes active on that frame.
3. Normalize edge weights per node and invert them, so an arc leaving a node
   along its strongest edge costs 0 and weaker edges cost up to 1.
4. From each node, collect all nodes within a cumulative arc-cost threshold
   (cheapest-path distances).
5. Collapse multiple nodes of the same model into one prediction via an
   inverse-distance weighted average of their expected accuracies.

The resulting map is queried at runtime with (model, confidence) and answers
with accuracy predictions for every model seen nearby during
characterization.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .catalog import CharacterizationTrace, ModelId

# Inverse-distance weighting floor; keeps the distance-0 self node finite
# but dominant.
EPSILON = 1e-6

NodeKey = tuple[ModelId, int]


@dataclass(frozen=True)
class Bucket:
    """One model's confidence interval [lo, hi); the last bucket is closed."""

    model: ModelId
    index: int
    lo: float
    hi: float


@dataclass(frozen=True)
class GraphNode:
    bucket: Bucket
    expected_accuracy: float
    sample_count: int

    @property
    def key(self) -> NodeKey:
        return (self.bucket.model, self.bucket.index)


@dataclass(frozen=True)
class Prediction:
    model: ModelId
    accuracy: float
    distance: float


@dataclass(frozen=True)
class CoGraph:
    """Raw co-occurrence graph; edge keys are sorted (undirected)."""

    bucket_width: float
    nodes: Mapping[NodeKey, GraphNode]
    edges: Mapping[tuple[NodeKey, NodeKey], int]


@dataclass(frozen=True)
class CostGraph:
    """Directed traversal costs in [0, 1]; cheaper means more co-occurrence."""

    bucket_width: float
    nodes: Mapping[NodeKey, GraphNode]
    arcs: Mapping[tuple[NodeKey, NodeKey], float]

    def adjacency(self) -> dict[NodeKey, list[tuple[NodeKey, float]]]:
        adj: dict[NodeKey, list[tuple[NodeKey, float]]] = {k: [] for k in self.nodes}
        for (src, dst), cost in sorted(self.arcs.items()):
            adj[src].append((dst, cost))
        return adj


@dataclass(frozen=True)
class PredictionMap:
    """Runtime lookup: (model, confidence bucket) -> predictions for all models."""

    bucket_width: float
    distance_threshold: float
    nodes: Mapping[NodeKey, GraphNode]
    arcs: Mapping[tuple[NodeKey, NodeKey], float]
    entries: Mapping[NodeKey, tuple[Prediction, ...]]

    def models(self) -> tuple[ModelId, ...]:
        return tuple(sorted({model for model, _ in self.nodes}))

    def populated_buckets(self, model: ModelId) -> tuple[int, ...]:
        return tuple(sorted(idx for m, idx in self.nodes if m == model))


def bucket_count(bucket_width: float) -> int:
    if not (0.0 < bucket_width <= 1.0):
        raise ValueError(f"bucket width {bucket_width} outside (0, 1]")
    return math.ceil(round(1.0 / bucket_width, 9))


def bucket_index(confidence: float, bucket_width: float) -> int:
    """Index of the half-open bucket containing `confidence`.

    The quotient is rounded to 9 decimals before flooring so that scores
    sitting exactly on a decimal boundary (0.7 / 0.1) land in the upper
    bucket despite binary-float division error.
    """
    if not (0.0 <= confidence <= 1.0):
        raise ValueError(f"confidence {confidence} outside [0, 1]")
    n = bucket_count(bucket_width)
    idx = math.floor(round(confidence / bucket_width, 9))
    return min(idx, n - 1)


def bucket_for(model: ModelId, confidence: float, bucket_width: float) -> Bucket:
    idx = bucket_index(confidence, bucket_width)
    return _bucket(model, idx, bucket_width)


def _bucket(model: ModelId, idx: int, bucket_width: float) -> Bucket:
    lo = round(idx * bucket_width, 9)
    hi = min(round((idx + 1) * bucket_width, 9), 1.0)
    return Bucket(model=model, index=idx, lo=lo, hi=hi)


def build_cograph(trace: CharacterizationTrace, bucket_width: float) -> CoGraph:
    """Stage 1+2: bucket statistics and pairwise co-occurrence counts."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    bucket_count(bucket_width)  # validates width
    iou_sum: dict[NodeKey, float] = {}
    samples: dict[NodeKey, int] = {}
    edges: dict[tuple[NodeKey, NodeKey], int] = {}
    for fr in trace.frames:
        active: list[NodeKey] = []
        for model in sorted(fr.per_model):
            out = fr.per_model[model]
            key = (model, bucket_index(out.confidence, bucket_width))
            iou_sum[key] = iou_sum.get(key, 0.0) + out.iou
            samples[key] = samples.get(key, 0) + 1
            active.append(key)
        for i, a in enumerate(active):
            for b in active[i + 1 :]:
                edge = (a, b) if a <= b else (b, a)
                edges[edge] = edges.get(edge, 0) + 1
    nodes = {
        key: GraphNode(
            bucket=_bucket(key[0], key[1], bucket_width),
            expected_accuracy=iou_sum[key] / samples[key],
            sample_count=samples[key],
        )
        for key in sorted(samples)
    }
    return CoGraph(bucket_width=bucket_width, nodes=nodes, edges=edges)


def prune_sparse_nodes(g: CoGraph, min_samples: int) -> CoGraph:
    """Drop nodes observed fewer than `min_samples` times, with their edges."""
    if min_samples <= 1:
        return g
    keep = {k: n for k, n in g.nodes.items() if n.sample_count >= min_samples}
    edges = {e: w for e, w in g.edges.items() if e[0] in keep and e[1] in keep}
    return CoGraph(bucket_width=g.bucket_width, nodes=keep, edges=edges)


def normalize_invert(g: CoGraph) -> CostGraph:
    """Stage 3: per-node normalization, then inversion to traversal costs.

    For a node n with incident edge weights w_1..w_k, the arc leaving n over
    edge i costs 1 - w_i / max(w).  Normalizing within each node's own edges
    keeps a globally popular hub from flattening everyone else's costs, and
    makes the two directions of one undirected edge cost different amounts.
    """
    max_incident: dict[NodeKey, int] = {}
    for (a, b), w in g.edges.items():
        if w < 1:
            raise ValueError(f"edge {a}->{b} has non-positive weight {w}")
        max_incident[a] = max(max_incident.get(a, 0), w)
        max_incident[b] = max(max_incident.get(b, 0), w)
    arcs: dict[tuple[NodeKey, NodeKey], float] = {}
    for (a, b), w in g.edges.items():
        arcs[(a, b)] = 1.0 - w / max_incident[a]
        arcs[(b, a)] = 1.0 - w / max_incident[b]
    return CostGraph(bucket_width=g.bucket_width, nodes=dict(g.nodes), arcs=arcs)


def neighborhood(
    cg: CostGraph, start: NodeKey, distance_threshold: float
) -> dict[NodeKey, float]:
    """Stage 4: all nodes within `distance_threshold` cumulative arc cost.

    Returns minimum distances, including the start node at 0.  Implemented
    as uniform-cost search; with non-negative arc costs this equals the
    cheapest simple path per node.
    """
    if start not in cg.nodes:
        raise KeyError(f"start node {start} not in graph")
    if distance_threshold < 0:
        raise ValueError("distance threshold must be >= 0")
    adj = cg.adjacency()
    dist: dict[NodeKey, float] = {}
    heap: list[tuple[float, NodeKey]] = [(0.0, start)]
    while heap:
        d, key = heapq.heappop(heap)
        if key in dist:
            continue
        dist[key] = d
        for nxt, cost in adj[key]:
            if nxt in dist:
                continue
            nd = d + cost
            if nd <= distance_threshold:
                heapq.heappush(heap, (nd, nxt))
    return dist


def consolidate(neigh: Iterable[tuple[GraphNode, float]]) -> tuple[Prediction, ...]:
    """Stage 5: one prediction per model via inverse-distance weighting.

    predicted = sum(acc_i / (d_i + eps)) / sum(1 / (d_i + eps)) over that
    model's nodes; the reported distance is the nearest node's.  Input order
    does not matter: terms are accumulated in a canonical ordering.
    """
    ordered = sorted(neigh, key=lambda nd: (nd[0].key, nd[1]))
    num: dict[ModelId, float] = {}
    den: dict[ModelId, float] = {}
    nearest: dict[ModelId, float] = {}
    for node, d in ordered:
        model = node.bucket.model
        w = 1.0 / (d + EPSILON)
        num[model] = num.get(model, 0.0) + w * node.expected_accuracy
        den[model] = den.get(model, 0.0) + w
        nearest[model] = min(nearest.get(model, math.inf), d)
    return tuple(
        Prediction(model=m, accuracy=num[m] / den[m], distance=nearest[m])
        for m in sorted(num)
    )


def build_prediction_map(
    trace: CharacterizationTrace,
    bucket_width: float = 0.1,
    distance_threshold: float = 0.5,
    min_samples: int = 1,
) -> PredictionMap:
    """Run all stages over a trace and compile the runtime lookup map."""
    cograph = prune_sparse_nodes(build_cograph(trace, bucket_width), min_samples)
    cost = normalize_invert(cograph)
    entries: dict[NodeKey, tuple[Prediction, ...]] = {}
    for key in sorted(cost.nodes):
        neigh = neighborhood(cost, key, distance_threshold)
        entries[key] = consolidate((cost.nodes[k], d) for k, d in neigh.items())
    return PredictionMap(
        bucket_width=bucket_width,
        distance_threshold=distance_threshold,
        nodes=dict(cost.nodes),
        arcs=dict(cost.arcs),
        entries=entries,
    )


def predict(
    pm: PredictionMap, model: ModelId, confidence: float
) -> tuple[Prediction, ...]:
    """Look up the predictions keyed by `model`'s bucket for `confidence`.

    A bucket that collected no characterization samples falls back to the
    same model's populated bucket with the nearest midpoint (ties toward
    the lower bucket), so any legal confidence yields an answer.
    """
    populated = pm.populated_buckets(model)
    if not populated:
        raise KeyError(f"model {model!r} not present in prediction map")
    idx = bucket_index(confidence, pm.bucket_width)
    if (model, idx) not in pm.entries:
        idx = min(
            populated,
            key=lambda i: (abs(_midpoint(i, pm.bucket_width) - confidence), i),
        )
    return pm.entries[(model, idx)]


def _midpoint(idx: int, bucket_width: float) -> float:
    b = _bucket("", idx, bucket_width)
    # Quantized like the bucket bounds, so decimal-grid queries tie exactly.
    return round((b.lo + b.hi) / 2.0, 9)


# ---------------------------------------------------------------------------
# Serialization (build-graph output, simulate input)


def prediction_map_to_dict(pm: PredictionMap) -> dict:
    return {
        "bucket_width": pm.bucket_width,
        "distance_threshold": pm.distance_threshold,
        "nodes": [
            {
                "model": n.bucket.model,
                "bucket": n.bucket.index,
                "lo": n.bucket.lo,
                "hi": n.bucket.hi,
                "expected_accuracy": n.expected_accuracy,
                "samples": n.sample_count,
            }
            for _, n in sorted(pm.nodes.items())
        ],
        "arcs": [
            {"from": list(src), "to": list(dst), "cost": cost}
            for (src, dst), cost in sorted(pm.arcs.items())
        ],
        "entries": [
            {
                "node": list(key),
                "predictions": [
                    {"model": p.model, "accuracy": p.accuracy, "distance": p.distance}
                    for p in preds
                ],
            }
            for key, preds in sorted(pm.entries.items())
        ],
    }


def prediction_map_from_dict(doc: dict) -> PredictionMap:
    try:
        width = float(doc["bucket_width"])
        threshold = float(doc["distance_threshold"])
        nodes = {
            (str(n["model"]), int(n["bucket"])): GraphNode(
                bucket=_bucket(str(n["model"]), int(n["bucket"]), width),
                expected_accuracy=float(n["expected_accuracy"]),
                sample_count=int(n["samples"]),
            )
            for n in doc["nodes"]
        }
        arcs = {
            ((str(a["from"][0]), int(a["from"][1])),
             (str(a["to"][0]), int(a["to"][1]))): float(a["cost"])
            for a in doc["arcs"]
        }
        entries = {
            (str(e["node"][0]), int(e["node"][1])): tuple(
                Prediction(
                    model=str(p["model"]),
                    accuracy=float(p["accuracy"]),
                    distance=float(p["distance"]),
                )
                for p in e["predictions"]
            )
            for e in doc["entries"]
        }
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed prediction map document: {exc}") from exc
    missing = sorted(set(nodes) - set(entries))
    if missing:
        raise ValueError(f"prediction map node {missing[0]} has no entry")
    return PredictionMap(
        bucket_width=width,
        distance_threshold=threshold,
        nodes=nodes,
        arcs=arcs,
        entries=entries,
    )


def save_prediction_map(pm: PredictionMap, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(prediction_map_to_dict(pm), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_prediction_map(path: str | Path) -> PredictionMap:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read prediction map {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"prediction map {path} is not valid JSON: {exc}") from exc
    return prediction_map_from_dict(doc)
