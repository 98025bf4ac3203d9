"""Trace-driven simulation of continuous object detection.

Replays a characterization trace under a policy, charging each frame the
chosen pair's profiled inference latency/energy plus (for the adaptive
policy) model-load costs and a fixed scheduling overhead, then aggregates
the standard report metrics.

Policies:

* ``shift`` -- the adaptive scheduler (confidence graph + context NCC +
  knob scoring), with LRU model loading per accelerator.
* ``single`` -- one fixed (model, accelerator) pair; pays one cold load on
  the first frame, nothing after.
* ``oracle_energy`` / ``oracle_accuracy`` / ``oracle_latency`` --
  clairvoyant per-frame baselines choosing among models whose recorded IoU
  clears 0.5 (all models when none do).  Oracles assume everything is
  preloaded and pay no load or scheduling cost.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .catalog import (
    BoundingBox,
    Catalog,
    CharacterizationTrace,
    DetectionOutcome,
    FrameRecord,
    ModelId,
    Pair,
)
from .confidence_graph import PredictionMap, build_prediction_map
from .errors import ScenarioError
from .images import GrayscaleImage
from .loader import AcceleratorMemory
from .scheduler import Knobs, SchedulerConfig, SchedulerState, schedule

SUCCESS_IOU = 0.5
DEFAULT_OVERHEAD_S = 0.002

_POLICY_KINDS = (
    "shift",
    "single",
    "oracle_energy",
    "oracle_accuracy",
    "oracle_latency",
)


@dataclass(frozen=True)
class Policy:
    kind: str
    pair: Pair | None = None
    config: SchedulerConfig | None = None

    def __post_init__(self) -> None:
        if self.kind not in _POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "single" and self.pair is None:
            raise ValueError("single-model policy requires a (model, accelerator) pair")

    @classmethod
    def shift(cls, config: SchedulerConfig | None = None) -> Policy:
        return cls(kind="shift", config=config)

    @classmethod
    def single(cls, model: ModelId, accelerator: str) -> Policy:
        return cls(kind="single", pair=(model, accelerator))

    @classmethod
    def oracle(cls, objective: str) -> Policy:
        if objective not in ("energy", "accuracy", "latency"):
            raise ValueError(f"unknown oracle objective {objective!r}")
        return cls(kind=f"oracle_{objective}")

    def describe(self) -> str:
        if self.kind == "single":
            assert self.pair is not None
            return f"single:{self.pair[0]}:{self.pair[1]}"
        if self.kind.startswith("oracle_"):
            return "oracle-" + self.kind.removeprefix("oracle_")[0]
        return self.kind


@dataclass(frozen=True)
class FrameResult:
    frame_index: int
    model: ModelId
    accelerator: str
    achieved_iou: float
    confidence: float
    latency_s: float
    energy_j: float
    swap_occurred: bool
    load_time_s: float
    load_energy_j: float


@dataclass(frozen=True)
class SimulationReport:
    policy: str
    frames: int
    avg_iou: float
    avg_time_s: float
    avg_energy_j: float
    avg_time_with_loads_s: float
    avg_energy_with_loads_j: float
    success_rate: float
    non_gpu_fraction: float
    model_swaps: int
    pairs_used: int
    total_load_time_s: float
    total_load_energy_j: float
    per_frame: tuple[FrameResult, ...]
    config: SchedulerConfig | None = None

    def to_dict(self) -> dict:
        doc = {
            "policy": self.policy,
            "frames": self.frames,
            "avg_iou": self.avg_iou,
            "avg_time_s": self.avg_time_s,
            "avg_energy_j": self.avg_energy_j,
            "avg_time_with_loads_s": self.avg_time_with_loads_s,
            "avg_energy_with_loads_j": self.avg_energy_with_loads_j,
            "success_rate": self.success_rate,
            "non_gpu_fraction": self.non_gpu_fraction,
            "model_swaps": self.model_swaps,
            "pairs_used": self.pairs_used,
            "total_load_time_s": self.total_load_time_s,
            "total_load_energy_j": self.total_load_energy_j,
        }
        if self.config is not None:
            doc["config"] = {
                "w_accuracy": self.config.knobs.w_accuracy,
                "w_energy": self.config.knobs.w_energy,
                "w_latency": self.config.knobs.w_latency,
                "accuracy_threshold": self.config.accuracy_threshold,
                "momentum": self.config.momentum,
                "distance_threshold": self.config.distance_threshold,
                "bucket_width": self.config.bucket_width,
            }
        return doc

    def summary_row(self) -> str:
        """Aggregate row in the conventional column order:
        IoU, Time, Energy, Success Rate, Non-GPU, Model Swaps, Pairs Used."""
        return (
            f"{self.policy}: IoU {self.avg_iou:.3f}  Time {self.avg_time_s:.3f} s  "
            f"Energy {self.avg_energy_j:.3f} J  Success {self.success_rate:.1%}  "
            f"Non-GPU {self.non_gpu_fraction:.1%}  Swaps {self.model_swaps}  "
            f"Pairs {self.pairs_used}"
        )


def metrics(
    per_frame: Sequence[FrameResult], gpu_accelerators: frozenset[str]
) -> dict:
    """Aggregate fields recomputable from the per-frame log."""
    if not per_frame:
        raise ValueError("no frame results to aggregate")
    n = len(per_frame)
    return {
        "frames": n,
        "avg_iou": math.fsum(f.achieved_iou for f in per_frame) / n,
        "avg_time_s": math.fsum(f.latency_s for f in per_frame) / n,
        "avg_energy_j": math.fsum(f.energy_j for f in per_frame) / n,
        "avg_time_with_loads_s": math.fsum(
            f.latency_s + f.load_time_s for f in per_frame
        )
        / n,
        "avg_energy_with_loads_j": math.fsum(
            f.energy_j + f.load_energy_j for f in per_frame
        )
        / n,
        "success_rate": sum(f.achieved_iou >= SUCCESS_IOU for f in per_frame) / n,
        "non_gpu_fraction": sum(
            f.accelerator not in gpu_accelerators for f in per_frame
        )
        / n,
        "model_swaps": sum(f.swap_occurred for f in per_frame),
        "pairs_used": len({(f.model, f.accelerator) for f in per_frame}),
        "total_load_time_s": math.fsum(f.load_time_s for f in per_frame),
        "total_load_energy_j": math.fsum(f.load_energy_j for f in per_frame),
    }


def oracle_choose(frame: FrameRecord, catalog: Catalog, objective: str) -> Pair:
    """Clairvoyant per-frame choice among models with recorded IoU >= 0.5.

    When no model qualifies, every model with an outcome is a candidate and
    the objective alone decides.
    """
    if objective not in ("energy", "accuracy", "latency"):
        raise ValueError(f"unknown oracle objective {objective!r}")
    observed = sorted(frame.per_model)
    if not observed:
        raise ValueError(f"frame {frame.frame_index} has no model outcomes")
    qualifying = [m for m in observed if frame.per_model[m].iou >= SUCCESS_IOU]
    candidates = qualifying or observed

    def pairs_of(models: list[ModelId]) -> list[Pair]:
        return [p for p in catalog.profiled_pairs() if p[0] in set(models)]

    pairs = pairs_of(candidates)
    if not pairs:
        pairs = pairs_of(observed)
    if not pairs:
        raise ValueError(
            f"frame {frame.frame_index}: no profiled pair among observed models"
        )
    if objective == "energy":
        key = lambda p: (catalog.profiles[p].avg_energy_j, p)
    elif objective == "latency":
        key = lambda p: (catalog.profiles[p].avg_latency_s, p)
    else:
        key = lambda p: (-frame.per_model[p[0]].iou, p)
    return min(pairs, key=key)


def run(
    trace: CharacterizationTrace,
    catalog: Catalog,
    policy: Policy,
    *,
    scheduler_overhead_s: float = DEFAULT_OVERHEAD_S,
    prediction_map: PredictionMap | None = None,
    prefill: bool = False,
) -> SimulationReport:
    """Replay the trace under `policy` and aggregate the report."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    if policy.kind == "shift":
        per_frame, config = _run_shift(
            trace, catalog, policy, scheduler_overhead_s, prediction_map, prefill
        )
    elif policy.kind == "single":
        per_frame, config = _run_single(trace, catalog, policy), None
    else:
        per_frame, config = _run_oracle(trace, catalog, policy), None
    agg = metrics(per_frame, catalog.gpu_accelerators())
    return SimulationReport(
        policy=policy.describe(),
        per_frame=tuple(per_frame),
        config=config,
        **agg,
    )


def _run_shift(
    trace: CharacterizationTrace,
    catalog: Catalog,
    policy: Policy,
    overhead_s: float,
    prediction_map: PredictionMap | None,
    prefill: bool,
) -> tuple[list[FrameResult], SchedulerConfig]:
    config = policy.config if policy.config is not None else SchedulerConfig()
    pm = prediction_map
    if pm is None:
        pm = build_prediction_map(
            trace, config.bucket_width, config.distance_threshold
        )
    state = SchedulerState(catalog, pm, config)
    memories = {
        name: AcceleratorMemory(name, acc.memory_bytes)
        for name, acc in catalog.accelerators.items()
    }
    if prefill:
        order = sorted(catalog.models)
        for mem in memories.values():
            mem.prefill(catalog, order)

    pair = state.bootstrap().pair
    results: list[FrameResult] = []
    prev_pair: Pair | None = None
    for fr in trace.frames:
        incumbent_out = fr.per_model.get(pair[0])
        confidence = incumbent_out.confidence if incumbent_out is not None else 0.0
        box = incumbent_out.box if incumbent_out is not None else None
        decision = schedule(state, pair, confidence, fr.frame, box)
        pair = decision.pair
        load = memories[pair[1]].request(pair[0], catalog)
        profile = catalog.profile(*pair)
        # A chosen model without trace coverage on this frame scores 0; it
        # penalizes scheduling uncharacterized models instead of erroring.
        chosen_out = fr.per_model.get(pair[0])
        results.append(
            FrameResult(
                frame_index=fr.frame_index,
                model=pair[0],
                accelerator=pair[1],
                achieved_iou=chosen_out.iou if chosen_out is not None else 0.0,
                confidence=chosen_out.confidence if chosen_out is not None else 0.0,
                latency_s=profile.avg_latency_s + overhead_s,
                energy_j=profile.avg_energy_j,
                swap_occurred=prev_pair is not None and pair != prev_pair,
                load_time_s=load.time_cost_s,
                load_energy_j=load.energy_cost_j,
            )
        )
        prev_pair = pair
    return results, config


def _run_single(
    trace: CharacterizationTrace, catalog: Catalog, policy: Policy
) -> list[FrameResult]:
    assert policy.pair is not None
    pair = policy.pair
    if pair not in catalog.profiles:
        raise ValueError(
            f"single-model pair ({pair[0]}, {pair[1]}) is not profiled in the catalog"
        )
    profile = catalog.profiles[pair]
    memory = AcceleratorMemory(pair[1], catalog.accelerators[pair[1]].memory_bytes)
    results: list[FrameResult] = []
    for fr in trace.frames:
        load = memory.request(pair[0], catalog)
        out = fr.per_model.get(pair[0])
        results.append(
            FrameResult(
                frame_index=fr.frame_index,
                model=pair[0],
                accelerator=pair[1],
                achieved_iou=out.iou if out is not None else 0.0,
                confidence=out.confidence if out is not None else 0.0,
                latency_s=profile.avg_latency_s,
                energy_j=profile.avg_energy_j,
                swap_occurred=False,
                load_time_s=load.time_cost_s,
                load_energy_j=load.energy_cost_j,
            )
        )
    return results


def _run_oracle(
    trace: CharacterizationTrace, catalog: Catalog, policy: Policy
) -> list[FrameResult]:
    objective = policy.kind.removeprefix("oracle_")
    results: list[FrameResult] = []
    prev_pair: Pair | None = None
    for fr in trace.frames:
        pair = oracle_choose(fr, catalog, objective)
        profile = catalog.profiles[pair]
        out = fr.per_model.get(pair[0])
        results.append(
            FrameResult(
                frame_index=fr.frame_index,
                model=pair[0],
                accelerator=pair[1],
                achieved_iou=out.iou if out is not None else 0.0,
                confidence=out.confidence if out is not None else 0.0,
                latency_s=profile.avg_latency_s,
                energy_j=profile.avg_energy_j,
                swap_occurred=prev_pair is not None and pair != prev_pair,
                load_time_s=0.0,
                load_energy_j=0.0,
            )
        )
        prev_pair = pair
    return results


# ---------------------------------------------------------------------------
# Parameter sweeps

PARAM_ORDER = (
    "w_accuracy",
    "w_energy",
    "w_latency",
    "accuracy_threshold",
    "momentum",
    "distance_threshold",
    "bucket_width",
)


def expand_grid(grid: Mapping[str, Sequence]) -> list[SchedulerConfig]:
    """Cartesian product of parameter ranges, in canonical parameter order."""
    if not isinstance(grid, Mapping):
        raise ValueError("sweep grid must be a mapping of parameter -> values")
    if not grid:
        raise ValueError("empty sweep grid")
    unknown = sorted(str(k) for k in set(grid) - set(PARAM_ORDER))
    if unknown:
        raise ValueError(f"unknown sweep parameters: {', '.join(unknown)}")
    base = SchedulerConfig()
    defaults = {
        "w_accuracy": base.knobs.w_accuracy,
        "w_energy": base.knobs.w_energy,
        "w_latency": base.knobs.w_latency,
        "accuracy_threshold": base.accuracy_threshold,
        "momentum": base.momentum,
        "distance_threshold": base.distance_threshold,
        "bucket_width": base.bucket_width,
    }
    axes = []
    for name in PARAM_ORDER:
        values = list(grid.get(name, [defaults[name]]))
        if not values:
            raise ValueError(f"sweep parameter {name!r} has no values")
        axes.append(values)
    configs = []
    for combo in itertools.product(*axes):
        params = dict(zip(PARAM_ORDER, combo))
        configs.append(
            SchedulerConfig(
                knobs=Knobs(
                    w_accuracy=float(params["w_accuracy"]),
                    w_energy=float(params["w_energy"]),
                    w_latency=float(params["w_latency"]),
                ),
                accuracy_threshold=float(params["accuracy_threshold"]),
                momentum=int(params["momentum"]),
                distance_threshold=float(params["distance_threshold"]),
                bucket_width=float(params["bucket_width"]),
            )
        )
    return configs


def sweep(
    trace: CharacterizationTrace,
    catalog: Catalog,
    grid: Mapping[str, Sequence],
    *,
    jobs: int = 1,
    scheduler_overhead_s: float = DEFAULT_OVERHEAD_S,
) -> list[tuple[SchedulerConfig, SimulationReport]]:
    """One shift run per grid configuration, in deterministic order."""
    configs = expand_grid(grid)
    # Prediction maps depend only on (bucket_width, distance_threshold);
    # build each needed combination once, up front.
    maps: dict[tuple[float, float], PredictionMap] = {}
    for cfg in configs:
        key = (cfg.bucket_width, cfg.distance_threshold)
        if key not in maps:
            maps[key] = build_prediction_map(trace, *key)

    def one(cfg: SchedulerConfig) -> SimulationReport:
        return run(
            trace,
            catalog,
            Policy.shift(cfg),
            scheduler_overhead_s=scheduler_overhead_s,
            prediction_map=maps[(cfg.bucket_width, cfg.distance_threshold)],
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(one, configs))
    else:
        reports = [one(cfg) for cfg in configs]
    return list(zip(configs, reports))


def sweep_correlations(
    results: Sequence[tuple[SchedulerConfig, SimulationReport]],
) -> dict[str, dict[str, float]]:
    """Spearman rank correlation of each varied parameter against the
    achieved IoU, consumed energy, and latency (load costs included)."""
    if not results:
        raise ValueError("no sweep results to correlate")

    def param_values(name: str) -> list[float]:
        out = []
        for cfg, _ in results:
            if name == "w_accuracy":
                out.append(cfg.knobs.w_accuracy)
            elif name == "w_energy":
                out.append(cfg.knobs.w_energy)
            elif name == "w_latency":
                out.append(cfg.knobs.w_latency)
            else:
                out.append(float(getattr(cfg, name)))
        return out

    responses = {
        "iou": [rep.avg_iou for _, rep in results],
        "energy": [rep.avg_energy_with_loads_j for _, rep in results],
        "latency": [rep.avg_time_with_loads_s for _, rep in results],
    }
    summary: dict[str, dict[str, float]] = {}
    for name in PARAM_ORDER:
        xs = param_values(name)
        if len(set(xs)) < 2:
            continue
        summary[name] = {
            metric: float(_scipy_stats.spearmanr(xs, ys).statistic)
            for metric, ys in responses.items()
        }
    return summary


# ---------------------------------------------------------------------------
# Synthetic trace generation


@dataclass(frozen=True)
class ModelBehavior:
    conf_mean: float
    conf_sigma: float
    iou_mean: float
    iou_sigma: float


@dataclass(frozen=True)
class Segment:
    frames: int
    models: Mapping[ModelId, ModelBehavior]
    texture_seed: int | None = None


@dataclass(frozen=True)
class Scenario:
    segments: tuple[Segment, ...]
    width: int = 64
    height: int = 64
    emit_frames: bool = True


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    width = int(doc.get("width", 64))
    height = int(doc.get("height", 64))
    if width < 8 or height < 8:
        raise ScenarioError("width/height must be >= 8")
    raw_segments = doc.get("segments")
    if not raw_segments:
        raise ScenarioError("segments must be a non-empty list")
    segments = []
    for i, raw in enumerate(raw_segments):
        where = f"segments[{i}]"
        try:
            frames = int(raw["frames"])
        except (KeyError, TypeError, ValueError):
            raise ScenarioError(f"{where}.frames must be an integer") from None
        if frames < 1:
            raise ScenarioError(f"{where}.frames must be >= 1")
        raw_models = raw.get("models")
        if not raw_models:
            raise ScenarioError(f"{where}.models must be a non-empty mapping")
        models = {}
        for name, params in raw_models.items():
            if not name:
                raise ScenarioError(f"{where}.models has an empty model name")
            for field_name in ("conf_mean", "conf_sigma", "iou_mean", "iou_sigma"):
                if field_name not in params:
                    raise ScenarioError(
                        f"{where}.models[{name!r}] missing {field_name}"
                    )
            behavior = ModelBehavior(
                conf_mean=float(params["conf_mean"]),
                conf_sigma=float(params["conf_sigma"]),
                iou_mean=float(params["iou_mean"]),
                iou_sigma=float(params["iou_sigma"]),
            )
            for field_name in ("conf_mean", "iou_mean"):
                v = getattr(behavior, field_name)
                if not (0.0 <= v <= 1.0):
                    raise ScenarioError(
                        f"{where}.models[{name!r}].{field_name} outside [0, 1]"
                    )
            for field_name in ("conf_sigma", "iou_sigma"):
                if getattr(behavior, field_name) < 0:
                    raise ScenarioError(
                        f"{where}.models[{name!r}].{field_name} must be >= 0"
                    )
            models[name] = behavior
        texture_seed = raw.get("texture_seed")
        segments.append(
            Segment(
                frames=frames,
                models=models,
                texture_seed=None if texture_seed is None else int(texture_seed),
            )
        )
    return Scenario(
        segments=tuple(segments),
        width=width,
        height=height,
        emit_frames=bool(doc.get("emit_frames", True)),
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def demo_scenario() -> Scenario:
    """The bundled two-context scenario used by the demos and tests."""
    text = resources.files("odsched.data").joinpath("demo_scenario.json").read_text()
    return scenario_from_dict(json.loads(text))


def _texture(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """Smooth, segment-specific background: two random sinusoidal gratings."""
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    fx1, fy1, fx2, fy2 = rng.uniform(0.02, 0.12, size=4)
    p1, p2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
    return (
        127.5
        + 55.0 * np.sin(2.0 * np.pi * (fx1 * x + fy1 * y) + p1)
        + 45.0 * np.sin(2.0 * np.pi * (fx2 * x - fy2 * y) + p2)
    )


def _offset_for_iou(target_iou: float, box_w: float) -> float:
    """Horizontal shift of a same-size box achieving `target_iou` overlap."""
    u = 2.0 * target_iou / (1.0 + target_iou)
    return box_w * (1.0 - u)


def gen_trace(scenario: Scenario, seed: int) -> CharacterizationTrace:
    """Deterministic synthetic trace with per-segment context shifts.

    Segment boundaries change the frame texture (so frame NCC drops) and the
    per-model confidence/IoU levels.  Detection boxes are placed relative to
    the ground truth so their geometric overlap roughly tracks the sampled
    IoU; the recorded IoU value is authoritative for scoring either way.
    """
    if seed < 0:
        raise ValueError("seed must be >= 0")
    rng = np.random.default_rng(seed)
    width, height = scenario.width, scenario.height
    box_w = max(4.0, width / 3.0)
    box_h = max(4.0, height / 3.0)

    frames: list[FrameRecord] = []
    index = 0
    for seg_no, seg in enumerate(scenario.segments):
        texture_seed = seg.texture_seed if seg.texture_seed is not None else seg_no
        base = _texture(np.random.default_rng([seed, texture_seed]), height, width)
        # Slowly wandering ground-truth box, kept inside the frame.
        cx = rng.uniform(box_w / 2.0 + 1.0, width - box_w / 2.0 - 1.0)
        cy = rng.uniform(box_h / 2.0 + 1.0, height - box_h / 2.0 - 1.0)
        drift = rng.uniform(-0.05, 0.05, size=2)
        for _ in range(seg.frames):
            image = None
            if scenario.emit_frames:
                noise = rng.normal(0.0, 2.0, size=(height, width))
                pixels = np.clip(np.rint(base + noise), 0.0, 255.0)
                image = GrayscaleImage(pixels)
            cx = min(max(cx + drift[0], box_w / 2.0), width - box_w / 2.0)
            cy = min(max(cy + drift[1], box_h / 2.0), height - box_h / 2.0)
            gt = BoundingBox(
                x_min=round(cx - box_w / 2.0, 3),
                y_min=round(cy - box_h / 2.0, 3),
                x_max=round(cx + box_w / 2.0, 3),
                y_max=round(cy + box_h / 2.0, 3),
            )
            detections: dict[ModelId, DetectionOutcome] = {}
            for m_idx, model in enumerate(sorted(seg.models)):
                behavior = seg.models[model]
                conf = round(
                    float(np.clip(rng.normal(behavior.conf_mean, behavior.conf_sigma), 0.0, 1.0)),
                    6,
                )
                iou_val = round(
                    float(np.clip(rng.normal(behavior.iou_mean, behavior.iou_sigma), 0.0, 1.0)),
                    6,
                )
                box = None
                if iou_val > 0.0:
                    direction = 1.0 if m_idx % 2 == 0 else -1.0
                    dx = direction * _offset_for_iou(iou_val, box_w)
                    x_min = min(max(gt.x_min + dx, 0.0), width - box_w)
                    box = BoundingBox(
                        x_min=round(x_min, 3),
                        y_min=gt.y_min,
                        x_max=round(x_min + box_w, 3),
                        y_max=gt.y_max,
                    )
                detections[model] = DetectionOutcome(
                    confidence=conf, iou=iou_val, box=box
                )
            frames.append(
                FrameRecord(
                    frame_index=index,
                    per_model=detections,
                    ground_truth=gt,
                    frame=image,
                )
            )
            index += 1
    return CharacterizationTrace(frames=tuple(frames))


# ---------------------------------------------------------------------------
# Output writers


def write_report(report: SimulationReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_frames_csv(report: SimulationReport, path: str | Path) -> None:
    lines = ["frame,model,accelerator,iou,confidence,latency_s,energy_j,swap"]
    for f in report.per_frame:
        lines.append(
            f"{f.frame_index},{f.model},{f.accelerator},{f.achieved_iou},"
            f"{f.confidence},{f.latency_s},{f.energy_j},{int(f.swap_occurred)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_timeline_csv(report: SimulationReport, path: str | Path) -> None:
    """Per-frame timeline (frame vs chosen pair, IoU, energy) for plotting."""
    lines = ["frame,model,accelerator,iou,energy_j"]
    for f in report.per_frame:
        lines.append(
            f"{f.frame_index},{f.model},{f.accelerator},{f.achieved_iou},{f.energy_j}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_csv(
    results: Sequence[tuple[SchedulerConfig, SimulationReport]], path: str | Path
) -> None:
    header = list(PARAM_ORDER) + [
        "avg_iou",
        "avg_time_s",
        "avg_energy_j",
        "avg_time_with_loads_s",
        "avg_energy_with_loads_j",
        "success_rate",
        "non_gpu_fraction",
        "model_swaps",
        "pairs_used",
    ]
    lines = [",".join(header)]
    for cfg, rep in results:
        row = [
            cfg.knobs.w_accuracy,
            cfg.knobs.w_energy,
            cfg.knobs.w_latency,
            cfg.accuracy_threshold,
            cfg.momentum,
            cfg.distance_threshold,
            cfg.bucket_width,
            rep.avg_iou,
            rep.avg_time_s,
            rep.avg_energy_j,
            rep.avg_time_with_loads_s,
            rep.avg_energy_with_loads_j,
            rep.success_rate,
            rep.non_gpu_fraction,
            rep.model_swaps,
            rep.pairs_used,
        ]
        lines.append(",".join(str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
