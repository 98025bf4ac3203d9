"""Model/accelerator catalog and characterization traces.

The catalog describes which detection models exist, which accelerators can
run them, and the measured per-pair performance traits (latency, power,
energy, memory footprint, load cost).  A characterization trace records, per
video frame, each model's confidence score and achieved IoU, optionally with
the ground-truth box and the grayscale frame itself.

File formats
------------
Catalog: a single JSON document::

    {
      "energy_tolerance": 0.05,            # optional, default 0.05
      "accelerators": [{"name": "gpu", "memory_bytes": 600000000,
                        "gpu": true}, ...],
      "models": ["yolov7", ...],
      "compatibility": {"yolov7": ["gpu", "dla"], ...},
      "profiles": [{"model": "yolov7", "accelerator": "gpu",
                    "avg_latency_s": 0.130, "avg_power_w": 15.14,
                    "avg_energy_j": 1.968, "memory_bytes": 75000000,
                    "load_time_s": 0.35, "load_energy_j": 2.1}, ...]
    }

Trace: newline-delimited JSON, one record per frame::

    {"frame": 0,
     "ground_truth": {"x_min": ..., "y_min": ..., "x_max": ..., "y_max": ...},
     "frame_image": "frames/000.pgm" | {"width": ..., "height": ...,
                                        "pixels_b64": "..."},
     "detections": {"yolov7": {"confidence": 0.83, "iou": 0.61,
                               "box": {...}}}}

`ground_truth`, `frame_image`, and a detection's `box` are all optional.
A `frame_image` string is a PGM (P5) path resolved relative to the trace
file's directory.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import CatalogError, TraceError
from .images import GrayscaleImage, decode_inline, encode_inline, read_pgm

ModelId = str
AcceleratorId = str
Pair = tuple[ModelId, AcceleratorId]

DEFAULT_ENERGY_TOLERANCE = 0.05


# ---------------------------------------------------------------------------
# Geometry


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixel coordinates, corner-form."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite, got {coords}")
        if min(coords) < 0:
            raise ValueError(f"box coordinates must be non-negative, got {coords}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"box corners out of order: {coords}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes, in [0, 1].

    Identical boxes score 1 even when degenerate (zero area); any other
    union-free configuration scores 0, so the ratio never divides 0/0.
    """
    if a == b:
        return 1.0
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def energy_of(latency_s: float, power_w: float) -> float:
    """Energy in joules spent running for `latency_s` at `power_w`."""
    if latency_s < 0 or power_w < 0:
        raise ValueError("latency and power must be non-negative")
    return latency_s * power_w


# ---------------------------------------------------------------------------
# Catalog


@dataclass(frozen=True)
class Accelerator:
    name: AcceleratorId
    memory_bytes: int
    is_gpu: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise CatalogError("accelerator name must be non-empty")
        if self.memory_bytes <= 0:
            raise CatalogError(f"accelerator {self.name!r}: memory_bytes must be > 0")


@dataclass(frozen=True)
class ModelProfile:
    """Measured traits of one model on one accelerator."""

    model: ModelId
    accelerator: AcceleratorId
    avg_latency_s: float
    avg_power_w: float
    avg_energy_j: float
    memory_bytes: int
    load_time_s: float
    load_energy_j: float

    def __post_init__(self) -> None:
        pair = f"({self.model}, {self.accelerator})"
        for name in ("avg_latency_s", "avg_power_w", "avg_energy_j", "memory_bytes"):
            if getattr(self, name) <= 0:
                raise CatalogError(f"profile {pair}: {name} must be > 0")
        for name in ("load_time_s", "load_energy_j"):
            if getattr(self, name) < 0:
                raise CatalogError(f"profile {pair}: {name} must be >= 0")

    @property
    def pair(self) -> Pair:
        return (self.model, self.accelerator)


@dataclass(frozen=True)
class Catalog:
    """Immutable model/accelerator inventory with per-pair traits."""

    accelerators: Mapping[AcceleratorId, Accelerator]
    models: tuple[ModelId, ...]
    compatibility: frozenset[Pair]
    profiles: Mapping[Pair, ModelProfile]
    energy_tolerance: float = DEFAULT_ENERGY_TOLERANCE

    def __post_init__(self) -> None:
        # Canonical model order makes save -> load an identity.
        object.__setattr__(self, "models", tuple(sorted(self.models)))
        if self.energy_tolerance <= 0:
            raise CatalogError("energy_tolerance must be > 0")
        _validate_catalog(self)

    def is_compatible(self, model: ModelId, accelerator: AcceleratorId) -> bool:
        return (model, accelerator) in self.compatibility

    def compatible_pairs(self) -> tuple[Pair, ...]:
        return tuple(sorted(self.compatibility))

    def profiled_pairs(self) -> tuple[Pair, ...]:
        return tuple(sorted(self.profiles))

    def profile(self, model: ModelId, accelerator: AcceleratorId) -> ModelProfile:
        try:
            return self.profiles[(model, accelerator)]
        except KeyError:
            raise KeyError(f"no profile for pair ({model}, {accelerator})") from None

    def accelerators_for(self, model: ModelId) -> tuple[AcceleratorId, ...]:
        return tuple(a for m, a in self.profiled_pairs() if m == model)

    def gpu_accelerators(self) -> frozenset[AcceleratorId]:
        return frozenset(a.name for a in self.accelerators.values() if a.is_gpu)


def _validate_catalog(cat: Catalog) -> None:
    for name in cat.models:
        if not name:
            raise CatalogError("model names must be non-empty")
    if len(set(cat.models)) != len(cat.models):
        raise CatalogError("duplicate model id in catalog")
    known_models = set(cat.models)
    known_accels = set(cat.accelerators)
    for model, accel in cat.compatibility:
        if model not in known_models:
            raise CatalogError(f"compatibility references unknown model {model!r}")
        if accel not in known_accels:
            raise CatalogError(f"compatibility references unknown accelerator {accel!r}")
    if not cat.compatibility:
        raise CatalogError("catalog has no compatible (model, accelerator) pair")
    for pair, prof in cat.profiles.items():
        if pair != prof.pair:
            raise CatalogError(f"profile keyed under wrong pair: {pair}")
        if pair not in cat.compatibility:
            raise CatalogError(
                f"profile for incompatible pair ({prof.model}, {prof.accelerator})"
            )
        expected = energy_of(prof.avg_latency_s, prof.avg_power_w)
        if abs(prof.avg_energy_j - expected) > cat.energy_tolerance * prof.avg_energy_j:
            raise CatalogError(
                f"profile ({prof.model}, {prof.accelerator}): avg_energy_j "
                f"{prof.avg_energy_j} inconsistent with latency x power "
                f"= {expected:.6g} J (tolerance {cat.energy_tolerance:.0%})"
            )


def catalog_from_dict(doc: dict) -> Catalog:
    if not isinstance(doc, dict):
        raise CatalogError("catalog document must be a JSON object")
    try:
        accel_entries = doc["accelerators"]
        model_entries = doc["models"]
        compat_entries = doc["compatibility"]
        profile_entries = doc["profiles"]
    except KeyError as exc:
        raise CatalogError(f"catalog missing top-level key {exc}") from None
    tolerance = float(doc.get("energy_tolerance", DEFAULT_ENERGY_TOLERANCE))

    accelerators: dict[str, Accelerator] = {}
    for entry in accel_entries:
        try:
            acc = Accelerator(
                name=str(entry["name"]),
                memory_bytes=int(entry["memory_bytes"]),
                is_gpu=bool(entry.get("gpu", str(entry["name"]).lower() == "gpu")),
            )
        except KeyError as exc:
            raise CatalogError(f"accelerator entry missing key {exc}") from None
        if acc.name in accelerators:
            raise CatalogError(f"duplicate accelerator {acc.name!r}")
        accelerators[acc.name] = acc

    models = tuple(str(m) for m in model_entries)

    compatibility: set[Pair] = set()
    for model, accels in compat_entries.items():
        for accel in accels:
            compatibility.add((str(model), str(accel)))

    profiles: dict[Pair, ModelProfile] = {}
    for entry in profile_entries:
        try:
            prof = ModelProfile(
                model=str(entry["model"]),
                accelerator=str(entry["accelerator"]),
                avg_latency_s=float(entry["avg_latency_s"]),
                avg_power_w=float(entry["avg_power_w"]),
                avg_energy_j=float(entry["avg_energy_j"]),
                memory_bytes=int(entry["memory_bytes"]),
                load_time_s=float(entry["load_time_s"]),
                load_energy_j=float(entry["load_energy_j"]),
            )
        except KeyError as exc:
            raise CatalogError(f"profile entry missing key {exc}") from None
        if prof.pair in profiles:
            raise CatalogError(
                f"duplicate profile for pair ({prof.model}, {prof.accelerator})"
            )
        profiles[prof.pair] = prof

    return Catalog(
        accelerators=accelerators,
        models=models,
        compatibility=frozenset(compatibility),
        profiles=profiles,
        energy_tolerance=tolerance,
    )


def catalog_to_dict(cat: Catalog) -> dict:
    compat: dict[str, list[str]] = {}
    for model, accel in cat.compatible_pairs():
        compat.setdefault(model, []).append(accel)
    return {
        "energy_tolerance": cat.energy_tolerance,
        "accelerators": [
            {"name": a.name, "memory_bytes": a.memory_bytes, "gpu": a.is_gpu}
            for _, a in sorted(cat.accelerators.items())
        ],
        "models": sorted(cat.models),
        "compatibility": compat,
        "profiles": [
            {
                "model": p.model,
                "accelerator": p.accelerator,
                "avg_latency_s": p.avg_latency_s,
                "avg_power_w": p.avg_power_w,
                "avg_energy_j": p.avg_energy_j,
                "memory_bytes": p.memory_bytes,
                "load_time_s": p.load_time_s,
                "load_energy_j": p.load_energy_j,
            }
            for _, p in sorted(cat.profiles.items())
        ],
    }


def load_catalog(path: str | Path) -> Catalog:
    """Load and validate a catalog JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError(f"cannot read catalog {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog {path} is not valid JSON: {exc}") from exc
    return catalog_from_dict(doc)


def save_catalog(cat: Catalog, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(catalog_to_dict(cat), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def builtin_catalog() -> Catalog:
    """The bundled demo catalog of eight detection models on gpu/dla/oakd."""
    text = resources.files("odsched.data").joinpath("builtin_catalog.json").read_text()
    return catalog_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Traces


@dataclass(frozen=True)
class DetectionOutcome:
    """One model's result on one frame."""

    confidence: float
    iou: float
    box: BoundingBox | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if not (0.0 <= self.iou <= 1.0):
            raise ValueError(f"iou {self.iou} outside [0, 1]")
        if self.box is None and self.iou != 0.0:
            raise ValueError("iou must be 0 when no box was detected")


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    per_model: Mapping[ModelId, DetectionOutcome]
    ground_truth: BoundingBox | None = None
    frame: GrayscaleImage | None = None

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise ValueError(f"frame index {self.frame_index} must be >= 0")


@dataclass(frozen=True)
class CharacterizationTrace:
    frames: tuple[FrameRecord, ...]

    def __post_init__(self) -> None:
        indices = [fr.frame_index for fr in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("trace frame indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)

    def models(self) -> tuple[ModelId, ...]:
        seen: set[ModelId] = set()
        for fr in self.frames:
            seen.update(fr.per_model)
        return tuple(sorted(seen))


def _box_from_dict(obj: dict, where: str) -> BoundingBox:
    try:
        return BoundingBox(
            x_min=float(obj["x_min"]),
            y_min=float(obj["y_min"]),
            x_max=float(obj["x_max"]),
            y_max=float(obj["y_max"]),
        )
    except KeyError as exc:
        raise TraceError(f"{where}: box missing key {exc}") from None
    except ValueError as exc:
        raise TraceError(f"{where}: {exc}") from None


def _box_to_dict(box: BoundingBox) -> dict:
    return {
        "x_min": box.x_min,
        "y_min": box.y_min,
        "x_max": box.x_max,
        "y_max": box.y_max,
    }


def load_trace(path: str | Path, catalog: Catalog) -> CharacterizationTrace:
    """Load a newline-delimited trace, validating against the catalog."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise TraceError(f"cannot read trace {path}: {exc}") from exc

    known = set(catalog.models)
    frames: list[FrameRecord] = []
    last_index = -1
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"{where}: invalid JSON: {exc}") from exc
        try:
            frame_index = int(rec["frame"])
        except KeyError:
            raise TraceError(f"{where}: record missing 'frame'") from None
        if frame_index <= last_index:
            raise TraceError(
                f"{where}: frame index {frame_index} not strictly increasing"
            )
        last_index = frame_index

        gt = None
        if rec.get("ground_truth") is not None:
            gt = _box_from_dict(rec["ground_truth"], where)

        image = None
        raw_img = rec.get("frame_image")
        if raw_img is not None:
            try:
                if isinstance(raw_img, str):
                    image = read_pgm(path.parent / raw_img)
                else:
                    image = decode_inline(raw_img)
            except (OSError, ValueError) as exc:
                raise TraceError(f"{where}: bad frame image: {exc}") from exc

        detections: dict[str, DetectionOutcome] = {}
        for model, det in rec.get("detections", {}).items():
            if model not in known:
                raise TraceError(f"{where}: unknown model {model!r}")
            box = None
            if det.get("box") is not None:
                box = _box_from_dict(det["box"], where)
            try:
                outcome = DetectionOutcome(
                    confidence=float(det["confidence"]),
                    iou=float(det["iou"]),
                    box=box,
                )
            except KeyError as exc:
                raise TraceError(f"{where}: detection missing key {exc}") from None
            except ValueError as exc:
                raise TraceError(f"{where}: frame {frame_index}: {exc}") from None
            detections[model] = outcome

        frames.append(
            FrameRecord(
                frame_index=frame_index,
                per_model=detections,
                ground_truth=gt,
                frame=image,
            )
        )
    return CharacterizationTrace(frames=tuple(frames))


def frame_to_dict(fr: FrameRecord) -> dict:
    """JSON form of one frame record (frames always inlined)."""
    rec: dict = {"frame": fr.frame_index}
    if fr.ground_truth is not None:
        rec["ground_truth"] = _box_to_dict(fr.ground_truth)
    if fr.frame is not None:
        rec["frame_image"] = encode_inline(fr.frame)
    dets = {}
    for model in sorted(fr.per_model):
        out = fr.per_model[model]
        det: dict = {"confidence": out.confidence, "iou": out.iou}
        if out.box is not None:
            det["box"] = _box_to_dict(out.box)
        dets[model] = det
    rec["detections"] = dets
    return rec


def save_trace(trace: CharacterizationTrace, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for fr in trace.frames:
            fh.write(json.dumps(frame_to_dict(fr), sort_keys=True) + "\n")
