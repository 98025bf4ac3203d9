from __future__ import annotations

import numpy as np
import pytest

from odsched.catalog import (
    Accelerator,
    BoundingBox,
    Catalog,
    CharacterizationTrace,
    DetectionOutcome,
    FrameRecord,
    ModelProfile,
    builtin_catalog,
)
from odsched.confidence_graph import CostGraph, build_cograph, normalize_invert
from odsched.sim import demo_scenario, gen_trace


def make_profile(
    model: str,
    accel: str,
    latency: float,
    power: float,
    memory: int = 10,
    load_time: float = 0.0,
    load_energy: float = 0.0,
) -> ModelProfile:
    return ModelProfile(
        model=model,
        accelerator=accel,
        avg_latency_s=latency,
        avg_power_w=power,
        avg_energy_j=latency * power,
        memory_bytes=memory,
        load_time_s=load_time,
        load_energy_j=load_energy,
    )


def make_catalog(
    profiles: list[ModelProfile],
    capacities: dict[str, int] | None = None,
    gpu_name: str = "gpu",
) -> Catalog:
    models = sorted({p.model for p in profiles})
    accels = sorted({p.accelerator for p in profiles})
    capacities = capacities or {}
    return Catalog(
        accelerators={
            a: Accelerator(
                name=a,
                memory_bytes=capacities.get(a, 10**9),
                is_gpu=(a == gpu_name),
            )
            for a in accels
        },
        models=tuple(models),
        compatibility=frozenset(p.pair for p in profiles),
        profiles={p.pair: p for p in profiles},
    )


def make_trace(rows: list[dict[str, tuple[float, float]]]) -> CharacterizationTrace:
    """Frames from [{model: (confidence, iou)}, ...]; boxes omitted."""
    frames = []
    for i, row in enumerate(rows):
        per_model = {
            m: DetectionOutcome(
                confidence=c,
                iou=v,
                box=BoundingBox(0, 0, 10, 10) if v > 0 else None,
            )
            for m, (c, v) in row.items()
        }
        frames.append(FrameRecord(frame_index=i, per_model=per_model))
    return CharacterizationTrace(frames=tuple(frames))


def brute_force_neighborhood(
    cg: CostGraph, start, threshold: float
) -> dict[tuple, float]:
    """Independent oracle: enumerate all simple paths with cumulative cost
    <= threshold and keep the per-node minimum."""
    adj: dict[tuple, list[tuple[tuple, float]]] = {k: [] for k in cg.nodes}
    for (src, dst), cost in sorted(cg.arcs.items()):
        adj[src].append((dst, cost))
    best = {start: 0.0}

    def dfs(node, cost_so_far, visited):
        for nxt, cost in adj[node]:
            if nxt in visited:
                continue
            total = cost_so_far + cost
            if total > threshold:
                continue
            if nxt not in best or total < best[nxt]:
                best[nxt] = total
            dfs(nxt, total, visited | {nxt})

    dfs(start, 0.0, {start})
    return best


def random_cost_graph(rng: np.random.Generator) -> CostGraph:
    """Random small graph (<= 8 nodes) built through the real pipeline."""
    n_models = int(rng.integers(2, 5))
    width = 0.5 if n_models > 2 else 0.25
    models = [f"m{i}" for i in range(n_models)]
    rows = []
    for _ in range(int(rng.integers(3, 11))):
        rows.append(
            {
                m: (float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
                for m in models
                if rng.uniform() < 0.8
            }
        )
    rows = [r for r in rows if r] or [{models[0]: (0.5, 0.5)}]
    return normalize_invert(build_cograph(make_trace(rows), width))


@pytest.fixture(scope="session")
def builtin():
    return builtin_catalog()


@pytest.fixture(scope="session")
def demo_trace():
    return gen_trace(demo_scenario(), 0)
