"""Conditional synthesis samples: anchors tau and tau+4, target tau+k."""

from __future__ import annotations

import logging

import numpy as np

from mvmsynth.errors import ArgumentError
from mvmsynth.models.sample import (
    ANCHOR_GAP,
    CONDITION_SIZE,
    ConditionMap,
    FrameSource,
    SynthesisSample,
)
from mvmsynth.models.series import MVMSeries

log = logging.getLogger("mvmsynth.sampling")

K_VALUES: tuple[int, int, int] = (1, 2, 3)


def build_condition_map(tau: int, k: int, T: int) -> ConditionMap:
    """Constant 2x32x32 map: ch0 = tau / T, ch1 = k / 4."""
    if k not in K_VALUES:
        raise ArgumentError(f"k must be one of {K_VALUES}, got {k}")
    if T < ANCHOR_GAP + 1:
        raise ArgumentError(f"T must be >= {ANCHOR_GAP + 1}, got {T}")
    if not 0 <= tau <= T - ANCHOR_GAP - 1:
        raise ArgumentError(
            f"tau must lie in [0, {T - ANCHOR_GAP - 1}] so that tau+{ANCHOR_GAP} < T, got {tau}"
        )
    values = np.empty((2, CONDITION_SIZE, CONDITION_SIZE), dtype=np.float32)
    values[0] = tau / T
    values[1] = k / ANCHOR_GAP
    return ConditionMap(values=values)


def make_sample(series: MVMSeries, tau: int, k: int) -> SynthesisSample:
    """Cut one sample out of ``series`` (no copy of unrelated frames)."""
    condition = build_condition_map(tau, k, series.T)
    a, b, tgt = tau, tau + ANCHOR_GAP, tau + k
    return SynthesisSample(
        mag_in=series.magnitude[[a, b]].copy(),
        phase_in=np.concatenate([series.phase[a], series.phase[b]], axis=0),
        mask_in=series.mask[[a, b]].copy(),
        mag_target=series.magnitude[tgt][None].copy(),
        phase_target=series.phase[tgt].copy(),
        mask_target=series.mask[tgt][None].copy(),
        condition=condition,
        tau=tau,
        k=k,
        series_ref=f"{series.subject_id}/{series.slice_id}",
    )


def enumerate_samples(series: MVMSeries) -> list[SynthesisSample]:
    """Every (tau, k) with tau in [0, T-5] and k in {1,2,3}, tau-major, no wrap-around."""
    T = series.T
    if T < ANCHOR_GAP + 1:
        log.warning(
            "series %s/%s has T=%d < %d: degenerate, no samples",
            series.subject_id,
            series.slice_id,
            T,
            ANCHOR_GAP + 1,
        )
        return []
    return [make_sample(series, tau, k) for tau in range(T - ANCHOR_GAP) for k in K_VALUES]


def reconstruct_plan(T: int) -> list[FrameSource]:
    """Cover all T frames with ground-truth anchors and synthesized targets.

    Anchors sit at multiples of 4 and at T-1; remaining frames are targets of
    non-overlapping windows, with tail frames taken from the window tau = T-5.
    """
    if T < ANCHOR_GAP + 1:
        raise ArgumentError(f"T must be >= {ANCHOR_GAP + 1}, got {T}")
    last_regular = ((T - 1) // ANCHOR_GAP) * ANCHOR_GAP
    plan: list[FrameSource] = []
    for f in range(T):
        if f % ANCHOR_GAP == 0 or f == T - 1:
            plan.append(FrameSource(frame=f, kind="anchor"))
        elif f < last_regular:
            tau = (f // ANCHOR_GAP) * ANCHOR_GAP
            plan.append(FrameSource(frame=f, kind="synthesized", tau=tau, k=f - tau))
        else:
            tau = T - 1 - ANCHOR_GAP
            plan.append(FrameSource(frame=f, kind="synthesized", tau=tau, k=f - tau))
    return plan
