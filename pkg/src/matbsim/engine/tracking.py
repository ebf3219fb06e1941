"""Compensatory tracking task dynamics."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..config import TrackingConfig


@dataclass(frozen=True)
class TrackingState:
    target_pos: tuple[float, float]
    crosshair_center: tuple[float, float]
    automatic: bool

    @property
    def mode(self) -> str:
        return "automatic" if self.automatic else "manual"

    @property
    def error(self) -> float:
        return math.hypot(
            self.target_pos[0] - self.crosshair_center[0],
            self.target_pos[1] - self.crosshair_center[1],
        )


def initial_tracking_state(cfg: TrackingConfig, automatic: bool) -> TrackingState:
    return TrackingState(
        target_pos=cfg.center, crosshair_center=cfg.center, automatic=automatic
    )


def tracking_dynamics(
    state: TrackingState,
    joystick: tuple[float, float],
    dt: float,
    rng: np.random.Generator,
    cfg: TrackingConfig,
) -> TrackingState:
    """Advance the target one tick.

    Manual mode: a fixed-magnitude random-direction disturbance step minus the
    joystick correction (gain x deflection x dt). Automatic mode: proportional
    pull toward the crosshair center; the joystick is ignored and no random
    draw is consumed.
    """
    x, y = state.target_pos
    cx, cy = state.crosshair_center
    if state.automatic:
        x += (cx - x) * cfg.auto_gain * dt
        y += (cy - y) * cfg.auto_gain * dt
    else:
        angle = rng.uniform(0.0, 2.0 * math.pi)
        x += cfg.drift_px_per_tick * math.cos(angle) - cfg.joystick_gain * joystick[0] * dt
        y += cfg.drift_px_per_tick * math.sin(angle) - cfg.joystick_gain * joystick[1] * dt
    x = min(max(x, 0.0), cfg.screen_w)
    y = min(max(y, 0.0), cfg.screen_h)
    return replace(state, target_pos=(x, y))
