"""Random application instances for Monte-Carlo studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AppInstance, ModelError


@dataclass(frozen=True)
class SamplingSpec:
    """Distributions of the synthetic application parameters.

    ``C`` is drawn in work units as ``(w0 / P) * z`` and converted to seconds
    with ``omega``.
    """

    p_choices: tuple[int, ...] = (256, 512, 1024, 2048)
    v_range: tuple[float, float] = (0.01, 0.2)
    gamma: int = 100
    w0_per_pe: tuple[float, float] = (52e7, 1165e7)
    x_range: tuple[float, float] = (0.01, 0.3)
    y_range: tuple[float, float] = (0.8, 1.0)
    alpha_range: tuple[float, float] = (0.0, 1.0)
    z_range: tuple[float, float] = (0.1, 3.0)
    omega: float = 1e9
    seed: int = 0
    count: int = 1000

    def __post_init__(self) -> None:
        for name in ("v_range", "w0_per_pe", "x_range", "y_range", "alpha_range", "z_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ModelError(f"{name} must satisfy low <= high (got {lo}, {hi})")
        if not (0 < self.v_range[0] and self.v_range[1] < 1):
            raise ModelError("v_range must lie inside (0, 1)")
        if not self.p_choices or min(self.p_choices) < 2:
            raise ModelError("p_choices must contain values >= 2")
        if self.gamma < 1 or self.count < 0 or not self.omega > 0:
            raise ModelError("gamma >= 1, count >= 0 and omega > 0 are required")


def child_rng(seed: int, instance_id: int) -> np.random.Generator:
    """Independent generator for one instance, identical in serial and parallel runs."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(instance_id,)))


def sample_instance(spec: SamplingSpec, rng: np.random.Generator, *,
                    P: int | None = None, fraction: float | None = None,
                    alpha: float | None = None) -> AppInstance:
    """Draw one instance; ``P``, the overloading ``fraction`` and ``alpha`` may be pinned."""
    if P is None:
        P = int(rng.choice(spec.p_choices))
    if fraction is None:
        N = 0
        while N < 1:  # redraw degenerate v
            N = min(int(round(P * rng.uniform(*spec.v_range))), P - 1)
    else:
        N = min(max(int(round(P * fraction)), 1), P - 1)
    w0 = rng.uniform(spec.w0_per_pe[0] * P, spec.w0_per_pe[1] * P)
    delta_w = (w0 / P) * rng.uniform(*spec.x_range)
    y = rng.uniform(*spec.y_range)
    a = (delta_w / P) * (1 - y)
    m = (delta_w / N) * y
    draw_alpha = rng.uniform(*spec.alpha_range)
    z = rng.uniform(*spec.z_range)
    return AppInstance(
        P=P, N=N, gamma=spec.gamma, w0=w0, a=a, m=m,
        alpha=draw_alpha if alpha is None else alpha,
        omega=spec.omega,
        c_seconds=(w0 / P) * z / spec.omega,
    )


def sample_instances(spec: SamplingSpec, **pinned) -> list[AppInstance]:
    return [sample_instance(spec, child_rng(spec.seed, k), **pinned) for k in range(spec.count)]
