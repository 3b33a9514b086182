"""Per-slot time-sharing baseline: harvest a fraction of the slot, spend it all.

Each slot splits into a harvesting fraction (1 - alpha) and a transmit
fraction alpha carrying power (1 - alpha) eta E_H / (alpha tau). The slot
objective alpha * log2(1 + c (1 - alpha) / alpha) is concave in alpha and the
slots decouple, so the whole schedule reduces to independent scalar
maximizations. Stored energy never carries across slots by definition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams, Trajectory

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class MyopicSlot:
    """Optimal time share for one slot with its implied power and rate."""

    alpha: float
    power: float     # W, transmit-phase power
    rate: float      # bpcu, undiscounted slot objective


def _slot_objective(alpha: float, c: float) -> float:
    if alpha <= 0.0:
        return 0.0   # limit of alpha * log2(1 + c (1 - alpha) / alpha)
    return alpha * np.log2(1.0 + c * (1.0 - alpha) / alpha)


def myopic_alpha(h_ss: float, h_ps: float, e_h: float, params: SystemParams,
                 tol: float = 1e-7) -> float:
    """Maximize the slot objective over feasible time shares by golden section.

    The feasibility floor alpha_min keeps the implied power at or below the
    transmit cap. Zero-energy slots return alpha = 1, where any share is
    optimal and the power expression stays finite.
    """
    if e_h <= 0.0:
        return 1.0
    stored = params.eta * e_h
    alpha_min = stored / (stored + params.p_max * params.tau)
    lo = max(alpha_min, 1e-9)
    hi = 1.0
    if hi - lo <= tol:
        return hi
    c = stored * h_ss / (params.tau * (params.sigma_n2 + h_ps * params.P_p))
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1 = _slot_objective(x1, c)
    f2 = _slot_objective(x2, c)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = _slot_objective(x2, c)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = _slot_objective(x1, c)
    return 0.5 * (lo + hi)


def myopic_slot(h_ss: float, h_ps: float, e_h: float, params: SystemParams,
                tol: float = 1e-7) -> MyopicSlot:
    alpha = myopic_alpha(h_ss, h_ps, e_h, params, tol)
    if e_h <= 0.0:
        return MyopicSlot(alpha=alpha, power=0.0, rate=0.0)
    c = params.eta * e_h * h_ss / (params.tau * (params.sigma_n2 + h_ps * params.P_p))
    power = (1.0 - alpha) * params.eta * e_h / (alpha * params.tau)
    return MyopicSlot(alpha=alpha, power=power, rate=_slot_objective(alpha, c))


def myopic_run(trajectory: Trajectory, params: SystemParams,
               tol: float = 1e-7) -> float:
    """Discounted throughput sum_i gamma^i * slot_rate_i (slot 1 first)."""
    total = 0.0
    for i in range(trajectory.n_slots):
        slot = myopic_slot(float(trajectory.h_ss[i]), float(trajectory.h_ps[i]),
                           float(trajectory.e_h[i]), params, tol)
        total += params.gamma ** (i + 1) * slot.rate
    return total


def myopic_slots(trajectory: Trajectory, params: SystemParams,
                 tol: float = 1e-7) -> list[MyopicSlot]:
    return [myopic_slot(float(trajectory.h_ss[i]), float(trajectory.h_ps[i]),
                        float(trajectory.e_h[i]), params, tol)
            for i in range(trajectory.n_slots)]
