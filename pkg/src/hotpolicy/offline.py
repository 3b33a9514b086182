"""Offline-optimal harvest-or-transmit schedule via Benders decomposition.

For a trajectory known in advance the schedule problem is a convex MINLP:
binary per-slot harvest indicators couple with continuous transmit powers
through energy-causality (prefix) and battery-capacity (window) constraints.
Fixing the binaries leaves a concave water-filling-style program (the primal);
its Lagrange multipliers define an affine overestimator of the projected
objective (a cut), and the master maximizes the pointwise minimum of all cuts
over the binary cube by exact enumeration. Alternating the two closes the
upper/lower bound gap to any requested threshold.

The primal is solved with a log-barrier interior-point Newton method, which
hands back high-accuracy dual variables: complementary slackness residuals
equal 1/t_final per constraint by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import SystemParams, Trajectory

LN2 = float(np.log(2.0))
MASTER_ENUMERATION_LIMIT = 24
BRUTE_FORCE_LIMIT = 16
DEFAULT_GAMMA_GAP = 1e-4


class EnumerationSizeError(ValueError):
    """Horizon too long for exact enumeration (master or brute force)."""


class IterationLimitError(RuntimeError):
    """GBD hit the iteration cap; carries the best incumbent and the gap."""

    def __init__(self, message: str, incumbent: "GbdResult", gap: float):
        super().__init__(message)
        self.incumbent = incumbent
        self.gap = gap


@dataclass
class OfflineInstance:
    """One offline problem: a known trajectory plus the link constants."""

    trajectory: Trajectory
    params: SystemParams

    def __post_init__(self):
        if self.trajectory.n_slots < 1:
            raise ValueError("instance needs at least one slot")

    @property
    def n_slots(self) -> int:
        return self.trajectory.n_slots

    @property
    def weights(self) -> np.ndarray:
        """Discount weights gamma^i, slot 1 first."""
        i = np.arange(1, self.n_slots + 1)
        return self.params.gamma ** i

    @property
    def gain_over_noise(self) -> np.ndarray:
        """c_i = h_ss / (sigma^2 + h_ps P_p), the per-slot SINR slope (1/W)."""
        t = self.trajectory
        return t.h_ss / (self.params.sigma_n2 + t.h_ps * self.params.P_p)

    def objective(self, powers: np.ndarray) -> float:
        """Discounted sum rate of a power vector (bpcu)."""
        return float(np.sum(self.weights * np.log2(1.0 + self.gain_over_noise * powers)))


@dataclass
class PrimalDuals:
    """Nonnegative multipliers: power cap, decoupling, prefix, windows."""

    mu: np.ndarray      # (N,)   for  p_i <= P_max
    lam: np.ndarray     # (N,)   for  tau p_i <= (1 - i_H_i)(B_0 + sum E)
    nu: np.ndarray      # (N,)   for  tau sum_{j<=i} p_j <= B_0 + eta cum harvested
    beta: np.ndarray    # (N,N)  lower-triangular, windows [l..j]


@dataclass
class PrimalSolution:
    powers: np.ndarray
    duals: PrimalDuals
    objective: float
    i_h: np.ndarray
    kkt_residual: float


def _constraint_rhs(i_h: np.ndarray, instance: OfflineInstance):
    """RHS data (J): big-M per slot, prefix budgets, window budgets."""
    p = instance.params
    e = instance.trajectory.e_h
    harvested = p.eta * np.where(i_h == 1, e, 0.0)
    cum = np.concatenate(([0.0], np.cumsum(harvested)))
    big_m = (1 - i_h) * (p.B_0 + float(e.sum()))
    b2 = p.B_0 + cum[1:]
    n = i_h.size
    b3 = np.full((n, n), np.nan)
    for j in range(n):
        for l in range(j + 1):
            b3[j, l] = p.B_max + (cum[j + 1] - cum[l])
    return big_m, b2, b3


def _barrier_minimize(w: np.ndarray, c: np.ndarray, G: np.ndarray, h: np.ndarray,
                      p0: np.ndarray, t_final: float,
                      rtol: float = 1e-9) -> tuple[np.ndarray, np.ndarray, float]:
    """Minimize -t*sum(w ln(1+c p)) - sum(ln(h - G p)) along a barrier path.

    Each stage runs damped Newton until the scaled stationarity residual
    ||grad phi||_inf / t drops below rtol times the gradient scale (looser on
    intermediate stages). Returns (p, row duals 1/(t * slack), final t); p0
    must be strictly feasible and every iterate stays strictly feasible.
    """
    p = p0.copy()
    t = 1.0
    n = p.size
    gscale = max(1.0, float(np.max(w * c))) if w.size else 1.0
    while True:
        stage_rtol = rtol if t >= t_final else 1e-4
        best_r = np.inf
        stall = 0
        for _ in range(120):
            s = h - G @ p
            inv_s = 1.0 / s
            lin = 1.0 + c * p
            grad = -t * w * c / lin + G.T @ inv_s
            r = float(np.max(np.abs(grad))) / t
            if r <= stage_rtol * gscale:
                break
            if r < 0.9 * best_r:
                best_r = r
                stall = 0
            else:
                stall += 1
                if stall >= 8:
                    break
            # Newton step via QR of the stacked square-root system: much
            # better conditioned than forming G' diag(1/s^2) G directly.
            M = np.vstack([G * inv_s[:, None],
                           np.diag(np.sqrt(t * w) * c / lin)])
            _, R = np.linalg.qr(M)
            step = np.linalg.solve(R, np.linalg.solve(R.T, -grad))
            dec = float(-grad @ step)
            if dec <= 0.0:
                break
            g_step = G @ step
            pos = g_step > 0
            alpha = 1.0
            if np.any(pos):
                alpha = min(1.0, 0.99 * float(np.min(s[pos] / g_step[pos])))
            if dec > 0.25:
                phi = -t * float(w @ np.log(lin)) - float(np.sum(np.log(s)))
                while alpha > 1e-14:
                    p_try = p + alpha * step
                    s_try = h - G @ p_try
                    lin_try = 1.0 + c * p_try
                    if np.all(s_try > 0) and np.all(lin_try > 0):
                        phi_try = (-t * float(w @ np.log(lin_try))
                                   - float(np.sum(np.log(s_try))))
                        if phi_try <= phi - 0.25 * alpha * dec:
                            break
                    alpha *= 0.5
                if alpha <= 1e-14:
                    break
            p = p + alpha * step
        if t >= t_final:
            break
        t = min(t * 30.0, t_final)
    duals = 1.0 / (t * (h - G @ p))
    refined = _active_set_refine(p, duals, t, w, c, G, h)
    if refined is not None:
        return refined[0], refined[1], t
    return p, duals, t


def _independent_rows(A: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Greedy selection of linearly independent rows, preferred order first."""
    kept: list[int] = []
    basis: list[np.ndarray] = []
    for idx in order:
        v = A[idx].astype(float)
        for b in basis:
            v = v - (v @ b) * b
        norm = np.linalg.norm(v)
        if norm > 1e-10 * max(1.0, np.linalg.norm(A[idx])):
            kept.append(int(idx))
            basis.append(v / norm)
    return np.array(kept, dtype=np.int64)


def _active_set_refine(p: np.ndarray, duals: np.ndarray, t: float,
                       w: np.ndarray, c: np.ndarray, G: np.ndarray,
                       h: np.ndarray) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Crossover from the barrier center to the exact active-set KKT point.

    Guesses the active rows from the barrier slacks, solves the
    equality-constrained maximum by Newton, and accepts only if the result is
    feasible with nonnegative multipliers and machine-small stationarity;
    otherwise the caller keeps the barrier solution.
    """
    s = h - G @ p
    gray = np.sqrt(1.0 / t)
    active = np.flatnonzero(s <= gray * np.maximum(1.0, np.abs(h)))
    if active.size == 0:
        return None
    order = active[np.argsort(-duals[active])]
    rows = _independent_rows(G, order)
    if rows.size == 0:
        return None
    A = G[rows]
    hA = h[rows]
    n = p.size
    k = rows.size
    p_new = p.copy()
    u = duals[rows].copy()
    fscale = max(1.0, float(np.max(w * c)))
    converged = False
    for _ in range(40):
        lin = 1.0 + c * p_new
        if np.any(lin <= 0.0):
            return None
        grad_f = -w * c / lin                   # gradient of -F
        r_stat = grad_f + A.T @ u
        r_feas = A @ p_new - hA
        res = max(float(np.max(np.abs(r_stat))),
                  float(np.max(np.abs(r_feas))) if k else 0.0)
        if res <= 1e-12 * fscale:
            converged = True
            break
        kkt = np.zeros((n + k, n + k))
        kkt[:n, :n] = np.diag(w * c * c / lin ** 2)
        kkt[:n, n:] = A.T
        kkt[n:, :n] = A
        rhs = np.concatenate([-grad_f, hA - A @ p_new])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            return None
        p_new = p_new + sol[:n]
        u = sol[n:]
    if not converged:
        return None
    if np.any(u < -1e-9 * fscale):
        return None
    slack = h - G @ p_new
    if np.any(slack < -1e-12 * np.maximum(1.0, np.abs(h))):
        return None
    full = np.zeros(h.size)
    full[rows] = np.maximum(u, 0.0)
    return p_new, full


def solve_primal(i_h: np.ndarray, instance: OfflineInstance,
                 tol: float = 1e-9) -> PrimalSolution:
    """Maximize the discounted rate for fixed harvest indicators.

    The zero vector is always feasible, so the primal never needs feasibility
    cuts. Slots whose every feasible power is zero (harvest slots, or transmit
    slots starved by a zero cumulative budget) are eliminated up front and
    their multipliers recovered analytically afterwards so the returned duals
    satisfy stationarity and complementary slackness on the full problem.
    """
    i_h = np.asarray(i_h, dtype=np.int64)
    n = instance.n_slots
    if i_h.shape != (n,) or np.any((i_h != 0) & (i_h != 1)):
        raise ValueError("i_h must be a 0/1 vector matching the horizon")
    params = instance.params
    tau = params.tau
    p_max = params.p_max
    w = instance.weights / LN2            # nats-per-slot weights
    c = instance.gain_over_noise
    big_m, b2, b3 = _constraint_rhs(i_h, instance)
    zeros = lambda: PrimalDuals(mu=np.zeros(n), lam=np.zeros(n), nu=np.zeros(n),
                                beta=np.zeros((n, n)))

    if p_max <= 0.0:
        duals = zeros()
        _recover_forced_duals(np.zeros(n), np.arange(n), i_h, duals, instance,
                              big_m, b2, b3)
        return PrimalSolution(powers=np.zeros(n), duals=duals, objective=0.0,
                              i_h=i_h.copy(), kkt_residual=_kkt_residual(
                                  np.zeros(n), duals, instance))

    scale = p_max * tau                   # J per unit of scaled power
    c_s = c * p_max
    m_s = big_m / scale
    b2_s = b2 / scale
    b3_s = b3 / scale

    # per-slot cap implied by all constraints; nonpositive cap forces p_i = 0
    suffix_min_b2 = np.minimum.accumulate(b2_s[::-1])[::-1]
    cap = np.minimum(1.0, np.minimum(m_s, suffix_min_b2))
    for j in range(n):
        for l in range(j + 1):
            cap[l:j + 1] = np.minimum(cap[l:j + 1], b3_s[j, l])
    free = np.flatnonzero(cap > 1e-12)
    forced = np.flatnonzero(cap <= 1e-12)

    duals = zeros()
    powers = np.zeros(n)
    if free.size:
        nf = free.size
        col_of = {int(s): k for k, s in enumerate(free)}
        rows = []
        rhs = []
        scales = []
        kinds = []               # ("lower"/"mu"/"lam", slot) or ("nu", j) / ("beta", j, l)
        for k, s in enumerate(free):
            g = np.zeros(nf); g[k] = -1.0
            rows.append(g); rhs.append(0.0); scales.append(p_max); kinds.append(("lower", s))
            g = np.zeros(nf); g[k] = 1.0
            rows.append(g); rhs.append(1.0); scales.append(p_max); kinds.append(("mu", s))
            g = np.zeros(nf); g[k] = 1.0
            rows.append(g); rhs.append(m_s[s]); scales.append(scale); kinds.append(("lam", s))
        for j in range(n):
            members = [col_of[s] for s in free if s <= j]
            if members:
                g = np.zeros(nf); g[members] = 1.0
                rows.append(g); rhs.append(b2_s[j]); scales.append(scale); kinds.append(("nu", j))
        for j in range(n):
            for l in range(j + 1):
                members = [col_of[s] for s in free if l <= s <= j]
                if members:
                    g = np.zeros(nf); g[members] = 1.0
                    rows.append(g); rhs.append(b3_s[j, l]); scales.append(scale)
                    kinds.append(("beta", j, l))
        G = np.array(rows)
        h = np.array(rhs)
        row_scale = np.array(scales)
        p0 = 0.9 * cap[free] / nf
        # large enough that both the duality gap m/t and the per-row
        # complementary slackness 1/t are far inside the stated tolerances
        t_final = max(1.0 / tol, len(rhs) * 1e7)
        p_s, row_duals, t_used = _barrier_minimize(w[free], c_s[free], G, h, p0,
                                                   t_final)
        powers[free] = p_s * p_max
        u = row_duals / row_scale
        for kind, u_r in zip(kinds, u):
            if kind[0] == "mu":
                duals.mu[kind[1]] = u_r
            elif kind[0] == "lam":
                duals.lam[kind[1]] = u_r
            elif kind[0] == "nu":
                duals.nu[kind[1]] = u_r
            elif kind[0] == "beta":
                duals.beta[kind[1], kind[2]] = u_r

    if forced.size:
        _recover_forced_duals(powers, forced, i_h, duals, instance, big_m, b2, b3)

    objective = instance.objective(powers)
    return PrimalSolution(powers=powers, duals=duals, objective=objective,
                          i_h=i_h.copy(),
                          kkt_residual=_kkt_residual(powers, duals, instance))


def _zeta(duals: PrimalDuals, tau: float) -> np.ndarray:
    """Aggregate multiplier that balances the rate gradient at each slot."""
    n = duals.mu.size
    nu_suffix = np.cumsum(duals.nu[::-1])[::-1]
    beta_agg = np.zeros(n)
    for m in range(n):
        beta_agg[m] = duals.beta[m:, :m + 1].sum()
    return duals.mu + tau * (duals.lam + nu_suffix + beta_agg)


def _recover_forced_duals(powers: np.ndarray, forced: np.ndarray, i_h: np.ndarray,
                          duals: PrimalDuals, instance: OfflineInstance,
                          big_m: np.ndarray, b2: np.ndarray, b3: np.ndarray) -> None:
    """Assign multipliers to zero-binding rows so forced-zero slots satisfy KKT.

    Only rows with zero slack at the solution are touched, keeping
    complementary slackness exact. Harvest slots load their decoupling
    multiplier; starved transmit slots load the tightest zero-budget prefix
    row, falling back to the single-slot window (which exists whenever the
    battery capacity term vanishes).
    """
    params = instance.params
    tau = params.tau
    grad0 = instance.weights * instance.gain_over_noise / LN2   # dF/dp at p_i = 0
    for s in sorted(int(x) for x in forced):
        need = grad0[s] - _zeta(duals, tau)[s]
        if need <= 0.0:
            continue
        if i_h[s] == 1:
            duals.lam[s] += need / tau
            continue
        if params.p_max <= 0.0:
            duals.mu[s] += need   # p <= 0 cap is the binding row
            continue
        zero_prefixes = [j for j in range(s, i_h.size) if b2[j] <= 1e-15]
        if zero_prefixes:
            duals.nu[zero_prefixes[0]] += need / tau
            continue
        zero_windows = [(j, l) for j in range(s, i_h.size) for l in range(s + 1)
                        if b3[j, l] <= 1e-15]
        if not zero_windows:
            raise AssertionError("forced-zero slot without a zero-slack row")
        j, l = zero_windows[0]
        duals.beta[j, l] += need / tau


def _kkt_residual(powers: np.ndarray, duals: PrimalDuals,
                  instance: OfflineInstance) -> float:
    """Relative sup-norm stationarity defect in the projected sense.

    Slots at (numerically) zero power only need the gradient to sit at or
    below the multiplier level; elsewhere they must balance exactly. Scaled by
    the largest zero-power gradient so the figure is unit-free.
    """
    params = instance.params
    grad0 = instance.weights * instance.gain_over_noise / LN2
    grad = grad0 / (1.0 + instance.gain_over_noise * powers)
    diff = grad - _zeta(duals, params.tau)
    active = powers > 1e-6 * max(params.p_max, 1e-30)
    res = np.where(active, np.abs(diff), np.maximum(diff, 0.0))
    scale = max(float(np.max(grad0)), 1e-30)
    return float(np.max(res)) / scale if res.size else 0.0


def waterfill_power(duals: PrimalDuals, instance: OfflineInstance) -> np.ndarray:
    """Closed-form stationary power [gamma^i / (ln2 zeta_i) - 1/c_i]^+ per slot."""
    zeta = _zeta(duals, instance.params.tau)
    c = instance.gain_over_noise
    with np.errstate(divide="ignore"):
        level = np.where(zeta > 0.0, instance.weights / (LN2 * zeta), np.inf)
    return np.maximum(level - 1.0 / c, 0.0)


def lagrangian_value(powers: np.ndarray, duals: PrimalDuals, i_h: np.ndarray,
                     instance: OfflineInstance) -> float:
    """Evaluate the primal Lagrangian; affine in i_h for fixed (powers, duals)."""
    params = instance.params
    tau = params.tau
    e = instance.trajectory.e_h
    n = instance.n_slots
    big_m_all = params.B_0 + float(e.sum())
    harvested = params.eta * np.where(np.asarray(i_h) == 1, e, 0.0)
    cum_h = np.concatenate(([0.0], np.cumsum(harvested)))
    cum_p = np.concatenate(([0.0], np.cumsum(powers * tau)))
    total = instance.objective(powers)
    total += float(duals.mu @ (params.p_max - powers))
    total += float(duals.lam @ ((1 - np.asarray(i_h)) * big_m_all - powers * tau))
    total += float(duals.nu @ (params.B_0 + cum_h[1:] - cum_p[1:]))
    for j in range(n):
        for l in range(j + 1):
            if duals.beta[j, l] != 0.0:
                total += duals.beta[j, l] * (params.B_max + (cum_h[j + 1] - cum_h[l])
                                             - (cum_p[j + 1] - cum_p[l]))
    return total


# ---------------------------------------------------------------------------
# Cuts and the binary master
# ---------------------------------------------------------------------------

@dataclass
class BendersCut:
    """Affine overestimator t <= constant + coeffs . i_h derived from one primal."""

    constant: float
    coeffs: np.ndarray

    def value(self, i_h: np.ndarray) -> float:
        return self.constant + float(self.coeffs @ np.asarray(i_h))


def cut_from_solution(sol: PrimalSolution, instance: OfflineInstance) -> BendersCut:
    """Linearize the Lagrangian in i_h around the stored (powers, duals).

    The decoupling constraint is used in its tightened but equivalent form
    p_i <= (1 - i_H_i) P_max, with the power-cap multiplier folded into it
    (lam_cut = mu + tau lam keeps stationarity, so the stored powers still
    maximize the Lagrangian and the cut stays a valid overestimator). With the
    loose big-M the flip-to-harvest direction would cost nothing and the
    master would take far longer to close the gap.
    """
    params = instance.params
    e = instance.trajectory.e_h
    n = instance.n_slots
    duals = sol.duals
    nu_suffix = np.cumsum(duals.nu[::-1])[::-1]
    beta_agg = np.zeros(n)
    for m in range(n):
        beta_agg[m] = duals.beta[m:, :m + 1].sum()
    lam_cut = duals.mu + params.tau * duals.lam
    coeffs = -lam_cut * params.p_max + params.eta * e * (nu_suffix + beta_agg)
    cum_p = np.concatenate(([0.0], np.cumsum(sol.powers * params.tau)))
    constant = instance.objective(sol.powers)
    constant += float(lam_cut @ (params.p_max - sol.powers))
    constant += float(duals.nu @ (params.B_0 - cum_p[1:]))
    for j in range(n):
        for l in range(j + 1):
            if duals.beta[j, l] != 0.0:
                constant += duals.beta[j, l] * (params.B_max
                                                - (cum_p[j + 1] - cum_p[l]))
    return BendersCut(constant=constant, coeffs=coeffs)


class MasterProblem:
    """Exact max-min over the binary cube with incrementally added cuts.

    Candidate k encodes i_h via bit m = slot m+1; candidates whose cut
    envelope falls below a known lower bound can be pruned permanently since
    cut envelopes only decrease.
    """

    def __init__(self, n_slots: int):
        if n_slots > MASTER_ENUMERATION_LIMIT:
            raise EnumerationSizeError(
                f"master enumeration supports at most {MASTER_ENUMERATION_LIMIT} "
                f"slots, got {n_slots}")
        self.n_slots = n_slots
        self.codes = np.arange(1 << n_slots, dtype=np.int64)
        self.envelope = np.full(1 << n_slots, np.inf)
        self.n_cuts = 0

    def add_cut(self, cut: BendersCut) -> None:
        vals = np.full(self.codes.size, cut.constant)
        for m in range(self.n_slots):
            mask = (self.codes >> m) & 1 == 1
            vals[mask] += cut.coeffs[m]
        np.minimum(self.envelope, vals, out=self.envelope)
        self.n_cuts += 1

    def prune(self, lower_bound: float) -> None:
        keep = self.envelope >= lower_bound - 1e-9
        if not keep.all():
            self.codes = self.codes[keep]
            self.envelope = self.envelope[keep]

    def solve(self) -> tuple[np.ndarray, float]:
        if self.n_cuts == 0:
            raise ValueError("master needs at least one cut")
        k = int(np.argmax(self.envelope))
        code = int(self.codes[k])
        i_h = np.array([(code >> m) & 1 for m in range(self.n_slots)], dtype=np.int64)
        return i_h, float(self.envelope[k])


def solve_master(cuts: list[BendersCut], n_slots: int) -> tuple[np.ndarray, float]:
    """One-shot exact master solve over all cuts (ties to lowest binary code)."""
    master = MasterProblem(n_slots)
    for cut in cuts:
        master.add_cut(cut)
    return master.solve()


# ---------------------------------------------------------------------------
# The decomposition loop and the enumeration oracle
# ---------------------------------------------------------------------------

@dataclass
class GbdResult:
    i_h: np.ndarray
    powers: np.ndarray
    value: float
    bounds: list[tuple[int, float, float]]   # (iteration, lower, upper)
    iterations: int


def gbd(instance: OfflineInstance, Gamma: float = DEFAULT_GAMMA_GAP,
        max_iters: int = 200, rng_seed: int = 0) -> GbdResult:
    """Alternate primal and master from a seeded random start until the
    upper/lower gap is at most Gamma."""
    if Gamma < 0.0:
        raise ValueError("Gamma must be nonnegative")
    n = instance.n_slots
    master = MasterProblem(n)
    rng = np.random.default_rng(rng_seed)
    i_h = rng.integers(0, 2, size=n).astype(np.int64)
    lower = -np.inf
    best: Optional[PrimalSolution] = None
    bounds: list[tuple[int, float, float]] = []
    for k in range(1, max_iters + 1):
        sol = solve_primal(i_h, instance)
        if sol.objective > lower:
            lower = sol.objective
            best = sol
        master.add_cut(cut_from_solution(sol, instance))
        i_h_next, upper = master.solve()
        bounds.append((k, lower, upper))
        if abs(upper - lower) <= Gamma:
            return GbdResult(i_h=best.i_h, powers=best.powers, value=lower,
                             bounds=bounds, iterations=k)
        master.prune(lower)
        i_h = i_h_next
    incumbent = GbdResult(i_h=best.i_h, powers=best.powers, value=lower,
                          bounds=bounds, iterations=max_iters)
    raise IterationLimitError(
        f"GBD did not close the gap within {max_iters} iterations "
        f"(gap {bounds[-1][2] - lower:.3e})", incumbent, bounds[-1][2] - lower)


def brute_force_offline(instance: OfflineInstance,
                        tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray, float]:
    """Exact optimum by enumerating every harvest pattern (oracle; N <= 16)."""
    n = instance.n_slots
    if n > BRUTE_FORCE_LIMIT:
        raise EnumerationSizeError(
            f"brute force supports at most {BRUTE_FORCE_LIMIT} slots, got {n}")
    best_val = -np.inf
    best_ih = None
    best_p = None
    for code in range(1 << n):
        i_h = np.array([(code >> m) & 1 for m in range(n)], dtype=np.int64)
        sol = solve_primal(i_h, instance, tol=tol)
        if sol.objective > best_val:
            best_val = sol.objective
            best_ih = i_h
            best_p = sol.powers
    return best_ih, best_p, float(best_val)


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------

SOLUTION_HEADER = ("slot", "i_h", "power_w", "rate_bpcu")
BOUNDS_HEADER = ("iter", "lower", "upper")


def write_solution_csv(i_h: np.ndarray, powers: np.ndarray,
                       instance: OfflineInstance, path) -> None:
    import csv

    c = instance.gain_over_noise
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SOLUTION_HEADER)
        for i in range(instance.n_slots):
            rate = float(np.log2(1.0 + c[i] * powers[i]))
            writer.writerow([i + 1, int(i_h[i]), repr(float(powers[i])), repr(rate)])


def write_bounds_csv(bounds: list[tuple[int, float, float]], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BOUNDS_HEADER)
        for it, lo, up in bounds:
            writer.writerow([it, repr(float(lo)), repr(float(up))])
