"""Three-step joint bandwidth/power optimizer and its companions.

The solver maximizes the minimum per-link QoS satisfaction
``lambda = min_l W0 w_l r_l / d_l`` subject to the per-cell load constraint
``g1(w) <= 1`` and the per-transmitter power constraint ``g2(w, p) <= 1``:

* S1 solves the bandwidth subproblem at fixed power by the normalized
  fixed-point iteration ``w <- f_w(w) / max{g1, g2}(f_w(w))``; the limit is
  the componentwise-minimal optimum and saturates ``max{g1, g2} = 1``.
* S2 runs when the power constraint binds while band is left over
  (``g1 < 1``, ``g2 = 1``): it alternates scaling ``p <- g1(w) p`` with S1
  re-solves, raising the utility monotonically until the band is full.
* S3 runs when the band is full with power to spare (``g1 = 1``,
  ``g2 < 1``): it solves the power subproblem by the normalized iteration on
  the power-demand map, raising the utility strictly.

``cell_specific`` mode optimizes one shared DL PSD per cell (the state is the
per-transmitter vector ``p_bar``), swapping the power-demand map and power
constraint for their per-transmitter forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, InfeasibleError
from .fixedpoint import FixedPointResult, normalized_fixed_point, yates_iteration
from .interference import Problem
from .model import Association, Scenario
from .units import dbm_to_watt, linear_to_db

W_FLOOR = 1e-12  # bandwidth clamp before dividing in the power-demand map


@dataclass(frozen=True)
class SolveOptions:
    """Tolerances and knobs for :func:`optimize`.

    ``tol_w``/``tol_p`` stop the inner fixed points on the sup-norm step;
    ``tol_outer`` terminates the S2 scaling loop on ``1 - g1``.  ``theta``
    scales every transmitter's power budget.  The ``psd_*`` fields define the
    open-loop initial PSD ``min{PSD_max, SNR_target + P_noise + alpha PL}``
    (dBm per RB).
    """

    tol_w: float = 1e-7
    tol_p: float = 1e-7
    tol_outer: float = 1e-7
    max_iter: int = 10_000
    max_scaling_rounds: int = 500
    power_mode: str = "per_link"  # or "cell_specific"
    theta: float = 1.0
    psd_max_dbm: float = 12.0
    snr_target_db: float = 12.2
    pl_alpha: float = 1.0
    noise_floor_dbm: float = -121.45
    tight_tol: float = 1e-6
    trace_mode: str = "full"  # or "boundary"

    def __post_init__(self):
        if self.power_mode not in ("per_link", "cell_specific"):
            raise DomainError(f"unknown power mode: {self.power_mode!r}")
        if self.trace_mode not in ("full", "boundary"):
            raise DomainError(f"unknown trace mode: {self.trace_mode!r}")
        if self.theta <= 0:
            raise DomainError("theta must be positive")


@dataclass
class SolveTrace:
    """Per-iteration record of the solve.

    Rows flagged ``boundary`` mark completed solver stages (initial point,
    the S1 fixed point, every S2 power-scaling round, the S3 fixed point);
    the utility recorded on boundary rows is nondecreasing by construction.
    Non-boundary rows log the running allocation inside a fixed-point solve
    for convergence plots; their utility may transiently dip (each S2 round
    first scales the power down before the re-solve recovers).
    """

    rows: list = field(default_factory=list)

    COLUMNS = ("step", "iteration", "lam", "g1", "g2", "residual", "boundary")

    def record(self, step, iteration, lam, g1_val, g2_val, residual, boundary=False):
        self.rows.append((step, int(iteration), float(lam), float(g1_val),
                          float(g2_val), float(residual), bool(boundary)))

    def boundary_lambdas(self):
        return [r[2] for r in self.rows if r[6]]

    def lambdas(self):
        return [r[2] for r in self.rows]

    def to_csv(self, path, meta: Optional[dict] = None):
        with open(path, "w") as fh:
            if meta:
                pairs = " ".join(f"{k}={v}" for k, v in meta.items())
                fh.write(f"# {pairs}\n")
            fh.write(",".join(self.COLUMNS) + "\n")
            for step, it, lam, a, b, res, bnd in self.rows:
                fh.write(f"{step},{it},{lam!r},{a!r},{b!r},{res!r},{int(bnd)}\n")


@dataclass
class StepResult:
    w: np.ndarray
    p: np.ndarray
    lam: float
    fixed_point: Optional[FixedPointResult] = None
    p_bar: Optional[np.ndarray] = None
    rounds: int = 0


@dataclass
class Solution:
    """Terminal allocation with achieved utility and constraint values.

    ``lam`` is the per-link minimum QoS satisfaction of the returned
    allocation (Eq.-level evaluation); ``lam_solver`` is the solver's
    terminal utility (identical in per-link mode up to tolerance, and the
    per-transmitter-constraint utility in cell-specific mode).
    """

    w: np.ndarray
    p: np.ndarray
    lam: float
    lam_solver: float
    step: str
    g1: float
    g2: float
    converged: bool
    trace: SolveTrace
    p_bar: Optional[np.ndarray] = None
    policy_label: str = ""
    theta: float = 1.0

    def to_dict(self) -> dict:
        out = {
            "w": self.w.tolist(),
            "p": self.p.tolist(),
            "lambda": self.lam,
            "lambda_solver": self.lam_solver,
            "step": self.step,
            "g1": self.g1,
            "g2": self.g2,
            "converged": self.converged,
            "policy": self.policy_label,
            "theta": self.theta,
        }
        if self.p_bar is not None:
            out["p_bar"] = self.p_bar.tolist()
        return out


def initial_psd(scenario: Scenario, assoc: Association, opts: SolveOptions = SolveOptions()) -> np.ndarray:
    """Open-loop initial PSD per link (watts/RB).

    ``PSD_l = min{PSD_max, SNR_target + P_noise + alpha * PL_l}`` in dBm,
    with ``PL_l`` the pathloss of the serving link.
    """
    k = scenario.n_ue
    ue = np.arange(k)
    direct = np.concatenate([scenario.h0[assoc.b_ul, ue], scenario.h0[assoc.b_dl, ue]])
    pl_db = -linear_to_db(direct)
    psd_dbm = np.minimum(opts.psd_max_dbm,
                         opts.snr_target_db + opts.noise_floor_dbm + opts.pl_alpha * pl_db)
    return dbm_to_watt(psd_dbm)


def initial_psd_cell(scenario: Scenario, assoc: Association,
                     opts: SolveOptions = SolveOptions()) -> np.ndarray:
    """Per-transmitter initial PSD: UE entries as in :func:`initial_psd`, one
    shared DL entry per cell (the largest open-loop PSD among its downlinks,
    so the weakest served link still meets its target)."""
    p0 = initial_psd(scenario, assoc, opts)
    k, n = scenario.n_ue, scenario.n_bs
    q = np.zeros(n)
    for cell in range(n):
        served = np.flatnonzero(assoc.b_dl == cell)
        if served.size:
            q[cell] = np.max(p0[k + served])
    return np.concatenate([p0[:k], q])


def step1_update_bandwidth(problem: Problem, p_fixed, opts: SolveOptions = SolveOptions(),
                           w_start=None, trace: Optional[SolveTrace] = None) -> StepResult:
    """Bandwidth subproblem at fixed power: normalized fixed point of the
    bandwidth-demand map under ``max{g1, g2}``.

    Returns the componentwise-minimal optimal ``w`` with
    ``max{g1(w), g2(w, p)} = 1`` and the achieved utility
    ``lam = 1 / max{g1, g2}(f(w))``.
    """
    p_fixed = np.asarray(p_fixed, dtype=float)
    f = lambda w: problem.f_load(w, p_fixed)
    g = lambda w: max(problem.g1(w), problem.g2(w, p_fixed))
    x0 = np.zeros(problem.n_links) if w_start is None else w_start

    callback = None
    if trace is not None and opts.trace_mode == "full":
        def callback(t, w_t, residual):
            trace.record("s1", t, problem.utility(w_t, p_fixed),
                         problem.g1(w_t), problem.g2(w_t, p_fixed), residual)

    res = normalized_fixed_point(f, g, 1.0, x0, tol=opts.tol_w,
                                 max_iter=opts.max_iter, callback=callback)
    return StepResult(w=res.x, p=p_fixed, lam=float(res.eigenvalue), fixed_point=res)


def step2_power_scaling(problem: Problem, w0, p0, opts: SolveOptions = SolveOptions(),
                        trace: Optional[SolveTrace] = None, p_bar0=None) -> StepResult:
    """Power scaling toward the full-load condition.

    Entered with ``g1(w) < 1`` and ``g2 = 1``: repeatedly shrink the power by
    the current load ``p <- g1(w) p`` and re-solve the bandwidth subproblem.
    The utility after each round increases strictly until ``g1(w) = 1``.
    Returns the input unchanged when the band is already full.
    """
    w = np.asarray(w0, dtype=float)
    p = np.asarray(p0, dtype=float)
    p_bar = None if p_bar0 is None else np.asarray(p_bar0, dtype=float)
    lam = 1.0 / max(problem.g1(w), problem.g2(w, p))
    rounds = 0
    last = None
    while problem.g1(w) < 1.0 - opts.tol_outer and rounds < opts.max_scaling_rounds:
        scale = problem.g1(w)
        p = scale * p
        if p_bar is not None:
            p_bar = scale * p_bar
        last = step1_update_bandwidth(problem, p, opts, w_start=w, trace=trace)
        w, lam = last.w, last.lam
        rounds += 1
        if trace is not None:
            trace.record("s2", rounds, lam, problem.g1(w), problem.g2(w, p),
                         last.fixed_point.residual, boundary=True)
    return StepResult(w=w, p=p, lam=lam, fixed_point=last.fixed_point if last else None,
                      p_bar=p_bar, rounds=rounds)


def step3_update_power(problem: Problem, w_fixed, p0, opts: SolveOptions = SolveOptions(),
                       trace: Optional[SolveTrace] = None, p_bar0=None) -> StepResult:
    """Power subproblem at fixed bandwidth: normalized fixed point of the
    power-demand map under the power constraint.

    Entered from a full-load state with ``g2 < 1``; keeps the allocation
    unchanged when entered with ``g2 = 1`` and strictly raises the utility
    otherwise.  In cell-specific mode pass the per-transmitter state via
    ``p_bar0``; the returned ``p`` is the expanded per-link PSD either way.
    """
    w = np.maximum(np.asarray(w_fixed, dtype=float), W_FLOOR)
    cell = opts.power_mode == "cell_specific"
    if cell:
        if p_bar0 is None:
            raise DomainError("cell_specific power update needs p_bar0")
        x0 = np.asarray(p_bar0, dtype=float)
        f = lambda pb: problem.f_power_cell(pb, w)
        g = lambda pb: problem.g2_bar(w, pb)
        expand = lambda pb: problem.assoc.lambda_map @ pb
    else:
        x0 = np.asarray(p0, dtype=float)
        f = lambda p: problem.f_power(p, w)
        g = lambda p: problem.g2(w, p)
        expand = lambda p: p

    callback = None
    if trace is not None and opts.trace_mode == "full":
        def callback(t, x_t, residual):
            p_t = expand(x_t)
            trace.record("s3", t, problem.utility(w, p_t),
                         problem.g1(w), problem.g2(w, p_t), residual)

    res = normalized_fixed_point(f, g, 1.0, x0, tol=opts.tol_p,
                                 max_iter=opts.max_iter, callback=callback)
    p_new = expand(res.x)
    return StepResult(w=w, p=p_new, lam=float(res.eigenvalue), fixed_point=res,
                      p_bar=res.x if cell else None)


def optimize(scenario: Scenario, policy=None, opts: SolveOptions = SolveOptions(),
             overlap=None, assoc: Optional[Association] = None) -> Solution:
    """Run the full three-step solve for one scenario and policy.

    Starts from the open-loop PSD and ``w = 0``, runs S1, then S2 if the
    power constraint binds first, then S3 if band fills with power to spare.
    Any state with both constraints tight is terminal (local optimum).
    """
    from .association import associate

    if assoc is None:
        if policy is None:
            raise DomainError("either a policy or an association is required")
        assoc = associate(policy, scenario)
    problem = Problem.from_scenario(scenario, assoc, overlap=overlap, theta=opts.theta)

    cell = opts.power_mode == "cell_specific"
    p_bar = initial_psd_cell(scenario, assoc, opts) if cell else None
    p = assoc.lambda_map @ p_bar if cell else initial_psd(scenario, assoc, opts)

    trace = SolveTrace()
    trace.record("init", 0, 0.0, 0.0, 0.0, math.nan, boundary=True)

    s1 = step1_update_bandwidth(problem, p, opts, trace=trace)
    w, lam = s1.w, s1.lam
    converged = s1.fixed_point.converged
    trace.record("s1", s1.fixed_point.iterations, lam,
                 problem.g1(w), problem.g2(w, p), s1.fixed_point.residual, boundary=True)
    step = "s1"

    tight = lambda v: v >= 1.0 - opts.tight_tol

    if converged and not tight(problem.g1(w)) and tight(problem.g2(w, p)):
        s2 = step2_power_scaling(problem, w, p, opts, trace=trace, p_bar0=p_bar)
        w, p, lam, p_bar = s2.w, s2.p, s2.lam, s2.p_bar
        if s2.rounds:
            step = "s2"
            if s2.fixed_point is not None:
                converged = converged and s2.fixed_point.converged
            converged = converged and tight(problem.g1(w))

    if converged and tight(problem.g1(w)) and not tight(problem.g2(w, p)):
        s3 = step3_update_power(problem, w, p, opts, trace=trace, p_bar0=p_bar)
        p, lam, p_bar = s3.p, s3.lam, s3.p_bar
        converged = converged and s3.fixed_point.converged
        step = "s3"
        trace.record("s3", s3.fixed_point.iterations, lam,
                     problem.g1(w), problem.g2(w, p), s3.fixed_point.residual, boundary=True)

    return Solution(
        w=w, p=p, lam=problem.utility(w, p), lam_solver=lam, step=step,
        g1=problem.g1(w), g2=problem.g2(w, p), converged=converged,
        trace=trace, p_bar=p_bar,
        policy_label=policy.label if policy is not None else "custom",
        theta=opts.theta,
    )


@dataclass
class PowerMinResult:
    p_min: np.ndarray
    lam: float
    psi_before: float
    psi_after: float
    saving_ratio: float
    fixed_point: FixedPointResult


def minimize_power(problem: Problem, w_star, p_star, opts: SolveOptions = SolveOptions(),
                   psi=None) -> PowerMinResult:
    """Shrink the power so every link sits exactly at its demand.

    Requires a strictly feasible allocation (utility > 1).  The plain Yates
    iteration on the power-demand map from ``p = 0`` converges to the
    componentwise-minimal power meeting all rate constraints with equality
    (utility 1); any monotone cost ``psi`` (default: band-weighted L1) can
    only improve.
    """
    w_star = np.maximum(np.asarray(w_star, dtype=float), W_FLOOR)
    p_star = np.asarray(p_star, dtype=float)
    lam_star = problem.utility(w_star, p_star)
    if lam_star <= 1.0:
        raise InfeasibleError(
            f"power minimization requires utility > 1, got {lam_star:.6g}")
    if psi is None:
        psi = lambda p: float(np.sum(w_star * p))

    f = lambda p: problem.f_power(p, w_star)
    # watts-scale fixed points sit far below the absolute tolerance, so the
    # stopping rule is additionally made relative
    res = yates_iteration(f, np.zeros(problem.n_links), tol=opts.tol_p,
                          max_iter=opts.max_iter, rel_tol=opts.tol_p)
    p_min = res.x
    return PowerMinResult(
        p_min=p_min,
        lam=problem.utility(w_star, p_min),
        psi_before=psi(p_star),
        psi_after=psi(p_min),
        saving_ratio=psi(p_min) / psi(p_star),
        fixed_point=res,
    )


@dataclass
class LinearCheckReport:
    lam_candidate: float
    lam_affine: float
    rel_diff: float
    ok: bool
    p_affine: np.ndarray


def linear_reformulation_check(problem: Problem, w_fixed, p_candidate,
                               rel_tol: float = 1e-4) -> LinearCheckReport:
    """Cross-check the power-update utility through the linear-in-power route.

    The rate constraints at fixed bandwidth are equivalent to the linear
    system ``p >= eta_l(lam) * [D^-1 (V~ diag(w) p + sigma)]_l`` with
    ``eta_l(lam) = 2^{lam d_l / (W0 B w_l)} - 1``.  For each trial ``lam``
    the right-hand side is an affine interference map whose minimal fixed
    point is a direct linear solve (it exists exactly when the weighted
    coupling has spectral radius below one); the largest ``lam`` whose fixed
    point respects the power budget is located by bisection, and the SINRs
    realized there invert back through ``eta``.  The report compares that
    utility against the utility of the candidate power vector.
    """
    w = np.maximum(np.asarray(w_fixed, dtype=float), W_FLOOR)
    p_candidate = np.asarray(p_candidate, dtype=float)
    d = problem.demands
    w0b = problem.rb_count * problem.rb_bandwidth
    model = problem.model
    k = problem.n_links

    m_aff = (model.v_tilde * w[None, :]) / model.d_diag[:, None]
    c_aff = model.sigma_vec / model.d_diag
    eta = lambda lam: np.exp2(lam * d / (w0b * w)) - 1.0

    def solve_min_power(lam: float):
        """Minimal fixed point of p = eta(lam) * (M p + c), or None when the
        target is infeasible (spectral radius >= 1 or eta overflows)."""
        with np.errstate(over="ignore"):
            e = eta(lam)
        if not np.all(np.isfinite(e)):
            return None
        em = e[:, None] * m_aff
        if np.max(np.abs(np.linalg.eigvals(em))) >= 1.0 - 1e-12:
            return None
        p = np.linalg.solve(np.eye(k) - em, e * c_aff)
        if np.any(p <= 0):
            return None
        return p

    def budget(lam: float) -> float:
        p = solve_min_power(lam)
        return np.inf if p is None else problem.g2(w, p)

    lam_cand = problem.utility(w, p_candidate)
    lo = hi = max(lam_cand, 1e-12)
    if budget(lo) <= 1.0:
        while budget(hi) <= 1.0:
            hi *= 2.0
    else:
        while budget(lo) > 1.0:
            lo /= 2.0
            if lo < 1e-30:
                raise DomainError("no feasible utility found in linear reformulation")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if budget(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) <= 1e-12 * max(1.0, lo):
            break

    p_aff = solve_min_power(lo)
    realized_sinr = p_aff / (m_aff @ p_aff + c_aff)
    lam_affine = float(np.min(w0b * w / d * np.log2(1.0 + realized_sinr)))
    rel_diff = abs(lam_affine - lam_cand) / max(abs(lam_cand), 1e-300)
    return LinearCheckReport(
        lam_candidate=lam_cand, lam_affine=lam_affine, rel_diff=rel_diff,
        ok=rel_diff <= rel_tol, p_affine=p_aff,
    )
