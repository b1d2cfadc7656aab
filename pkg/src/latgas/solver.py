"""Constrained entropy maximization over occupancy profiles.

Maximizes -H(f) subject to xi(f) = xi and N(f) = rho on the periodic unit
interval.  Interior optimizers satisfy the logistic fixed-point relation
f = expit(mu + beta * Kf / m), so the solver nests a damped fixed-point
iteration inside a two-dimensional quasi-Newton root solve on the
multipliers (beta, mu).  When that outer solve stalls, a penalized
quasi-Newton descent (penalty continuation 1e2 -> 1e6) re-seeds a Newton
polish of the full stationarity system, which restores the tight constraint
and fixed-point residuals.  solve_entropy drives a small multistart over
constant / one-bump / two-bump seeds and keeps the candidate of maximal
entropy.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .functional import (
    OccupancyProfile,
    apply_kernel,
    density_N,
    entropy_H,
    hbin,
    hbin_prime,
    make_profile,
    xi,
)
from .potential import KernelMatrix, Potential, cell_kernel

DEFAULT_GRID = 256
CONSTRAINT_TOL = 1e-8
EL_TOL = 1e-12
NOISE_FLOOR = 1e-6

_PENALTIES = (1e2, 1e3, 1e4, 1e5, 1e6)


@dataclass(frozen=True)
class Multipliers:
    beta: float
    mu: float


@dataclass(frozen=True)
class FixedPointResult:
    values: np.ndarray | None
    iterations: int
    converged: bool


@dataclass
class SolveResult:
    """One optimizer candidate with its multipliers and diagnostics."""

    profile: OccupancyProfile
    multipliers: Multipliers
    entropy_S: float
    residuals: tuple[float, float]
    branch: str
    iterations: tuple[int, int]
    converged: bool
    el_residual: float = math.nan
    degenerate: bool = False
    method: str = "multiplier_root"
    candidates: tuple = ()


def _as_values(seed) -> np.ndarray:
    if isinstance(seed, OccupancyProfile):
        return np.array(seed.values, dtype=float)
    return np.array(seed, dtype=float).ravel()


def el_fixed_point(K: KernelMatrix, mult: Multipliers, seed, damping: float = 0.5,
                   max_iter: int = 20000, tol: float = EL_TOL) -> FixedPointResult:
    """Damped iteration f <- (1 - w) f + w expit(mu + beta Kf / m).

    Stops when the undamped residual max|expit(. ) - f| drops below tol, so
    the returned profile satisfies the fixed-point relation to tol.  The
    damping is halved whenever the residual grows; a residual that keeps
    growing or an exhausted iteration budget returns a divergence flag
    instead of raising.
    """
    f = np.clip(_as_values(seed), 1e-15, 1.0 - 1e-15)
    A = K.entries
    scale = mult.beta / K.m
    w = float(damping)
    prev = math.inf
    for it in range(1, max_iter + 1):
        g = expit(mult.mu + scale * (A @ f))
        res = float(np.max(np.abs(g - f)))
        if not math.isfinite(res):
            return FixedPointResult(None, it, False)
        if res < tol:
            return FixedPointResult(f, it, True)
        if res > prev * (1.0 + 1e-12):
            w *= 0.5
            if w < 1e-5:
                return FixedPointResult(None, it, False)
        f = (1.0 - w) * f + w * g
        prev = res
    return FixedPointResult(None, max_iter, False)


def _newton_fixed_point(K: KernelMatrix, beta: float, mu: float, start,
                        tol: float = EL_TOL, max_iter: int = 80):
    """Newton solve of f = expit(mu + beta Kf/m) at fixed multipliers.

    The damped iteration is linearly unstable at optimizers with large |beta|
    (the logistic map's Jacobian grows past one); Newton tracks the same
    fixed-point branch regardless of that stability and is used whenever the
    damped iteration stalls.
    """
    A = K.entries
    m = K.m
    f = np.clip(_as_values(start), 1e-12, 1.0 - 1e-12)
    eye = np.eye(m)
    for it in range(1, max_iter + 1):
        z = mu + beta * (A @ f) / m
        s = expit(z)
        F = f - s
        rn = float(np.max(np.abs(F)))
        if rn < tol:
            return f, it, True
        sp = s * (1.0 - s)
        J = eye - (sp[:, None] * A) * (beta / m)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return f, it, False
        t = 1.0
        moved = False
        for _ in range(20):
            f_new = np.clip(f + t * step, 1e-14, 1.0 - 1e-14)
            F_new = f_new - expit(mu + beta * (A @ f_new) / m)
            if float(np.max(np.abs(F_new))) < rn * (1.0 - 1e-4 * t) + 1e-16:
                f = f_new
                moved = True
                break
            t *= 0.5
        if not moved:
            return f, it, False
    return f, max_iter, False


def _fit_multipliers(K: KernelMatrix, values: np.ndarray, rho: float) -> tuple[float, float]:
    """Least-squares fit of hbin'(f) ~ mu + beta * (Kf/m) on a seed profile."""
    v = np.clip(values, 1e-9, 1.0 - 1e-9)
    psi_f = (K.entries @ v) / K.m
    rhs = hbin_prime(v)
    if float(np.ptp(psi_f)) < 1e-12:
        return 0.0, float(np.log(rho / (1.0 - rho)))
    A = np.column_stack([psi_f, np.ones_like(psi_f)])
    (beta, mu), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return float(beta), float(mu)


def _constraint_gap(K, f, target_xi, target_rho):
    m = K.m
    x = float(f @ (K.entries @ f)) / (m * m)
    n = float(f.mean())
    return np.array([x - target_xi, n - target_rho])


def _newton_kkt(K, target_xi, target_rho, f, beta, mu,
                tol: float = 1e-11, max_iter: int = 60):
    """Newton solve of the joint system: fixed point + both constraints."""
    m = K.m
    A = K.entries
    f = np.clip(np.array(f, dtype=float), 1e-14, 1.0 - 1e-14)
    eye = np.eye(m)
    for _ in range(max_iter):
        Kf_m = (A @ f) / m
        s = expit(mu + beta * Kf_m)
        R = np.concatenate([f - s, _constraint_gap(K, f, target_xi, target_rho)])
        rn = float(np.max(np.abs(R)))
        if rn < tol:
            return f, beta, mu, True
        sp = s * (1.0 - s)
        J = np.zeros((m + 2, m + 2))
        J[:m, :m] = eye - (sp[:, None] * A) * (beta / m)
        J[:m, m] = -sp * Kf_m
        J[:m, m + 1] = -sp
        J[m, :m] = 2.0 * Kf_m / m
        J[m + 1, :m] = 1.0 / m
        try:
            step = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError:
            return f, beta, mu, False
        improved = False
        t = 1.0
        for _ in range(25):
            f_new = np.clip(f + t * step[:m], 1e-14, 1.0 - 1e-14)
            beta_new = beta + t * step[m]
            mu_new = mu + t * step[m + 1]
            s_new = expit(mu_new + beta_new * (A @ f_new) / m)
            R_new = np.concatenate([f_new - s_new,
                                    _constraint_gap(K, f_new, target_xi, target_rho)])
            if float(np.max(np.abs(R_new))) < rn * (1.0 - 1e-4 * t) + 1e-15:
                f, beta, mu = f_new, beta_new, mu_new
                improved = True
                break
            t *= 0.5
        if not improved:
            return f, beta, mu, False
    return f, beta, mu, False


def _penalty_descent(K, target_xi, target_rho, seed_values):
    """Penalized bound-constrained descent used as the fallback seed.

    Minimizes H(f) + P * (constraint residuals)^2 with penalty continuation,
    then reads the multipliers off the stationarity relation by least squares.
    Each stage restarts both from the running iterate and from the original
    seed: a weak penalty flattens structured seeds into the symmetric saddle,
    and re-injecting the seed keeps the structured basin reachable.
    """
    m = K.m
    A = K.entries
    eps = 1e-10
    bounds = [(eps, 1.0 - eps)] * m
    seed = np.clip(np.array(seed_values, dtype=float), 1e-4, 1.0 - 1e-4)
    f = seed.copy()
    for P in _PENALTIES:
        def objective(v):
            Kv = A @ v
            x = float(v @ Kv) / (m * m)
            n = float(v.mean())
            val = float(np.mean(hbin(v))) + P * ((x - target_xi) ** 2 + (n - target_rho) ** 2)
            grad = (hbin_prime(v) / m
                    + P * 4.0 * (x - target_xi) * Kv / (m * m)
                    + P * 2.0 * (n - target_rho) / m)
            return val, grad
        best = None
        for start in (f, seed):
            res = minimize(objective, start, jac=True, method="L-BFGS-B", bounds=bounds,
                           options={"maxiter": 4000, "ftol": 1e-16, "gtol": 1e-12})
            if best is None or res.fun < best.fun:
                best = res
        f = np.clip(best.x, eps, 1.0 - eps)
    beta, mu = _fit_multipliers(K, f, target_rho)
    return f, beta, mu


def solve_multipliers(K: KernelMatrix, target_xi: float, target_rho: float, seed,
                      constraint_tol: float = CONSTRAINT_TOL, inner_tol: float = EL_TOL,
                      max_outer: int = 40, damping: float = 0.5,
                      max_inner: int = 2000, noise_floor: float = NOISE_FLOOR) -> SolveResult:
    """Quasi-Newton root solve of the two constraint gaps over (beta, mu).

    Each evaluation solves the fixed point warm-started from the previous
    profile: the damped iteration first, a Newton solve of the same relation
    when damping stalls (optimizer branches with large |beta| repel the plain
    iteration).  The outer Jacobian comes from forward differences and failed
    trial points halve the step.  A penalized descent plus Newton polish takes
    over when the outer solve cannot close the constraints.
    """
    if not 0.0 < target_rho < 1.0:
        raise ValueError("target density must lie in (0, 1)")
    seed_v = np.clip(_as_values(seed), 1e-9, 1.0 - 1e-9)
    beta, mu = _fit_multipliers(K, seed_v, target_rho)
    inner_total = 0
    outer = 0
    method = "multiplier_root"

    def run_inner(b, u, start):
        nonlocal inner_total
        fp = el_fixed_point(K, Multipliers(b, u), start, damping=damping,
                            max_iter=max_inner, tol=inner_tol)
        inner_total += fp.iterations
        if fp.converged:
            return fp
        vals, its, ok = _newton_fixed_point(K, b, u, start, tol=inner_tol)
        inner_total += its
        return FixedPointResult(vals if ok else None, its, ok)

    fp = run_inner(beta, mu, seed_v)
    if not fp.converged:
        beta, mu = 0.0, float(np.log(target_rho / (1.0 - target_rho)))
        fp = run_inner(beta, mu, seed_v)
    f = fp.values if fp.converged else None
    ok = False
    if f is not None:
        for outer in range(1, max_outer + 1):
            G = _constraint_gap(K, f, target_xi, target_rho)
            gn = float(np.max(np.abs(G)))
            if (abs(G[0]) < constraint_tol * max(1.0, abs(target_xi))
                    and abs(G[1]) < constraint_tol):
                ok = True
                break
            # forward-difference Jacobian in (beta, mu)
            hb = 1e-6 * max(1.0, abs(beta))
            hm = 1e-6 * max(1.0, abs(mu))
            fb = run_inner(beta + hb, mu, f)
            fm = run_inner(beta, mu + hm, f)
            if not (fb.converged and fm.converged):
                break
            Jb = (_constraint_gap(K, fb.values, target_xi, target_rho) - G) / hb
            Jm = (_constraint_gap(K, fm.values, target_xi, target_rho) - G) / hm
            J = np.column_stack([Jb, Jm])
            try:
                step = np.linalg.solve(J, -G)
            except np.linalg.LinAlgError:
                break
            accepted = False
            t = 1.0
            for _ in range(12):
                trial = run_inner(beta + t * step[0], mu + t * step[1], f)
                if trial.converged:
                    Gt = _constraint_gap(K, trial.values, target_xi, target_rho)
                    if float(np.max(np.abs(Gt))) < gn * (1.0 - 1e-4 * t) + 1e-16:
                        beta += t * step[0]
                        mu += t * step[1]
                        f = trial.values
                        accepted = True
                        break
                t *= 0.5
            if not accepted:
                break

    if ok:
        f, beta, mu, polished = _newton_kkt(K, target_xi, target_rho, f, beta, mu)
        ok = polished or ok
    else:
        # the fallback restarts from the original seed: the stalled outer
        # iterate has usually collapsed onto the wrong fixed-point branch
        method = "penalty_fallback"
        f, beta, mu = _penalty_descent(K, target_xi, target_rho, seed_v)
        f, beta, mu, ok = _newton_kkt(K, target_xi, target_rho, f, beta, mu)

    return _finalize(K, target_xi, target_rho, f, beta, mu,
                     iterations=(inner_total, outer), method=method,
                     constraint_tol=constraint_tol, noise_floor=noise_floor)


def _finalize(K, target_xi, target_rho, f, beta, mu, iterations, method,
              constraint_tol, noise_floor) -> SolveResult:
    f = np.clip(np.asarray(f, dtype=float), 0.0, 1.0)
    prof = make_profile(f, periodic=K.periodic)
    res_xi = abs(xi(prof, K) - target_xi)
    res_n = abs(density_N(prof) - target_rho)
    el_res = float(np.max(np.abs(f - expit(mu + beta * (K.entries @ f) / K.m))))
    converged = (res_xi < constraint_tol * max(1.0, abs(target_xi))
                 and res_n < constraint_tol and el_res < 1e-7)
    branch = classify_branch(prof, noise_floor)
    try:
        degen = check_degenerate_branch(prof, K, target_xi, target_rho, tol=1e-6)
    except ValueError:
        degen = False
    return SolveResult(
        profile=prof,
        multipliers=Multipliers(float(beta), float(mu)),
        entropy_S=-entropy_H(prof),
        residuals=(res_xi, res_n),
        branch=branch,
        iterations=iterations,
        converged=bool(converged),
        el_residual=el_res,
        degenerate=degen,
        method=method,
    )


def default_seeds(m: int, rho: float, periodic: bool = True, amplitude: float = 0.5):
    """Constant, one-bump and two-bump starting profiles, clipped into (0, 1)."""
    x = (np.arange(m) + 0.5) / m
    raw = [
        np.full(m, rho),
        rho * (1.0 + amplitude * np.cos(2.0 * np.pi * x)),
        rho * (1.0 + amplitude * np.cos(4.0 * np.pi * x)),
    ]
    return [make_profile(np.clip(v, 1e-4, 1.0 - 1e-4), periodic=periodic) for v in raw]


def solve_entropy(pot: Potential, xi_target: float, rho: float, m: int = DEFAULT_GRID,
                  seeds=None, kernel: KernelMatrix | None = None,
                  workers: int | None = None, **solver_kwargs) -> SolveResult:
    """Multistart entropy maximization at fixed (xi, rho).

    Runs solve_multipliers from each seed, keeps converged candidates, and
    returns the one with maximal entropy (ties within 1e-9 go to the profile
    with fewer peaks).  The winner is circularly shifted so its global
    maximum sits at cell m/2.  If every start fails the result comes back
    with converged=False and the least-bad diagnostics.
    """
    if pot.d != 1 or not pot.periodic:
        raise ValueError("the variational solver is implemented for periodic d = 1")
    K = kernel if kernel is not None else cell_kernel(pot, m)
    if K.m != m:
        m = K.m
    if seeds is None:
        seeds = default_seeds(m, rho)

    def run(seed):
        return solve_multipliers(K, xi_target, rho, seed, **solver_kwargs)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(s) for s in seeds]

    summaries = tuple(
        {"branch": r.branch, "entropy_S": r.entropy_S, "converged": r.converged,
         "residuals": r.residuals, "method": r.method}
        for r in results
    )
    converged = [(i, r) for i, r in enumerate(results) if r.converged]
    if not converged:
        best = min(results, key=lambda r: max(r.residuals))
        best.candidates = summaries
        return best
    top = max(r.entropy_S for _, r in converged)
    near = [(i, r) for i, r in converged if r.entropy_S >= top - 1e-9]
    # ties prefer fewer peaks, then the earlier seed (stable order)
    _, best = min(near, key=lambda ir: (_peak_count(ir[1].branch), ir[0]))
    best = replace_profile(best, align_peak(best.profile))
    best.candidates = summaries
    return best


def replace_profile(result: SolveResult, prof: OccupancyProfile) -> SolveResult:
    out = replace(result)
    out.profile = prof
    return out


def align_peak(prof: OccupancyProfile) -> OccupancyProfile:
    """Circularly shift a periodic profile so its maximum sits at cell m/2."""
    if not prof.periodic:
        return prof
    shift = prof.m // 2 - int(np.argmax(prof.values))
    return make_profile(np.roll(prof.values, shift), periodic=True)


def classify_branch(f: OccupancyProfile, noise_floor: float = NOISE_FLOOR) -> str:
    """Label a periodic profile as constant / unimodal / multimodal(k).

    Counts local maxima of the cyclically 3-cell-smoothed profile that rise
    above min + noise_floor; a total range below the floor is constant.
    Plateau peaks (runs of equal values, up to float ties) count once.
    """
    if not f.periodic:
        raise ValueError("branch classification assumes a periodic profile")
    v = f.values
    if float(v.max() - v.min()) < noise_floor:
        return "constant"
    s = (np.roll(v, 1) + v + np.roll(v, -1)) / 3.0
    peaks = _cyclic_peak_count(s, float(s.min()) + noise_floor)
    if peaks <= 1:
        return "unimodal"
    return f"multimodal({peaks})"


def _cyclic_peak_count(s: np.ndarray, thresh: float, tie_eps: float = 1e-12) -> int:
    """Count cyclic local maxima above thresh, merging float-tie plateaus."""
    n = s.size
    d = s - np.roll(s, 1)
    sign = np.zeros(n, dtype=int)
    sign[d > tie_eps] = 1
    sign[d < -tie_eps] = -1
    nz = np.flatnonzero(sign)
    if nz.size == 0:
        return 0
    # carry the previous slope sign through flat stretches (cyclically)
    last = sign[nz[-1]]
    filled = sign.copy()
    for i in range(n):
        if filled[i] == 0:
            filled[i] = last
        else:
            last = filled[i]
    peaks = 0
    for i in range(n):
        if filled[i] == 1 and filled[(i + 1) % n] == -1 and s[i] > thresh:
            peaks += 1
    return peaks


def _peak_count(branch: str) -> int:
    if branch.startswith("multimodal"):
        return int(branch[len("multimodal("):-1])
    return {"constant": 0, "unimodal": 1}.get(branch, 0)


def check_degenerate_branch(f: OccupancyProfile, K: KernelMatrix, xi_target: float,
                            rho: float, tol: float = 1e-6) -> bool:
    """True when the smoothed field Kf/m is constant at xi/rho to tol.

    That is the signature of the constraint-dominated stationarity branch,
    reported as a diagnostic rather than solved for.
    """
    if rho == 0.0:
        raise ValueError("rho must be nonzero")
    psi_f = apply_kernel(K, f)
    return bool(np.max(np.abs(psi_f - xi_target / rho)) < tol)


def solve_result_to_dict(result: SolveResult) -> dict:
    """JSON-ready record with fields named as in the result type."""
    return {
        "profile": {
            "m": result.profile.m,
            "periodic": result.profile.periodic,
            "values": [float(v) for v in result.profile.values],
        },
        "multipliers": {"beta": result.multipliers.beta, "mu": result.multipliers.mu},
        "entropy_S": result.entropy_S,
        "residuals": list(result.residuals),
        "branch": result.branch,
        "iterations": list(result.iterations),
        "converged": result.converged,
        "el_residual": result.el_residual,
        "degenerate": result.degenerate,
        "method": result.method,
        "candidates": [dict(c, residuals=list(c["residuals"])) for c in result.candidates],
    }
