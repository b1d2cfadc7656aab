"""Feasibility probes, kink-bound constants, and transition-curve scans.

The entropy surface S(xi, rho) has a first-order kink along the curve
xi = lambda * rho^2 where the constant profile is the optimizer.  This
module certifies that the curve point is achievable from both sides (three
closed-form test profiles), computes the convexity-gap constant c of the
shifted binary entropy and the spectral radius sigma of the scaled kernel,
and scans S across the curve to verify the slope bound c / sigma.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .functional import (
    constant_profile,
    hbin,
    hbin_prime,
    hbin_second,
    indicator_profile,
    xi,
)
from .potential import CONSTANT, POWER_PLATEAU, KernelMatrix, Potential, cell_kernel, integrated_interaction
from .solver import solve_entropy


@dataclass
class FeasibilityProbe:
    """Closed-form energies of the three test profiles at density rho."""

    xi1: float
    xi2: float
    xi3: float
    interior: bool
    grid_xi: tuple[float, float, float]
    max_grid_error: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.xi1, self.xi2, self.xi3)


@dataclass
class ScanPoint:
    xi_target: float
    xi_actual: float
    S: float
    branch: str
    beta: float
    mu: float
    converged: bool


@dataclass
class TransitionScan:
    rho: float
    lam: float
    xi_values: list[float]
    S_values: list[float]
    left_slope: float
    right_slope: float
    kink_lower_bound: float
    c: float
    sigma: float
    S_curve: float
    kink_ok: bool
    within_hypotheses: bool
    points: list[ScanPoint] = field(default_factory=list)


def feasibility_probe(pot: Potential, rho: float, m: int = 2048,
                      grid_tol: float = 2e-3) -> FeasibilityProbe:
    """Closed-form energies of a single block, the constant, and a split block.

    The three profiles share density rho; when their energies are strictly
    ordered xi1 < xi2 < xi3 the curve point lambda * rho^2 is certified
    interior to the achievable region.  Each closed form is cross-checked
    against the grid quadratic form at resolution m; disagreement beyond
    grid_tol raises.
    """
    if pot.kind != POWER_PLATEAU or not pot.periodic or pot.d != 1:
        raise ValueError("the feasibility probe needs the periodic power/plateau interaction")
    if not 0.0 < rho <= 0.25:
        raise ValueError("the probe is valid for rho in (0, 1/4]")
    r, M = pot.r, pot.M
    lam = integrated_interaction(pot)
    denom = (1.0 - r) * (2.0 - r)
    xi1 = 2.0 * rho ** (2.0 - r) / denom
    xi2 = lam * rho * rho
    xi3 = 4.0 * (rho / 2.0) ** (2.0 - r) / denom + M * rho * rho / 2.0

    K = cell_kernel(pot, m)
    f1 = indicator_profile(m, [(0.0, rho)])
    f2 = constant_profile(m, rho)
    f3 = indicator_profile(m, [(0.0, rho / 2.0), (0.5 - rho / 2.0, 0.5)])
    grid = (xi(f1, K), xi(f2, K), xi(f3, K))
    errs = [abs(g - v) for g, v in zip(grid, (xi1, xi2, xi3))]
    if max(errs) > grid_tol:
        raise RuntimeError(
            f"closed forms disagree with grid quadrature by {max(errs):.3e} at m={m}")
    return FeasibilityProbe(xi1=xi1, xi2=xi2, xi3=xi3,
                            interior=bool(xi1 < xi2 < xi3),
                            grid_xi=grid, max_grid_error=max(errs))


def convexity_gap_constant(rho: float, grid_points: int = 100_000) -> float:
    """Minimum of (hbin(rho+t) - hbin'(rho) t - hbin(rho)) / t^2 over t != 0.

    Scans a dense grid on [-rho, 1-rho], replaces the indeterminate ratio for
    |t| < 1e-6 with the limit hbin''(rho)/2, and refines the grid minimum by
    golden-section search.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    h0 = float(hbin(rho))
    h1 = float(hbin_prime(rho))
    limit = float(hbin_second(rho)) / 2.0

    def ratio(t: float) -> float:
        if abs(t) < 1e-6:
            return limit
        return (float(hbin(rho + t)) - h1 * t - h0) / (t * t)

    ts = np.linspace(-rho, 1.0 - rho, grid_points)
    vals = np.empty_like(ts)
    small = np.abs(ts) < 1e-6
    tt = ts[~small]
    vals[~small] = (hbin(rho + tt) - h1 * tt - h0) / (tt * tt)
    vals[small] = limit
    i = int(np.argmin(vals))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, grid_points - 1)]
    refined = _golden_min(ratio, lo, hi)
    return min(float(vals[i]), refined, limit)


def _golden_min(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return min(fc, fd)


def spectral_radius(K: KernelMatrix, tol: float = 1e-12, max_iter: int = 20000) -> float:
    """Spectral radius of the scaled kernel operator (1/m) K by power iteration.

    A deflation step guards against converging to a subdominant mode, and
    circulant kernels are cross-checked against the discrete Fourier
    coefficients of the first row.  Non-convergence raises with the current
    Rayleigh-quotient estimate.
    """
    A = K.entries / K.m
    m = K.m
    lam, vec, ok = _power_iterate(A, np.full(m, 1.0 / math.sqrt(m)), tol, max_iter)
    if not ok:
        # restart once from a non-uniform deterministic vector
        alt = np.cos(2.0 * np.pi * np.arange(m) / m) + 0.5
        lam, vec, ok = _power_iterate(A, alt / np.linalg.norm(alt), tol, max_iter)
    if not ok:
        raise RuntimeError(f"power iteration did not converge; Rayleigh estimate {lam:.12g}")
    sigma = abs(lam)
    # deflation guard: no remaining mode may exceed the converged one
    B = A - lam * np.outer(vec, vec)
    lam2, _, ok2 = _power_iterate(B, np.full(m, 1.0 / math.sqrt(m)), 1e-6, 2000)
    if ok2 and abs(lam2) > sigma * (1.0 + 1e-8):
        raise RuntimeError(
            f"deflation guard failed: subdominant estimate {lam2:.12g} exceeds {sigma:.12g}")
    if K.periodic:
        sigma_fft = float(np.max(np.abs(np.fft.fft(K.entries[0])))) / m
        if abs(sigma - sigma_fft) > 1e-7 * max(1.0, sigma):
            raise RuntimeError(
                f"circulant cross-check failed: power {sigma:.12g} vs fourier {sigma_fft:.12g}")
    return sigma


def _power_iterate(A, v, tol, max_iter):
    lam = 0.0
    for _ in range(max_iter):
        w = A @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0, v, True
        lam = float(v @ w)
        if float(np.linalg.norm(w - lam * v)) < tol * max(1.0, abs(lam)):
            return lam, w / norm, True
        v = w / norm
    return lam, v, False


def scan_transition(pot: Potential, rho: float, deltas, m: int = 256,
                    slack: float = 1e-4, workers: int | None = None,
                    **solver_kwargs) -> TransitionScan:
    """Solve S(xi, rho) on and around the curve xi = lambda rho^2.

    Requires the feasibility probe to certify the curve point first.  For
    each delta the scan solves at xi = lambda rho^2 +/- delta, estimates the
    one-sided slopes by Richardson extrapolation of the two smallest secants,
    and checks the entropy-drop bound S - S_curve <= -(c/sigma) |dxi| + slack.
    Failed solves become failure markers, not exceptions.
    """
    if pot.kind == CONSTANT:
        raise ValueError(
            "constant interactions tie the energy to the particle density; nothing to scan")
    deltas = sorted(float(d) for d in deltas)
    if not deltas or deltas[0] <= 0.0:
        raise ValueError("deltas must be a nonempty list of positive reals")
    probe = feasibility_probe(pot, rho)
    if not probe.interior:
        raise ValueError("curve point not certified interior (plateau height too small)")
    lam = integrated_interaction(pot)
    xi0 = lam * rho * rho
    K = cell_kernel(pot, m)
    c = convexity_gap_constant(rho)
    sigma = spectral_radius(K)
    bound = c / sigma

    targets = [xi0 - d for d in reversed(deltas)] + [xi0] + [xi0 + d for d in deltas]

    def run(t):
        res = solve_entropy(pot, t, rho, m=m, kernel=K, **solver_kwargs)
        x_act = xi(res.profile, K)
        return ScanPoint(
            xi_target=t, xi_actual=x_act,
            S=res.entropy_S if res.converged else math.nan,
            branch=res.branch, beta=res.multipliers.beta, mu=res.multipliers.mu,
            converged=res.converged)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(run, targets))
    else:
        points = [run(t) for t in targets]

    mid = len(deltas)
    curve_pt = points[mid]
    S_curve = curve_pt.S
    h_rho = float(hbin(rho))

    kink_ok = True
    for pt in points:
        if pt.xi_target == xi0 or not pt.converged:
            continue
        drop = pt.S + h_rho
        if drop > -bound * abs(pt.xi_actual - xi0) + slack:
            kink_ok = False

    left = [p for p in points[:mid] if p.converged]
    right = [p for p in points[mid + 1:] if p.converged]
    left_slope = _one_sided_slope(S_curve, xi0, left[::-1]) if curve_pt.converged else math.nan
    right_slope = _one_sided_slope(S_curve, xi0, right) if curve_pt.converged else math.nan

    return TransitionScan(
        rho=rho, lam=lam,
        xi_values=[p.xi_target for p in points],
        S_values=[p.S for p in points],
        left_slope=left_slope, right_slope=right_slope,
        kink_lower_bound=bound, c=c, sigma=sigma,
        S_curve=S_curve, kink_ok=kink_ok,
        within_hypotheses=bool(pot.kind == POWER_PLATEAU and pot.r < 0.5),
        points=points)


def _one_sided_slope(S_curve: float, xi0: float, pts) -> float:
    """Richardson-extrapolated secant slope from the two nearest points."""
    if not pts:
        return math.nan
    secants = [((p.S - S_curve) / (p.xi_target - xi0), abs(p.xi_target - xi0)) for p in pts]
    secants.sort(key=lambda sd: sd[1])
    if len(secants) == 1:
        return secants[0][0]
    (s1, d1), (s2, d2) = secants[0], secants[1]
    return (d2 * s1 - d1 * s2) / (d2 - d1)


def scan_to_csv(scan: TransitionScan) -> str:
    """CSV rows xi,S,branch,beta,mu,converged for every scan point."""
    lines = ["xi,S,branch,beta,mu,converged"]
    for p in scan.points:
        lines.append(
            f"{p.xi_target:.12g},{p.S:.12g},{p.branch},{p.beta:.12g},{p.mu:.12g},"
            f"{'true' if p.converged else 'false'}")
    return "\n".join(lines) + "\n"


def scan_summary_dict(scan: TransitionScan) -> dict:
    return {
        "rho": scan.rho,
        "lambda": scan.lam,
        "left_slope": scan.left_slope,
        "right_slope": scan.right_slope,
        "c": scan.c,
        "sigma": scan.sigma,
        "kink_lower_bound": scan.kink_lower_bound,
        "S_curve": scan.S_curve,
        "kink_ok": scan.kink_ok,
        "within_hypotheses": scan.within_hypotheses,
    }
