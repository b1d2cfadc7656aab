"""Finite-lattice validation: exact window enumeration and window-constrained
Monte Carlo sampling.

The microcanonical window keeps the energy density in (xi - delta, xi + delta)
and the particle density in (rho - delta, rho + delta).  Enumeration counts
every configuration inside the window exactly (meet-in-the-middle over two
half-lattices, so n up to 24 stays fast).  The sampler fixes the particle
number at round(rho n), proposes occupied <-> empty swaps and accepts exactly
when the energy stays in its window; symmetric proposals with indicator
acceptance make the stationary law uniform on the constrained slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functional import OccupancyProfile, block_average, make_profile
from .potential import Potential, eval_psi

ENUM_CAP = 24


@dataclass(frozen=True)
class EnsembleWindow:
    """Target energy / density pair with the shared half-width delta."""

    xi: float
    rho: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError("window half-width delta must be positive")


@dataclass
class McmcStats:
    n: int
    chains: int
    steps: int
    accepted_moves: int
    mean_profile: OccupancyProfile
    energy_trace_summary: tuple[float, float, float]
    seed: int
    particles: int
    proposals: int
    acceptance_rate: float
    stuck_warning: bool
    rng_name: str = "philox"
    state_counts: dict | None = None


def _pair_matrix(pot: Potential, n: int) -> np.ndarray:
    """psi evaluated at every ordered site-pair distance (diagonal included)."""
    if pot.d != 1:
        raise ValueError("finite-lattice validation is one dimensional")
    idx = np.arange(n)
    diff = np.abs(idx[:, None] - idx[None, :]).astype(float)
    if pot.periodic:
        diff = np.minimum(diff, n - diff)
    return eval_psi(pot, diff / n)


def _bit_matrix(bits: int) -> np.ndarray:
    masks = np.arange(1 << bits, dtype=np.int64)
    return ((masks[:, None] >> np.arange(bits)[None, :]) & 1).astype(float)


def enumerate_entropy(n: int, pot: Potential, window: EnsembleWindow,
                      chunk: int = 512) -> tuple[int, float]:
    """Exact count of window configurations and n^-1 log(count / 2^n).

    Splits the chain into two halves and assembles all 2^n pair energies from
    half-lattice tables, so the scan is a handful of matrix products.  An
    empty window returns count 0 and a -inf entropy marker.
    """
    if n > ENUM_CAP:
        raise ValueError(
            f"n={n} would enumerate 2^{n} ~ {2.0 ** n:.3g} configurations; "
            f"the cap is {ENUM_CAP}")
    if n < 2:
        raise ValueError("n must be at least 2")
    psi = _pair_matrix(pot, n)
    n1 = n // 2
    n2 = n - n1
    XA = _bit_matrix(n1)
    XB = _bit_matrix(n2)
    eA = np.einsum("mi,ij,mj->m", XA, psi[:n1, :n1], XA)
    eB = np.einsum("mi,ij,mj->m", XB, psi[n1:, n1:], XB)
    cross = XA @ psi[:n1, n1:]
    popA = XA.sum(axis=1)
    popB = XB.sum(axis=1)
    lo_e = (window.xi - window.delta) * n * n
    hi_e = (window.xi + window.delta) * n * n
    lo_p = (window.rho - window.delta) * n
    hi_p = (window.rho + window.delta) * n
    XBT = XB.T
    count = 0
    for s in range(0, XA.shape[0], chunk):
        E = eA[s:s + chunk, None] + 2.0 * (cross[s:s + chunk] @ XBT) + eB[None, :]
        P = popA[s:s + chunk, None] + popB[None, :]
        ok = (E > lo_e) & (E < hi_e) & (P > lo_p) & (P < hi_p)
        count += int(ok.sum())
    total = 1 << n
    if count == 0:
        return 0, -math.inf
    return count, math.log(count / total) / n


def enumeration_record(n: int, count: int, empirical_S: float) -> str:
    """Single-line record n,count,total,empirical_S."""
    return f"{n},{count},{1 << n},{empirical_S:.12g}"


def _smooth_cyclic(values: np.ndarray, width: int) -> np.ndarray:
    padded = np.concatenate([values, values[:width]])
    cs = np.concatenate([[0.0], np.cumsum(padded)])
    return (cs[width:width + values.size] - cs[:values.size]) / width


def _align_shift(sample_sm: np.ndarray, reference: np.ndarray) -> int:
    """Circular shift of the sample that best correlates with the reference."""
    corr = np.fft.irfft(np.fft.rfft(reference) * np.conj(np.fft.rfft(sample_sm)),
                        sample_sm.size)
    return int(np.argmax(corr))


def _values_on_grid(profile: OccupancyProfile, n: int) -> np.ndarray:
    return block_average(profile.values, n)


def mcmc_sample(n: int, pot: Potential, window: EnsembleWindow, steps: int,
                chains: int, rng_seed: int, init: OccupancyProfile | None = None,
                burn_in: float = 0.2, smooth_width: int | None = None,
                track_states: bool = False, track_every: int = 1) -> McmcStats:
    """Window-constrained swap sampler with exact particle number.

    Chains start from the rounded init profile when one is given (top cells
    by occupancy), otherwise from a seeded random configuration; either way a
    bounded greedy anneal walks the energy into its window first.  Samples
    after the burn-in fraction are circularly aligned before averaging when
    an init profile pins the frame: each smoothed sample is cross-correlated
    against the smoothed init template.  Without a template samples pass
    through unshifted (aligning featureless chains by any max-correlation
    rule would stack their noise into an artificial lump; the collective
    pattern drifts slowly enough that unaligned chain means stay sharp), and
    chain means are re-aligned onto each other before merging.  The mean
    profile is finally rolled so its peak sits at the center cell.  A full
    sweep with zero acceptances sets a stuck-chain warning in the stats.
    """
    if pot.d != 1:
        raise ValueError("the sampler is one dimensional")
    k = int(round(window.rho * n))
    if not window.rho - window.delta < k / n < window.rho + window.delta:
        raise ValueError("round(rho n)/n leaves the density window; enlarge delta or n")
    if k <= 0 or k >= n:
        raise ValueError("particle count must be strictly between 0 and n")
    psi = _pair_matrix(pot, n)
    lo = (window.xi - window.delta) * n * n
    hi = (window.xi + window.delta) * n * n
    width = smooth_width if smooth_width is not None else max(3, n // 16)
    burn = int(steps * burn_in)
    children = np.random.SeedSequence(rng_seed).spawn(chains)

    init_values = _values_on_grid(init, n) if init is not None else None

    if track_states and n > 60:
        raise ValueError("state tracking is meant for tiny lattices (n <= 60)")
    state_counts: dict[int, int] | None = {} if track_states else None
    site_bits = 1 << np.arange(n, dtype=np.int64) if track_states else None

    samples_total = 0
    accepted_total = 0
    proposals_total = 0
    e_sum = 0.0
    e_min = math.inf
    e_max = -math.inf
    stuck = False
    chain_means = []

    for chain_idx in range(chains):
        rng = np.random.Generator(np.random.Philox(children[chain_idx]))
        occ = _initial_config(n, k, init_values, rng)
        occ, s, E = _anneal_into_window(psi, occ, lo, hi, rng)
        occ_idx = np.flatnonzero(occ)
        emp_idx = np.flatnonzero(~occ)
        pos = np.empty(n, dtype=np.int64)
        pos[occ_idx] = np.arange(k)
        pos[emp_idx] = np.arange(n - k)
        chain_profile = np.zeros(n)
        chain_samples = 0
        template_sm = (_smooth_cyclic(init_values, width)
                       if init_values is not None else None)
        rejects_in_row = 0
        for t in range(steps):
            i = occ_idx[rng.integers(k)]
            j = emp_idx[rng.integers(n - k)]
            dE = (-2.0 * s[i] + psi[i, i] + 2.0 * (s[j] - psi[i, j]) + psi[j, j])
            E_new = E + dE
            proposals_total += 1
            if lo < E_new < hi:
                pi, pj = pos[i], pos[j]
                occ_idx[pi] = j
                emp_idx[pj] = i
                pos[j], pos[i] = pi, pj
                occ[i] = False
                occ[j] = True
                s += psi[j] - psi[i]
                E = E_new
                accepted_total += 1
                rejects_in_row = 0
            else:
                rejects_in_row += 1
                if rejects_in_row >= n:
                    stuck = True
            if t >= burn:
                occf = occ.astype(float)
                if template_sm is not None:
                    shift = _align_shift(_smooth_cyclic(occf, width), template_sm)
                    chain_profile += np.roll(occf, shift)
                else:
                    chain_profile += occf
                chain_samples += 1
                e_density = float(E) / (n * n)
                e_sum += e_density
                e_min = min(e_min, e_density)
                e_max = max(e_max, e_density)
                if state_counts is not None and (t - burn) % track_every == 0:
                    key = int(site_bits[occ].sum())
                    state_counts[key] = state_counts.get(key, 0) + 1
        if chain_samples:
            chain_means.append(chain_profile / chain_samples)
            samples_total += chain_samples

    if not chain_means:
        raise ValueError("no samples collected; increase steps")
    # merge chains coherently: align every chain mean onto the first one
    merged = chain_means[0].copy()
    for cm in chain_means[1:]:
        shift = _align_shift(_smooth_cyclic(cm, width), _smooth_cyclic(merged, width))
        merged += np.roll(cm, shift)
    merged /= len(chain_means)
    merged = np.roll(merged, n // 2 - int(np.argmax(_smooth_cyclic(merged, width))))
    mean_profile = make_profile(np.clip(merged, 0.0, 1.0), periodic=True)

    return McmcStats(
        n=n, chains=chains, steps=steps,
        accepted_moves=accepted_total,
        mean_profile=mean_profile,
        energy_trace_summary=(e_sum / max(samples_total * 1.0, 1.0), e_min, e_max),
        seed=int(rng_seed),
        particles=k,
        proposals=proposals_total,
        acceptance_rate=accepted_total / max(proposals_total, 1),
        stuck_warning=stuck,
        state_counts=state_counts,
    )


def _initial_config(n: int, k: int, init_values: np.ndarray | None,
                    rng: np.random.Generator) -> np.ndarray:
    occ = np.zeros(n, dtype=bool)
    if init_values is not None:
        # occupy the k cells with the largest target occupancy; jitter breaks
        # ties reproducibly through the chain RNG
        order = np.argsort(-(init_values + 1e-9 * rng.random(n)), kind="stable")
        occ[order[:k]] = True
    else:
        occ[rng.choice(n, size=k, replace=False)] = True
    return occ


def _anneal_into_window(psi: np.ndarray, occ: np.ndarray, lo: float, hi: float,
                        rng: np.random.Generator, max_tries: int | None = None):
    """Greedy swaps toward the energy window; error if the walk stalls."""
    n = occ.size
    s = psi @ occ.astype(float)
    E = float(occ.astype(float) @ s)
    center = 0.5 * (lo + hi)
    tries = 0
    limit = max_tries if max_tries is not None else 500 * n
    while not lo < E < hi:
        if tries >= limit:
            raise RuntimeError(
                f"could not anneal into the energy window ({lo:.6g}, {hi:.6g}); "
                f"stuck at {E:.6g}")
        occ_idx = np.flatnonzero(occ)
        emp_idx = np.flatnonzero(~occ)
        best = None
        for _ in range(32):
            i = occ_idx[rng.integers(occ_idx.size)]
            j = emp_idx[rng.integers(emp_idx.size)]
            dE = -2.0 * s[i] + psi[i, i] + 2.0 * (s[j] - psi[i, j]) + psi[j, j]
            gain = abs(E + dE - center) - abs(E - center)
            if best is None or gain < best[0]:
                best = (gain, i, j, dE)
            tries += 1
        gain, i, j, dE = best
        if gain >= 0.0:
            continue  # batch had no improving move; resample
        occ[i] = False
        occ[j] = True
        s += psi[j] - psi[i]
        E += dE
    return occ, s, E


def compare_profile(stats: McmcStats, f_star: OccupancyProfile) -> float:
    """Shift-minimized L1 distance between the mean profile and a target.

    The two grids are block-averaged onto the coarser one first; the grids
    must be nested.
    """
    a = stats.mean_profile.values
    b = f_star.values
    m = min(a.size, b.size)
    a = block_average(a, m)
    b = block_average(b, m)
    best = math.inf
    for shift in range(m):
        d = float(np.abs(np.roll(a, shift) - b).mean())
        if d < best:
            best = d
    return best


def stats_to_dict(stats: McmcStats) -> dict:
    return {
        "n": stats.n,
        "chains": stats.chains,
        "steps": stats.steps,
        "accepted_moves": stats.accepted_moves,
        "proposals": stats.proposals,
        "acceptance_rate": stats.acceptance_rate,
        "particles": stats.particles,
        "energy_trace_summary": list(stats.energy_trace_summary),
        "seed": stats.seed,
        "rng_name": stats.rng_name,
        "stuck_warning": stats.stuck_warning,
        "mean_profile": {
            "m": stats.mean_profile.m,
            "periodic": stats.mean_profile.periodic,
            "values": [float(v) for v in stats.mean_profile.values],
        },
    }
