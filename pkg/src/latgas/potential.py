"""Pair interaction potentials and their cell-averaged kernel matrices.

A potential psi maps the pair distance t in [0, sqrt(d)] to an interaction
strength.  Three kinds are supported:

* ``power_plateau`` -- t**(-r) on (0, 1/4), a flat plateau M from 1/4 on,
  with psi(0) = 0 so that a site does not interact with itself.  With
  periodic boundaries in d = 1 the profile is mirrored, psi(t) = psi(1 - t).
* ``constant`` -- psi == J everywhere, including t = 0 (mean-field limit).
* ``tabulated`` -- linear interpolation through user-supplied (t, value)
  knots, clamped at the ends.

The module also computes the integrated interaction (the double integral of
psi(|x - y|) over the unit square) and assembles the m-by-m matrix of
cell-pair averages that every continuum functional is built on.  All power
law and plateau segments are integrated by closed-form antiderivatives, so
the kernel carries no quadrature error of its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

POWER_PLATEAU = "power_plateau"
CONSTANT = "constant"
TABULATED = "tabulated"

_KINDS = (POWER_PLATEAU, CONSTANT, TABULATED)

# piecewise breakpoints of the power-law/plateau profile
_CORE_END = 0.25
_HALF = 0.5


@dataclass(frozen=True)
class Potential:
    """A pair interaction with its parameters and boundary metadata."""

    kind: str
    r: float | None = None
    M: float | None = None
    J: float | None = None
    samples: tuple[tuple[float, float], ...] = ()
    periodic: bool = True
    d: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("dimension must be a positive integer")
        if self.kind == POWER_PLATEAU:
            if self.r is None or not 0.0 < self.r < 1.0:
                raise ValueError("power-law exponent r must lie in (0, 1)")
            if self.M is None or not self.M > 0.0:
                raise ValueError("plateau height M must be positive")
        elif self.kind == CONSTANT:
            if self.J is None or not math.isfinite(self.J):
                raise ValueError("constant potential needs a finite J")
        else:
            if len(self.samples) < 2:
                raise ValueError("tabulated potential needs at least two knots")
            ts = [t for t, _ in self.samples]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("tabulated knots must be strictly increasing")
            if ts[0] < 0.0 or ts[-1] > math.sqrt(self.d) + 1e-12:
                raise ValueError("tabulated knots must lie in [0, sqrt(d)]")

    @classmethod
    def power_plateau(cls, r: float, M: float, periodic: bool = True, d: int = 1) -> "Potential":
        return cls(kind=POWER_PLATEAU, r=float(r), M=float(M), periodic=periodic, d=d)

    @classmethod
    def constant(cls, J: float, periodic: bool = True, d: int = 1) -> "Potential":
        return cls(kind=CONSTANT, J=float(J), periodic=periodic, d=d)

    @classmethod
    def tabulated(cls, samples, periodic: bool = True, d: int = 1) -> "Potential":
        knots = tuple((float(t), float(v)) for t, v in samples)
        return cls(kind=TABULATED, samples=knots, periodic=periodic, d=d)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Cell-pair averaged interaction matrix on the uniform m-grid of [0, 1].

    Entry (i, j) equals m^2 times the integral of psi(|x - y|) over
    cell_i x cell_j.  Symmetric by construction; circulant when periodic.
    """

    m: int
    entries: np.ndarray
    periodic: bool


def eval_psi(pot: Potential, t):
    """Evaluate psi at distance(s) t; accepts scalars or arrays.

    When the potential is periodic in d = 1 the argument is folded,
    t -> 1 - t for t > 1/2, before the piecewise rule is applied.
    Distances outside [0, sqrt(d)] raise a ValueError.
    """
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    tmax = math.sqrt(pot.d)
    if np.any(arr < -1e-12) or np.any(arr > tmax * (1.0 + 1e-12)):
        raise ValueError(f"distance outside the potential domain [0, sqrt({pot.d})]")
    arr = np.clip(arr, 0.0, tmax)
    if pot.periodic and pot.d == 1:
        arr = np.where(arr > _HALF, 1.0 - arr, arr)
    if pot.kind == CONSTANT:
        out = np.full(arr.shape, float(pot.J))
    elif pot.kind == POWER_PLATEAU:
        out = np.full(arr.shape, float(pot.M))
        core = (arr > 0.0) & (arr < _CORE_END)
        out[core] = arr[core] ** (-pot.r)
        out[arr == 0.0] = 0.0
    else:
        ts = np.array([s[0] for s in pot.samples])
        vs = np.array([s[1] for s in pot.samples])
        out = np.interp(arr, ts, vs)
    if scalar:
        return float(out[0])
    return out.reshape(np.shape(t))


def integrated_interaction(pot: Potential) -> float:
    """Double integral of psi(|x - y|) over the unit cube pair (x, y).

    For the periodic power-law/plateau interaction in d = 1 this has the
    closed form 2 * 4**(r-1) / (1-r) + M / 2; other parameterizations fall
    back to adaptive quadrature split at the piecewise breakpoints.
    """
    if pot.kind == CONSTANT:
        return float(pot.J)
    if pot.d == 1:
        if pot.kind == POWER_PLATEAU and pot.periodic:
            return 2.0 * 4.0 ** (pot.r - 1.0) / (1.0 - pot.r) + pot.M / 2.0
        return _lambda_quad_1d(pot)
    return _lambda_quad_nd(pot)


def _breakpoints(pot: Potential):
    """Interior breakpoints of the (folded) potential on [0, 1]."""
    if pot.kind == POWER_PLATEAU:
        return [0.25, 0.5, 0.75] if pot.periodic else [0.25]
    if pot.kind == TABULATED:
        pts = {t for t, _ in pot.samples if 0.0 < t < 1.0}
        if pot.periodic:
            pts |= {1.0 - t for t in pts}
            pts.add(0.5)
        return sorted(pts)
    return []


def _lambda_quad_1d(pot: Potential) -> float:
    # periodic: the row integral is shift invariant, so lambda = int_0^1 psi
    # free: lambda = 2 * int_0^1 (1 - t) psi(t) dt
    if pot.periodic:
        def f(t):
            return eval_psi(pot, t)
    else:
        def f(t):
            return (1.0 - t) * eval_psi(pot, t)
    edges = [0.0] + _breakpoints(pot) + [1.0]
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        val, _ = integrate.quad(f, a, b, limit=200, epsabs=1e-12, epsrel=1e-12)
        total += val
    return total if pot.periodic else 2.0 * total


def _lambda_quad_nd(pot: Potential) -> float:
    # reduce to the difference coordinates u = x - y; per coordinate the
    # density is uniform (torus) or triangular (free boundary)
    d = pot.d
    if pot.periodic:
        def integrand(*u):
            return eval_psi(pot, math.sqrt(sum(x * x for x in u)))
        ranges = [(0.0, 0.5)] * d
    else:
        def integrand(*u):
            w = 1.0
            for x in u:
                w *= 1.0 - x
            return w * eval_psi(pot, math.sqrt(sum(x * x for x in u)))
        ranges = [(0.0, 1.0)] * d
    val, _ = integrate.nquad(integrand, ranges, opts={"limit": 100, "epsabs": 1e-10})
    return 2.0 ** d * val


def _segments(pot: Potential):
    """Piecewise description of the folded potential on [0, 1].

    Each entry is (lo, hi, tag, payload); tags are "power" (t**-r from the
    left edge), "mirror" (t**-r from the right edge), "const" and "linear"
    ((t0, v0, slope) for tabulated pieces).
    """
    if pot.kind == CONSTANT:
        return [(0.0, 1.0, "const", float(pot.J))]
    if pot.kind == POWER_PLATEAU:
        if pot.periodic:
            return [
                (0.0, _CORE_END, "power", None),
                (_CORE_END, 1.0 - _CORE_END, "const", float(pot.M)),
                (1.0 - _CORE_END, 1.0, "mirror", None),
            ]
        return [(0.0, _CORE_END, "power", None), (_CORE_END, 1.0, "const", float(pot.M))]
    # tabulated: linear pieces between consecutive knots of the folded profile
    knots = sorted({0.0, 1.0} | {t for t, _ in pot.samples if 0.0 < t < 1.0}
                   | ({1.0 - t for t, _ in pot.samples if 0.0 < t < 1.0} if pot.periodic else set())
                   | ({0.5} if pot.periodic else set()))
    segs = []
    for a, b in zip(knots, knots[1:]):
        va = eval_psi(pot, a)
        vb = eval_psi(pot, b)
        slope = (vb - va) / (b - a)
        segs.append((a, b, "linear", (a, va, slope)))
    return segs


def _power_moment(lo: float, hi: float, r: float, c0: float, c1: float) -> float:
    """Exact integral of t**(-r) * (c0 + c1 t) over [lo, hi], lo >= 0."""
    p1 = (hi ** (1.0 - r) - lo ** (1.0 - r)) / (1.0 - r)
    p2 = (hi ** (2.0 - r) - lo ** (2.0 - r)) / (2.0 - r)
    return c0 * p1 + c1 * p2


def _psi_weighted(pot: Potential, a: float, b: float, c0: float, c1: float) -> float:
    """Exact integral of psi_folded(t) * (c0 + c1 t) over [a, b] in [0, 1]."""
    total = 0.0
    for lo, hi, tag, payload in _segments(pot):
        left = max(a, lo)
        right = min(b, hi)
        if right <= left:
            continue
        if tag == "const":
            total += payload * (c0 * (right - left) + 0.5 * c1 * (right * right - left * left))
        elif tag == "power":
            total += _power_moment(left, right, pot.r, c0, c1)
        elif tag == "mirror":
            # substitute s = 1 - t: weight becomes (c0 + c1) - c1 s
            total += _power_moment(1.0 - right, 1.0 - left, pot.r, c0 + c1, -c1)
        else:
            t0, v0, slope = payload
            # product of two linear factors: Simpson is exact
            def g(t):
                return (v0 + slope * (t - t0)) * (c0 + c1 * t)
            mid = 0.5 * (left + right)
            total += (right - left) / 6.0 * (g(left) + 4.0 * g(mid) + g(right))
    return total


def cell_kernel(pot: Potential, m: int) -> KernelMatrix:
    """Assemble the m-by-m matrix of cell-pair averaged interactions.

    Only d = 1 potentials are supported; the matrix is what the continuum
    functionals consume.  Entries depend only on the cell offset, so the
    matrix is Toeplitz, and circulant under periodic boundaries where the
    mirrored offsets are copied bitwise to keep the symmetry exact.
    """
    if pot.d != 1:
        raise ValueError("kernel matrices are one dimensional")
    if m < 2:
        raise ValueError("kernel grid must have at least two cells")
    h = 1.0 / m
    ent = np.empty(m)
    ent[0] = 2.0 * m * m * _psi_weighted(pot, 0.0, h, h, -1.0)
    top = m // 2 if pot.periodic else m - 1
    for k in range(1, top + 1):
        lo, mid, hi = (k - 1) * h, k * h, (k + 1) * h
        up = _psi_weighted(pot, lo, mid, -lo, 1.0)
        down = _psi_weighted(pot, mid, hi, hi, -1.0)
        ent[k] = m * m * (up + down)
    if pot.periodic:
        for k in range(1, (m + 1) // 2):
            ent[m - k] = ent[k]
        idx = (np.arange(m)[None, :] - np.arange(m)[:, None]) % m
    else:
        idx = np.abs(np.arange(m)[None, :] - np.arange(m)[:, None])
    entries = ent[idx]
    entries.flags.writeable = False
    return KernelMatrix(m=m, entries=entries, periodic=bool(pot.periodic))


# --- plain-text config block serialization -------------------------------

def to_config(pot: Potential) -> str:
    """Serialize to a key=value block, one field per line."""
    lines = [f"kind={pot.kind}"]
    if pot.kind == POWER_PLATEAU:
        lines += [f"r={pot.r!r}", f"M={pot.M!r}"]
    elif pot.kind == CONSTANT:
        lines.append(f"J={pot.J!r}")
    else:
        lines.append("samples=" + ";".join(f"{t!r}:{v!r}" for t, v in pot.samples))
    lines += [f"periodic={'true' if pot.periodic else 'false'}", f"d={pot.d}"]
    return "\n".join(lines)


def from_mapping(fields: dict) -> Potential:
    """Build a Potential from a parsed key/value mapping."""
    try:
        kind = fields["kind"]
    except KeyError:
        raise ValueError("potential block is missing 'kind'") from None
    periodic = _parse_bool(fields.get("periodic", "true"))
    d = int(fields.get("d", 1))
    if kind == POWER_PLATEAU:
        return Potential.power_plateau(float(fields["r"]), float(fields["M"]), periodic, d)
    if kind == CONSTANT:
        return Potential.constant(float(fields["J"]), periodic, d)
    if kind == TABULATED:
        pairs = []
        for item in fields["samples"].split(";"):
            t, v = item.split(":")
            pairs.append((float(t), float(v)))
        return Potential.tabulated(pairs, periodic, d)
    raise ValueError(f"unknown potential kind {kind!r}")


def from_config(text: str) -> Potential:
    """Parse the key=value block produced by :func:`to_config`."""
    fields = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {ln}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        fields[key.strip()] = val.strip()
    return from_mapping(fields)


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ValueError(f"cannot parse boolean {s!r}")
