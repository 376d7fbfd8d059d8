"""Coefficient models: radial profiles and radialized non-radial fields.

A radial profile is the function b(r) fed to the solver and the growth
criteria.  Non-radial coefficients b(x) enter through their radial
envelopes

    b_*(r) = min over the sphere of radius r,
    b^*(r) = max over the sphere of radius r,
    b_osc  = b^* - b_*,

sampled on deterministic quasi-uniform sphere point sets so that results
are reproducible and refining the sampling can only widen the envelopes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .core import RadialGrid
from .errors import CoefficientError, ProfileRangeError

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

# Probe radii used to certify positivity of closed-form profiles.
_POSITIVITY_PROBES = np.concatenate([[0.0], np.geomspace(1e-6, 1e8, 57)])


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """A nonnegative coefficient profile b(r) on [0, infinity).

    kind is one of "constant", "power_tail", "tabulated", "callable",
    "zero".  Use the class-method constructors rather than the raw
    dataclass constructor.

    power_tail evaluates  scale * ((r0^2 + r^2)^(-l/2) + A (r0^2 + r^2)^(-m/2)).

    Tabulated profiles interpolate linearly in (log r, log b) between
    positive samples and linearly in r near zero samples or the origin;
    beyond the last radius they extrapolate with the declared tail
    exponent, or raise ProfileRangeError if none was declared.
    """

    kind: str
    value: float = 1.0
    l: Optional[float] = None
    m: Optional[float] = None
    A: float = 0.0
    r0: float = 1.0
    scale: float = 1.0
    radii: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    tail_exponent: Optional[float] = None
    func: Optional[Callable] = None
    strictly_positive: bool = True

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value: float = 1.0) -> "RadialProfile":
        if value <= 0:
            raise CoefficientError(f"constant profile must be positive, got {value}")
        return cls(kind="constant", value=float(value), tail_exponent=0.0)

    @classmethod
    def power_tail(cls, l: float, m: Optional[float] = None, A: float = 0.0,
                   r0: float = 1.0, scale: float = 1.0) -> "RadialProfile":
        if r0 <= 0:
            raise CoefficientError(f"power_tail needs r0 > 0, got {r0}")
        if scale <= 0:
            raise CoefficientError(f"power_tail needs scale > 0, got {scale}")
        if A != 0.0 and m is None:
            raise CoefficientError("power_tail with A != 0 needs the second exponent m")
        if A == 0.0:
            tail = float(l)
        else:
            tail = float(min(l, m))
        prof = cls(kind="power_tail", l=float(l), m=None if m is None else float(m),
                   A=float(A), r0=float(r0), scale=float(scale), tail_exponent=tail)
        probe = prof.eval(_POSITIVITY_PROBES)
        # Reject genuinely negative profiles (possible when A < 0).  Very
        # steep tails may underflow to float zero at extreme radii; that is
        # harmless for the tail-exponent criteria, and the solver re-checks
        # strict positivity on its own grid before integrating.
        if np.any(probe < 0.0):
            raise CoefficientError("power_tail profile is not positive everywhere")
        return prof

    @classmethod
    def tabulated(cls, radii: Sequence[float], values: Sequence[float],
                  tail_exponent: Optional[float] = None,
                  strictly_positive: bool = True) -> "RadialProfile":
        r = np.asarray(radii, dtype=float)
        b = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != b.shape or r.size < 2:
            raise CoefficientError("tabulated profile needs matching 1-d arrays, length >= 2")
        if r[0] < 0 or not np.all(np.diff(r) > 0):
            raise CoefficientError("tabulated radii must be nonnegative and strictly increasing")
        if strictly_positive and np.any(b <= 0):
            raise CoefficientError("tabulated values must be positive")
        if not strictly_positive and np.any(b < 0):
            raise CoefficientError("tabulated values must be nonnegative")
        r = r.copy()
        b = b.copy()
        r.setflags(write=False)
        b.setflags(write=False)
        return cls(kind="tabulated", radii=r, values=b,
                   tail_exponent=None if tail_exponent is None else float(tail_exponent),
                   strictly_positive=strictly_positive)

    @classmethod
    def from_callable(cls, func: Callable, tail_exponent: Optional[float] = None) -> "RadialProfile":
        return cls(kind="callable", func=func,
                   tail_exponent=None if tail_exponent is None else float(tail_exponent))

    @classmethod
    def zero(cls) -> "RadialProfile":
        return cls(kind="zero", strictly_positive=False, tail_exponent=None)

    # -- evaluation ---------------------------------------------------------

    def eval(self, r):
        """Evaluate the profile; accepts scalars or arrays."""
        scalar = np.isscalar(r)
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(rr < 0):
            raise CoefficientError("profiles are defined for r >= 0 only")
        if self.kind == "constant":
            out = np.full_like(rr, self.value)
        elif self.kind == "power_tail":
            q = self.r0 ** 2 + rr ** 2
            out = q ** (-self.l / 2.0)
            if self.A != 0.0:
                out = out + self.A * q ** (-self.m / 2.0)
            out = self.scale * out
        elif self.kind == "tabulated":
            out = self._eval_table(rr)
        elif self.kind == "callable":
            out = np.asarray(self.func(rr), dtype=float)
            if out.shape != rr.shape:
                out = np.array([float(self.func(x)) for x in rr])
        elif self.kind == "zero":
            out = np.zeros_like(rr)
        else:  # pragma: no cover - constructors forbid this
            raise CoefficientError(f"unknown profile kind {self.kind!r}")
        return float(out[0]) if scalar else out

    __call__ = eval

    def _eval_table(self, rr: np.ndarray) -> np.ndarray:
        r_tab = self.radii
        b_tab = self.values
        out = np.empty_like(rr)
        beyond = rr > r_tab[-1]
        if np.any(beyond):
            if self.tail_exponent is None:
                raise ProfileRangeError(
                    f"radius {float(rr[beyond][0]):g} beyond tabulated range "
                    f"{r_tab[-1]:g} and no tail exponent declared")
            out[beyond] = b_tab[-1] * (rr[beyond] / r_tab[-1]) ** (-self.tail_exponent)
        inside = ~beyond
        ri = rr[inside]
        if ri.size:
            if ri.size and np.any(ri < r_tab[0]):
                raise ProfileRangeError(
                    f"radius {float(ri.min()):g} below tabulated range {r_tab[0]:g}")
            idx = np.clip(np.searchsorted(r_tab, ri, side="right") - 1, 0, r_tab.size - 2)
            lo_r, hi_r = r_tab[idx], r_tab[idx + 1]
            lo_b, hi_b = b_tab[idx], b_tab[idx + 1]
            w = np.where(hi_r > lo_r, (ri - lo_r) / np.where(hi_r > lo_r, hi_r - lo_r, 1.0), 0.0)
            linear = lo_b + w * (hi_b - lo_b)
            loggable = (lo_r > 0) & (lo_b > 0) & (hi_b > 0)
            vals = linear
            if np.any(loggable):
                with np.errstate(divide="ignore", invalid="ignore"):
                    lw = np.where(loggable,
                                  (np.log(np.maximum(ri, 1e-300)) - np.log(np.maximum(lo_r, 1e-300)))
                                  / np.where(hi_r > lo_r, np.log(hi_r) - np.log(np.maximum(lo_r, 1e-300)), 1.0),
                                  0.0)
                    loglog = np.where(loggable,
                                      np.exp(np.log(np.maximum(lo_b, 1e-300))
                                             + lw * (np.log(np.maximum(hi_b, 1e-300))
                                                     - np.log(np.maximum(lo_b, 1e-300)))),
                                      0.0)
                vals = np.where(loggable, loglog, linear)
            out[inside] = vals
        return out

    @property
    def range_max(self) -> Optional[float]:
        """Largest radius with tabulated data, or None for closed forms."""
        if self.kind == "tabulated":
            return float(self.radii[-1])
        return None

    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "tabulated":
            return bool(np.all(self.values == 0.0))
        return False

    def scaled(self, c: float) -> "RadialProfile":
        """The profile multiplied by a positive constant."""
        if c <= 0:
            raise CoefficientError("scaling constant must be positive")
        if self.kind == "constant":
            return RadialProfile.constant(self.value * c)
        if self.kind == "power_tail":
            return RadialProfile.power_tail(self.l, self.m, self.A, self.r0, self.scale * c)
        if self.kind == "tabulated":
            return RadialProfile.tabulated(self.radii, self.values * c, self.tail_exponent,
                                           self.strictly_positive)
        if self.kind == "callable":
            inner = self.func
            return RadialProfile.from_callable(lambda r: c * np.asarray(inner(r)),
                                               self.tail_exponent)
        raise CoefficientError(f"cannot scale profile of kind {self.kind!r}")


def save_profile_csv(profile: RadialProfile, path) -> None:
    """Write a tabulated profile as two-column CSV with an ``r,b`` header."""
    if profile.kind != "tabulated":
        raise CoefficientError("only tabulated profiles round-trip through CSV")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["r", "b"])
        for r, b in zip(profile.radii, profile.values):
            writer.writerow([f"{r:.17g}", f"{b:.17g}"])


def load_profile_csv(path, tail_exponent: Optional[float] = None,
                     strictly_positive: bool = True) -> RadialProfile:
    """Read a two-column ``r,b`` CSV written by :func:`save_profile_csv`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise CoefficientError(f"profile CSV must have two columns, got {data.shape[1]}")
    return RadialProfile.tabulated(data[:, 0], data[:, 1], tail_exponent, strictly_positive)


# ---------------------------------------------------------------------------
# deterministic sphere sampling
# ---------------------------------------------------------------------------

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def _radical_inverse(indices: np.ndarray, base: int) -> np.ndarray:
    """van der Corput radical inverse of integer indices in the given base."""
    idx = np.asarray(indices, dtype=np.int64).copy()
    out = np.zeros(idx.shape, dtype=float)
    denom = 1.0
    while np.any(idx > 0):
        denom *= base
        out += (idx % base) / denom
        idx //= base
    return out


def _phase(radius_index: int, lane: int) -> float:
    """Deterministic per-radius rotation in [0, 1)."""
    x = (radius_index + 1) * (_GOLDEN ** -(lane + 1))
    return x - math.floor(x)


def sphere_points(dim: int, count: int, radius_index: int = 0) -> np.ndarray:
    """First ``count`` points of a deterministic quasi-uniform sequence on
    the unit sphere in ``dim`` dimensions.

    Prefixes are nested: the first N points of the sequence for a given
    (dim, radius_index) are unchanged when count grows, so envelope minima
    can only decrease and maxima only increase under refinement.

    dim == 3 uses a spiral placement (bit-reversed latitudes, golden-angle
    longitudes); higher dimensions map a Halton sequence through the
    normal quantile and normalize.  ``radius_index`` rotates the sequence
    so neighbouring radii do not share identical directions.
    """
    if dim < 2:
        raise CoefficientError(f"sphere sampling needs dim >= 2, got {dim}")
    if count < 1:
        raise CoefficientError("count must be positive")
    idx = np.arange(1, count + 1, dtype=np.int64)
    if dim == 3:
        z = 2.0 * ((_radical_inverse(idx, 2) + _phase(radius_index, 0)) % 1.0) - 1.0
        z = np.clip(z, -1.0 + 1e-12, 1.0 - 1e-12)
        theta = 2.0 * math.pi * ((idx / _GOLDEN + _phase(radius_index, 1)) % 1.0)
        rho = np.sqrt(1.0 - z * z)
        return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])
    if dim > len(_PRIMES):
        raise CoefficientError(f"sphere sampling supports dim <= {len(_PRIMES)}")
    coords = np.empty((count, dim))
    for j in range(dim):
        u = (_radical_inverse(idx, _PRIMES[j]) + _phase(radius_index, j)) % 1.0
        u = np.clip(u, 1e-12, 1.0 - 1e-12)
        coords[:, j] = ndtri(u)
    norms = np.linalg.norm(coords, axis=1)
    norms = np.where(norms == 0.0, 1.0, norms)
    return coords / norms[:, None]


def ray_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit directions: the 2*dim signed axes first, then
    quasi-uniform fill from :func:`sphere_points`."""
    axes = []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        axes.append(e.copy())
        e[j] = -1.0
        axes.append(e)
    axes = np.array(axes)
    if count <= axes.shape[0]:
        return axes[:count]
    extra = sphere_points(dim, count - axes.shape[0], radius_index=1000 + seed)
    return np.vstack([axes, extra])


# ---------------------------------------------------------------------------
# non-radial fields and radialization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticRootField:
    """b(x) = amp * (sum_j w_j x_j^2 + shift)^(-1/2).

    The spherical envelopes are closed-form: the minimum over |x| = r is
    attained where the quadratic form is largest (weight max(w)) and the
    maximum where it is smallest.  With weights (2, 1, 1), shift 1 and
    amp 8 the function u(x) = 2 x_1^2 + x_2^2 + x_3^2 + 1 solves
    Laplace-type case k = 1 with exponent gamma = 1/2 exactly, which makes
    this field the stock example of an oscillation too large for the
    radial sandwich criteria (b_osc decays like 1/r only).
    """

    weights: tuple
    shift: float = 1.0
    amp: float = 8.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) < 2 or any(x <= 0 for x in w):
            raise CoefficientError("weights must be positive and of length >= 2")
        if self.shift <= 0 or self.amp <= 0:
            raise CoefficientError("shift and amp must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return len(self.weights)

    # all three envelopes decay like 1/r
    @property
    def tail_star(self) -> float:
        return 1.0

    @property
    def tail_upper(self) -> float:
        return 1.0

    @property
    def tail_osc(self) -> float:
        return 1.0

    def eval(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        q = pts ** 2 @ np.asarray(self.weights)
        return self.amp / np.sqrt(q + self.shift)

    __call__ = eval

    def envelope_profiles(self):
        """Closed-form (b_*, b^*) as callable profiles."""
        w_max = max(self.weights)
        w_min = min(self.weights)
        amp, shift = self.amp, self.shift
        star = RadialProfile.from_callable(
            lambda r: amp / np.sqrt(w_max * np.asarray(r) ** 2 + shift), tail_exponent=1.0)
        upper = RadialProfile.from_callable(
            lambda r: amp / np.sqrt(w_min * np.asarray(r) ** 2 + shift), tail_exponent=1.0)
        return star, upper

    def exact_solution(self, points: np.ndarray) -> np.ndarray:
        """u(x) = q(x) + shift, exact when amp equals sigma_k of the
        constant Hessian diag(2 w) and gamma = 1/2."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts ** 2 @ np.asarray(self.weights) + self.shift

    def exact_hessian_eigenvalues(self) -> np.ndarray:
        return 2.0 * np.asarray(self.weights)


@dataclass(frozen=True)
class AnisotropicPowerField:
    """b(x) = (1+|x|^2)^(-l/2) + amp * x_1^2 * (1+|x|^2)^(-(m+2)/2).

    Smooth, positive, with radial part decaying like r^-l and an
    anisotropic oscillation of order r^-m; the oscillation exponent m is
    a free dial for exercising the smallness criteria on either side of
    their threshold.
    """

    l: float
    m: float
    amp: float
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise CoefficientError("dim must be >= 2")
        if self.amp < 0:
            raise CoefficientError("amp must be nonnegative")

    @property
    def tail_star(self) -> float:
        return float(self.l)

    @property
    def tail_upper(self) -> float:
        return float(min(self.l, self.m)) if self.amp > 0 else float(self.l)

    @property
    def tail_osc(self) -> float:
        return float(self.m)

    def eval(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r2 = np.sum(pts ** 2, axis=1)
        base = (1.0 + r2) ** (-self.l / 2.0)
        if self.amp == 0.0:
            return base
        return base + self.amp * pts[:, 0] ** 2 * (1.0 + r2) ** (-(self.m + 2.0) / 2.0)

    __call__ = eval

    def envelope_profiles(self):
        l, m, amp = self.l, self.m, self.amp
        star = RadialProfile.power_tail(l)
        upper = RadialProfile.from_callable(
            lambda r: (1.0 + np.asarray(r) ** 2) ** (-l / 2.0)
            + amp * np.asarray(r) ** 2 * (1.0 + np.asarray(r) ** 2) ** (-(m + 2.0) / 2.0),
            tail_exponent=min(l, m) if amp > 0 else l)
        return star, upper


BUILTIN_FIELDS = {
    "counterexample": lambda **kw: QuadraticRootField(weights=(2.0, 1.0, 1.0), shift=1.0, amp=8.0),
    "anisotropic_power": lambda **kw: AnisotropicPowerField(
        l=float(kw["l"]), m=float(kw["m"]), amp=float(kw.get("amp", 1.0)), dim=int(kw.get("dim", 3))),
}


def make_builtin_field(name: str, **kwargs):
    try:
        factory = BUILTIN_FIELDS[name]
    except KeyError:
        raise CoefficientError(
            f"unknown builtin field {name!r}; available: {sorted(BUILTIN_FIELDS)}") from None
    return factory(**kwargs)


@dataclass(frozen=True)
class RadializedTriple:
    """Spherical envelopes of a non-radial coefficient on a grid."""

    b_star: RadialProfile
    b_upper: RadialProfile
    b_osc: RadialProfile

    def osc_negligible(self, rel_tol: float = 1e-12) -> bool:
        """True when the oscillation is zero to within rel_tol of the
        envelope scale (i.e. the field is radial for all practical
        purposes)."""
        if self.b_osc.is_zero():
            return True
        if self.b_osc.kind == "tabulated" and self.b_star.kind == "tabulated":
            scale = float(np.max(self.b_star.values))
            return bool(np.max(self.b_osc.values) <= rel_tol * scale)
        return False


def triple_from_radial(profile: RadialProfile) -> RadializedTriple:
    """Degenerate triple for a genuinely radial coefficient."""
    return RadializedTriple(profile, profile, RadialProfile.zero())


def _eval_field(field, points: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(field(points), dtype=float)
        if vals.shape == (points.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([float(field(p)) for p in points])


def radialize(field, grid: RadialGrid, sphere_count: int = 256) -> RadializedTriple:
    """Tabulate the spherical envelopes of ``field`` on ``grid``.

    ``sphere_count`` points per radius (>= 32) are drawn from the nested
    deterministic sequence, rotated per radius.  The minimum over the
    sample overestimates b_* and the maximum underestimates b^*, and both
    converge monotonically as the count doubles.
    """
    if sphere_count < 32:
        raise CoefficientError(f"sphere_count must be >= 32, got {sphere_count}")
    dim = getattr(field, "dim", None)
    if dim is None:
        raise CoefficientError("field must expose its dimension via a 'dim' attribute")
    nodes = grid.nodes
    star = np.empty(nodes.size)
    upper = np.empty(nodes.size)
    center = _eval_field(field, np.zeros((1, dim)))[0]
    if center <= 0:
        raise CoefficientError("field must be positive at the origin")
    star[0] = upper[0] = center
    for i in range(1, nodes.size):
        pts = nodes[i] * sphere_points(dim, sphere_count, radius_index=i)
        vals = _eval_field(field, pts)
        if np.any(vals <= 0):
            raise CoefficientError(f"field must be positive; found min {vals.min():g} "
                                   f"at radius {nodes[i]:g}")
        star[i] = vals.min()
        upper[i] = vals.max()
    osc = np.maximum(upper - star, 0.0)
    tail_star = getattr(field, "tail_star", None)
    tail_upper = getattr(field, "tail_upper", None)
    tail_osc = getattr(field, "tail_osc", None)
    return RadializedTriple(
        b_star=RadialProfile.tabulated(nodes, star, tail_exponent=tail_star),
        b_upper=RadialProfile.tabulated(nodes, upper, tail_exponent=tail_upper),
        b_osc=RadialProfile.tabulated(nodes, osc, tail_exponent=tail_osc,
                                      strictly_positive=False),
    )
