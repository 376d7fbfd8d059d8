"""Shared domain types for radial k-Hessian problems.

For a smooth radial function u(|x|) the eigenvalues of the Hessian are
(u'', u'/r, ..., u'/r) with u'/r repeated n-1 times.  Every elementary
symmetric function of that spectrum therefore collapses to two binomial
terms, which is the identity the whole package funnels through:

    sigma_j = C(n-1, j) * (u'/r)^j  +  C(n-1, j-1) * u'' * (u'/r)^(j-1)

At the origin u'/r -> u''(0), so the spectrum degenerates to the identity
direction and sigma_j has the limit C(n, j) * u''(0)^j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

# Default relative tolerance for floating comparisons in invariant checks.
REL_TOL = 1e-9

# Hard ceiling on u before a solve is declared invalid; entire solutions
# cannot reach this at finite radius for admissible coefficients.
OVERFLOW_GUARD = 1e300


def binomial(n: int, k: int) -> int:
    """Exact integer binomial coefficient C(n, k).

    Raises ParameterError for negative inputs or k > n (no silent zero
    convention here; callers that need the extended convention use
    :func:`binomial_or_zero`).
    """
    if n < 0 or k < 0:
        raise ParameterError(f"binomial requires nonnegative arguments, got ({n}, {k})")
    if k > n:
        raise ParameterError(f"binomial requires k <= n, got ({n}, {k})")
    return math.comb(n, k)


def binomial_or_zero(n: int, k: int) -> int:
    """C(n, k) with the usual convention C(n, k) = 0 for k > n."""
    if n < 0 or k < 0:
        raise ParameterError(f"binomial requires nonnegative arguments, got ({n}, {k})")
    return math.comb(n, k) if k <= n else 0


def sigma_j_radial(j, d2u, du_over_r, n):
    """j-th elementary symmetric function of the radial Hessian spectrum.

    Parameters
    ----------
    j : int
        Order of the symmetric function, 1 <= j <= n.
    d2u : float or ndarray
        Radial second derivative u''.
    du_over_r : float or ndarray
        The repeated eigenvalue u'/r (use the limit u''(0) at r = 0).
    n : int
        Space dimension.

    Returns
    -------
    float or ndarray
        C(n-1, j) * t^j + C(n-1, j-1) * d2u * t^(j-1) with t = du_over_r.
    """
    if not 1 <= j <= n:
        raise ParameterError(f"sigma_j_radial requires 1 <= j <= n, got j={j}, n={n}")
    c_pure = binomial_or_zero(n - 1, j)
    c_mixed = binomial_or_zero(n - 1, j - 1)
    t = np.asarray(du_over_r) if isinstance(du_over_r, np.ndarray) else du_over_r
    if j == 1:
        return c_pure * t + c_mixed * d2u
    return c_pure * t ** j + c_mixed * d2u * t ** (j - 1)


@dataclass(frozen=True)
class ProblemParams:
    """Admissible data for the radial Cauchy problem.

    n : space dimension, n >= 3
    k : Hessian order, 1 <= k <= n
    gamma : sublinear exponent, 0 < gamma < k
    a : center value u(0) = a > 0
    """

    n: int
    k: int
    gamma: float
    a: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, int) or not isinstance(self.k, int):
            raise ParameterError("n and k must be integers")
        if self.n < 3:
            raise ParameterError(f"n must be >= 3, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"k must satisfy 1 <= k <= n, got k={self.k}, n={self.n}")
        if not (0.0 < self.gamma < self.k):
            raise ParameterError(
                f"gamma must satisfy 0 < gamma < k, got gamma={self.gamma}, k={self.k}"
            )
        if not self.a > 0.0:
            raise ParameterError(f"a must be positive, got {self.a}")

    @property
    def cnk(self) -> int:
        """C(n, k), the sigma_k of the identity spectrum."""
        return math.comb(self.n, self.k)

    @property
    def sub_power(self) -> float:
        """(k - gamma)/k, the exponent governing the sublinear envelope."""
        return (self.k - self.gamma) / self.k

    def with_center(self, a: float) -> "ProblemParams":
        """Copy of the parameters with a different center value."""
        return ProblemParams(self.n, self.k, self.gamma, a)


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radii starting at 0.

    Nodes are linear up to ``r_lin`` and log-spaced beyond, which resolves
    the center (where the solution is quadratic) without wasting nodes on
    the power-law tail.
    """

    nodes: np.ndarray
    r_lin: float = 10.0
    nodes_per_decade: int = 48

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ParameterError("grid needs at least two nodes")
        if nodes[0] != 0.0:
            raise ParameterError("grid must start at r = 0")
        if not np.all(np.diff(nodes) > 0):
            raise ParameterError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def build(cls, r_max: float, r_lin: float = 10.0, nodes_per_decade: int = 48) -> "RadialGrid":
        if r_max <= 0:
            raise ParameterError(f"r_max must be positive, got {r_max}")
        if r_lin <= 0:
            raise ParameterError(f"r_lin must be positive, got {r_lin}")
        if nodes_per_decade < 4:
            raise ParameterError("nodes_per_decade must be at least 4")
        r_lin = min(r_lin, r_max)
        n_lin = max(8, nodes_per_decade)
        lin = np.linspace(0.0, r_lin, n_lin + 1)
        if r_max <= r_lin:
            return cls(lin, r_lin=r_lin, nodes_per_decade=nodes_per_decade)
        decades = math.log10(r_max / r_lin)
        n_log = max(2, math.ceil(nodes_per_decade * decades))
        log_part = r_lin * 10.0 ** np.linspace(0.0, decades, n_log + 1)[1:]
        log_part[-1] = r_max
        return cls(np.concatenate([lin, log_part]), r_lin=r_lin, nodes_per_decade=nodes_per_decade)

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return self.nodes.size

    def refined(self, factor: int) -> np.ndarray:
        """Nodes with ``factor`` - 1 extra points inserted per cell
        (geometric inside log cells, linear near the origin)."""
        if factor <= 1:
            return self.nodes
        out = [np.array([0.0])]
        r = self.nodes
        for lo, hi in zip(r[:-1], r[1:]):
            if lo > 0 and hi / lo > 1.02:
                seg = np.geomspace(lo, hi, factor + 1)[1:]
            else:
                seg = np.linspace(lo, hi, factor + 1)[1:]
            out.append(seg)
        return np.concatenate(out)


@dataclass
class RadialCurve:
    """A radial function sampled on a grid, with derivatives.

    Solver output satisfies u(0) = a, u'(0) = 0, u nondecreasing and
    positive.  ``dense`` (optional) evaluates (u, M) between nodes, where
    M is the flux integral the solver propagates alongside u.
    """

    grid: RadialGrid
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    dense: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("u", "du", "d2u"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.grid.nodes.shape:
                raise ParameterError(f"{name} must match the grid shape")
            object.__setattr__(self, name, arr)

    def du_over_r(self) -> np.ndarray:
        """The repeated Hessian eigenvalue u'/r, with the identity limit
        u''(0) substituted at the origin."""
        r = self.grid.nodes
        t = np.empty_like(r)
        t[0] = self.d2u[0]
        t[1:] = self.du[1:] / r[1:]
        return t


def gamma_k_membership(curve: RadialCurve, params: ProblemParams) -> np.ndarray:
    """Node-wise test that the Hessian spectrum lies in the Garding cone
    of order k (sigma_j > 0 for every j <= k).

    At r = 0 the spectrum is a multiple of the identity, so membership
    there reduces to u''(0) > 0.
    """
    t = curve.du_over_r()
    ok = np.ones(len(curve.grid), dtype=bool)
    for j in range(1, params.k + 1):
        ok &= np.asarray(sigma_j_radial(j, curve.d2u, t, params.n)) > 0.0
    return ok
