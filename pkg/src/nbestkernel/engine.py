"""Captured-energy objective, greedy node selection and multistart global search.

The objective for a node tuple is the energy captured by projecting onto the
tuple's kernel span.  Greedy selection maximizes the per-step energy increment
over a coarse disc grid refined by local search; the global engine adds
stratified multistart seeds, derivative-free descent over all node coordinates
at once, and a merge polish that re-optimizes near-coincident nodes as a single
higher-multiplicity node.  Existence theory confines maxima to a compact disc
of radius ``1 - delta``, which is the search region.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateTupleWarning, DomainError
from .spaces import (
    DEFAULT_MERGE_TOL,
    DEFAULT_RADIUS_CAP,
    AnalyticFunction,
    ParamTuple,
    SpaceSpec,
    _check_member,
    kernel_matrix,
)
from .orthosystem import _gram_schmidt_impl

_EXACT_CAPTURE_TOL = 1e-13
_CLUSTER_TOL = 0.02


@dataclass
class OptimizerConfig:
    """Knobs for the greedy and global engines.

    ``delta`` is the boundary margin (search radius ``1 - delta``),
    ``grid_density`` the coarse Cartesian grid points per axis,
    ``ftol``/``xtol`` the relative objective / absolute coordinate tolerances
    of the local searches, ``fd_step`` the relative step of the central
    finite-difference polish, and ``merge_tol`` the node-merging distance.
    All randomness flows from ``seed``; identical configs give identical
    results regardless of ``workers``.
    """

    delta: float = 0.05
    grid_density: int = 24
    multistart: int = 8
    ftol: float = 1e-12
    xtol: float = 1e-8
    max_iter: int = 2000
    fd_step: float = 1e-5
    seed: int = 0
    merge_tol: float = DEFAULT_MERGE_TOL
    workers: int = 1
    polish: bool = True

    def __post_init__(self):
        if not 1.0 - DEFAULT_RADIUS_CAP <= self.delta < 1.0:
            raise ValueError(
                f"boundary margin must lie in [{1.0 - DEFAULT_RADIUS_CAP}, 1), got {self.delta}"
            )
        if self.grid_density < 4:
            raise ValueError("grid_density must be at least 4")
        if self.ftol <= 0.0 or self.xtol <= 0.0:
            raise ValueError("ftol and xtol must be positive")
        if self.multistart < 0 or self.max_iter < 1 or self.workers < 1:
            raise ValueError("multistart, max_iter and workers must be sensible")


@dataclass
class ApproximationResult:
    """Output of the greedy or global engine for a single signal.

    ``energy`` is the captured squared norm, ``residual`` the norm of what is
    left, and the two satisfy energy + residual**2 = norm**2 up to rounding.
    """

    params: ParamTuple
    coefficients: np.ndarray
    energy: float
    residual: float
    norm: float
    method: str
    trace: list = field(default_factory=list)
    degraded: bool = False


class _Bundle:
    """A weighted family of signals over one space; single signals are M = 1."""

    def __init__(self, spec: SpaceSpec, matrix: np.ndarray, probs: np.ndarray):
        self.spec = spec
        self.matrix = matrix
        self.probs = probs
        self.weighted = matrix * spec.weights
        self.norms_sq = np.real(np.sum(self.weighted * np.conj(matrix), axis=1))
        self.total_sq = float(self.probs @ self.norms_sq)

    @classmethod
    def single(cls, spec: SpaceSpec, f: AnalyticFunction) -> "_Bundle":
        _check_member(spec, f)
        return cls(spec, f.coeffs[None, :], np.ones(1))

    def make_tuple(self, points, cfg: OptimizerConfig) -> ParamTuple:
        return ParamTuple(tuple(points), cfg.merge_tol, self.spec.radius_cap)

    def captured(self, params: ParamTuple) -> tuple[float, bool]:
        """Captured energy of the tuple; degenerate tuples fall back to the
        longest well-conditioned prefix and report degradation."""
        if not len(params):
            return 0.0, False
        system, degraded = _gram_schmidt_impl(
            self.spec, params, eps_degenerate=1e-10, allow_partial=True
        )
        if not len(system):
            return 0.0, degraded
        c = self.weighted @ system.basis.conj().T
        return float(self.probs @ np.sum(np.abs(c) ** 2, axis=1)), degraded

    def finalize(self, points, cfg: OptimizerConfig):
        """Exact recomputation of coefficients, energy and residual."""
        params = self.make_tuple(points, cfg)
        system, degraded = _gram_schmidt_impl(
            self.spec, params, eps_degenerate=1e-10, allow_partial=True
        )
        if len(system) < len(params):
            params = system.params
        if len(system):
            coeffs = self.weighted @ system.basis.conj().T
            recon = coeffs @ system.basis
        else:
            coeffs = np.zeros((self.matrix.shape[0], 0), dtype=np.complex128)
            recon = np.zeros_like(self.matrix)
        leftover = self.matrix - recon
        resid_sq = np.real(np.sum(self.spec.weights * np.abs(leftover) ** 2, axis=1))
        energy = float(self.probs @ np.sum(np.abs(coeffs) ** 2, axis=1))
        residual = math.sqrt(max(float(self.probs @ resid_sq), 0.0))
        return params, coeffs, energy, residual, degraded


def energy(spec: SpaceSpec, f: AnalyticFunction, params: ParamTuple) -> float:
    """Captured energy of ``f`` on the tuple's kernel span.

    Invariant under permutations of the tuple and nondecreasing under
    extension.  A numerically degenerate tuple degrades to its maximal
    well-conditioned prefix and emits ``DegenerateTupleWarning``.
    """
    val, degraded = _Bundle.single(spec, f).captured(params)
    if degraded:
        warnings.warn(
            "degenerate node tuple: energy computed on its well-conditioned prefix",
            DegenerateTupleWarning,
            stacklevel=2,
        )
    return val


# -- local search -------------------------------------------------------------


def _clamped_points(x: np.ndarray, radius: float) -> np.ndarray:
    pts = x[0::2] + 1j * x[1::2]
    r = np.abs(pts)
    over = r > radius
    if np.any(over):
        pts = np.where(over, pts * (radius / np.maximum(r, 1e-300)), pts)
    return pts


def _search_radius(bundle: _Bundle, cfg: OptimizerConfig) -> float:
    return min(1.0 - cfg.delta, bundle.spec.radius_cap)


def _local_search(bundle, cfg, x0, prefix=(), orders=None):
    """Nelder-Mead descent plus an optional central-difference quasi-Newton
    polish on the flattened real coordinates; nodes overshooting the search
    disc are clamped radially inside the objective."""
    radius = _search_radius(bundle, cfg)
    prefix = tuple(prefix)

    def expand(pts: np.ndarray):
        if orders is None:
            return prefix + tuple(pts)
        full: list[complex] = list(prefix)
        for p, o in zip(pts, orders):
            full.extend([complex(p)] * o)
        return tuple(full)

    def fun(x: np.ndarray) -> float:
        pts = _clamped_points(np.asarray(x, dtype=np.float64), radius)
        val, _ = bundle.captured(bundle.make_tuple(expand(pts), cfg))
        return -val

    x0 = np.asarray(x0, dtype=np.float64)
    scale = max(1.0, bundle.total_sq)
    res = minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.max_iter,
            "maxfev": 2 * cfg.max_iter,
            "xatol": cfg.xtol,
            "fatol": cfg.ftol * scale,
        },
    )
    best_x, best_f = res.x, float(res.fun)
    if cfg.polish:
        bounds = [(-radius, radius)] * x0.size
        pol = minimize(
            fun,
            best_x,
            method="L-BFGS-B",
            jac="3-point",
            bounds=bounds,
            options={
                "maxiter": cfg.max_iter,
                "ftol": 1e-15,
                "gtol": 1e-12,
                "finite_diff_rel_step": cfg.fd_step,
            },
        )
        if float(pol.fun) < best_f:
            best_x, best_f = pol.x, float(pol.fun)
    pts = _clamped_points(np.asarray(best_x, dtype=np.float64), radius)
    return expand(pts), -best_f


def _as_x(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.complex128)
    out = np.empty(2 * pts.size)
    out[0::2] = pts.real
    out[1::2] = pts.imag
    return out


def _disc_grid(radius: float, density: int) -> np.ndarray:
    xs = np.linspace(-radius, radius, density)
    gx, gy = np.meshgrid(xs, xs)
    pts = (gx + 1j * gy).ravel()
    return pts[np.abs(pts) <= radius + 1e-15]


def _grid_increments(bundle: _Bundle, grid_rows: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Energy increment of adding each grid kernel to the current span."""
    w = bundle.spec.weights
    if basis.shape[0]:
        proj = (grid_rows * w) @ basis.conj().T
        ortho = grid_rows - proj @ basis
    else:
        ortho = grid_rows
    norms = np.real(np.sum(w * np.abs(ortho) ** 2, axis=1))
    raw = np.real(np.sum(w * np.abs(grid_rows) ** 2, axis=1))
    c = bundle.weighted @ ortho.conj().T
    gains = bundle.probs @ np.abs(c) ** 2
    ok = norms > 1e-12 * np.maximum(raw, 1.0)
    out = np.full(grid_rows.shape[0], -np.inf)
    out[ok] = gains[ok] / norms[ok]
    return out


def _greedy_points(bundle: _Bundle, n: int, cfg: OptimizerConfig, trace: list):
    """Sequential node selection; stops early once the signal is captured."""
    radius = _search_radius(bundle, cfg)
    grid = _disc_grid(radius, cfg.grid_density)
    grid_rows = kernel_matrix(bundle.spec, grid)
    points: list[complex] = []
    basis = np.zeros((0, bundle.spec.max_degree + 1), dtype=np.complex128)
    total = 0.0
    for step in range(n):
        inc = _grid_increments(bundle, grid_rows, basis)
        best = int(np.argmax(inc))
        if not np.isfinite(inc[best]) or inc[best] <= 0.0:
            break
        new_pts, total = _local_search(
            bundle, cfg, _as_x([grid[best]]), prefix=tuple(points)
        )
        points = list(new_pts)
        system, _ = _gram_schmidt_impl(
            bundle.spec, bundle.make_tuple(points, cfg), 1e-10, allow_partial=True
        )
        basis = system.basis
        trace.append(
            {
                "step": step + 1,
                "node": [points[-1].real, points[-1].imag],
                "energy": total,
            }
        )
        if bundle.total_sq - total <= max(cfg.ftol, _EXACT_CAPTURE_TOL) * max(
            bundle.total_sq, 1.0
        ):
            break
    return points, total


def _cluster_structure(points):
    """Group near-coincident nodes; returns (centers, orders) or None."""
    centers: list[complex] = []
    orders: list[int] = []
    for p in points:
        for i, c in enumerate(centers):
            if abs(p - c) <= _CLUSTER_TOL:
                orders[i] += 1
                centers[i] = c + (p - c) / orders[i]
                break
        else:
            centers.append(complex(p))
            orders.append(1)
    if len(centers) == len(points):
        return None
    return centers, orders


def _stratified_seeds(rng, radius: float, n: int, count: int) -> list[np.ndarray]:
    """Area-uniform random node sets with radius stratification across starts."""
    seeds = []
    for s in range(count):
        lo = s / max(count, 1)
        hi = (s + 1) / max(count, 1)
        rr = radius * np.sqrt(rng.uniform(lo, hi, size=n))
        th = rng.uniform(0.0, 2.0 * math.pi, size=n)
        seeds.append(rr * np.exp(1j * th))
    return seeds


def _nbest_points(bundle: _Bundle, n: int, cfg: OptimizerConfig, trace: list, warm=None):
    radius = _search_radius(bundle, cfg)
    greedy_trace: list = []
    greedy_pts, greedy_energy = _greedy_points(bundle, n, cfg, greedy_trace)
    trace.append({"stage": "greedy", "steps": greedy_trace, "energy": greedy_energy})

    candidates: list[tuple[tuple, float]] = [(tuple(greedy_pts), greedy_energy)]
    if bundle.total_sq - greedy_energy <= _EXACT_CAPTURE_TOL * max(bundle.total_sq, 1.0):
        return list(greedy_pts)

    starts: list[np.ndarray] = []
    if len(greedy_pts) == n:
        starts.append(_as_x(greedy_pts))
    if warm:
        for pts in warm:
            if len(pts) == n:
                starts.append(_as_x(pts))

    rng = np.random.default_rng(cfg.seed)
    grid = _disc_grid(radius, cfg.grid_density)
    grid_rows = kernel_matrix(bundle.spec, grid)
    single = _grid_increments(
        bundle, grid_rows, np.zeros((0, bundle.spec.max_degree + 1), dtype=np.complex128)
    )
    top = grid[np.argsort(single)[::-1][: max(3 * n, 8)]]
    n_top = cfg.multistart // 2
    for _ in range(n_top):
        if len(top) >= n:
            pick = rng.choice(len(top), size=n, replace=False)
            starts.append(_as_x(top[pick]))
    starts.extend(
        _as_x(s) for s in _stratified_seeds(rng, radius, n, cfg.multistart - n_top)
    )

    def run(x0):
        return _local_search(bundle, cfg, x0)

    if cfg.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(x0) for x0 in starts]
    for pts, val in results:
        candidates.append((tuple(pts), val))
        trace.append({"stage": "local", "energy": val})

    # Merge polish: re-optimize near-coincident nodes as one repeated node, so
    # signals built from derivative kernels are recoverable exactly.
    ranked = sorted(candidates, key=lambda c: -c[1])
    for pts, _ in ranked[:3]:
        structure = _cluster_structure(pts)
        if structure is None:
            continue
        centers, orders = structure
        merged_pts, merged_val = _local_search(
            bundle, cfg, _as_x(centers), orders=orders
        )
        candidates.append((tuple(merged_pts), merged_val))
        trace.append({"stage": "merge-polish", "energy": merged_val})

    def sort_key(cand):
        pts, val = cand
        rounded = sorted((round(p.real, 12), round(p.imag, 12)) for p in pts)
        return (-val, rounded)

    best_pts, _ = min(candidates, key=sort_key)
    return list(best_pts)


# -- public engines ------------------------------------------------------------


def _trivial_result(bundle: _Bundle, cfg: OptimizerConfig, method: str) -> ApproximationResult:
    params = bundle.make_tuple((), cfg)
    return ApproximationResult(
        params=params,
        coefficients=np.zeros(0, dtype=np.complex128),
        energy=0.0,
        residual=math.sqrt(max(bundle.total_sq, 0.0)),
        norm=math.sqrt(max(bundle.total_sq, 0.0)),
        method=method,
        trace=[],
    )


def _single_result(bundle, points, cfg, method, trace) -> ApproximationResult:
    params, coeffs, cap, residual, degraded = bundle.finalize(points, cfg)
    return ApproximationResult(
        params=params,
        coefficients=coeffs[0],
        energy=cap,
        residual=residual,
        norm=math.sqrt(max(bundle.total_sq, 0.0)),
        method=method,
        trace=trace,
        degraded=degraded,
    )


def afd_greedy(
    spec: SpaceSpec, f: AnalyticFunction, n: int, config: OptimizerConfig | None = None
) -> ApproximationResult:
    """Greedy approximation: each node maximizes the energy increment given
    the nodes already chosen, via grid search plus local refinement."""
    cfg = config or OptimizerConfig()
    bundle = _Bundle.single(spec, f)
    if n < 0:
        raise ValueError("node count must be non-negative")
    if n == 0 or bundle.total_sq == 0.0:
        return _trivial_result(bundle, cfg, "afd")
    trace: list = []
    points, _ = _greedy_points(bundle, n, cfg, trace)
    return _single_result(bundle, points, cfg, "afd", trace)


def nbest(
    spec: SpaceSpec, f: AnalyticFunction, n: int, config: OptimizerConfig | None = None
) -> ApproximationResult:
    """Best n-node approximation by multistart global search over the compact
    search disc, warm-started from the greedy solution.  The returned energy
    never falls below the greedy energy."""
    cfg = config or OptimizerConfig()
    bundle = _Bundle.single(spec, f)
    if n < 0:
        raise ValueError("node count must be non-negative")
    if n == 0 or bundle.total_sq == 0.0:
        return _trivial_result(bundle, cfg, "nbest")
    trace: list = []
    points = _nbest_points(bundle, n, cfg, trace)
    return _single_result(bundle, points, cfg, "nbest", trace)


def bvc_profile(
    spec: SpaceSpec, f: AnalyticFunction, radii, n_angles: int = 256
) -> list[tuple[float, float]]:
    """Per-radius angular supremum of the normalized kernel pairing |<f, E_a>|.

    Certifies how fast captured energy dies toward the rim; used to justify
    the compact search radius.
    """
    _check_member(spec, f)
    out = []
    angles = np.exp(2j * math.pi * np.arange(n_angles) / n_angles)
    for r in radii:
        r = float(r)
        if not 0.0 <= r < 1.0:
            raise DomainError(f"profile radius must lie in [0, 1), got {r}")
        denom = math.sqrt(spec.kernel_norm_sq(r))
        if r == 0.0:
            sup = abs(complex(np.polynomial.polynomial.polyval(0.0, f.coeffs))) / denom
        else:
            vals = np.polynomial.polynomial.polyval(r * angles, f.coeffs)
            sup = float(np.max(np.abs(vals))) / denom
        out.append((r, sup))
    return out


def residual_decay_sweep(
    spec: SpaceSpec, f: AnalyticFunction, n_max: int, config: OptimizerConfig | None = None
) -> list[ApproximationResult]:
    """Global results for n = 0 .. n_max with chained warm starts, so the
    residual column is nonincreasing."""
    cfg = config or OptimizerConfig()
    bundle = _Bundle.single(spec, f)
    results = [_trivial_result(bundle, cfg, "nbest")]
    prev: list[complex] = []
    for n in range(1, n_max + 1):
        if bundle.total_sq == 0.0:
            results.append(_trivial_result(bundle, cfg, "nbest"))
            continue
        trace: list = []
        warm = []
        if prev and len(prev) == n - 1:
            extension_trace: list = []
            extended, _ = _extend_greedily(bundle, list(prev), n, cfg, extension_trace)
            warm.append(extended)
        points = _nbest_points(bundle, n, cfg, trace, warm=warm)
        res = _single_result(bundle, points, cfg, "nbest", trace)
        results.append(res)
        prev = list(res.params.points)
    return results


def _extend_greedily(bundle, points, n, cfg, trace):
    radius = _search_radius(bundle, cfg)
    grid = _disc_grid(radius, cfg.grid_density)
    grid_rows = kernel_matrix(bundle.spec, grid)
    total = 0.0
    while len(points) < n:
        system, _ = _gram_schmidt_impl(
            bundle.spec, bundle.make_tuple(points, cfg), 1e-10, allow_partial=True
        )
        inc = _grid_increments(bundle, grid_rows, system.basis)
        best = int(np.argmax(inc))
        if not np.isfinite(inc[best]) or inc[best] <= 0.0:
            break
        new_pts, total = _local_search(bundle, cfg, _as_x([grid[best]]), prefix=tuple(points))
        points = list(new_pts)
        trace.append({"step": len(points), "energy": total})
    return points, total
