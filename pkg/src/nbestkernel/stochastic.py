"""Random signals as finite weighted ensembles and their shared-node n-best fit.

The probability space is discretized by sample averaging: an ensemble holds M
realizations with weights summing to one, the expected captured energy is the
weighted sum of per-realization energies, and the search runs over a single
node tuple shared by all realizations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTupleWarning, DivergenceRiskError, ShapeMismatchError
from .engine import OptimizerConfig, _Bundle, _nbest_points, _trivial_result
from .spaces import AnalyticFunction, ParamTuple, SpaceSpec, multiple_kernel


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted finite family of realizations sharing one space."""

    spec: SpaceSpec
    matrix: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] < 1:
            raise ShapeMismatchError("ensemble needs a (M, N+1) realization matrix with M >= 1")
        if m.shape[1] != self.spec.max_degree + 1:
            raise ShapeMismatchError(
                f"realization length {m.shape[1]} does not match space degree "
                f"{self.spec.max_degree}"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite realization coefficient")
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (m.shape[0],) or np.any(p < 0.0):
            raise ValueError("weights must be non-negative, one per realization")
        if abs(float(np.sum(p)) - 1.0) > 1e-12:
            raise ValueError("weights must sum to one within 1e-12")
        m = m.copy()
        p = p.copy()
        m.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_functions(cls, spec, functions, weights=None) -> "Ensemble":
        functions = list(functions)
        mat = np.stack([f.coeffs for f in functions])
        if weights is None:
            weights = np.full(len(functions), 1.0 / len(functions))
        return cls(spec, mat, np.asarray(weights, dtype=np.float64))

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def realizations(self) -> list[AnalyticFunction]:
        return [AnalyticFunction(row) for row in self.matrix]


@dataclass
class StochasticResult:
    """Shared node tuple with per-realization coefficients.

    ``expected_energy + expected_residual**2 = bochner_norm**2`` up to
    rounding; ``expected_residual`` is the root mean square residual, i.e. the
    ensemble norm of the leftover.
    """

    params: ParamTuple
    coefficients: np.ndarray
    expected_energy: float
    expected_residual: float
    bochner_norm: float
    method: str = "stochastic_nbest"
    trace: list = field(default_factory=list)
    degraded: bool = False


def _bundle(e: Ensemble) -> _Bundle:
    return _Bundle(e.spec, e.matrix, e.probs)


def bochner_norm(e: Ensemble) -> float:
    """Square root of the expected squared space norm."""
    return math.sqrt(max(_bundle(e).total_sq, 0.0))


def stochastic_energy(e: Ensemble, params: ParamTuple) -> float:
    """Expected captured energy of the shared tuple across realizations."""
    val, degraded = _bundle(e).captured(params)
    if degraded:
        warnings.warn(
            "degenerate node tuple: energy computed on its well-conditioned prefix",
            DegenerateTupleWarning,
            stacklevel=2,
        )
    return val


def stochastic_nbest(e: Ensemble, n: int, config: OptimizerConfig | None = None) -> StochasticResult:
    """Maximize expected captured energy over one shared node tuple."""
    cfg = config or OptimizerConfig()
    bundle = _bundle(e)
    if n < 0:
        raise ValueError("node count must be non-negative")
    if n == 0 or bundle.total_sq == 0.0:
        base = _trivial_result(bundle, cfg, "stochastic_nbest")
        return StochasticResult(
            params=base.params,
            coefficients=np.zeros((len(e), 0), dtype=np.complex128),
            expected_energy=0.0,
            expected_residual=base.residual,
            bochner_norm=base.norm,
            trace=[],
        )
    trace: list = []
    points = _nbest_points(bundle, n, cfg, trace)
    params, coeffs, cap, residual, degraded = bundle.finalize(points, cfg)
    return StochasticResult(
        params=params,
        coefficients=coeffs,
        expected_energy=cap,
        expected_residual=residual,
        bochner_norm=math.sqrt(max(bundle.total_sq, 0.0)),
        trace=trace,
        degraded=degraded,
    )


def generate_ensemble(
    spec: SpaceSpec, kind: str, params: dict, m: int, seed: int
) -> Ensemble:
    """Deterministic test-signal generators.

    ``kernel_mix`` scales a fixed kernel combination by one random factor per
    realization; ``decaying_gaussian`` draws coefficient k with independent
    real and imaginary parts, each N(0, (1+k)**(-2 gamma)), so the expected
    squared modulus of a coefficient is 2 (1+k)**(-2 gamma).
    """
    if m < 1:
        raise ValueError("ensemble size must be at least 1")
    rng = np.random.default_rng(seed)
    n1 = spec.max_degree + 1
    if kind == "kernel_mix":
        atoms = params["atoms"]
        base = np.zeros(n1, dtype=np.complex128)
        for atom in atoms:
            a, c, order = atom
            base += complex(c) * multiple_kernel(spec, complex(a), int(order)).coeffs
        scheme = params.get("xi", "complex_normal")
        if scheme == "ones":
            xi = np.ones(m, dtype=np.complex128)
        elif scheme == "complex_normal":
            xi = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        else:
            raise ValueError(f"unknown scale scheme {scheme!r}")
        mat = xi[:, None] * base[None, :]
    elif kind == "decaying_gaussian":
        gamma = float(params["gamma"])
        if spec.family == "hardy":
            beta_eff = 0.0
        elif spec.family == "weighted_hardy":
            beta_eff = spec.param
        else:
            beta_eff = -(1.0 + spec.param)
        if gamma <= (1.0 + beta_eff) / 2.0:
            raise DivergenceRiskError(
                f"decay exponent {gamma} risks a divergent norm; need "
                f"gamma > {(1.0 + beta_eff) / 2.0:g} for this space"
            )
        sd = (1.0 + np.arange(n1)) ** (-gamma)
        re = rng.standard_normal((m, n1))
        im = rng.standard_normal((m, n1))
        mat = sd[None, :] * (re + 1j * im)
    else:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    return Ensemble(spec, mat, np.full(m, 1.0 / m))
