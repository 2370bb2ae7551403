"""Batch front end: JSON task configs in, result JSON / decay CSV / report JSON out.

One config describes one task.  Complex numbers are [re, im] pairs everywhere.
Identical configs produce byte-identical outputs; there are no timestamps and
all randomness is seeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .spaces import DEFAULT_DEGREE, AnalyticFunction, SpaceSpec, as_element
from .engine import (
    ApproximationResult,
    OptimizerConfig,
    afd_greedy,
    nbest,
    residual_decay_sweep,
)
from .stochastic import Ensemble, generate_ensemble, stochastic_nbest
from .verify import battery

_TASKS = ("afd", "nbest", "stochastic", "verify")

_OPTIMIZER_KEYS = {
    "delta": float,
    "grid_density": int,
    "multistart": int,
    "ftol": float,
    "xtol": float,
    "max_iter": int,
    "fd_step": float,
    "seed": int,
    "merge_tol": float,
    "workers": int,
    "polish": bool,
}


@dataclass
class TaskConfig:
    task: str
    space: SpaceSpec
    signal: object  # AnalyticFunction | Ensemble | None (verify)
    n: int = 0
    n_max: int | None = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    output: dict = field(default_factory=dict)


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _expect_mapping(obj, path: str, allowed: set, required: set) -> dict:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    for key in obj:
        if key not in allowed:
            _fail(f"{path}/{key}", "unknown field")
    for key in required:
        if key not in obj:
            _fail(path, f"missing required field {key!r}")
    return obj


def _complex_pair(v, path: str) -> complex:
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    ):
        _fail(path, "expected a [re, im] number pair")
    return complex(float(v[0]), float(v[1]))


def _positive_int(v, path: str, minimum: int = 0) -> int:
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        _fail(path, f"expected an integer >= {minimum}")
    return v


def _number(v, path: str) -> float:
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        _fail(path, "expected a number")
    return float(v)


def _parse_space(obj, path: str) -> SpaceSpec:
    obj = _expect_mapping(obj, path, {"family", "param", "degree", "radius_cap"}, {"family"})
    family = obj["family"]
    if family not in ("hardy", "bergman", "weighted_hardy"):
        _fail(f"{path}/family", f"unknown family {family!r}")
    param = _number(obj.get("param", 0.0), f"{path}/param")
    if family == "bergman" and param <= -1.0:
        _fail(f"{path}/param", "bergman exponent must exceed -1")
    degree = _positive_int(obj.get("degree", DEFAULT_DEGREE), f"{path}/degree", minimum=1)
    kwargs = {}
    if "radius_cap" in obj:
        kwargs["radius_cap"] = _number(obj["radius_cap"], f"{path}/radius_cap")
    try:
        return SpaceSpec(family, param, degree, **kwargs)
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_atoms(items, path: str, spec: SpaceSpec) -> list[tuple[complex, complex, int]]:
    if not isinstance(items, list) or not items:
        _fail(path, "expected a non-empty list of kernel atoms")
    atoms = []
    for i, item in enumerate(items):
        item = _expect_mapping(item, f"{path}/{i}", {"a", "c", "order"}, {"a", "c"})
        a = _complex_pair(item["a"], f"{path}/{i}/a")
        if abs(a) >= 1.0:
            _fail(f"{path}/{i}/a", "kernel parameter must lie in the open unit disc")
        c = _complex_pair(item["c"], f"{path}/{i}/c")
        order = _positive_int(item.get("order", 1), f"{path}/{i}/order", minimum=1)
        if order > spec.max_degree:
            _fail(f"{path}/{i}/order", "order exceeds the space degree")
        atoms.append((a, c, order))
    return atoms


def _mix_function(spec: SpaceSpec, atoms) -> AnalyticFunction:
    from .spaces import multiple_kernel

    coeffs = np.zeros(spec.max_degree + 1, dtype=np.complex128)
    for a, c, order in atoms:
        coeffs += c * multiple_kernel(spec, a, order).coeffs
    return AnalyticFunction(coeffs)


def _parse_signal(obj, path: str, spec: SpaceSpec):
    obj = _expect_mapping(
        obj, path, {"coefficients", "kernel_mix", "random", "realizations", "weights"}, set()
    )
    forms = [k for k in ("coefficients", "kernel_mix", "random", "realizations") if k in obj]
    if len(forms) != 1:
        _fail(path, "exactly one of coefficients, kernel_mix, random, realizations is required")
    form = forms[0]
    if "weights" in obj and form != "realizations":
        _fail(f"{path}/weights", "weights apply only to explicit realizations")
    if form == "coefficients":
        pairs = obj["coefficients"]
        if not isinstance(pairs, list) or not pairs:
            _fail(f"{path}/coefficients", "expected a non-empty list of [re, im] pairs")
        values = [_complex_pair(p, f"{path}/coefficients/{i}") for i, p in enumerate(pairs)]
        if len(values) > spec.max_degree + 1:
            _fail(f"{path}/coefficients", "more coefficients than the space degree allows")
        return as_element(spec, values)
    if form == "kernel_mix":
        return _mix_function(spec, _parse_atoms(obj["kernel_mix"], f"{path}/kernel_mix", spec))
    if form == "realizations":
        rows = obj["realizations"]
        if not isinstance(rows, list) or not rows:
            _fail(f"{path}/realizations", "expected a non-empty list of coefficient lists")
        funcs = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or not row:
                _fail(f"{path}/realizations/{i}", "expected a non-empty list of [re, im] pairs")
            values = [
                _complex_pair(p, f"{path}/realizations/{i}/{j}") for j, p in enumerate(row)
            ]
            if len(values) > spec.max_degree + 1:
                _fail(f"{path}/realizations/{i}", "more coefficients than the space degree allows")
            funcs.append(as_element(spec, values))
        weights = None
        if "weights" in obj:
            w = obj["weights"]
            if not isinstance(w, list) or len(w) != len(funcs):
                _fail(f"{path}/weights", "expected one weight per realization")
            weights = [_number(x, f"{path}/weights/{i}") for i, x in enumerate(w)]
        try:
            return Ensemble.from_functions(spec, funcs, weights)
        except ValueError as exc:
            _fail(path, str(exc))
    rnd = _expect_mapping(
        obj["random"],
        f"{path}/random",
        {"kind", "gamma", "M", "seed", "atoms", "xi"},
        {"kind", "M", "seed"},
    )
    kind = rnd["kind"]
    m = _positive_int(rnd["M"], f"{path}/random/M", minimum=1)
    seed = _positive_int(rnd["seed"], f"{path}/random/seed", minimum=0)
    if kind == "decaying_gaussian":
        if "gamma" not in rnd:
            _fail(f"{path}/random", "missing required field 'gamma'")
        params = {"gamma": _number(rnd["gamma"], f"{path}/random/gamma")}
    elif kind == "kernel_mix":
        if "atoms" not in rnd:
            _fail(f"{path}/random", "missing required field 'atoms'")
        params = {"atoms": _parse_atoms(rnd["atoms"], f"{path}/random/atoms", spec)}
        if "xi" in rnd:
            if rnd["xi"] not in ("ones", "complex_normal"):
                _fail(f"{path}/random/xi", "expected 'ones' or 'complex_normal'")
            params["xi"] = rnd["xi"]
    else:
        _fail(f"{path}/random/kind", f"unknown random signal kind {kind!r}")
    try:
        return generate_ensemble(spec, kind, params, m, seed)
    except ValueError as exc:
        _fail(f"{path}/random", str(exc))


def _parse_optimizer(obj, path: str) -> OptimizerConfig:
    obj = _expect_mapping(obj, path, set(_OPTIMIZER_KEYS), set())
    kwargs = {}
    for key, value in obj.items():
        want = _OPTIMIZER_KEYS[key]
        if want is bool:
            if not isinstance(value, bool):
                _fail(f"{path}/{key}", "expected a boolean")
            kwargs[key] = value
        elif want is int:
            kwargs[key] = _positive_int(value, f"{path}/{key}", minimum=0)
        else:
            kwargs[key] = _number(value, f"{path}/{key}")
    try:
        return OptimizerConfig(**kwargs)
    except ValueError as exc:
        _fail(path, str(exc))


def parse_config(text: str) -> TaskConfig:
    """Parse and validate a task config; diagnostics carry the offending path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"/: invalid JSON ({exc})") from exc
    raw = _expect_mapping(
        raw, "", {"task", "space", "signal", "n", "n_max", "optimizer", "output"}, {"space", "task"}
    )
    task = raw["task"]
    if task not in _TASKS:
        _fail("/task", f"unknown task {task!r}")
    spec = _parse_space(raw["space"], "/space")
    signal = None
    if task == "verify":
        if "signal" in raw:
            _fail("/signal", "verify tasks take no signal")
    else:
        if "signal" not in raw:
            _fail("", "missing required field 'signal'")
        signal = _parse_signal(raw["signal"], "/signal", spec)
    n = _positive_int(raw.get("n", 0), "/n", minimum=0)
    n_max = None
    if "n_max" in raw:
        n_max = _positive_int(raw["n_max"], "/n_max", minimum=1)
        if task in ("stochastic", "verify"):
            _fail("/n_max", "decay sweeps are only defined for afd and nbest tasks")
    optimizer = _parse_optimizer(raw.get("optimizer", {}), "/optimizer")
    output = _expect_mapping(
        raw.get("output", {}), "/output", {"result", "decay", "report"}, set()
    )
    for key, value in output.items():
        if not isinstance(value, str) or not value:
            _fail(f"/output/{key}", "expected a non-empty file name")
    return TaskConfig(task, spec, signal, n, n_max, optimizer, dict(output))


# -- serialization -------------------------------------------------------------


def _pairs(values) -> list[list[float]]:
    return [[float(np.real(v)), float(np.imag(v))] for v in np.asarray(values).ravel()]


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        return [float(np.real(obj)), float(np.imag(obj))]
    return obj


def _space_block(spec: SpaceSpec) -> dict:
    return {"family": spec.family, "param": spec.param, "degree": spec.max_degree}


def _result_payload(cfg: TaskConfig, res: ApproximationResult, n: int, seed: int) -> dict:
    return {
        "task": cfg.task,
        "method": res.method,
        "space": _space_block(cfg.space),
        "n": n,
        "norm": res.norm,
        "energy": res.energy,
        "residual": res.residual,
        "parameters": _pairs(res.params.points),
        "multiplicities": list(res.params.orders),
        "coefficients": _pairs(res.coefficients),
        "seed": seed,
        "trace": _jsonify(res.trace),
        "degraded": res.degraded,
    }


def emit_decay_table(results) -> str:
    """CSV text with header n,residual,energy and one row per node count."""
    lines = ["n,residual,energy"]
    for n, res in enumerate(results):
        lines.append(f"{n},{res.residual!r},{res.energy!r}")
    return "\n".join(lines) + "\n"


def _dump_json(payload, path: Path) -> None:
    path.write_text(json.dumps(_jsonify(payload), indent=2, sort_keys=True) + "\n")


def run_task(cfg: TaskConfig, out_dir: Path, threads: int | None = None, seed: int | None = None) -> int:
    """Execute one task and write its artifacts; returns the exit status."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    optimizer = cfg.optimizer
    if seed is not None:
        optimizer = OptimizerConfig(**{**optimizer.__dict__, "seed": seed})
    if threads is not None:
        optimizer = OptimizerConfig(**{**optimizer.__dict__, "workers": max(1, threads)})
    result_path = out_dir / cfg.output.get("result", "result.json")
    decay_path = out_dir / cfg.output.get("decay", "decay.csv")
    report_path = out_dir / cfg.output.get("report", "report.json")

    if cfg.task == "verify":
        reports = battery(cfg.space, seed=optimizer.seed)
        payload = {
            "task": "verify",
            "space": _space_block(cfg.space),
            "seed": optimizer.seed,
            "checks": [r.to_dict() for r in reports],
            "all_passed": all(r.passed for r in reports),
        }
        _dump_json(payload, report_path)
        return 0 if payload["all_passed"] else 2

    if cfg.task == "stochastic":
        signal = cfg.signal
        if isinstance(signal, AnalyticFunction):
            signal = Ensemble.from_functions(cfg.space, [signal])
        res = stochastic_nbest(signal, cfg.n, optimizer)
        payload = {
            "task": "stochastic",
            "method": res.method,
            "space": _space_block(cfg.space),
            "n": cfg.n,
            "realizations": len(signal),
            "bochner_norm": res.bochner_norm,
            "expected_energy": res.expected_energy,
            "expected_residual": res.expected_residual,
            "parameters": _pairs(res.params.points),
            "multiplicities": list(res.params.orders),
            "coefficients": [_pairs(row) for row in np.atleast_2d(res.coefficients)],
            "seed": optimizer.seed,
            "trace": _jsonify(res.trace),
            "degraded": res.degraded,
        }
        _dump_json(payload, result_path)
        return 0

    signal = cfg.signal
    if isinstance(signal, Ensemble):
        raise ConfigError("/signal: afd and nbest tasks need a single-function signal")
    if cfg.n_max is not None:
        if cfg.task == "afd":
            results = [afd_greedy(cfg.space, signal, n, optimizer) for n in range(cfg.n_max + 1)]
        else:
            results = residual_decay_sweep(cfg.space, signal, cfg.n_max, optimizer)
        decay_path.write_text(emit_decay_table(results))
        final = results[-1]
        _dump_json(_result_payload(cfg, final, cfg.n_max, optimizer.seed), result_path)
        return 0
    engine = afd_greedy if cfg.task == "afd" else nbest
    res = engine(cfg.space, signal, cfg.n, optimizer)
    _dump_json(_result_payload(cfg, res, cfg.n, optimizer.seed), result_path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nbestkernel",
        description="Greedy / n-best kernel approximation tasks from JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("afd", "greedy approximation"),
        ("nbest", "global n-best approximation"),
        ("stochastic", "shared-node approximation of a random ensemble"),
        ("verify", "run the numerical certification battery"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="task config JSON path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker cap for multistart")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text())
        if cfg.task != args.command:
            raise ConfigError(
                f"/task: config declares {cfg.task!r} but the {args.command!r} subcommand was invoked"
            )
        return run_task(cfg, Path(args.out), threads=args.threads, seed=args.seed)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
