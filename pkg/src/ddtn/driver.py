"""Run circuits on either engine, cross-check them, and sweep benchmarks.

:func:`run` produces a :class:`RunReport`, a JSON-ready record with the
result payload and the metrics of each engine. :func:`scaling_sweep`
produces rows for CSV output.
"""
from __future__ import annotations

import csv
import io
import time
from math import prod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .benchmarks import generate_benchmark
from .circuit import BasisState, Circuit, concatenate, invert_circuit
from .config import Tolerances, defaults
from .dd import (DDPackage, DenseCapExceeded, extract_statevector, get_amplitude,
                 node_count, nonzero_amplitudes)
from .paths import (TaskGraph, check_equivalence, default_sequential_path, execute_path,
                    plan_to_path)
from .tn import (ContractionPlan, TensorNetwork, choose_slice_labels, circuit_to_network,
                 contract, contract_sliced, gate_tensor_shape, plan_cost, plan_exhaustive,
                 plan_greedy)

__all__ = [
    "RunConfig",
    "RunReport",
    "CrossCheckDivergence",
    "FullStateRefused",
    "run",
    "scaling_sweep",
    "sweep_to_csv",
    "linear_fit",
    "METRICS",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1
BACKENDS = ("dd", "tn", "both")
MODES = ("full", "amplitude", "fidelity")


class FullStateRefused(DenseCapExceeded):
    """Full-state tensor contraction was requested above the dense cap."""


class CrossCheckDivergence(RuntimeError):
    def __init__(self, report: "RunReport"):
        super().__init__(f"backends disagree: max deviation {report.cross_check['max_deviation']:.3e}")
        self.report = report


@dataclass
class RunConfig:
    backend: str = "dd"
    mode: str = "full"
    basis: str | None = None           # amplitude mode: bits, q_{n-1} first
    initial: str | None = None         # input basis state, defaults to all zeros
    strategy: str = "sequential"       # sequential | alternating | greedy-alt | plan
    ratio: int = 1
    plan: str = "greedy"               # greedy | exhaustive
    slices: int = 0
    workers: int = 1
    seed: int | None = None
    tolerances: Tolerances = field(default_factory=defaults)
    cross_tol: float | None = None     # defaults to tolerances.eps_num

    def validate(self, n: int, has_second: bool) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "amplitude":
            if self.basis is None or len(self.basis) != n:
                raise ValueError(f"amplitude mode needs a basis string of length {n}")
            BasisState.from_string(self.basis)
        if self.mode == "fidelity" and not has_second:
            raise ValueError("fidelity mode needs a second circuit")
        if self.initial is not None and len(self.initial) != n:
            raise ValueError(f"initial state must have {n} bits")
        if self.plan not in ("greedy", "exhaustive"):
            raise ValueError("plan must be 'greedy' or 'exhaustive'")
        if self.slices < 0 or self.workers < 1:
            raise ValueError("slices must be >= 0 and workers >= 1")


@dataclass
class RunReport:
    config: dict
    runs: list[dict]
    cross_check: dict | None = None
    schema: int = SCHEMA_VERSION
    version: str = __version__

    @property
    def diverged(self) -> bool:
        return bool(self.cross_check) and not self.cross_check["agree"]

    def payloads(self) -> list[dict]:
        return [r["result"] for r in self.runs]

    def to_json(self) -> dict:
        return {
            "schema": self.schema,
            "version": self.version,
            "config": self.config,
            "runs": self.runs,
            "cross_check": self.cross_check,
        }

    def summary(self) -> str:
        lines = []
        for r in self.runs:
            res = r["result"]
            head = f"[{r['backend']}] {r['mode']}"
            if res.get("refused"):
                lines.append(f"{head}: refused ({res['refused']})")
                continue
            if res["kind"] == "amplitude":
                z = complex(*res["value"])
                lines.append(f"{head} <{res['basis']}|psi> = {z.real:.10f}{z.imag:+.10f}i")
            elif res["kind"] == "fidelity":
                lines.append(f"{head}: fidelity {res['value']:.12f} equivalent={res['equivalent']}")
            elif res["kind"] == "statevector":
                lines.append(f"{head}: {len(res['amplitudes'])} amplitudes")
            else:
                lines.append(f"{head}: {len(res['nonzero'])} nonzero amplitudes")
            lines.append("    " + ", ".join(f"{k}={v}" for k, v in r["metrics"].items()
                                             if not isinstance(v, (list, dict))))
            lines.append(f"    wall time {r['wall_time']:.4f}s")
        if self.cross_check:
            cc = self.cross_check
            verdict = "agree" if cc["agree"] else "DIVERGE"
            lines.append(f"cross-check: {verdict} (max deviation {cc['max_deviation']:.3e}, tol {cc['tolerance']:.1e})")
        return "\n".join(lines)


# ----------------------------------------------------------------------
# engines

def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _initial(cfg: RunConfig, n: int) -> BasisState:
    return BasisState(n, 0) if cfg.initial is None else BasisState.from_string(cfg.initial)


def _run_dd(cfg: RunConfig, circuit: Circuit, second: Circuit | None) -> dict:
    tol = cfg.tolerances
    n = circuit.num_qubits
    init = _initial(cfg, n)
    pkg = DDPackage(eps=tol.eps_num)
    start = time.perf_counter()
    if cfg.mode == "fidelity":
        verdict = check_equivalence(circuit, second, init, cfg.strategy, cfg.ratio, pkg, tol.eps_eq)
        result = {"kind": "fidelity", "value": verdict.fidelity, "equivalent": verdict.equivalent}
        metrics = {k: v for k, v in verdict.metrics.items() if k != "node_counts"}
    else:
        graph = TaskGraph.for_circuit(circuit, init)
        if cfg.strategy in ("plan", "plan-translated"):
            net = circuit_to_network(circuit, init)
            path = plan_to_path(_plan_for(cfg, net), circuit, net)
        elif cfg.strategy in ("sequential", "seq"):
            path = default_sequential_path(circuit)
        else:
            raise ValueError(f"strategy {cfg.strategy!r} only applies to fidelity mode")
        out = execute_path(graph, path, pkg)
        v = out.result
        if cfg.mode == "amplitude":
            result = {"kind": "amplitude", "basis": cfg.basis,
                      "value": _cplx(get_amplitude(v, BasisState.from_string(cfg.basis)))}
        elif n <= tol.n_dense:
            result = {"kind": "statevector", "amplitudes": [_cplx(z) for z in extract_statevector(v, tol.n_dense)]}
        else:
            sparse = nonzero_amplitudes(v, limit=1 << tol.n_dense)
            result = {"kind": "sparse-statevector", "n": n,
                      "nonzero": {str(i): _cplx(z) for i, z in sorted(sparse.items())}}
        metrics = {"strategy": "plan" if cfg.strategy.startswith("plan") else "sequential",
                   "steps": len(path.steps), "peak_nodes": out.peak_nodes, "final_nodes": out.final_nodes}
    wall = time.perf_counter() - start
    return {"backend": "dd", "mode": cfg.mode, "wall_time": wall, "result": result, "metrics": metrics}


def _plan_for(cfg: RunConfig, net: TensorNetwork) -> ContractionPlan:
    if cfg.plan == "exhaustive":
        return plan_exhaustive(net)
    return plan_greedy(net)


def _contract(cfg: RunConfig, net: TensorNetwork):
    plan = _plan_for(cfg, net)
    cost = plan_cost(net, plan)
    labels = choose_slice_labels(net, plan, cfg.slices) if cfg.slices else []
    if labels:
        tensor = contract_sliced(net, labels, plan, cfg.workers)
    else:
        tensor = contract(net, plan)
    metrics = {"plan": cfg.plan, "tensors": len(net), **cost.as_dict(),
               "slices": 2 ** len(labels) if labels else 1, "sliced_indices": labels}
    return tensor, metrics


def _run_tn(cfg: RunConfig, circuit: Circuit, second: Circuit | None) -> dict:
    tol = cfg.tolerances
    n = circuit.num_qubits
    init = _initial(cfg, n)
    start = time.perf_counter()
    if cfg.mode == "full":
        if n > tol.n_dense:
            raise FullStateRefused(
                f"full-state tensor contraction of {n} qubits exceeds the dense cap of {tol.n_dense}"
            )
        tensor, metrics = _contract(cfg, circuit_to_network(circuit, init))
        result = {"kind": "statevector", "amplitudes": [_cplx(z) for z in tensor.data.reshape(-1)]}
    elif cfg.mode == "amplitude":
        basis = BasisState.from_string(cfg.basis)
        tensor, metrics = _contract(cfg, circuit_to_network(circuit, init, basis))
        result = {"kind": "amplitude", "basis": cfg.basis, "value": _cplx(complex(tensor.data))}
    else:
        miter = concatenate(circuit, invert_circuit(second))
        tensor, metrics = _contract(cfg, circuit_to_network(miter, init, init))
        fid = min(1.0, abs(complex(tensor.data)) ** 2)
        result = {"kind": "fidelity", "value": fid, "equivalent": abs(1 - fid) <= tol.eps_eq}
    wall = time.perf_counter() - start
    return {"backend": "tn", "mode": cfg.mode, "wall_time": wall, "result": result, "metrics": metrics}


def _deviation(a: dict, b: dict) -> float:
    if a["kind"] == "fidelity":
        return abs(a["value"] - b["value"])
    if a["kind"] == "amplitude":
        return abs(complex(*a["value"]) - complex(*b["value"]))
    va = np.array([complex(*z) for z in a["amplitudes"]])
    vb = np.array([complex(*z) for z in b["amplitudes"]])
    return float(np.max(np.abs(va - vb)))


def run(cfg: RunConfig, circuit: Circuit, second: Circuit | None = None) -> RunReport:
    """Execute the configured backend(s); in ``both`` mode cross-check them.

    Raises :class:`FullStateRefused` for a tn-only full-state run above the
    dense cap. In ``both`` mode the decision diagram result is kept as the
    reference in that case and the refusal is recorded in the report.
    """
    cfg.validate(circuit.num_qubits, second is not None)
    if second is not None and second.num_qubits != circuit.num_qubits:
        raise ValueError("the two circuits act on different numbers of qubits")
    config = {k: v for k, v in asdict(cfg).items() if k != "tolerances"}
    config["tolerances"] = asdict(cfg.tolerances)
    config["num_qubits"] = circuit.num_qubits
    config["num_gates"] = len(circuit)
    runs = []
    if cfg.backend in ("dd", "both"):
        runs.append(_run_dd(cfg, circuit, second))
    if cfg.backend in ("tn", "both"):
        try:
            runs.append(_run_tn(cfg, circuit, second))
        except FullStateRefused as exc:
            if cfg.backend == "tn":
                raise
            runs.append({"backend": "tn", "mode": cfg.mode, "wall_time": 0.0,
                         "result": {"kind": "statevector", "refused": str(exc)}, "metrics": {}})
    cross = None
    tol = cfg.tolerances.eps_num if cfg.cross_tol is None else cfg.cross_tol
    if cfg.backend == "both":
        dd_res, tn_res = runs[0]["result"], runs[1]["result"]
        if tn_res.get("refused"):
            cross = {"reference": "dd", "max_deviation": 0.0, "tolerance": tol,
                     "agree": True, "compared": False}
        else:
            dev = _deviation(dd_res, tn_res)
            cross = {"reference": "both", "max_deviation": dev, "tolerance": tol,
                     "agree": dev <= tol, "compared": True}
    return RunReport(config, runs, cross)


# ----------------------------------------------------------------------
# scaling sweeps

def _metric_dd_gate_nodes(c: Circuit) -> int:
    pkg = DDPackage()
    return max(node_count(pkg.from_gate(g, c.num_qubits)) for g in c.gates)


def _metric_tn_gate_elements(c: Circuit) -> int:
    # shape arithmetic only: the 2^n x 2^n array is never built
    return max(prod(gate_tensor_shape(g)) for g in c.gates)


def _metric_dd_state_nodes(c: Circuit) -> int:
    out = execute_path(TaskGraph.for_circuit(c), default_sequential_path(c), DDPackage())
    return node_count(out.result)


def _metric_dd_peak_nodes(c: Circuit) -> int:
    return execute_path(TaskGraph.for_circuit(c), default_sequential_path(c), DDPackage()).peak_nodes


def _metric_tn_plan_flops(c: Circuit) -> int:
    net = circuit_to_network(c, BasisState(c.num_qubits, 0), BasisState(c.num_qubits, 0))
    return plan_cost(net, plan_greedy(net)).flops


def _metric_tn_max_intermediate(c: Circuit) -> int:
    net = circuit_to_network(c, BasisState(c.num_qubits, 0), BasisState(c.num_qubits, 0))
    return plan_cost(net, plan_greedy(net)).max_intermediate


METRICS = {
    "dd-gate-nodes": _metric_dd_gate_nodes,
    "tn-gate-tensor-elements": _metric_tn_gate_elements,
    "dd-state-nodes": _metric_dd_state_nodes,
    "dd-peak-nodes": _metric_dd_peak_nodes,
    "tn-plan-flops": _metric_tn_plan_flops,
    "tn-max-intermediate": _metric_tn_max_intermediate,
}


def scaling_sweep(family: str, ns: Sequence[int], metric: str, seed: int | None = 0,
                  workers: int = 1, num_gates: int | None = None) -> list[dict]:
    """One row per register size; rows come back in ``ns`` order."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    fn = METRICS[metric]

    def case(n: int) -> dict:
        c = generate_benchmark(family, n, seed, num_gates=num_gates)
        start = time.perf_counter()
        value = fn(c)
        return {"family": family, "n": n, "metric": metric, "value": value,
                "seconds": round(time.perf_counter() - start, 6)}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(case, ns))
    return [case(n) for n in ns]


def sweep_to_csv(rows: list[dict], fh=None) -> str:
    buf = io.StringIO() if fh is None else fh
    writer = csv.DictWriter(buf, fieldnames=["family", "n", "metric", "value", "seconds"],
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue() if fh is None else ""


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """Least-squares ``y = a*x + b``; returns ``(a, b, r_squared)``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    a, b = np.polyfit(xs, ys, 1)
    resid = ys - (a * xs + b)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2
