"""Experiment orchestration: configs, task registry, ensembles, persistence.

A task maps one disorder realization to a flat dict of values.  Ensembles
fan realizations out over a process pool (worker count from TOPO_WORKERS,
default all cores) and fold results back in seed order, so parallel and
serial runs produce byte-identical tables.
"""

from __future__ import annotations

import dataclasses
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import boundary as bd
from . import flow as fl
from . import invariants as iv
from .errors import ConfigError
from .models import OPEN, PERIODIC, build_hamiltonian
from .serialize import (
    model_from_config,
    read_config_file,
    save_spectrum_csv,
    serialize_config,
    write_json,
)
from .spectral import SwitchFunction, detect_gap, diagonalize, fermi_projection

WORKERS_ENV = "TOPO_WORKERS"

TASKS = ("spectrum", "chern", "winding", "z2", "spin-chern", "bbc",
         "boundary-current", "streda", "laughlin", "kitaev-halfflux", "veg",
         "pairing-range", "caz")


@dataclasses.dataclass
class ExperimentConfig:
    sections: dict
    task: str
    task_params: dict
    realizations: int
    base_seed: int
    out_dir: Path | None
    quant_tol: float

    @classmethod
    def from_sections(cls, sections: dict) -> "ExperimentConfig":
        task_sec = dict(sections.get("task", {}))
        task = task_sec.pop("name", None)
        if task not in TASKS:
            raise ConfigError(f"[task] name must be one of {', '.join(TASKS)}; got {task!r}")
        ens = sections.get("ensemble", {})
        realizations = int(ens.get("realizations", 1))
        if realizations < 1:
            raise ConfigError("[ensemble] realizations must be >= 1")
        base_seed = int(ens.get("base_seed", 0))
        out = sections.get("output", {}).get("dir")
        tol = float(sections.get("tolerances", {}).get("quantization", 0.1))
        # validate the model section eagerly so config errors surface before work
        model_from_config(sections)
        return cls(sections=sections, task=task, task_params=task_sec,
                   realizations=realizations, base_seed=base_seed,
                   out_dir=Path(out) if out else None, quant_tol=tol)

    def model(self):
        return model_from_config(self.sections)


@dataclasses.dataclass(frozen=True)
class ResultRecord:
    task: str
    fingerprint: str
    seed: int
    sizes: tuple[int, ...]
    values: dict
    wall_time: float

    def rows(self):
        for key in sorted(self.values):
            yield (self.task, self.fingerprint, self.seed,
                   "x".join(str(n) for n in self.sizes), key, self.values[key])


def _resolve_mu(params: dict, eig) -> float:
    if "mu_states" in params:
        k = int(params["mu_states"])
        w = eig.eigenvalues
        return float(0.5 * (w[k - 1] + w[k]))
    return float(params.get("mu", 0.0))


def _index_set(params: dict, default=(1, 2)):
    if "index_set" in params:
        return tuple(int(x) for x in str(params["index_set"]).split())
    return default


# --- task implementations ---------------------------------------------------

def _task_spectrum(model, params, seed):
    sample = build_hamiltonian(model, seed)
    eig = diagonalize(sample)
    w = eig.eigenvalues
    out = {"e_min": float(w[0]), "e_max": float(w[-1])}
    if "mu" in params or "mu_states" in params:
        mu = _resolve_mu(params, eig)
        lo, hi = detect_gap(eig, mu)
        out.update(gap_lo=lo, gap_hi=hi, gap_width=hi - lo)
    out["_spectrum"] = [float(v) for v in w]
    return out


def _task_chern(model, params, seed):
    sample = build_hamiltonian(model, seed)
    eig = diagonalize(sample)
    mu = _resolve_mu(params, eig)
    P = fermi_projection(eig, mu)
    region = "all" if all(b == PERIODIC for b in model.lattice.boundary) else "core"
    res = iv.chern_projection(P, _index_set(params), region=region)
    return {"value": res.value, "rounded": res.rounded,
            "quantization_error": res.error_proxy}


def _task_winding(model, params, seed):
    sample = build_hamiltonian(model, seed)
    eig = diagonalize(sample)
    mu = _resolve_mu(params, eig)
    P = fermi_projection(eig, mu)
    U = iv.fermi_unitary(P, model.symmetry)
    res = iv.chern_unitary(U, _index_set(params, (1,)))
    return {"value": res.value, "rounded": res.rounded,
            "quantization_error": res.error_proxy}


def _task_z2(model, params, seed):
    open_model = model
    for axis in range(model.lattice.dimension):
        open_model = open_model.with_boundary(axis, OPEN)
    sample = build_hamiltonian(open_model, seed)
    eig = diagonalize(sample)
    mu = _resolve_mu(params, eig)
    P = fermi_projection(eig, mu)
    dirac = iv.dirac_phase(sample)
    T = iv.trs_fredholm(P, dirac)
    res = iv.z2_kernel_parity(T, model.symmetry, sample, dirac.origin)
    return {"value": res.value, "rounded": res.rounded,
            "quantization_error": res.error_proxy,
            "margin": res.extra["margin"]}


def _task_spin_chern(model, params, seed):
    sample = build_hamiltonian(model, seed)
    eig = diagonalize(sample)
    mu = _resolve_mu(params, eig)
    P = fermi_projection(eig, mu)
    s_z = model.metadata.get("s_z")
    if s_z is None:
        raise ConfigError("model carries no spin operator; spin-chern undefined")
    res, gap, residue = iv.spin_chern(P, np.asarray(s_z))
    return {"value": res.value, "rounded": res.rounded,
            "quantization_error": res.error_proxy,
            "spin_gap": gap, "sum_rule_residue": residue}


def _task_bbc(model, params, seed):
    companion = model
    for axis in range(model.lattice.dimension):
        companion = companion.with_boundary(axis, PERIODIC)
    eig = diagonalize(build_hamiltonian(companion, seed))
    mu = _resolve_mu(params, eig)
    half = bd.make_half_space(model, mu, seed)
    P = fermi_projection(diagonalize(half.companion), mu)
    bulk = iv.chern_projection(P, (1, 2))
    f = SwitchFunction("exp", half.bulk_gap)
    edge = bd.boundary_winding(bd.exp_map(half, f))
    return {"bulk": bulk.value, "edge": edge.value,
            "difference": abs(bulk.value - edge.value)}


def _task_boundary_current(model, params, seed):
    companion = model
    for axis in range(model.lattice.dimension):
        companion = companion.with_boundary(axis, PERIODIC)
    eig = diagonalize(build_hamiltonian(companion, seed))
    mu = _resolve_mu(params, eig)
    half = bd.make_half_space(model, mu, seed)
    f = SwitchFunction("exp", half.bulk_gap)
    value = bd.boundary_current(half, f)
    return {"value": value, "rounded": int(round(value)),
            "quantization_error": abs(value - round(value))}


def _task_streda(model, params, seed):
    del seed  # field derivative runs on the clean model
    I = _index_set(params, ())
    k_step = int(params.get("k_step", 1))
    lhs, rhs = iv.streda_derivative(model, I, axes=(1, 2), k_step=k_step)
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-12)
    return {"lhs": lhs, "rhs": rhs, "difference": abs(lhs - rhs), "relative": rel}


def _task_laughlin(model, params, seed):
    open_model = model
    for axis in range(model.lattice.dimension):
        open_model = open_model.with_boundary(axis, OPEN)
    sample = build_hamiltonian(open_model, seed)
    n = model.lattice.linear_sizes
    plaq = (n[0] // 2, n[1] // 2)
    mu = float(params.get("mu", 0.0))
    path = fl.FluxPath(base=sample, plaquette=plaq)
    sf = fl.spectral_flow(path, mu)
    eig = diagonalize(sample)
    P = fermi_projection(eig, mu)
    pi = iv.pair_index(P, iv.dirac_phase(sample))
    return {"spectral_flow": sf.net, "pair_index": pi.rounded,
            "pair_index_raw": pi.value,
            "quantization_error": float(abs(sf.net - pi.rounded)),
            "_flow_trace": fl.flow_trace(path, mu)}


def _task_kitaev_halfflux(model, params, seed):
    res = fl.halfflux_kernel_parity(model, seed)
    return {"value": float(res["parity"]), "rounded": res["parity"],
            "quantization_error": 0.0,
            "near_zero_total": res["near_zero_total"],
            "near_zero_localized": res["near_zero_localized"]}


def _task_veg(model, params, seed):
    sample = build_hamiltonian(model, seed)
    eig = diagonalize(sample)
    mu = _resolve_mu(params, eig)
    n_t = int(params.get("n_t", 64))
    res = iv.veg_invariant(sample, mu, n_t=n_t)
    P = fermi_projection(eig, mu)
    direct = iv.chern_projection(P, (1, 2))
    return {"value": res.value, "direct": direct.value,
            "difference": abs(res.value - direct.value),
            "quantization_error": res.error_proxy}


def _task_pairing_range(model, params, seed):
    del seed
    I = _index_set(params, ())
    J = tuple(int(x) for x in str(params.get("generator", "1 2")).split())
    b12 = model.field.B[0, 1]
    measured, predicted = iv.pairing_range_check(
        model.lattice.dimension, b12, I, J, sizes=model.lattice.linear_sizes[0])
    return {"measured": measured, "predicted": predicted,
            "difference": abs(measured - predicted)}


def _task_caz(model, params, seed):
    sample = build_hamiltonian(model, seed)
    label, j = iv.classify_caz(sample, model.symmetry)
    return {"label": label, "value": float(j), "rounded": j, "quantization_error": 0.0}


_TASK_FNS = {
    "spectrum": _task_spectrum,
    "chern": _task_chern,
    "winding": _task_winding,
    "z2": _task_z2,
    "spin-chern": _task_spin_chern,
    "bbc": _task_bbc,
    "boundary-current": _task_boundary_current,
    "streda": _task_streda,
    "laughlin": _task_laughlin,
    "kitaev-halfflux": _task_kitaev_halfflux,
    "veg": _task_veg,
    "pairing-range": _task_pairing_range,
    "caz": _task_caz,
}


def _run_one(payload):
    sections, task, params, seed = payload
    model = model_from_config(sections)
    t0 = time.perf_counter()
    values = _TASK_FNS[task](model, params, seed)
    wall = time.perf_counter() - t0
    return ResultRecord(task=task, fingerprint=model.fingerprint(), seed=seed,
                        sizes=model.lattice.linear_sizes, values=values, wall_time=wall)


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(config: ExperimentConfig, workers: int | None = None):
    """Run the configured task over the ensemble.

    Returns (records, aggregate, quantized_ok).  Aggregation is a
    deterministic fold in seed order; worker count never changes values.
    """
    seeds = [config.base_seed + i for i in range(config.realizations)]
    payloads = [(config.sections, config.task, config.task_params, s) for s in seeds]
    n_workers = workers if workers is not None else worker_count()
    if n_workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(_run_one, payloads))
    else:
        records = [_run_one(p) for p in payloads]
    records.sort(key=lambda r: r.seed)

    numeric_keys = sorted({k for r in records for k, v in r.values.items()
                           if isinstance(v, (int, float)) and not k.startswith("_")})
    aggregate = {}
    for key in numeric_keys:
        vals = [float(r.values[key]) for r in records if key in r.values]
        aggregate[f"{key}_mean"] = sum(vals) / len(vals)
        aggregate[f"{key}_spread"] = max(vals) - min(vals)
    quantized_ok = all(
        float(r.values.get("quantization_error", 0.0)) <= config.quant_tol for r in records)

    if config.out_dir is not None:
        config.out_dir.mkdir(parents=True, exist_ok=True)
        _write_outputs(config, records, aggregate, quantized_ok)
    return records, aggregate, quantized_ok


def _write_outputs(config: ExperimentConfig, records, aggregate, quantized_ok):
    lines = ["task,fingerprint,seed,sizes,key,value\n"]
    for rec in records:
        for row in rec.rows():
            key = row[4]
            if key.startswith("_"):
                continue
            value = row[5]
            text = repr(value) if isinstance(value, float) else str(value)
            lines.append(",".join(str(x) for x in row[:5]) + f",{text}\n")
    for key in sorted(aggregate):
        lines.append(f"{config.task},aggregate,-1,-,{key},{aggregate[key]!r}\n")
    (config.out_dir / "results.csv").write_text("".join(lines))
    write_json(config.out_dir / "results.json", {
        "task": config.task,
        "quantized_ok": quantized_ok,
        "aggregate": aggregate,
        "records": [{
            "seed": r.seed,
            "fingerprint": r.fingerprint,
            "sizes": list(r.sizes),
            "wall_time": r.wall_time,
            "values": {k: v for k, v in r.values.items() if not k.startswith("_")},
        } for r in records],
    })
    for rec in records:
        if "_spectrum" in rec.values:
            save_spectrum_csv(config.out_dir / f"spectrum_seed{rec.seed}.csv",
                              np.array(rec.values["_spectrum"]))
        if "_flow_trace" in rec.values:
            lines = ["t,eigenvalue,branch\n"]
            for t, e, b in rec.values["_flow_trace"]:
                lines.append(f"{t!r},{e!r},{b}\n")
            (config.out_dir / f"flow_seed{rec.seed}.csv").write_text("".join(lines))


def sweep(config: ExperimentConfig, param_path: str, values, workers: int | None = None):
    """run_experiment per grid point of one dotted config parameter.

    Returns long-format rows (param, value, seed, key, val); an empty grid
    yields an empty table.
    """
    if "." not in param_path:
        raise ConfigError("sweep parameter must be 'section.key'")
    section, key = param_path.split(".", 1)
    rows = []
    for value in values:
        sections = {s: dict(kv) for s, kv in config.sections.items()}
        sections.setdefault(section, {})[key] = str(value)
        sub = ExperimentConfig.from_sections(sections)
        sub = dataclasses.replace(sub, out_dir=None, quant_tol=config.quant_tol)
        records, _, _ = run_experiment(sub, workers=workers)
        for rec in records:
            for k, v in sorted(rec.values.items()):
                if k.startswith("_"):
                    continue
                rows.append((param_path, value, rec.seed, k, v))
    if config.out_dir is not None:
        config.out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["param,value,seed,key,result\n"]
        for row in rows:
            text = repr(row[4]) if isinstance(row[4], float) else str(row[4])
            lines.append(f"{row[0]},{row[1]},{row[2]},{row[3]},{text}\n")
        (config.out_dir / "sweep.csv").write_text("".join(lines))
    return rows


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_sections(read_config_file(path))
