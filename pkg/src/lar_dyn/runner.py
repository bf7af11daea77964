"""Scenario execution: tasks, CSV channels, report.json and the invariant suite."""

import csv
from dataclasses import dataclass
import json
import os
import time as _time

import numpy as np

from .elliptic import (
    Polarization, clar_flow, clar_hamiltonian, clar_leaf_defect, complex_hamiltonian,
    hermiticity_defect, psi_phi_coords, psi_phi_inverse, unitarity_defect,
)
from .errors import InvariantFailure, LarError
from .lifted import (
    PhaseState, cone_crossing_time, hamiltonian, hamiltonian_defect, lifted_flow,
    lifted_generator, neutral_index, accumulation_series, symplectic_defect,
)
from .linalg import expm
from .onshell import (
    PreferenceOperator, entropic_clock, free_energy_check, logit_posterior, onshell_flow,
)
from .readout import (
    SEQUENTIAL_PROVENANCE, ReadoutContext, context_readout, interference_decomposition,
    order_effect_defect,
)
from .rng import random_vector
from .simplex import fisher_rao_circle, loop_holonomy, readout_many
from .splitcomplex import para_propagate, para_unitarity_defect


def fmt(x):
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


def write_csv(path, header, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])


def initial_phase(scn):
    init = scn.initial
    if "lottery" in init:
        return np.sqrt(np.asarray(init["lottery"])), np.zeros(scn.n)
    if "amplitude" in init:
        return np.asarray(init["amplitude"], dtype=float), np.zeros(scn.n)
    return (np.asarray(init["phase"]["rho"], dtype=float),
            np.asarray(init["phase"]["y"], dtype=float))


def _contexts(scn):
    out = []
    for c in scn.params.get("contexts", []):
        out.append(ReadoutContext.rotation(c) if isinstance(c, float) else ReadoutContext(c))
    return out


def _R(scn):
    pol = scn.params.get("polarization")
    return np.eye(scn.n) if pol is None else np.asarray(pol["R"], dtype=float)


def _idx(prefix, n):
    return [f"{prefix}_{k + 1}" for k in range(n)]


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------

def task_onshell(scn, V, out_dir):
    rho0, _ = initial_phase(scn)
    times = scn.times
    traj = onshell_flow(V, rho0, times)
    q = traj.q
    sigma, prod = entropic_clock(traj, V)
    n = scn.n
    write_csv(os.path.join(out_dir, "onshell_amplitudes.csv"), ["t"] + _idx("rho", n),
              [times] + list(traj.states.T))
    write_csv(os.path.join(out_dir, "onshell_lottery.csv"), ["t"] + _idx("q", n),
              [times] + list(q.T))
    write_csv(os.path.join(out_dir, "onshell_clock.csv"),
              ["t", "r", "Z", "sigma_plus", "production"],
              [times, traj.r, traj.Z, sigma, prod])
    fe = max(free_energy_check(x)[2] for x in traj.states)
    report = {
        "sigma_plus_min_increment": float(np.min(np.diff(sigma))) if sigma.size > 1 else 0.0,
        "production_min": float(np.min(prod)),
        "free_energy_max_defect": float(fe),
        "final_lottery": q[-1].tolist(),
    }
    if scn.generator_kind == "diagonal" and "lottery" in scn.initial:
        theta = np.diag(V.V)
        q0 = np.asarray(scn.initial["lottery"])
        closed = np.array([logit_posterior(q0, theta, t - times[0]) for t in times])
        report["logit_max_abs_error"] = float(np.max(np.abs(closed - q)))
    return report


def task_lifted(scn, V, out_dir):
    rho0, y0 = initial_phase(scn)
    times = scn.times
    Z0 = PhaseState(rho0, y0)
    traj = lifted_flow(V, Z0, times)
    n = scn.n
    write_csv(os.path.join(out_dir, "lifted_phase.csv"),
              ["t"] + _idx("rho", n) + _idx("y", n),
              [times] + list(traj.rho_tilde.T) + list(traj.y.T))
    H = np.array([hamiltonian(traj.state(k), V) for k in range(times.size)])
    report = {}
    cols = [times, traj.Lambda, traj.y_sq, traj.Z, traj.sigma, H]
    header = ["t", "Lambda", "y_sq", "Z", "sigma", "H"]
    if times.size >= 3:
        lam, defect = neutral_index(traj)
        acc = accumulation_series(traj)
        cols.append(acc)
        header.append("accumulation")
        report["lambda_balance_defect"] = defect
    write_csv(os.path.join(out_dir, "lifted_lambda.csv"), header, cols)
    horizon = scn.params.get("horizon", float(times[-1] - times[0]))
    report["cone_crossing_time"] = cone_crossing_time(V, Z0, horizon)
    report["cone_horizon"] = horizon
    report["lambda_min_increment"] = float(np.min(np.diff(traj.Lambda)))
    report["hamiltonian_drift"] = float(np.max(np.abs(H - H[0])))
    report["symplectic_defect_t_end"] = symplectic_defect(V, float(times[-1]))
    return report


def task_clar(scn, V, out_dir):
    rho0, y0 = initial_phase(scn)
    R = _R(scn)
    psi0, _ = psi_phi_coords(PhaseState(rho0, y0), R)
    times = scn.times
    psi, Psi = clar_flow(V, psi0, times)
    n = scn.n
    cols = [times]
    header = ["t"]
    for k in range(n):
        cols += [Psi[:, k].real, Psi[:, k].imag]
        header += [f"Psi_{k + 1}_re", f"Psi_{k + 1}_im"]
    write_csv(os.path.join(out_dir, "clar_states.csv"), header, cols)
    qB = np.abs(Psi) ** 2 / np.sum(np.abs(Psi) ** 2, axis=1, keepdims=True)
    write_csv(os.path.join(out_dir, "clar_lottery.csv"), ["t"] + _idx("q", n),
              [times] + list(qB.T))
    norms = np.linalg.norm(Psi, axis=1)
    leaf0 = psi_phi_inverse(psi0, np.zeros(n), R)
    P = Polarization.normalized(R)
    return {
        "norm_drift": float(np.max(np.abs(norms - norms[0]))),
        "unitarity_defect_t_end": unitarity_defect(V, float(times[-1])),
        "leaf_defect": clar_leaf_defect(V, leaf0, times, P),
        "hermiticity_defect": hermiticity_defect(clar_hamiltonian(V)),
    }


def task_holonomy(scn, V, out_dir):
    loop = scn.params["loop"]
    if isinstance(loop, dict):
        pts = fisher_rao_circle(loop["center"], loop["radius"], loop["samples"])
    else:
        pts = np.asarray(loop, dtype=float)
    val, err = loop_holonomy(pts, V.V)
    val_s, _ = loop_holonomy(pts, V.S)
    val_f, _ = loop_holonomy(pts, V.F)
    return {"holonomy": val, "error_estimate": err,
            "utility_channel": val_s, "co_utility_channel": val_f}


def task_interference(scn, V, out_dir):
    rho0, _ = initial_phase(scn)
    times = scn.times
    n = scn.n
    reps = [interference_decomposition(V, rho0, t) for t in times]
    D = np.array([r.diagonal for r in reps])
    C = np.array([r.cross for r in reps])
    T = np.array([r.total for r in reps])
    write_csv(os.path.join(out_dir, "interference_terms.csv"),
              ["t"] + _idx("diag", n) + _idx("cross", n) + _idx("total", n),
              [times] + list(D.T) + list(C.T) + list(T.T))
    scale = max(1.0, float(np.max(np.abs(T))))
    return {
        "consistency_rel": max(r.consistency for r in reps) / scale,
        "imag_residue": max(r.imag_residue for r in reps),
        "eigen_residual": reps[0].eigen_residual,
        "eigvec_condition": reps[0].condition,
    }


def task_contexts(scn, V, out_dir):
    rho0, _ = initial_phase(scn)
    times = scn.times
    traj = onshell_flow(V, rho0, times)
    units = traj.states / traj.r[:, None]
    ctxs = _contexts(scn)
    n = scn.n
    report = {"contexts": len(ctxs), "provenance": SEQUENTIAL_PROVENANCE}
    for i, B in enumerate(ctxs):
        P = np.array([context_readout(u, B) for u in units])
        write_csv(os.path.join(out_dir, f"contexts_{i + 1}.csv"), ["t"] + _idx("p", n),
                  [times] + list(P.T))
    if len(ctxs) >= 2:
        report["order_effect_defect_final"] = order_effect_defect(units[-1], ctxs[0], ctxs[1])
    return report


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------

@dataclass
class InvariantRow:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.measured) and self.measured <= self.tolerance)

    def as_dict(self):
        return {"name": self.name, "measured": self.measured,
                "tolerance": self.tolerance, "passed": self.passed}


def invariant_suite(scn, tol_scale=1.0):
    """Evaluate every invariant on the scenario's generator and seeds.

    Returns a list of InvariantRow; each measured value is a nonnegative
    defect to be compared against its tolerance times ``tol_scale``.
    """
    V = PreferenceOperator(scn.V)
    n = scn.n
    seeds = scn.params.get("invariant_seeds", [scn.seed])
    rho_init, y_init = initial_phase(scn)
    times = np.linspace(0.0, 2.0, 401)
    rows = []

    def row(name, measured, tol):
        rows.append(InvariantRow(name, float(measured), tol * tol_scale))

    rel = max(1.0, float(np.linalg.norm(V.V)))
    row("split reassembly", np.linalg.norm(V.S + V.F - V.V) / rel, 1e-15)
    row("expm identity at t=0", np.max(np.abs(expm(V.V, 0.0) - np.eye(n))), 0.0)
    semi = 0.0
    for s, t in ((0.3, 0.7), (1.0, 1.0), (0.5, 1.5)):
        a = expm(V.V, s) @ expm(V.V, t)
        b = expm(V.V, s + t)
        semi = max(semi, np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
    row("expm semigroup", semi, 1e-10)
    row("hamiltonian property", hamiltonian_defect(lifted_generator(V)), 1e-14 * rel)
    row("symplectic defect", max(symplectic_defect(V, t) for t in (0.5, 1.0, 2.0)), 1e-10)
    row("hermiticity", hermiticity_defect(clar_hamiltonian(V)), 1e-15 * rel)
    nh = hermiticity_defect(complex_hamiltonian(V))
    s_norm = float(np.linalg.norm(V.S, 2))
    row("non-hermitian packaging", abs(nh - 2.0 * s_norm), 1e-12 * rel)

    lam_mono = bal = ham = leaf = sig = fe = gauge = para = pu = cu = cleaf = 0.0
    norm_cons = 0.0
    for sd in seeds:
        r0 = rho_init if sd == scn.seed else random_vector(n, sd, 1)
        y0 = random_vector(n, sd, 2) if not np.any(y_init) or sd != scn.seed else y_init
        tr = lifted_flow(V, PhaseState(r0, y0), times)
        lam, d = neutral_index(tr)
        scale = max(1.0, float(np.max(np.abs(lam))))
        lam_mono = max(lam_mono, -float(np.min(np.diff(lam))) / scale)
        bal = max(bal, d / scale)
        H = np.array([hamiltonian(tr.state(k), V) for k in range(0, times.size, 40)])
        ham = max(ham, float(np.max(np.abs(H - H[0]))) / max(1.0, abs(H[0])))

        tr0 = lifted_flow(V, PhaseState(r0, np.zeros(n)), times[::20])
        on = onshell_flow(V, r0, times[::20])
        leaf = max(leaf, float(np.max(np.abs(tr0.y))),
                   float(np.max(np.abs(tr0.rho_tilde - on.states)
                                / np.max(np.abs(on.states), axis=1, keepdims=True))))
        sigma, _ = entropic_clock(on, V)
        sig = max(sig, -float(np.min(np.diff(sigma))))
        fe = max(fe, max(free_energy_check(x)[2] for x in on.states))
        shifted = onshell_flow(PreferenceOperator(V.V + 0.7 * np.eye(n)), r0, times[::20])
        gauge = max(gauge, float(np.max(np.abs(shifted.q - on.q))))
        if s_norm == 0.0:
            norm_cons = max(norm_cons, float(np.max(np.abs(on.r - on.r[0]))))

        sp = para_propagate(V.S, V.F, (r0, r0), times[::40])
        para = max(para, float(np.max(np.abs(sp.z_plus - 2.0 * onshell_flow(V, r0, times[::40]).states)
                                     / np.max(np.abs(sp.z_plus), axis=1, keepdims=True))))
        pu = max(pu, max(para_unitarity_defect(V.S, V.F, t) for t in (0.5, 1.0, 2.0)))
        psi0 = r0 + 1j * y0
        _, Psi = clar_flow(V, psi0, np.linspace(0.0, 5.0, 11))
        nr = np.linalg.norm(Psi, axis=1)
        cu = max(cu, float(np.max(np.abs(nr - nr[0]))) / nr[0],
                 unitarity_defect(V, 10.0))
        leaf0 = psi_phi_inverse(psi0, np.zeros(n), np.eye(n))
        cleaf = max(cleaf, clar_leaf_defect(V, leaf0, np.linspace(0.0, 5.0, 11))
                    / max(1.0, float(np.linalg.norm(psi0))))

    row("Lambda monotone / max|Lambda|", lam_mono, 1e-10)
    row("Lambda balance / max|Lambda|", bal, 1e-7)
    row("Hamiltonian conservation", ham, 1e-9)
    row("zero-residual leaf", leaf, 1e-11)
    row("sigma_plus monotone", sig, 1e-10)
    row("free energy identity", fe, 1e-12)
    row("gauge invariance", gauge, 1e-12)
    if s_norm == 0.0:
        row("norm conservation", norm_cons, 1e-10)
    row("para-sector equivalence", para, 1e-11)
    row("para-unitarity", pu, 1e-10)
    row("CLAR unitarity", cu, 1e-10)
    row("CLAR leaf invariance", cleaf, 1e-10)

    if n >= 3:
        loop = fisher_rao_circle(np.full(n, 1.0 / n), 0.2, 64)
        h_s, _ = loop_holonomy(loop, V.S)
        row("holonomy of utility channel", abs(h_s), 1e-8)
        if float(np.linalg.norm(V.F)) == 0.0:
            h, _ = loop_holonomy(loop, V.V)
            row("holonomy≈0", abs(h), 1e-8)

    try:
        rep = interference_decomposition(V, rho_init, 1.0)
    except LarError:
        rep = None
    if rep is not None:
        sc = max(1.0, float(np.max(np.abs(rep.total))))
        row("interference consistency", rep.consistency / sc, 1e-8)
        row("interference imaginary residue", rep.imag_residue, 1e-9)
    u = rho_init / np.linalg.norm(rho_init)
    Q, _ = np.linalg.qr(np.column_stack([random_vector(n, seeds[0] + k, 3) for k in range(n)]))
    row("context normalization", abs(float(np.sum(context_readout(u, Q))) - 1.0), 1e-12)
    return rows


def task_invariants(scn, V, out_dir, tol_scale=1.0):
    rows = invariant_suite(scn, tol_scale)
    return {"rows": [r.as_dict() for r in rows],
            "all_passed": all(r.passed for r in rows)}


TASK_FUNCS = {
    "onshell": task_onshell,
    "lifted": task_lifted,
    "clar": task_clar,
    "holonomy": task_holonomy,
    "interference": task_interference,
    "contexts": task_contexts,
}


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def run(scn, out_dir, tol_scale=1.0):
    """Execute every task of the scenario and write outputs under ``out_dir``.

    Returns the report dict. Raises InvariantFailure after writing outputs
    when an invariants task has a failing row.
    """
    os.makedirs(out_dir, exist_ok=True)
    V = PreferenceOperator(scn.V)
    report = {"scenario": scn.echo(), "tasks": {}, "timings": {}}
    for task in scn.tasks:
        start = _time.perf_counter()
        if task == "invariants":
            out = task_invariants(scn, V, out_dir, tol_scale)
        else:
            out = TASK_FUNCS[task](scn, V, out_dir)
        report["tasks"][task] = out
        report["timings"][task] = _time.perf_counter() - start
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
    inv = report["tasks"].get("invariants")
    if inv is not None and not inv["all_passed"]:
        failed = [r["name"] for r in inv["rows"] if not r["passed"]]
        raise InvariantFailure("invariant rows failed: " + ", ".join(failed))
    return report
