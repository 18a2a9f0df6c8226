"""Command-line front end.

    gaussopt convert --from covariance --to squeezing --config in.json --out out.json
    gaussopt eop --config run.json --out table.csv

Each run writes its table (CSV, 9 significant figures) to ``--out`` and a
JSON metadata file next to it (``<out>.meta.json``).  Failures print a JSON
error object to stderr and exit with status 2 (bad input) or 1.
"""

import argparse
import csv
import json
import sys
from dataclasses import asdict

import numpy as np

from . import applications as app
from . import representations as rep
from .errors import GaussianError, ParseError
from .exact_fermion import exact_eop, gaussian_density
from .io import (
    COMMANDS,
    REPRESENTATIONS,
    RunDescriptor,
    decode_array,
    encode_array,
    fmt,
    load_json,
    parse_descriptor,
    split_label,
    versions,
    write_csv,
    write_metadata,
)
from .lie import sample_group
from .optimizer import OptimizerConfig, hamiltonian_flow_step
from .phase_space import GaussianState, Kind, as_kind, gamma_from_J, standard_background, vacuum_J


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaussopt", description="Gaussian-state geometry and optimization")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run descriptor")
        s.add_argument("--out", help="output path (CSV; JSON for convert)")
        s.add_argument("--seed", type=int, help="first seed of the multi-start list")
        s.add_argument("--starts", type=int, help="number of random starts")
        s.add_argument("--tol", type=float, help="gradient-norm tolerance")
        if name == "convert":
            s.add_argument("--from", dest="rep_from", choices=REPRESENTATIONS)
            s.add_argument("--to", dest="rep_to", choices=REPRESENTATIONS)
    return p


def _descriptor(args) -> RunDescriptor:
    raw = load_json(args.config) if args.config else {}
    d = parse_descriptor(raw, args.command)
    if args.seed is not None:
        d.seed = args.seed
    if args.starts is not None:
        if args.starts < 1:
            raise ParseError("--starts must be at least 1")
        d.starts = args.starts
    if args.tol is not None:
        if args.tol <= 0:
            raise ParseError("--tol must be positive")
        d.tol = args.tol
    if getattr(args, "rep_from", None):
        d.rep_from = args.rep_from
    if getattr(args, "rep_to", None):
        d.rep_to = args.rep_to
    return d


def _config(d: RunDescriptor) -> OptimizerConfig:
    opts = dict(d.optimizer)
    opts.pop("seeds", None)
    opts["starts"] = d.starts
    opts["seeds"] = tuple(d.seeds())
    if d.tol is not None:
        opts["grad_tol"] = d.tol
    try:
        return OptimizerConfig(**opts)
    except TypeError as exc:
        raise ParseError(f"bad optimizer options: {exc}") from exc


def _model(d: RunDescriptor):
    """(kind, Hamiltonian or None, ground J, number of sites)."""
    m = d.model
    if m.type == "kg":
        H, st = app.klein_gordon_chain(m.N, m.m)
        return Kind.BOSON, H, st.J, m.N
    if m.type == "ising":
        H, st = app.ising_chain(m.N, m.J, m.h)
        return Kind.FERMION, H, st.J, m.N
    raw = load_json(m.path)
    if "kind" not in raw:
        raise ParseError("model file needs 'kind'")
    kind = as_kind(raw["kind"])
    H = None
    if "h" in raw:
        H = app.QuadraticHamiltonian(kind, decode_array(raw["h"], "h"), float(raw.get("offset", 0.0)))
    if "J" in raw:
        J = decode_array(raw["J"], "J")
    elif "covariance" in raw:
        J = GaussianState.from_covariance(kind, decode_array(raw["covariance"], "covariance")).J
    elif H is not None:
        J = app.ground_state(H).J
    else:
        raise ParseError("model file needs 'J', 'covariance' or 'h'")
    return kind, H, J, J.shape[0] // 2


# ---------------------------------------------------------------------------
# commands


def _run_ground_state(d):
    kind, H, J, n = _model(d)
    if H is None:
        raise ParseError("ground-state needs a Hamiltonian")
    sizes = d.sizes or [n]
    rows, meta = [], []
    for N in sizes:
        if d.model.type == "kg":
            H, _ = app.klein_gordon_chain(N, d.model.m)
            exact = app.klein_gordon_energy(N, d.model.m)
        elif d.model.type == "ising":
            H = app.ising_hamiltonian(N, d.model.J, d.model.h)
            exact = app.energy(H, app.ground_state(H))
        else:
            exact = app.energy(H, app.ground_state(H))
        res = app.find_ground_state(H, _config(d), d.spread)
        rows.append((N, res.energy, exact, abs(res.energy - exact), res.run.stop_reason.value))
        meta.append(_run_meta(res.runs))
    return ["N", "energy", "exact_energy", "abs_error", "stop_reason"], rows, {"runs": meta}


def _run_eop(d):
    kind, _, J, n = _model(d)
    cfg = _config(d)
    rows, meta = [], []
    for dist in d.distances:
        for split in d.splits:
            problem = app.eop_problem(J, n, split[0], split[1], dist, split[2], split[3], kind)
            res = app.gaussian_eop(problem, cfg, d.spread)
            rows.append((dist, split_label(split), res.value, res.hashing, res.run.stop_reason.value))
            meta.append({"d": dist, "split": split_label(split), **_run_meta(res.runs)})
    return ["d", "split", "eop", "hashing_bound", "stop_reason"], rows, {"runs": meta}


def _run_cop(d):
    kind, _, J, n = _model(d)
    cfg = _config(d)
    J_A = app.interval_pair(J, n, d.n_A, 0, 0)
    rows, meta = [], []
    for n_anc in d.n_ancilla:
        res = app.cop(J_A, n_anc, kind, cfg, spread=d.spread)
        rows.append((d.n_A, n_anc, res.value, res.run.stop_reason.value))
        meta.append({"n_ancilla": n_anc, **_run_meta(res.runs)})
    return ["n_A", "n_ancilla", "cop", "stop_reason"], rows, {"runs": meta}


def _run_exact_eop(d):
    kind, _, J, n = _model(d)
    if kind is not Kind.FERMION:
        raise ParseError("exact-eop needs a fermionic model")
    cfg = _config(d)
    rows, meta = [], []
    for dist in d.distances:
        for split in d.splits:
            nA, nB, nAp, nBp = split
            J_AB = app.interval_pair(J, n, nA, nB, dist)
            ex = exact_eop(gaussian_density(J_AB), nA, nB, nAp, nBp, cfg, d.parity_preserving)
            ga = app.gaussian_eop(app.eop_problem(J, n, nA, nB, dist, nAp, nBp, kind), cfg, d.spread)
            rows.append((dist, split_label(split), ex.value, ga.value))
            meta.append({"d": dist, "split": split_label(split), "exact": _run_meta(ex.runs), "gaussian": _run_meta(ga.runs)})
    return ["d", "split", "non_gaussian", "gaussian"], rows, {"runs": meta}


def _run_flow(d):
    kind, H, _, n = _model(d)
    if H is None:
        raise ParseError("flow needs a Hamiltonian")
    obj, frame = app.energy_objective(H)
    M = sample_group(kind, n, d.seed, d.spread)
    E0 = obj.f(M)
    rows = [(0, 0.0, E0, 0.0)]
    for k in range(1, d.steps + 1):
        M = hamiltonian_flow_step(obj, M, frame, d.dt)
        E = obj.f(M)
        rows.append((k, k * d.dt, E, E - E0))
    return ["step", "t", "energy", "drift"], rows, {"seeds": [d.seed]}


def _run_meta(runs):
    return {
        "seeds": [r.seed for r in runs],
        "stop_reasons": [r.stop_reason.value for r in runs],
        "final_values": [r.final_value for r in runs],
        "iterations": [r.iterations for r in runs],
    }


# ---------------------------------------------------------------------------
# conversions


def _to_covariance(rep_from, kind, data):
    n_key = {
        "covariance": "covariance",
        "J": "J",
        "squeezing": "gamma",
        "bogoliubov": "alpha",
        "thermal": "q",
        "wavefunction": "A",
        "generator": "K",
    }[rep_from]
    if n_key not in data:
        raise ParseError(f"{rep_from} input needs field {n_key!r}")
    if rep_from == "covariance":
        return decode_array(data["covariance"], "covariance")
    if rep_from == "J":
        J = decode_array(data["J"], "J")
        return gamma_from_J(J, standard_background(kind, "qp", J.shape[0] // 2))
    if rep_from == "squeezing":
        return rep.squeezing_to_covariance(rep.SqueezingMatrix(decode_array(data["gamma"], "gamma"), kind))
    if rep_from == "bogoliubov":
        b = rep.BogoliubovData(decode_array(data["alpha"], "alpha"), decode_array(data["beta"], "beta"), kind)
        M = rep.bogoliubov_to_group(b)
        n = M.shape[0] // 2
        out = M @ gamma_from_J(vacuum_J(n), standard_background(kind, "qp", n)) @ M.T
        return 0.5 * (out + out.T) if kind is Kind.BOSON else 0.5 * (out - out.T)
    if rep_from == "thermal":
        return rep.thermal_to_covariance(rep.ThermalData(decode_array(data["q"], "q"), float(data.get("c0", 0.0)), kind))
    if rep_from == "wavefunction":
        if kind is not Kind.BOSON:
            raise ParseError("wave functions are bosonic")
        wf = rep.WaveFunctionData(
            decode_array(data["A"], "A"),
            decode_array(data["B"], "B"),
            decode_array(data["C"], "C") if "C" in data else None,
            decode_array(data["D"], "D") if "D" in data else None,
        )
        return rep.wavefunction_to_covariance(wf)
    K = decode_array(data["K"], "K")
    n = K.shape[0] // 2
    return rep.generator_to_covariance(K, gamma_from_J(vacuum_J(n), standard_background(kind, "qp", n)))


def _from_covariance(rep_to, kind, gamma, mixed=False):
    if rep_to == "covariance":
        return {"covariance": encode_array(gamma)}
    if rep_to == "J":
        return {"J": encode_array(GaussianState.from_covariance(kind, gamma).J)}
    if rep_to == "squeezing":
        return {"gamma": encode_array(rep.covariance_to_squeezing(gamma, None, kind).gamma)}
    if rep_to == "bogoliubov":
        b = rep.state_to_bogoliubov(gamma, None, kind)
        return {"alpha": encode_array(b.alpha), "beta": encode_array(b.beta)}
    if rep_to == "thermal":
        t = rep.covariance_to_thermal(GaussianState.from_covariance(kind, gamma).J, kind)
        return {"q": encode_array(t.q), "c0": t.c0}
    if rep_to == "wavefunction":
        if kind is not Kind.BOSON:
            raise ParseError("wave functions are bosonic")
        wf = rep.covariance_to_wavefunction(gamma, mixed=mixed)
        out = {"A": encode_array(wf.A), "B": encode_array(wf.B)}
        if wf.mixed:
            out.update(C=encode_array(wf.C), D=encode_array(wf.D))
        return out
    rel = rep.relative_structure(gamma, None, kind)
    if rel.log_generator is None:
        raise GaussianError("state is not in the identity component of the vacuum")
    return {"K": encode_array(rel.log_generator)}


def _run_convert(d, out):
    if not d.rep_from or not d.rep_to:
        raise ParseError("convert needs --from and --to")
    for r in (d.rep_from, d.rep_to):
        if r not in REPRESENTATIONS:
            raise ParseError(f"unknown representation {r!r}")
    if d.kind is None:
        raise ParseError("convert needs 'kind'")
    kind = as_kind(d.kind)
    gamma = np.asarray(_to_covariance(d.rep_from, kind, d.data))
    if np.iscomplexobj(gamma):
        gamma = gamma.real
    mixed = GaussianState.from_covariance(kind, gamma).purity_defect() > 1e-10
    payload = {"kind": kind.value, "representation": d.rep_to, "data": _from_covariance(d.rep_to, kind, gamma, mixed)}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_RUNNERS = {
    "ground-state": _run_ground_state,
    "eop": _run_eop,
    "cop": _run_cop,
    "exact-eop": _run_exact_eop,
    "flow": _run_flow,
}


def execute(d: RunDescriptor, out=None) -> int:
    if d.command == "convert":
        _run_convert(d, out)
        return 0
    header, rows, extra = _RUNNERS[d.command](d)
    if out:
        write_csv(out, header, rows)
        write_metadata(
            f"{out}.meta.json",
            {"descriptor": d.to_json(), "config": asdict(_config(d)), "versions": versions(), **extra},
        )
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return execute(_descriptor(args), args.out)
    except ParseError as exc:
        _error(exc)
        return 2
    except (GaussianError, ValueError, np.linalg.LinAlgError) as exc:
        _error(exc)
        return 1


def _error(exc):
    json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
    sys.stderr.write("\n")


if __name__ == "__main__":
    sys.exit(main())
