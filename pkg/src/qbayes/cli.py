"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 impossible evidence or exhausted
sampling budget, 4 resource guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from . import bayesnet, circuit, compiler, inference, simulator
from .errors import (
    ImpossibleEvidenceError,
    NetworkError,
    ResourceGuardError,
    SamplingBudgetError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_GUARD = 4


def parse_evidence(spec: str | None) -> dict[str, int]:
    """``"B=1,C=0"`` -> ``{"B": 1, "C": 0}``."""
    out: dict[str, int] = {}
    if not spec:
        return out
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        name, value = name.strip(), value.strip()
        if not sep or not name or value not in ("0", "1"):
            raise NetworkError(f"bad evidence item {item!r}; expected NAME=0 or NAME=1")
        if name in out:
            raise NetworkError(f"evidence names {name!r} twice")
        out[name] = int(value)
    return out


def parse_query(spec: str | None) -> list[str] | None:
    if spec is None:
        return None
    names = [s.strip() for s in spec.split(",") if s.strip()]
    if not names:
        raise NetworkError("empty query spec")
    return names


def _resolve(net, args):
    evidence = parse_evidence(args.evidence)
    ev = bayesnet.normalize_evidence(net, evidence)
    query = bayesnet.normalize_query(net, parse_query(args.query), ev)
    return ev, query


def _fmt(x: float) -> str:
    return f"{x + 0.0:.10f}"


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands


def cmd_exact(args) -> str:
    net = bayesnet.load_net(args.net)
    ev, query = _resolve(net, args)
    dist = bayesnet.exact_inference(net, query, ev)
    names = [net.nodes[i].name for i in query]
    cond = ",".join(f"{net.nodes[i].name}={b}" for i, b in ev.items())
    rows = sorted(dist.support.items(), key=lambda kv: "".join(map(str, kv[0])))
    fmt = args.format or "text"
    if fmt == "json":
        payload = {
            "query": names,
            "evidence": {net.nodes[i].name: b for i, b in ev.items()},
            "distribution": [
                {"bits": "".join(map(str, bits)), "p": p} for bits, p in rows
            ],
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        return _csv([["bitstring", *names, "probability"]]
                    + [["".join(map(str, bits)), *bits, _fmt(p)] for bits, p in rows])
    lines = []
    for bits, p in rows:
        lhs = ",".join(f"{name}={b}" for name, b in zip(names, bits))
        lines.append(f"P({lhs}|{cond})={_fmt(p)}" if cond else f"P({lhs})={_fmt(p)}")
    return "\n".join(lines) + "\n"


def _schedule(args, default_mode: str) -> inference.ScheduleConfig:
    return inference.ScheduleConfig(
        mode=args.schedule or default_mode,
        max_rounds=args.max_rounds,
        max_restarts=args.max_restarts,
        growth=args.growth,
    )


def cmd_sample(args) -> str:
    net = bayesnet.load_net(args.net)
    ev, query = _resolve(net, args)
    names = [net.nodes[i].name for i in query]
    fmt = args.format or "json"
    config = {"method": args.method, "samples": args.samples, "seed": args.seed}
    if args.method == "classical":
        rep = bayesnet.classical_rejection_sample(net, query, ev, args.samples, args.seed, max_draws=args.max_draws)
        cost = {
            "mean_draws": rep.mean_draws,
            "total_draws": rep.draws,
            "total_cpt_lookups": rep.cpt_lookups,
            "total_parent_inspections": rep.parent_inspections,
        }
        config["max_draws"] = args.max_draws
        samples, per_sample = rep.samples, [[d] for d in rep.draws_per_sample]
        cost_cols = ["draws"]
    else:
        schedule = _schedule(args, inference.PAPER)
        rep = inference.batch_sample(net, query, ev, args.samples, schedule, args.seed, mcz_mode=args.mcz)
        cost = rep.cost_summary()
        config.update(rep.config)
        config["method"] = "quantum"
        samples = rep.samples
        per_sample = [[c.rounds, c.grover, c.a_applications] for c in rep.costs]
        cost_cols = ["rounds", "grover", "a_applications"]
    config["evidence"] = {net.nodes[i].name: b for i, b in ev.items()}
    config["query"] = names
    if fmt == "csv":
        header = ["sample", *names, *cost_cols]
        rows = [[j, *bits, *extra] for j, (bits, extra) in enumerate(zip(samples, per_sample))]
        return _csv([header] + rows)
    payload = {
        "samples": [dict(zip(names, bits)) for bits in samples],
        "cost": cost,
        "config": config,
    }
    return json.dumps(payload, indent=2) + "\n"


def _count_row(name: str, c: circuit.Circuit) -> dict:
    return {
        "operator": name,
        "primitive": circuit.gate_count(c, circuit.PRIMITIVE).as_dict(),
        "compiled": circuit.gate_count(c, circuit.COMPILED).as_dict(),
    }


def cmd_gatecount(args) -> str:
    net = bayesnet.load_net(args.net)
    ev, _ = _resolve(net, args)
    prep = compiler.compile_qsample(net)
    ops = {"A": prep, "S0": compiler.compile_s0(net.n)}
    if ev:
        qubits, bits = compiler.evidence_register(net, ev)
        ops["Se"] = compiler.compile_phase_flip(net.n, qubits, bits)
        ops["G"] = compiler.grover_from_prep(prep, qubits, bits)
    order = [k for k in ("A", "Se", "S0", "G") if k in ops]
    rows = [_count_row(k, ops[k]) for k in order]
    if args.dump:
        which = args.operator or ("G" if "G" in ops else "A")
        if which not in ops:
            raise NetworkError(f"operator {which!r} needs evidence")
        c = ops[which]
        if args.mcz == circuit.COMPILED:
            c = circuit.expand_mcz(c)
        _emit(circuit.dump(c), args.dump)
    summary = {
        "n": net.n,
        "max_indegree": net.max_indegree,
        "prep_bound": 2 * sum(2**m for m in net.indegrees()),
        "prep_bound_n2m": 2 * net.n * 2**net.max_indegree,
    }
    fmt = args.format or "text"
    if fmt == "json":
        return json.dumps({"network": summary, "operators": rows}, indent=2) + "\n"
    fields = ["cnot", "roty", "x", "phase", "mcz", "total"]
    table = [["operator", "mode", *fields]]
    for row in rows:
        for mode in ("primitive", "compiled"):
            table.append([row["operator"], mode, *(row[mode][f] for f in fields)])
    if fmt == "csv":
        return _csv(table)
    widths = [max(len(str(r[j])) for r in table) for j in range(len(table[0]))]
    lines = [
        f"n={summary['n']} m={summary['max_indegree']} "
        f"bound 2*sum(2^m_i)={summary['prep_bound']} 2n*2^m={summary['prep_bound_n2m']}"
    ]
    lines += ["  ".join(str(v).rjust(w) for v, w in zip(r, widths)) for r in table]
    return "\n".join(lines) + "\n"


def _g12(x: float) -> str:
    return f"{x + 0.0:.12g}"


def cmd_prep_state(args) -> str:
    net = bayesnet.load_net(args.net)
    prep = compiler.compile_qsample(net)
    psi = simulator.prepare(prep, args.mcz)
    if args.dump:
        _emit(circuit.dump(prep), args.dump)
    n = net.n
    rows = []
    for idx, amp in enumerate(psi.amps):
        rows.append([idx, format(idx, f"0{n}b"), _g12(amp.real), _g12(amp.imag), _g12(abs(amp) ** 2)])
    fmt = args.format or "csv"
    if fmt == "json":
        payload = [dict(zip(("index", "bitstring", "re", "im", "prob"), r)) for r in rows]
        return json.dumps({"nodes": net.names, "amplitudes": payload}, indent=2) + "\n"
    return _csv([["index", "bitstring", "re", "im", "prob"]] + rows)


def cmd_compare(args) -> str:
    ks = list(range(args.kmin, args.kmax + 1))
    if not ks:
        raise NetworkError("empty k range")
    schedule = _schedule(args, inference.RANDOMIZED)
    result = inference.scaling_run(
        inference.chain_family, ks, args.samples, args.seed, schedule, mcz_mode=args.mcz
    )
    fmt = args.format or "text"
    header = ["k", "p_evidence", "classical_mean_draws", "quantum_mean_a_applications", "quantum_mean_grover"]
    rows = [
        [p.k, _fmt(p.p_evidence), _fmt(p.classical_mean_draws), _fmt(p.quantum_mean_a_applications),
         _fmt(p.quantum_mean_grover)]
        for p in result.points
    ]
    slopes = {"classical": result.classical_slope, "quantum": result.quantum_slope}
    if fmt == "json":
        payload = {
            "points": [dict(zip(header, r)) for r in rows],
            "slopes": {k: v for k, v in slopes.items() if v is not None},
            "config": {"samples": args.samples, "seed": args.seed, "schedule": schedule.mode,
                       "growth": schedule.growth},
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        return _csv([header] + rows)
    widths = [max(len(h), *(len(str(r[j])) for r in rows)) for j, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(str(v).rjust(w) for v, w in zip(r, widths)) for r in rows]
    for name, value in slopes.items():
        if value is not None:
            lines.append(f"{name} slope: {value:.4f}")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "exact": cmd_exact,
    "sample": cmd_sample,
    "gatecount": cmd_gatecount,
    "prep-state": cmd_prep_state,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbayes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, net=True):
        if net:
            p.add_argument("--net", required=True, help="network JSON file")
        p.add_argument("--evidence", help="comma-separated NAME=BIT list")
        p.add_argument("--query", help="comma-separated node names (default: all non-evidence nodes)")
        p.add_argument("--format", choices=["text", "json", "csv"])
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--mcz", choices=list(circuit.MODES), default=circuit.PRIMITIVE)

    def sampling(p):
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--schedule", choices=[inference.PAPER, inference.RANDOMIZED])
        p.add_argument("--max-rounds", type=int, default=30)
        p.add_argument("--max-restarts", type=int, default=8)
        p.add_argument("--growth", type=float, default=1.2, help="randomized schedule growth factor")

    common(sub.add_parser("exact", help="exact P(Q|e) by enumeration"))

    p = sub.add_parser("sample", help="draw samples from P(Q|e)")
    common(p)
    sampling(p)
    p.add_argument("--method", choices=["quantum", "classical"], default="quantum")
    p.add_argument("--max-draws", type=int, default=10_000_000, help="classical draw budget")

    p = sub.add_parser("gatecount", help="gate counts of the compiled operators")
    common(p)
    p.add_argument("--dump", help="write one operator as JSON lines to this path")
    p.add_argument("--operator", choices=["A", "Se", "S0", "G"])

    p = sub.add_parser("prep-state", help="amplitudes of the prepared q-sample")
    common(p)
    p.add_argument("--dump", help="write the preparation circuit as JSON lines to this path")

    p = sub.add_parser("compare", help="classical vs quantum cost scaling on the chain family")
    common(p, net=False)
    sampling(p)
    p.set_defaults(samples=500)
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, default=6)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "samples", 0) < 0:
            raise NetworkError("--samples must be non-negative")
        text = COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ImpossibleEvidenceError, SamplingBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    _emit(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
