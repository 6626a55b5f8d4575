"""Command-line entry points.

Exit codes: 0 accept/success, 1 reject (or "no" from the oracle),
2 usage or file-format error, 3 protocol error.
"""
from __future__ import annotations

import argparse
import json
import socket
import socketserver
import sys
import threading

import numpy as np

from . import analysis, wire
from .problems import (
    BudgetExceeded,
    Variant,
    check_witness,
    decide_bruteforce,
    dump_instance,
    instance_to_dict,
    load_instance,
    sample_instance,
)
from .protocol import (
    Challenge,
    comm_cost_bits,
    encode_response,
    prover_commit,
    prover_respond,
    verifier_check,
)
from .reductions import lift_witness, ternary_witness, to_balanced, to_ternary

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_PROTOCOL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(obj):
    json.dump(obj, sys.stdout)
    sys.stdout.write("\n")


def _rng(seed):
    return np.random.default_rng(seed)


def _addr(text: str):
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise UsageError(f"address must look like host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


def _load(path):
    try:
        return load_instance(path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None


def _load_witness(path, inst, embedded):
    if path is None:
        if embedded is None:
            raise UsageError("no witness given (use --witness or embed 'e' in the instance)")
        e = embedded
    else:
        try:
            with open(path) as fh:
                e = np.asarray(json.load(fh)["e"], dtype=np.int64)
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"cannot read witness {path}: {exc}") from None
    if e.shape != (inst.witness_length,) or not check_witness(inst, e):
        raise UsageError("witness does not satisfy the instance")
    return e


def cmd_gen(args):
    try:
        inst, e = sample_instance(args.n, args.k, args.w, args.m, _rng(args.seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dump_instance(inst, args.out)
    if args.witness_out:
        with open(args.witness_out, "w") as fh:
            json.dump({"e": e.tolist()}, fh)
            fh.write("\n")
    return EXIT_OK


def cmd_reduce(args):
    inst, e = _load(args.input)
    try:
        if args.mode == "balanced":
            if inst.variant is not Variant.GENERAL:
                raise UsageError("--mode balanced expects a general instance")
            red = to_balanced(inst, args.c)
            target = red.target
            e_out = lift_witness(red, e) if e is not None else None
            extra = {"reduction": {"from": "general", "c": red.c, "nbar": red.nbar}}
        else:
            if inst.variant is not Variant.BALANCED:
                raise UsageError("--mode ternary expects a balanced instance")
            target = to_ternary(inst)
            e_out = ternary_witness(e, inst.w, inst.modulus) if e is not None else None
            extra = {"reduction": {"from": "balanced"}}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    d = instance_to_dict(target, e_out)
    d.update(extra)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(d, fh)
            fh.write("\n")
    else:
        _emit(d)
    return EXIT_OK


def cmd_oracle(args):
    inst, _ = _load(args.input)
    try:
        found = decide_bruteforce(inst, args.budget)
    except BudgetExceeded as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if found is None:
        _emit({"decision": "no"})
        return EXIT_REJECT
    _emit({"decision": "yes", "witness": found.tolist()})
    return EXIT_OK


def _require_balanced(inst):
    if inst.variant is not Variant.BALANCED:
        raise UsageError("the protocol runs on balanced instances")


def cmd_prove(args):
    inst, embedded = _load(args.instance)
    _require_balanced(inst)
    e = _load_witness(args.witness, inst, embedded)
    if bool(args.listen) == bool(args.transcript_out):
        raise UsageError("give exactly one of --listen or --transcript-out")
    if args.transcript_out:
        data, report = wire.record_local_session(inst, e, args.rounds, _rng(args.seed),
                                                 _rng(args.verifier_seed))
        wire.write_transcript(args.transcript_out, data, wire.transcript_summary(
            report, inst, prover_seed=args.seed, verifier_seed=args.verifier_seed))
        _emit(report.summary())
        return EXIT_OK if report.accepted else EXIT_REJECT

    host, port = _addr(args.listen)
    results = []
    root = np.random.SeedSequence(args.seed)
    lock = threading.Lock()

    def session_rng():
        # a single session uses the seed directly; otherwise connections get
        # SeedSequence(seed).spawn children in arrival order
        if args.sessions == 1:
            return _rng(args.seed)
        with lock:
            return np.random.default_rng(root.spawn(1)[0])

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            rng = session_rng()
            try:
                ok = wire.run_prover(inst, e, args.rounds, rng, self.rfile, self.wfile)
                results.append(EXIT_OK if ok else EXIT_REJECT)
            except (wire.ProtocolError, OSError) as exc:
                print(f"prove: protocol error: {exc}", file=sys.stderr)
                results.append(EXIT_PROTOCOL)

    socketserver.ThreadingTCPServer.allow_reuse_address = True
    with socketserver.ThreadingTCPServer((host, port), Handler) as server:
        server.daemon_threads = args.sessions == 0  # finite runs join their sessions on close
        print(f"listening on {host}:{server.server_address[1]}", file=sys.stderr, flush=True)
        if args.sessions == 0:
            server.serve_forever()
        for _ in range(args.sessions):
            server.handle_request()
    return max(results) if results else EXIT_PROTOCOL


def cmd_verify(args):
    inst, _ = _load(args.instance)
    _require_balanced(inst)
    if bool(args.connect) == bool(args.transcript_in):
        raise UsageError("give exactly one of --connect or --transcript-in")
    try:
        if args.transcript_in:
            try:
                with open(args.transcript_in, "rb") as fh:
                    data = fh.read()
            except OSError as exc:
                raise UsageError(str(exc)) from None
            report = wire.replay_transcript(inst, data, rounds=args.rounds)
        else:
            if args.rounds is None:
                raise UsageError("--rounds is required with --connect")
            host, port = _addr(args.connect)
            with socket.create_connection((host, port), timeout=args.timeout) as sock:
                rfile, wfile = sock.makefile("rb"), sock.makefile("wb")
                report = wire.run_verifier(inst, args.rounds, _rng(args.seed), rfile, wfile)
    except (wire.ProtocolError, OSError) as exc:
        print(f"verify: protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    _emit(report.summary())
    if not report.accepted:
        bad = next((r.verdict for r in report.rounds if not r.verdict), None)
        if bad is not None:
            print(f"verify: rejected by check {bad.check}: {bad.detail}", file=sys.stderr)
        return EXIT_REJECT
    return EXIT_OK


def cmd_simulate(args):
    inst, embedded = _load(args.instance)
    _require_balanced(inst)
    ch = Challenge[args.challenge.upper()]
    rng = _rng(args.seed)
    views = [analysis.simulate_view(inst, ch, rng) for _ in range(args.samples)]
    accepted = sum(bool(verifier_check(inst, v.commit_message, ch, v.response)) for v in views)
    shape_ok = sum(analysis.revealed_shape_ok(inst, v.response) for v in views)
    out = {"challenge": ch.name, "samples": args.samples, "accepted": accepted,
           "revealed_shape_ok": shape_ok}
    if args.witness or embedded is not None:
        e = _load_witness(args.witness, inst, embedded)
        real = []
        for _ in range(args.samples):
            state, _cm = prover_commit(inst, e, rng)
            real.append(prover_respond(state, ch))
        report = analysis.transcript_distribution_test(real, views)
        out["real_vs_simulated"] = {k: report[k] for k in ("statistic", "p_value", "worst_feature")}
    _emit(out)
    return EXIT_OK if accepted == args.samples else EXIT_REJECT


def cmd_bench(args):
    try:
        bits = comm_cost_bits(args.n, args.k, args.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = {"n": args.n, "k": args.k, "m": args.m, "formula_bits": bits}
    print(f"communication cost: {bits:.4g} bits", file=sys.stderr)
    if args.measure:
        ell = args.m // 2
        w = args.w if args.w is not None else 2 * ((args.n * (ell - 1)) // 4)
        try:
            inst, e = sample_instance(args.n, args.k, w, args.m, _rng(args.seed))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rng = _rng(args.seed)
        measured = {}
        for ch in Challenge:
            state, _cm = prover_commit(inst, e, rng)
            body = encode_response(prover_respond(state, ch), inst.m)
            measured[ch.name] = wire.HEADER.size + len(body)
        out["w"] = w
        out["response_bytes"] = measured
        out["worst_response_bits"] = 8 * max(measured.values())
        out["ratio_to_formula"] = 8 * max(measured.values()) / bits
    _emit(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leezk", description="Lee-metric syndrome decoding ZK proofs")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a planted balanced instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--w", type=int, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--witness-out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", help="general->balanced or balanced->ternary")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--mode", choices=("balanced", "ternary"), required=True)
    r.add_argument("--c", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    o = sub.add_parser("oracle", help="exhaustive decision at desk scale")
    o.add_argument("--in", dest="input", required=True)
    o.add_argument("--budget", type=int, default=10**6)
    o.set_defaults(func=cmd_oracle)

    pr = sub.add_parser("prove", help="run the prover")
    pr.add_argument("--instance", required=True)
    pr.add_argument("--witness")
    pr.add_argument("--rounds", type=int, required=True)
    pr.add_argument("--listen")
    pr.add_argument("--sessions", type=int, default=1, help="sessions to serve (0 = forever)")
    pr.add_argument("--transcript-out")
    pr.add_argument("--seed", type=int)
    pr.add_argument("--verifier-seed", type=int, help="challenge seed for --transcript-out")
    pr.set_defaults(func=cmd_prove)

    v = sub.add_parser("verify", help="run the verifier")
    v.add_argument("--instance", required=True)
    v.add_argument("--rounds", type=int)
    v.add_argument("--connect")
    v.add_argument("--transcript-in")
    v.add_argument("--seed", type=int)
    v.add_argument("--timeout", type=float, default=60.0)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="zero-knowledge simulator statistics")
    s.add_argument("--instance", required=True)
    s.add_argument("--challenge", choices=("A", "B", "C", "a", "b", "c"), required=True)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--witness")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="communication cost formula and measured sizes")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--measure", action="store_true")
    b.add_argument("--w", type=int)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"leezk {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
