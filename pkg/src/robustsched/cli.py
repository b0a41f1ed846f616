"""Command line interface: ``robustsched <subcommand> ...``."""

from __future__ import annotations

import argparse
import functools
import json
import logging
import sys
from pathlib import Path

from . import bench, detopt, evaluate, model, robustbound, search, worstcase

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_SIZE = 5
EXIT_INPUT = 6


class _Fail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _load(path: str) -> model.Instance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    return model.parse_instance(text)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


def _selector(raw: str):
    raw = raw.strip().lower()
    if raw in (model.LOW, model.HIGH):
        return raw
    try:
        values = [int(x) for x in raw.split(",")]
    except ValueError:
        raise _Fail(EXIT_USAGE, f"selector must be low, high or comma-separated integers, got {raw!r}") from None
    return values if len(values) > 1 else values[0]


def _sequence(raw: str) -> list[int]:
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise _Fail(EXIT_USAGE, f"--sequence must be comma-separated job ids, got {raw!r}") from None


def _scenario(inst: model.Instance, args) -> model.Scenario:
    return model.make_scenario(inst, _selector(args.release), _selector(args.processing))


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print("\n".join(lines))


def _seq_str(seq) -> str:
    return ",".join(map(str, seq))


def _search_config(args) -> search.SearchConfig:
    if args.budget_mode == "evals":
        return search.SearchConfig(
            max_evals=int(args.budget), restart_stall=args.stall, seed=args.seed, k_max=getattr(args, "k_max", None),
            perturb=getattr(args, "perturb", False),
        )
    return search.SearchConfig(
        time_limit=float(args.budget), restart_stall=args.stall, seed=args.seed, k_max=getattr(args, "k_max", None),
        perturb=getattr(args, "perturb", False),
    )


# --- subcommands -----------------------------------------------------------


def cmd_gen(args) -> None:
    inst = model.generate_instance(model.GenParams(args.n, args.mu, args.seed), name=args.name)
    _write(args.out, model.serialize_instance(inst))


def cmd_eval(args) -> None:
    inst = _load(args.instance)
    sc = _scenario(inst, args)
    sched = evaluate.evaluate_sequence(_sequence(args.sequence), sc)
    _emit(
        args,
        {"sequence": list(sched.sequence.order), "starts": list(sched.starts), "total_flow": sched.total_flow},
        [f"sequence: {sched.sequence}", f"starts: {_seq_str(sched.starts)}", f"total_flow: {sched.total_flow}"],
    )


def cmd_worst(args) -> None:
    inst = _load(args.instance)
    res = worstcase.worst_case_flow(inst, _sequence(args.sequence))
    w = res.witness
    _emit(
        args,
        {"value": res.value, "witness": {"release": list(w.release), "processing": list(w.processing)}},
        [f"value: {res.value}", f"witness_release: {_seq_str(w.release)}", f"witness_processing: {_seq_str(w.processing)}"],
    )


def cmd_opt(args) -> None:
    inst = _load(args.instance)
    sc = _scenario(inst, args)
    method = args.method.lower()
    if method == "bnb":
        res = detopt.solve_optimal(sc)
        seq, value, extra = res.sequence, res.value, [f"nodes: {res.nodes}"]
    elif method == "exhaustive":
        res = detopt.exhaustive_optimal(sc)
        seq, value, extra = res.sequence, res.value, []
    else:
        seq = detopt.dispatch_heuristic(sc, method)
        value, extra = evaluate.evaluate_sequence(seq, sc).total_flow, []
    srpt = detopt.srpt_relaxation(sc)
    _emit(
        args,
        {"sequence": list(seq.order), "value": value, "srpt_bound": srpt, "method": method},
        [f"sequence: {seq}", f"value: {value}", f"srpt_bound: {srpt}"] + extra,
    )


def cmd_lb(args) -> None:
    inst = _load(args.instance)
    spec = robustbound.SampleSpec(
        include_all_max=not args.no_all_max,
        random_extreme_count=args.random_extreme,
        seed=args.seed,
        processing_at_max=not args.random_processing,
        release_ascent=not args.no_ascent,
    )
    res = robustbound.robust_lower_bound(inst, spec, workers=args.workers or bench.worker_count())
    a = res.argmax_scenario
    _emit(
        args,
        {
            "value": res.value,
            "argmax": {"release": list(a.release), "processing": list(a.processing)},
            "scenarios": len(res.per_scenario),
        },
        [f"lower_bound: {res.value}", f"scenarios: {len(res.per_scenario)}", f"argmax_release: {_seq_str(a.release)}",
         f"argmax_processing: {_seq_str(a.processing)}"],
    )


def _report_search(args, out: search.SearchOutcome) -> None:
    if getattr(args, "trace_out", None):
        _write(args.trace_out, bench.trace_csv(out))
    _emit(
        args,
        {"sequence": list(out.best.order), "value": out.value, "evaluations": out.evaluations, "restarts": out.restarts},
        [f"sequence: {out.best}", f"value: {out.value}", f"evaluations: {out.evaluations}", f"restarts: {out.restarts}"],
    )


def _cmd_heuristic(algo: str, args) -> None:
    inst = _load(args.instance)
    cfg = _search_config(args)
    if args.starts > 1:
        seeds = [args.seed + i for i in range(args.starts)]
        out, _ = search.multi_start(inst, algo, cfg, seeds, workers=args.workers or bench.worker_count())
    else:
        out = search.ALGORITHMS[algo](inst, cfg)
    _report_search(args, out)


def cmd_ils(args) -> None:
    _cmd_heuristic("ILS", args)


def cmd_vns(args) -> None:
    _cmd_heuristic("VNS", args)


def cmd_exhaustive(args) -> None:
    _report_search(args, search.exhaustive_robust(_load(args.instance)))


def cmd_bench(args) -> None:
    try:
        suite = bench.load_suite(args.suite)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {args.suite}: {exc.strerror or exc}") from None
    if args.budget_mode:
        suite.budget_mode = args.budget_mode
        suite.__post_init__()
    res = bench.run_benchmark(suite, workers=args.threads)
    _write(args.out, bench.results_csv(res.all_rows()))
    for e in res.errors:
        print(f"warning: {e}", file=sys.stderr)


def cmd_dist(args) -> None:
    inst = _load(args.instance)
    res = bench.distribution_study(
        inst, args.algo, args.runs, _search_config(args), bins=args.bins, workers=args.workers or bench.worker_count()
    )
    _write(args.out, res.values_csv())
    if args.bins_out:
        _write(args.bins_out, res.bins_csv())
    print(f"algo: {res.algo}\nruns: {len(res.values)}\nmean: {res.mean:.4f}\nvariance: {res.variance:.4f}", file=sys.stderr)


def cmd_export(args) -> None:
    inst = _load(args.instance)
    if args.kind == "awcpp":
        if not args.sequence:
            raise _Fail(EXIT_USAGE, "awcpp export needs --sequence")
        text = worstcase.export_awcpp_model(inst, _sequence(args.sequence), args.K)
    elif args.kind == "dsmsp":
        text = detopt.export_dsmsp_bigM(_scenario(inst, args))
    else:
        text = detopt.build_set_partitioning(_scenario(inst, args), args.horizon).to_lp()
    _write(args.out, text)


# --- parser ----------------------------------------------------------------


def _add_scenario_args(p) -> None:
    p.add_argument("--release", default="high", help="low, high, or per-job values a,b,c (default high)")
    p.add_argument("--processing", default="high", help="low, high, or per-job values (default high)")


def _add_budget_args(p) -> None:
    p.add_argument("--budget", type=float, required=True, help="evaluation count or seconds")
    p.add_argument("--budget-mode", choices=["evals", "wallclock"], default="evals")
    p.add_argument("--stall", type=float, default=None, help="restart after this much budget without improvement")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustsched", description="Robust single-machine scheduling toolkit")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    # also accepted after the subcommand; SUPPRESS keeps a global --json from being reset
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    add = functools.partial(sub.add_parser, parents=[common])

    p = add("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = add("eval", help="evaluate a sequence under one scenario")
    p.add_argument("instance")
    p.add_argument("--sequence", required=True)
    _add_scenario_args(p)
    p.set_defaults(func=cmd_eval)

    p = add("worst", help="worst-case total flow of a sequence")
    p.add_argument("instance")
    p.add_argument("--sequence", required=True)
    p.set_defaults(func=cmd_worst)

    p = add("opt", help="solve one scenario deterministically")
    p.add_argument("instance")
    _add_scenario_args(p)
    p.add_argument("--method", default="bnb", choices=["bnb", "exhaustive", "est", "ect", "phillips"])
    p.set_defaults(func=cmd_opt)

    p = add("lb", help="lower bound on the robust optimum")
    p.add_argument("instance")
    p.add_argument("--random-extreme", type=int, default=32)
    p.add_argument("--no-all-max", action="store_true")
    p.add_argument("--no-ascent", action="store_true")
    p.add_argument("--random-processing", action="store_true", help="sample processing endpoints too")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_lb)

    for name, func in (("ils", cmd_ils), ("vns", cmd_vns)):
        p = add(name, help=f"run {name.upper()}")
        p.add_argument("instance")
        _add_budget_args(p)
        p.add_argument("--starts", type=int, default=1, help="independent seeded runs, best kept")
        p.add_argument("--trace-out", default=None)
        if name == "vns":
            p.add_argument("--k-max", type=int, default=None)
        else:
            p.add_argument("--perturb", action="store_true")
        p.set_defaults(func=func)

    p = add("exhaustive", help="exact robust optimum (n <= 9)")
    p.add_argument("instance")
    p.set_defaults(func=cmd_exhaustive)

    p = add("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--budget-mode", choices=["evals", "wallclock"], default=None)
    p.set_defaults(func=cmd_bench)

    p = add("dist", help="multi-run distribution study")
    p.add_argument("instance")
    p.add_argument("--algo", default="VNS", type=str.upper, choices=["VNS", "ILS"])
    p.add_argument("--runs", type=int, default=50)
    _add_budget_args(p)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out", default=None)
    p.add_argument("--bins-out", default=None)
    p.set_defaults(func=cmd_dist)

    p = add("export-model", help="write an LP-format model")
    p.add_argument("kind", choices=["awcpp", "dsmsp", "setpart"])
    p.add_argument("instance")
    p.add_argument("--sequence", default=None)
    p.add_argument("--K", type=int, default=worstcase.DEFAULT_K)
    p.add_argument("--horizon", type=int, default=None)
    _add_scenario_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except model.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except model.SizeError as exc:
        print(f"size error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except model.InstanceError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
