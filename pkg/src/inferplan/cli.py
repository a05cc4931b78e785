"""Command-line interface: plan search, catalog inspection, service.

Exit codes: 0 plans found, 2 search completed but no feasible plan,
1 usage or catalog errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analyzer import (
    Framework,
    MemoryBudget,
    WorkloadSpec,
    format_task_list,
    generate_task_list,
)
from .catalog import (
    Catalog,
    CatalogError,
    default_catalog,
    load_catalog,
    model_param_count,
    model_weight_bytes,
)
from .engine import (
    DEFAULT_FLEET_MAX,
    DeploymentPlan,
    Objective,
    PlanRequest,
    PrecisionTolerance,
    plan,
)
from .simulator import format_timing
from .wire import WireResponse

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_PLAN = 2


def _add_catalog_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gpus-file", help="GPU catalog file (default: packaged seed catalog)")
    parser.add_argument("--models-file", help="model catalog file (default: packaged seed catalog)")


def _load(args: argparse.Namespace) -> Catalog:
    if bool(args.gpus_file) != bool(args.models_file):
        raise CatalogError("--gpus-file and --models-file must be given together")
    if args.gpus_file:
        return load_catalog(args.gpus_file, args.models_file)
    return default_catalog()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inferplan",
        description="Predict LLM inference performance and search deployment plans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="search for the best deployment plans")
    p.add_argument("--model", required=True, help="model name from the catalog")
    p.add_argument("--budget", required=True, type=float, help="hardware budget (currency units)")
    p.add_argument("--prompt-len", required=True, type=int, help="prompt tokens per request")
    p.add_argument("--output-len", required=True, type=int, help="tokens to generate per request")
    p.add_argument("--batch", type=int, default=1, help="requested batch size (default 1)")
    p.add_argument("--objective", choices=[o.value for o in Objective],
                   default=Objective.MIN_LATENCY.value)
    p.add_argument("--framework", choices=[f.value for f in Framework] + ["search"],
                   default="search")
    p.add_argument("--throughput-floor", type=float, help="minimum tokens/s to accept")
    p.add_argument("--latency-ceiling", type=float, help="maximum batch latency in seconds")
    p.add_argument("--precision-tolerance", choices=[t.value for t in PrecisionTolerance],
                   default=PrecisionTolerance.STRICT.value)
    p.add_argument("--fleet-max", type=int, default=DEFAULT_FLEET_MAX,
                   help=f"largest fleet to consider (default {DEFAULT_FLEET_MAX})")
    p.add_argument("--json", action="store_true", help="emit the wire-format JSON response")
    p.add_argument("--dump-tasks", action="store_true",
                   help="print the winning plan's task schedule to stderr")
    p.add_argument("--dump-timing", action="store_true",
                   help="print the winning plan's per-task timing to stderr")
    _add_catalog_args(p)

    c = sub.add_parser("catalog", help="list catalog records")
    c.add_argument("kind", choices=["gpus", "models"])
    _add_catalog_args(c)

    s = sub.add_parser("serve", help="run the HTTP planning service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--fleet-max", type=int, default=DEFAULT_FLEET_MAX)
    _add_catalog_args(s)

    return parser


def _render_plan_table(plans: list[DeploymentPlan]) -> str:
    header = (f"{'#':>2} {'gpu':<10} {'n':>2} {'dp':>3} {'tp':>3} {'framework':<13} "
              f"{'batch':>5} {'ttft_s':>9} {'tpot_s':>9} {'latency_s':>10} "
              f"{'tok/s':>10} {'cost':>10}")
    lines = [header]
    for rank, p in enumerate(plans, start=1):
        lines.append(
            f"{rank:>2} {p.gpu:<10} {p.gpu_count:>2} {p.dp:>3} {p.tp:>3} "
            f"{p.framework.value:<13} {p.adjusted_batch:>5} {p.metrics.ttft:>9.4f} "
            f"{p.metrics.tpot:>9.5f} {p.metrics.batch_latency:>10.4f} "
            f"{p.metrics.throughput:>10.1f} {p.cost:>10.2f}"
        )
    return "\n".join(lines)


def cmd_plan(args: argparse.Namespace) -> int:
    catalog = _load(args)
    req = PlanRequest(
        model_name=args.model,
        budget=args.budget,
        prompt_len=args.prompt_len,
        output_len=args.output_len,
        batch_size=args.batch,
        objective=Objective(args.objective),
        throughput_floor=args.throughput_floor,
        latency_ceiling=args.latency_ceiling,
        precision_tolerance=PrecisionTolerance(args.precision_tolerance),
        framework=None if args.framework == "search" else Framework(args.framework),
    )
    result = plan(req, catalog, fleet_max=args.fleet_max)

    if result.plans and (args.dump_tasks or args.dump_timing):
        best = result.plans[0]
        m = catalog.model(req.model_name)
        g = catalog.gpu(best.gpu)
        workload = WorkloadSpec(
            batch_size=best.adjusted_batch,
            prompt_len=best.adjusted_seq,
            output_len=req.output_len,
            framework=best.framework,
            opts=best.optimizations,
        )
        budget = MemoryBudget.from_capacity(
            best.dp * g.memory_capacity, best.dp * model_weight_bytes(m) / best.tp
        )
        tasks = generate_task_list(m, workload, budget)
        if args.dump_tasks:
            print(format_task_list(tasks), file=sys.stderr)
        if args.dump_timing:
            print(format_timing(tasks, g, best.tp), file=sys.stderr)

    if args.json:
        response = WireResponse.from_search(result)
        print(json.dumps(response.model_dump(exclude_none=True), sort_keys=True,
                         separators=(",", ":")))
    elif result.plans:
        print(_render_plan_table(result.plans))
    else:
        print(f"no feasible plan; binding constraint: {result.binding_constraint}")
    return EXIT_OK if result.plans else EXIT_NO_PLAN


def cmd_catalog(args: argparse.Namespace) -> int:
    catalog = _load(args)
    if args.kind == "gpus":
        header = (f"{'name':<12} {'TFLOP/s':>9} {'mem_GB':>8} {'bw_GB/s':>9} "
                  f"{'link_GB/s':>10} {'price':>10}")
        print(header)
        for name in sorted(catalog.gpus):
            g = catalog.gpus[name]
            print(f"{name:<12} {g.peak_compute / 1e12:>9.1f} {g.memory_capacity / 1e9:>8.1f} "
                  f"{g.memory_bandwidth / 1e9:>9.1f} {g.comm_bandwidth / 1e9:>10.1f} "
                  f"{g.unit_price:>10.2f}")
    else:
        header = (f"{'name':<14} {'layers':>6} {'hidden':>7} {'heads':>6} {'kv':>4} "
                  f"{'ffn':>7} {'vocab':>8} {'params':>14}")
        print(header)
        for name in sorted(catalog.models):
            m = catalog.models[name]
            print(f"{name:<14} {m.num_layers:>6} {m.hidden_size:>7} {m.num_heads:>6} "
                  f"{m.num_kv_heads:>4} {m.ffn_size:>7} {m.vocab_size:>8} "
                  f"{model_param_count(m):>14}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(_load(args), fleet_max=args.fleet_max)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        if args.command == "plan":
            return cmd_plan(args)
        if args.command == "catalog":
            return cmd_catalog(args)
        return cmd_serve(args)
    except (CatalogError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
