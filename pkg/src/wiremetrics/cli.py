"""Command-line front end.

Subcommands map one-to-one onto the library layers: ``metric`` and
``corrupt`` wrap single wireframe operations, ``proptest`` runs the
property battery, ``rank``/``agree``/``stability`` analyze preference
records, ``plan``/``serve`` drive the annotation service, and ``report``
renders figures with tab-delimited companions.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import corruptions, metrics, ranking, service
from .geometry import load_wireframe, save_wireframe
from .harness import run_battery
from .synthetic import generate_corpus


def _split_csv(text: str) -> list[str]:
    return [part for part in (p.strip() for p in text.split(",")) if part]


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise SystemExit(f"bad --param {pair!r}; expected key=value")
        out[key] = _coerce(value)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_metric(args) -> int:
    pred = load_wireframe(args.pred)
    gt = load_wireframe(args.gt)
    result = metrics.evaluate(args.name, pred, gt, **_parse_params(args.param))
    record = {
        "name": result.name,
        "value": result.value,
        "direction": result.direction,
        "params": result.params,
    }
    print(json.dumps(record, sort_keys=True))
    return 0


def cmd_corrupt(args) -> int:
    source = load_wireframe(args.input)
    spec = corruptions.make_spec(args.kind, args.severity, args.seed)
    damaged, lineage = corruptions.corrupt(source, spec)
    save_wireframe(damaged, args.output)
    sidecar = Path(args.output).with_suffix(Path(args.output).suffix + ".lineage.json")
    doc = {
        "source_id": lineage.source_id,
        "spec": asdict(lineage.spec),
        "flags": list(lineage.flags),
        "vertex_provenance": {str(k): v for k, v in lineage.vertex_provenance.items()},
    }
    sidecar.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    print(f"wrote {args.output} and {sidecar}")
    return 0


def cmd_proptest(args) -> int:
    names = list(metrics.METRICS) if args.metrics == "all" else _split_csv(args.metrics)
    for name in names:
        if name not in metrics.METRICS:
            raise SystemExit(f"unknown metric {name!r}; known: {', '.join(metrics.METRICS)}")
    corpus = generate_corpus(args.corpus_size, seed=args.seed)
    report = run_battery(names, corpus, seed=args.seed)

    width = max(len(t) for t in report.tests) + 2
    col = max(max((len(m) for m in report.metrics), default=8), 6) + 1
    header = " " * width + "".join(m.rjust(col) for m in report.metrics)
    print(header)
    for test in report.tests:
        cells = "".join(f"{report.rate(m, test):.2f}".rjust(col) for m in report.metrics)
        print(test.ljust(width) + cells)
    print("pass count".ljust(width)
          + "".join(str(report.pass_count(m)).rjust(col) for m in report.metrics))

    if args.out_dir:
        from .report import render_battery

        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        rows_path = out_dir / "battery.jsonl"
        with open(rows_path, "w", encoding="utf-8") as fh:
            for row in report.rows():
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        written = render_battery(report, out_dir)
        for path in [rows_path, *written]:
            print(f"wrote {path}")
    return 0


def cmd_rank(args) -> int:
    records = ranking.load_records(args.records)
    table = ranking.ranking_table(
        records, seed=args.seed, include_repeats=args.include_repeats
    )
    text = table.to_tsv().rstrip("\n")
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_agree(args) -> int:
    records = ranking.load_records(args.records)
    raters, matrix = ranking.agreement_matrix(records, exclude_ties=args.exclude_ties)
    lines = ["\t".join(["rater"] + raters)]
    for rater, row in zip(raters, matrix):
        cells = ["%.4f" % v if v == v else "" for v in row]
        lines.append("\t".join([rater] + cells))
    text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_stability(args) -> int:
    records = ranking.load_records(args.records)
    sizes = [int(s) for s in _split_csv(args.sizes)]
    table = ranking.bootstrap_stability(
        records, args.axis, sizes,
        iters=args.iters, confidence=args.confidence, seed=args.seed,
    )
    print("size\tmean_tau\tci_low\tci_high")
    for row in table.rows:
        print(f"{row.size}\t{row.mean_tau:.4f}\t{row.ci_low:.4f}\t{row.ci_high:.4f}")
    minimal = table.minimal_adequate_size()
    print(f"# minimal size with CI low >= 0.95: {minimal if minimal is not None else 'none'}")
    return 0


def cmd_plan(args) -> int:
    plan = service.build_plan(
        _split_csv(args.houses),
        _split_csv(args.methods),
        _split_csv(args.raters),
        seed=args.seed,
        sanity_rate=args.sanity_rate,
    )
    service.save_plan(plan, args.out)
    sizes = {r: plan.size(r) for r in plan.raters}
    print(f"wrote {args.out}: {plan.base_pair_count} base pairs per rater, totals {sizes}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    plan = service.load_plan(args.plan)
    store = service.RecordStore(args.store)
    wireframes = service.WireframeStore.from_jsonl(args.wireframes)
    app = service.create_app(plan, store, wireframes)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_report(args) -> int:
    from .report import render_report

    records = ranking.load_records(args.records)
    battery = None
    if args.battery_corpus:
        corpus = generate_corpus(args.battery_corpus, seed=args.seed)
        battery = run_battery(list(metrics.METRICS), corpus, seed=args.seed)
    sizes = [int(s) for s in _split_csv(args.sizes)] if args.sizes else None
    written = render_report(
        records,
        args.out_dir,
        seed=args.seed,
        stability_axis=args.stability_axis,
        stability_sizes=sizes,
        stability_iters=args.iters,
        battery=battery,
    )
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wiremetrics",
        description="Evaluate, corrupt, property-test, and rank 3D wireframe reconstructions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="score one prediction against ground truth")
    p.add_argument("name", choices=sorted(metrics.METRICS))
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a metric parameter (repeatable)")
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("corrupt", help="apply a seeded corruption to a wireframe")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--kind", required=True, choices=corruptions.CORRUPTION_KINDS)
    p.add_argument("--severity", required=True, choices=corruptions.SEVERITIES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("proptest", help="run the metric property battery")
    p.add_argument("--metrics", default="all", help="comma-separated metric names or 'all'")
    p.add_argument("--corpus-size", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", help="also write battery.jsonl/.tsv/.png here")
    p.set_defaults(func=cmd_proptest)

    p = sub.add_parser("rank", help="ranking table from preference records")
    p.add_argument("--records", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--include-repeats", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("agree", help="rater-by-rater agreement matrix")
    p.add_argument("--records", required=True)
    p.add_argument("--exclude-ties", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("stability", help="bootstrap rank stability vs subsample size")
    p.add_argument("--records", required=True)
    p.add_argument("--axis", required=True, choices=("comparisons", "houses", "raters"))
    p.add_argument("--sizes", required=True, help="comma-separated subsample sizes")
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("plan", help="build and save a comparison plan")
    p.add_argument("--houses", required=True, help="comma-separated house ids")
    p.add_argument("--methods", required=True, help="comma-separated method ids")
    p.add_argument("--raters", required=True, help="comma-separated rater ids")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sanity-rate", type=float, default=service.SANITY_RATE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--plan", required=True, help="plan file from the 'plan' subcommand")
    p.add_argument("--store", required=True, help="append-only choice-record store")
    p.add_argument("--wireframes", required=True, help="wireframe store (one per line)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="figures + tsv tables from preference records")
    p.add_argument("--records", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stability-axis", default="comparisons",
                   choices=("comparisons", "houses", "raters"))
    p.add_argument("--sizes", help="comma-separated stability sizes (default: fractions of n)")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--battery-corpus", type=int, default=0,
                   help="if > 0, also run the property battery on this many synthetic wireframes")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
