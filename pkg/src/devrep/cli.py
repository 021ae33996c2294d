"""Command-line pipeline over a persisted workspace.

Commands: ingest, build, stats, centrality, score, badge, sample, fit,
simulate, analyze, export. Each writes byte-stable artifacts for fixed
inputs, config, and seed; human-readable summaries go to stdout. Exit
status is 0 on success, 1 for validation errors, 2 for convergence
failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .centrality import (
    MEASURES,
    CentralityConfig,
    centrality_table,
    centrality_table_from_csv,
)
from .errors import ConvergenceError, DevrepError, ValidationError
from .events import (
    filter_actors_and_window,
    parse_event_log,
    reviewed_fraction,
    serialize_event_log,
)
from .graphstats import louvain, structural_summary
from .lmm import anova_table, fit_random_intercept, nakagawa_r2, prepare_design
from .network import build_network, export_graph, parse_graphml
from .reputation import (
    BadgePolicy,
    aggregate_score,
    assign_badges,
    eligible_respondents,
    minmax_normalize,
    scores_from_csv,
    scores_to_csv,
    stratified_sample,
)
from .statkit import (
    ContingencyTable,
    ReliabilityData,
    chi_squared_independence,
    krippendorff_alpha,
)
from .synth import SynthNetworkSpec, SynthResponseSpec, generate_network, synth_responses
from .workspace import Config, Workspace, digest_bytes, digest_file

EVENTS_ARTIFACT = "events.jsonl"
NETWORK_ARTIFACT = "network.graphml"
CENTRALITY_ARTIFACT = "centrality.csv"
SCORES_ARTIFACT = "scores.csv"
STATS_ARTIFACT = "stats.json"
MODEL_ARTIFACT = "model.json"
SAMPLE_ARTIFACT = "sample.json"
RESPONSES_ARTIFACT = "responses.csv"


def _parse_instant(text: str, flag: str) -> datetime:
    candidate = text.replace("Z", "+00:00") if text.endswith("Z") else text
    try:
        instant = datetime.fromisoformat(candidate)
    except ValueError as exc:
        raise ValidationError(
            f"{flag}: cannot parse {text!r} as a date or RFC3339 timestamp"
        ) from exc
    if instant.tzinfo is None:
        instant = instant.replace(tzinfo=timezone.utc)
    return instant.astimezone(timezone.utc)


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _resolve_config(ws: Workspace, overrides: dict) -> Config:
    base = ws.read_config().to_dict()
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    config = Config.from_dict(base)
    ws.write_config(config)
    return config


def _badge_overrides(args) -> dict:
    overrides: dict = {}
    if getattr(args, "badge_quantile", None) is not None:
        overrides["badge_mode"] = "quantile"
        overrides["badge_quantile"] = args.badge_quantile
    if getattr(args, "badge_threshold", None) is not None:
        overrides["badge_mode"] = "absolute"
        overrides["badge_threshold"] = args.badge_threshold
    return overrides


def _badge_policy(config: Config) -> BadgePolicy:
    return BadgePolicy(
        mode=config.badge_mode,
        quantile=config.badge_quantile,
        absolute_threshold=config.badge_threshold,
    )


def _centrality_config(config: Config) -> CentralityConfig:
    return CentralityConfig(
        distance_transform=config.distance_transform,
        pagerank_damping=config.pagerank_damping,
    )


def cmd_ingest(args) -> int:
    ws = Workspace(args.out)
    start = _parse_instant(args.from_ts, "--from")
    end = _parse_instant(args.to_ts, "--to")
    _resolve_config(ws, {})
    events_path = Path(args.events)
    try:
        with open(events_path, encoding="utf-8") as handle:
            raw = parse_event_log(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read --events file {events_path}: {exc}")
    log = filter_actors_and_window(raw, start, end)
    data = serialize_event_log(log).encode("utf-8")
    ws.write_artifact(
        EVENTS_ARTIFACT,
        data,
        inputs={str(events_path): digest_file(events_path)},
        config={"from": args.from_ts, "to": args.to_ts},
    )
    dropped = {k: v for k, v in sorted(log.diagnostics.items()) if v}
    print(
        f"ingested {len(log.commits)} commits and {len(log.rejected_prs)}"
        f" rejected PRs into {ws.path(EVENTS_ARTIFACT)}"
    )
    print(f"dropped records: {dropped if dropped else 'none'}")
    print(f"reviewed fraction: {reviewed_fraction(log):.3f}")
    return 0


def cmd_build(args) -> int:
    ws = Workspace(args.out)
    config = _resolve_config(ws, {"window_days": args.window_days})
    data = ws.read_artifact(EVENTS_ARTIFACT, force=args.force)
    log = parse_event_log(io.StringIO(data.decode("utf-8")))
    net = build_network(log, window_days=config.window_days)
    ws.write_artifact(
        NETWORK_ARTIFACT,
        export_graph(net, "graphml"),
        inputs={EVENTS_ARTIFACT: digest_bytes(data)},
        config={"window_days": config.window_days},
    )
    print(
        f"network: {net.vertex_count} contributors, {net.edge_count}"
        f" collaboration edges -> {ws.path(NETWORK_ARTIFACT)}"
    )
    return 0


def _load_network(ws: Workspace, force: bool):
    data = ws.read_artifact(NETWORK_ARTIFACT, force=force)
    return parse_graphml(data), digest_bytes(data)


def cmd_stats(args) -> int:
    ws = Workspace(args.out)
    config = _resolve_config(ws, {"seed": args.seed})
    net, net_digest = _load_network(ws, args.force)
    summary = structural_summary(net)
    payload = summary.to_dict()
    if net.vertex_count:
        partition = louvain(net, seed=config.seed, resolution=args.resolution)
        histogram: dict[int, int] = {}
        for size in partition.community_sizes:
            histogram[size] = histogram.get(size, 0) + 1
        payload["communities"] = {
            "count": partition.community_count(),
            "modularity": partition.modularity,
            "size_histogram": sorted(histogram.items(), reverse=True),
        }
    ws.write_artifact(
        STATS_ARTIFACT,
        _json_bytes(payload),
        inputs={NETWORK_ARTIFACT: net_digest},
        config={"seed": config.seed, "resolution": args.resolution},
    )
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def cmd_centrality(args) -> int:
    ws = Workspace(args.out)
    config = _resolve_config(
        ws,
        {
            "distance_transform": args.distance_transform,
            "pagerank_damping": args.damping,
        },
    )
    net, net_digest = _load_network(ws, args.force)
    table = centrality_table(net, _centrality_config(config))
    ws.write_artifact(
        CENTRALITY_ARTIFACT,
        table.to_csv().encode("utf-8"),
        inputs={NETWORK_ARTIFACT: net_digest},
        config={
            "distance_transform": config.distance_transform,
            "pagerank_damping": config.pagerank_damping,
        },
    )
    print(
        f"centrality for {len(table.contributors)} contributors"
        f" -> {ws.path(CENTRALITY_ARTIFACT)}"
    )
    return 0


def cmd_score(args) -> int:
    ws = Workspace(args.out)
    config = _resolve_config(ws, _badge_overrides(args))
    data = ws.read_artifact(CENTRALITY_ARTIFACT, force=args.force)
    table = centrality_table_from_csv(data)
    scores = assign_badges(aggregate_score(table), _badge_policy(config))
    ws.write_artifact(
        SCORES_ARTIFACT,
        scores_to_csv(scores).encode("utf-8"),
        inputs={CENTRALITY_ARTIFACT: digest_bytes(data)},
        config={
            "badge_mode": config.badge_mode,
            "badge_quantile": config.badge_quantile,
            "badge_threshold": config.badge_threshold,
        },
    )
    badged = sum(1 for s in scores.values() if s.badge)
    print(f"scored {len(scores)} contributors, {badged} badged")
    top = sorted(scores.values(), key=lambda s: (-s.aggregate, s.contributor))[:3]
    for s in top:
        print(f"  {s.contributor}: {s.aggregate:.4f}{' [badge]' if s.badge else ''}")
    return 0


def cmd_badge(args) -> int:
    ws = Workspace(args.out)
    overrides = _badge_overrides(args)
    if not overrides:
        raise ValidationError(
            "badge requires --badge-quantile or --badge-threshold"
        )
    config = _resolve_config(ws, overrides)
    data = ws.read_artifact(SCORES_ARTIFACT, force=args.force)
    scores = assign_badges(scores_from_csv(data), _badge_policy(config))
    entry = ws.manifest_entry(SCORES_ARTIFACT)
    ws.write_artifact(
        SCORES_ARTIFACT,
        scores_to_csv(scores).encode("utf-8"),
        inputs=entry.get("inputs", {}),
        config={
            "badge_mode": config.badge_mode,
            "badge_quantile": config.badge_quantile,
            "badge_threshold": config.badge_threshold,
        },
    )
    badged = sum(1 for s in scores.values() if s.badge)
    print(f"re-badged: {badged} of {len(scores)} contributors carry the badge")
    return 0


def cmd_sample(args) -> int:
    ws = Workspace(args.out)
    config = _resolve_config(ws, {"seed": args.seed})
    net, net_digest = _load_network(ws, args.force)
    scores_data = ws.read_artifact(SCORES_ARTIFACT, force=args.force)
    scores = scores_from_csv(scores_data)
    eligible = eligible_respondents(net, config.min_collaborators)
    if args.respondent not in eligible:
        raise ValidationError(
            f"respondent {args.respondent!r} is not eligible: needs at least"
            f" {config.min_collaborators} direct collaborators"
        )
    plan = stratified_sample(net, scores, args.respondent, config.seed)
    ws.write_artifact(
        SAMPLE_ARTIFACT,
        _json_bytes(plan.to_dict()),
        inputs={
            NETWORK_ARTIFACT: net_digest,
            SCORES_ARTIFACT: digest_bytes(scores_data),
        },
        config={"seed": config.seed, "respondent": args.respondent},
    )
    print(f"sample for {args.respondent} -> {ws.path(SAMPLE_ARTIFACT)}")
    for group_name, picks in (("direct", plan.direct), ("others", plan.others)):
        for pick in picks:
            print(f"  {group_name:6s} {pick.stratum:4s} {pick.contributor}")
    return 0


def _read_responses(path: Path) -> list[tuple[str, str, int]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read --responses file {path}: {exc}")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError(f"{path} is empty")
    if header != ["respondent_id", "contributor_id", "level"]:
        raise ValidationError(
            f"{path}: expected header respondent_id,contributor_id,level,"
            f" got {header}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValidationError(f"{path}:{lineno}: expected 3 fields")
        try:
            level = int(row[2])
        except ValueError:
            raise ValidationError(
                f"{path}:{lineno}: level must be an integer, got {row[2]!r}"
            )
        if not 1 <= level <= 4:
            raise ValidationError(
                f"{path}:{lineno}: level must be between 1 and 4, got {level}"
            )
        rows.append((row[0], row[1], level))
    if not rows:
        raise ValidationError(f"{path} contains no responses")
    return rows


def cmd_fit(args) -> int:
    ws = Workspace(args.out)
    config = _resolve_config(
        ws,
        {
            "vif_threshold": args.vif_threshold,
            "variance_threshold": args.variance_threshold,
        },
    )
    responses_path = Path(args.responses)
    responses = _read_responses(responses_path)
    data = ws.read_artifact(CENTRALITY_ARTIFACT, force=args.force)
    table = centrality_table_from_csv(data)
    normalized = {m: minmax_normalize(table.measure(m)) for m in MEASURES}
    missing = sorted(
        {c for _, c, _ in responses if c not in normalized[MEASURES[0]]}
    )
    if missing:
        raise ValidationError(
            f"{responses_path}: contributors not in {CENTRALITY_ARTIFACT},"
            f" e.g. {missing[0]!r}"
        )
    y = np.array([float(level) for _, _, level in responses])
    groups = [contributor for _, contributor, _ in responses]
    candidates = {
        m: np.array([normalized[m][c] for _, c, _ in responses]) for m in MEASURES
    }
    frame, flags, vif_report = prepare_design(
        y,
        groups,
        candidates,
        variance_threshold=config.variance_threshold,
        vif_threshold=config.vif_threshold,
    )
    fit = fit_random_intercept(frame)
    r2 = nakagawa_r2(fit, frame)
    anova = anova_table(fit, frame)
    payload = {
        "variables": fit.columns,
        "beta": [float(b) for b in fit.beta],
        "se": [float(s) for s in fit.se],
        "ss": [anova.row(c).sum_of_squares for c in fit.columns],
        "F": [anova.row(c).f_value for c in fit.columns],
        "p": [anova.row(c).p for c in fit.columns],
        "sigma_alpha2": fit.sigma_alpha2,
        "sigma_eps2": fit.sigma_eps2,
        "r2m": r2.r2m,
        "r2c": r2.r2c,
        "n_obs": fit.n_obs,
        "n_groups": fit.n_groups,
        "dropped_by_vif": [name for name, _ in vif_report.dropped],
        "warnings": fit.warnings
        + [f"log1p transform applied to {c}" for c, on in flags.items() if on],
    }
    ws.write_artifact(
        MODEL_ARTIFACT,
        _json_bytes(payload),
        inputs={
            CENTRALITY_ARTIFACT: digest_bytes(data),
            str(responses_path): digest_file(responses_path),
        },
        config={
            "vif_threshold": config.vif_threshold,
            "variance_threshold": config.variance_threshold,
        },
    )
    print(
        f"fit {fit.n_obs} responses over {fit.n_groups} contributors"
        f" -> {ws.path(MODEL_ARTIFACT)}"
    )
    if payload["dropped_by_vif"]:
        print(f"dropped by VIF screen: {', '.join(payload['dropped_by_vif'])}")
    for j, name in enumerate(fit.columns):
        row = anova.row(name)
        print(
            f"  {name:12s} beta={fit.beta[j]: .4f} se={fit.se[j]:.4f}"
            f" ss={row.sum_of_squares:.4f} p={row.p:.4g}"
        )
    print(f"R2 marginal={r2.r2m:.4f} conditional={r2.r2c:.4f}")
    return 0


def _parse_beta(text: str) -> dict[str, float]:
    out = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        name, _, value = piece.partition("=")
        if not value:
            raise ValidationError(
                f"--beta entries must look like name=value, got {piece!r}"
            )
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"--beta value for {name!r} is not a number")
    if not out:
        raise ValidationError("--beta must name at least one coefficient")
    return out


def cmd_simulate(args) -> int:
    ws = Workspace(args.out)
    config = _resolve_config(ws, {"seed": args.seed})
    spec = SynthNetworkSpec(
        n=args.n,
        k=args.k,
        p_rewire=args.p_rewire,
        weight_max=args.weight_max,
        seed=config.seed,
    )
    net = generate_network(spec)
    ws.write_artifact(
        NETWORK_ARTIFACT,
        export_graph(net, "graphml"),
        inputs={},
        config={
            "synthetic": True,
            "n": spec.n,
            "k": spec.k,
            "p_rewire": spec.p_rewire,
            "weight_max": spec.weight_max,
            "seed": spec.seed,
        },
    )
    print(
        f"synthetic network: {net.vertex_count} vertices,"
        f" {net.edge_count} edges -> {ws.path(NETWORK_ARTIFACT)}"
    )
    if args.beta is None:
        return 0
    true_beta = _parse_beta(args.beta)
    table = centrality_table(net, _centrality_config(config))
    response_spec = SynthResponseSpec(
        true_beta=true_beta,
        sigma_alpha=args.sigma_alpha,
        sigma_eps=args.sigma_eps,
        responses_per_contributor=args.responses_per,
        rounding="clamped_1_4" if args.clamp else "continuous",
        seed=config.seed,
    )
    frame = synth_responses(net, table, response_spec)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["respondent_id", "contributor_id", "level"])
    for i, (value, contributor) in enumerate(zip(frame.y, frame.groups)):
        level = int(round(min(4.0, max(1.0, value))))
        writer.writerow([f"resp{i:05d}", contributor, level])
    ws.write_artifact(
        RESPONSES_ARTIFACT,
        buf.getvalue().encode("utf-8"),
        inputs={NETWORK_ARTIFACT: ws.artifact_digest(NETWORK_ARTIFACT)},
        config={
            "true_beta": sorted(true_beta.items()),
            "sigma_alpha": args.sigma_alpha,
            "sigma_eps": args.sigma_eps,
            "responses_per": args.responses_per,
            "seed": config.seed,
        },
    )
    print(
        f"synthetic responses: {len(frame.y)} rows"
        f" -> {ws.path(RESPONSES_ARTIFACT)}"
    )
    return 0


def _read_csv_grid(path: Path) -> list[list[str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}")
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise ValidationError(f"{path} is empty")
    return rows


def cmd_analyze(args) -> int:
    path = Path(args.input)
    rows = _read_csv_grid(path)
    if args.mode == "chi2":
        try:
            counts = [[int(cell) for cell in row] for row in rows]
        except ValueError:
            raise ValidationError(
                f"{path}: contingency table cells must be integers"
            )
        result = chi_squared_independence(ContingencyTable(counts))
        print(
            json.dumps(
                {"statistic": result.statistic, "df": result.df, "p": result.p},
                sort_keys=True,
            )
        )
    else:
        grid = [
            [cell if cell.strip() else None for cell in row] for row in rows
        ]
        alpha = krippendorff_alpha(ReliabilityData(grid))
        print(json.dumps({"alpha": alpha}))
    return 0


def cmd_export(args) -> int:
    ws = Workspace(args.out)
    net, _ = _load_network(ws, args.force)
    data = export_graph(net, args.format)
    if args.dest:
        Path(args.dest).write_bytes(data)
        print(f"exported {args.format} -> {args.dest}")
    else:
        sys.stdout.buffer.write(data)
    return 0


def _add_out(parser):
    parser.add_argument(
        "--out", default="workspace", help="workspace directory (default: workspace)"
    )
    parser.add_argument(
        "--force",
        action="store_true",
        help="use workspace artifacts even if their inputs changed",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="devrep",
        description="Contributor reputation pipeline over repository history.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, filter, and normalize raw events")
    p.add_argument("--events", required=True, help="raw line-delimited JSON events")
    p.add_argument("--from", dest="from_ts", required=True,
                   help="window start (inclusive), date or RFC3339")
    p.add_argument("--to", dest="to_ts", required=True,
                   help="window end (exclusive), date or RFC3339")
    _add_out(p)
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("build", help="construct the collaboration network")
    p.add_argument("--window-days", type=int, default=None,
                   help="co-edition window in days (default 30)")
    _add_out(p)
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("stats", help="structural summary and communities")
    p.add_argument("--seed", type=int, default=None, help="community detection seed")
    p.add_argument("--resolution", type=float, default=1.0,
                   help="modularity resolution (default 1.0)")
    _add_out(p)
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("centrality", help="compute the five centrality measures")
    p.add_argument("--distance-transform", choices=["inverse", "raw"], default=None)
    p.add_argument("--damping", type=float, default=None,
                   help="PageRank damping factor (default 0.85)")
    _add_out(p)
    p.set_defaults(handler=cmd_centrality)

    p = sub.add_parser("score", help="aggregate reputation ratings and badges")
    p.add_argument("--badge-quantile", type=float, default=None)
    p.add_argument("--badge-threshold", type=float, default=None)
    _add_out(p)
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("badge", help="re-assign badges under a new policy")
    p.add_argument("--badge-quantile", type=float, default=None)
    p.add_argument("--badge-threshold", type=float, default=None)
    _add_out(p)
    p.set_defaults(handler=cmd_badge)

    p = sub.add_parser("sample", help="draw the survey sample for a respondent")
    p.add_argument("--respondent", required=True)
    p.add_argument("--seed", type=int, default=None)
    _add_out(p)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("fit", help="fit review level on centrality measures")
    p.add_argument("--responses", required=True,
                   help="responses.csv: respondent_id,contributor_id,level")
    p.add_argument("--vif-threshold", type=float, default=None)
    p.add_argument("--variance-threshold", type=float, default=None)
    _add_out(p)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("simulate", help="generate a synthetic network and responses")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--p-rewire", type=float, default=0.1)
    p.add_argument("--weight-max", type=int, default=5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--beta", default=None,
                   help='true coefficients, e.g. "intercept=2,closeness=-0.5"')
    p.add_argument("--sigma-alpha", type=float, default=0.5)
    p.add_argument("--sigma-eps", type=float, default=1.0)
    p.add_argument("--responses-per", type=int, default=5)
    p.add_argument("--clamp", action="store_true",
                   help="round responses onto the 1..4 scale")
    _add_out(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("analyze", help="chi-squared or Krippendorff alpha on a CSV")
    p.add_argument("mode", choices=["chi2", "alpha"])
    p.add_argument("input", help="contingency table or coder-by-unit CSV")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("export", help="export the network in another format")
    p.add_argument("--format", choices=["graphml", "dot", "edge-csv"],
                   default="edge-csv")
    p.add_argument("--dest", default=None, help="output path (default: stdout)")
    _add_out(p)
    p.set_defaults(handler=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DevrepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
