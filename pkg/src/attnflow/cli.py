"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 analysis error, 3 insufficient data.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import community, layout, netmodel, robustness
from .balance import balance, transition_matrix
from .errors import (AttnflowError, DegenerateFitError, InsufficientDataError,
                     ValidationError)
from .impact import compute_U, impact_table, surfer_oracle
from .scaling import fit_scaling

log = logging.getLogger("attnflow")

EXIT_OK, EXIT_INPUT, EXIT_ANALYSIS, EXIT_DATA = 0, 1, 2, 3


class OutputExists(Exception):
    pass


def _alphas(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty alpha list")
    return vals


def _ks_alpha(text):
    v = float(text)
    if v not in (0.10, 0.05, 0.01):
        raise argparse.ArgumentTypeError("--ks-alpha must be one of 0.10, 0.05, 0.01")
    return v


def _outputs(args, *names):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / n for n in names]
    if not args.overwrite:
        clash = [str(p) for p in paths if p.exists()]
        if clash:
            raise OutputExists(f"refusing to overwrite {', '.join(clash)} (pass --overwrite)")
    return paths


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise ValidationError(f"--{n.replace('_', '-')} is required for {args.command}")


def _summary(n, fit):
    return (f"n={n} gamma={fit.gamma:.6g} r2={fit.r2:.6g} rho={fit.rho:.6g} "
            f"D={fit.d:.6g} D*={fit.d_threshold:.6g}")


def cmd_analyze(args):
    _need(args, "input")
    impact_path, fit_path, ingest_path = _outputs(args, "impact.csv", "fit.json", "ingest.json")
    net, report = netmodel.load_network(args.input, with_report=True)
    _write_text(ingest_path, report.to_json())
    bn = balance(net)
    table = impact_table(bn, compute_U(transition_matrix(bn)))
    table.to_csv(impact_path)
    fit = fit_scaling(table, ks_alpha=args.ks_alpha)
    _write_text(fit_path, fit.to_json())
    print(_summary(net.n_nodes, fit))
    return EXIT_OK


def cmd_backbone(args):
    _need(args, "input")
    (path,) = _outputs(args, "backbone.csv")
    net = netmodel.load_network(args.input)
    points = robustness.backbone_sweep(net, args.alpha, ks_alpha=args.ks_alpha)
    robustness.write_backbone_csv(points, path)
    for p in points:
        status = _summary(p.n_nodes, p.fit) if p.fit else f"failed ({p.error})"
        print(f"alpha={p.alpha:g} edges={p.n_edges} {status}")
    return EXIT_OK if any(p.fit for p in points) else EXIT_ANALYSIS


def cmd_reshuffle(args):
    _need(args, "input")
    (path,) = _outputs(args, "reshuffle.json")
    net = netmodel.load_network(args.input)
    report = robustness.reshuffle_battery(net, args.runs, args.seed, ks_alpha=args.ks_alpha)
    _write_text(path, report.to_json())
    for m in report.modes:
        if m.failed:
            print(f"{m.label}: all {m.runs_failed} runs failed")
        else:
            print(f"{m.label}: ok={m.runs_ok} " + " ".join(
                f"{s}={m.mean[s]:.4g}+-{m.std[s]:.2g}" for s in robustness.STATS))
    if all(m.failed for m in report.modes):
        return EXIT_ANALYSIS
    return EXIT_OK


def cmd_communities(args):
    _need(args, "input", "labels")
    table_path, size_path = _outputs(args, "communities.csv", "community_size_gamma.csv")
    net = netmodel.load_network(args.input)
    labels = netmodel.load_labels(args.labels, net)
    if labels.unknown:
        log.warning("%d labelled node(s) not in network, skipped", len(labels.unknown))
    if labels.unlabeled:
        log.warning("%d node(s) without a label", len(labels.unlabeled))
    rows = community.community_report(net, labels, args.min_sites, ks_alpha=args.ks_alpha)
    community.write_community_csv(rows, table_path)
    community.write_size_gamma_csv(rows, size_path)
    for r in rows:
        status = f"gamma={r.fit.gamma:.6g} r2={r.fit.r2:.6g}" if r.fit else f"skipped: {r.skip_reason}"
        print(f"{r.label}: sites={r.n_sites} edges={r.n_edges} {status}")
    return EXIT_OK


def cmd_layout(args):
    _need(args, "input")
    (path,) = _outputs(args, "layout.json")
    net = netmodel.load_network(args.input)
    if args.labels:
        labels = netmodel.load_labels(args.labels, net)
    else:
        labels = netmodel.LabelMap.from_dict({}, net)
    res = layout.two_level_layout(net, labels, seed=args.seed, iterations=args.iterations)
    _write_text(path, res.to_json())
    print(f"laid out {len(res.node_pos)} sites in {len(res.community_circles)} circles")
    return EXIT_OK


def cmd_simulate(args):
    _need(args, "input")
    (path,) = _outputs(args, "surfer.csv")
    net = netmodel.load_network(args.input)
    bn = balance(net)
    est = surfer_oracle(bn, args.walkers, args.seed)
    est.to_csv(path)
    table = impact_table(bn, compute_U(transition_matrix(bn)))
    se = np.where(est.c_se > 0, est.c_se, np.inf)
    z = np.abs(est.c_hat - table.C) / se
    worst = int(np.argmax(z)) if z.size else 0
    print(f"walkers={args.walkers} seed={args.seed} max|C_hat-C|/se={z.max():.3g} "
          f"(site {est.nodes[worst]})")
    return EXIT_OK


def cmd_synth(args):
    (path,) = _outputs(args, "network.csv")
    net = netmodel.synth_network(args.nodes, args.m, args.seed,
                                 reciprocity=args.reciprocity, sigma=args.sigma)
    netmodel.save_network(net, path)
    print(f"wrote {net.n_nodes} nodes, {net.n_edges} edges to {path}")
    return EXIT_OK


COMMANDS = {
    "analyze": (cmd_analyze, "impact table and scaling fit"),
    "backbone": (cmd_backbone, "scaling fit across backbone thinning levels"),
    "reshuffle": (cmd_reshuffle, "null-model battery over the eight reshuffle modes"),
    "communities": (cmd_communities, "per-community scaling fits"),
    "layout": (cmd_layout, "two-level spring layout coordinates"),
    "simulate": (cmd_simulate, "Monte Carlo random-surfer check of the impacts"),
    "synth": (cmd_synth, "generate a synthetic preferential-attachment network"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="edge-list CSV (src,dst,weight)")
    common.add_argument("--labels", metavar="PATH", help="label CSV (node,label)")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alpha", type=_alphas, default=[1.0, 0.8, 0.6, 0.4, 0.2],
                        metavar="LIST", help="comma-separated backbone levels")
    common.add_argument("--runs", type=int, default=100)
    common.add_argument("--min-sites", type=int, default=3)
    common.add_argument("--ks-alpha", type=_ks_alpha, default=0.10)
    common.add_argument("--walkers", type=int, default=10**6)
    common.add_argument("--iterations", type=int, default=500)
    common.add_argument("--nodes", type=int, default=1000)
    common.add_argument("--m", type=int, default=5)
    common.add_argument("--reciprocity", type=float, default=0.5)
    common.add_argument("--sigma", type=float, default=2.0)
    common.add_argument("--overwrite", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="attnflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    func = COMMANDS[args.command][0]
    try:
        return func(args)
    except (InsufficientDataError, DegenerateFitError) as exc:
        print(f"error: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FileNotFoundError, ValidationError, OutputExists) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AttnflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
