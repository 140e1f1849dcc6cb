"""Command line entry point: ``ogmmerge <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import OgmMergeError
from .icp import IcpParams
from .lines import RansacParams, extract_lines
from .mapio import load_map, save_map
from .merge import MergeConfig, apply_solution, merge_maps_end_to_end, map_ogm_vector
from .ogm_vector import classify_groups
from .render import METHOD_COLORS, field_gray, line_layers, overlay, save_pgm, save_png
from .rfid import TagLocalizer, read_readings, write_readings

log = logging.getLogger("ogmmerge")

LINE_COLOR = (230, 120, 0)
GROUP_COLORS = ((30, 170, 30), (220, 30, 30))


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _scale(meters, resolution, origin=(0.0, 0.0)):
    """Cell -> output unit converter for ``--meters``."""
    if not meters:
        return lambda x, y: (x, y)
    return lambda x, y: (origin[0] + x * resolution, origin[1] + y * resolution)


def _merge_config(args):
    cfg = {}
    if getattr(args, "config", None):
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    ransac = dict(cfg.get("ransac", {}))
    if getattr(args, "seed", None) is not None:
        ransac["seed"] = args.seed
    ransac = RansacParams(**ransac)
    return MergeConfig(ransac=ransac, icp=IcpParams(**cfg.get("icp", {})),
                       weighting=cfg.get("weighting", "reliability"),
                       blur=not getattr(args, "no_blur", False))


def cmd_simulate(args):
    from .sim import corridor_scenario, simulate_pair

    scenario = corridor_scenario(args.seed, args.rotation, range_bias_sigma=args.bias)
    data = simulate_pair(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for d in data:
        save_map(out / f"{d.run.name}.yaml", d.bundle())
        write_readings(out / f"{d.run.name}.readings.jsonl", d.readings)
    truth = scenario.true_transform(*data)
    _dump({"seed": args.seed, "true_transform": {"rotation_deg": truth.degrees, "translation": list(truth.t)},
           "maps": [str(out / f"{d.run.name}.yaml") for d in data]}, out / "truth.json")
    print(f"wrote {out}")
    return 0


def cmd_merge(args):
    b1, b2 = load_map(args.map1), load_map(args.map2)
    config = _merge_config(args)
    merged, report = merge_maps_end_to_end(b1, b2, args.method, config)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    save_map(prefix.with_suffix(".yaml"), merged)
    _dump(report.to_json(), prefix.with_suffix(".report.json"))
    if args.dump_iterations:
        history = report.icp.history if report.icp is not None else ()
        with open(args.dump_iterations, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "mse"])
            w.writerows(enumerate(history))
    if args.before_after:
        raw = apply_solution(b1, b2, report.solution, blur=False)
        save_png(f"{prefix}.before.png", overlay(raw.occupancy, []))
        save_png(f"{prefix}.after.png", overlay(merged.occupancy, []))
    _dump(report.to_json())
    return 0


def cmd_bench(args):
    from .sim import corridor_scenario, run_experiment_suite, simulate_pair

    cfg = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    suite = {"seeds": list(range(args.seed, args.seed + args.pairs)), "ogm_runs": args.ogm_runs,
             "localization_seeds": args.localization_seeds, **cfg.get("suite", {})}
    bias = cfg.get("range_bias_sigma", args.bias)
    merge_config = _merge_config(argparse.Namespace(config=args.config, seed=None, no_blur=False))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suite["range_bias_sigma"] = bias
    report = run_experiment_suite(suite, merge_config)
    _dump(report.to_json(), out / "report.json")
    with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "method", "mse_px2", "rotation_error_deg", "elapsed_ms"])
        for pair in report.pairs:
            for m, r in sorted(pair.methods.items()):
                w.writerow([pair.seed, m, f"{r.mse:.6f}", f"{r.rotation_error:.6f}", f"{r.elapsed_ms:.3f}"])
    for pair in report.pairs:
        scenario = corridor_scenario(pair.seed, suite.get("rotation_deg"), range_bias_sigma=bias)
        d1, d2 = simulate_pair(scenario)
        pts = d2.grid.occupied_points()
        layers = [(r.solution.transform().apply(pts), METHOD_COLORS[m]) for m, r in sorted(pair.methods.items())]
        save_png(out / f"overlay_seed{pair.seed}.png", overlay(d1.grid, layers))
    print(json.dumps(report.to_json()["methods"], indent=2))
    return 0


def cmd_localize(args):
    readings = read_readings(args.readings)
    localizer = TagLocalizer(args.robot, args.resolution).observe_all(readings)
    conv = _scale(args.meters, args.resolution)
    out = []
    for est in localizer.estimates():
        x, y = conv(*est.map_pose)
        out.append({**est.to_json(), "x": x, "y": y, "units": "m" if args.meters else "cells"})
        if args.heatmap_dir:
            Path(args.heatmap_dir).mkdir(parents=True, exist_ok=True)
            save_pgm(Path(args.heatmap_dir) / f"tag{est.tag_id}.pgm", field_gray(localizer.fields[est.tag_id].values))
    _dump(out, args.out)
    return 0


def cmd_extract_lines(args):
    bundle = load_map(args.map)
    grid = bundle.occupancy
    lines = extract_lines(grid, RansacParams(seed=args.seed))
    conv = _scale(args.meters, grid.resolution, grid.origin)
    out = []
    for line in lines:
        rec = line.to_json()
        rec["x1"], rec["y1"] = conv(rec["x1"], rec["y1"])
        rec["x2"], rec["y2"] = conv(rec["x2"], rec["y2"])
        if args.meters:
            rec["length"] = rec["length"] * grid.resolution
        out.append(rec)
    if args.overlay:
        save_png(args.overlay, overlay(grid, line_layers(lines, [LINE_COLOR] * len(lines))))
    _dump(out, args.out)
    return 0


def cmd_ogm_vector(args):
    bundle = load_map(args.map)
    config = MergeConfig(ransac=RansacParams(seed=args.seed), weighting=args.weighting)
    lines, vector = map_ogm_vector(bundle.occupancy, config)
    if args.overlay:
        groups = classify_groups(lines)
        colors = {g.index: GROUP_COLORS[0] for g in groups.g1}
        colors.update({g.index: GROUP_COLORS[1] for g in groups.g2})
        layers = line_layers(lines, [colors[i] for i in range(len(lines))])
        save_png(args.overlay, overlay(bundle.occupancy, layers))
    _dump({**vector.to_json(), "n_lines": len(lines)}, args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ogmmerge", description="Occupancy grid merging with RFID tags.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a two-robot scenario and write map bundles")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--rotation", type=float, default=None, help="robot 2 rotation in degrees (default random)")
    s.add_argument("--bias", type=float, default=0.05, help="per-tag range bias spread in meters")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("merge", help="merge map 2 into map 1")
    s.add_argument("map1")
    s.add_argument("map2")
    s.add_argument("--method", type=int, choices=(1, 2, 3), default=3)
    s.add_argument("--no-blur", action="store_true", help="skip the conditional blur")
    s.add_argument("--dump-iterations", metavar="CSV", help="write ICP per-iteration error")
    s.add_argument("--before-after", action="store_true", help="write PNGs before and after the blur")
    s.add_argument("--config", help="JSON with ransac / icp / weighting overrides")
    s.add_argument("--seed", type=int, default=None, help="RANSAC seed")
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(func=cmd_merge)

    s = sub.add_parser("bench", help="run the seeded experiment suite")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--pairs", type=int, default=5)
    s.add_argument("--ogm-runs", type=int, default=200)
    s.add_argument("--localization-seeds", type=int, default=10)
    s.add_argument("--bias", type=float, default=0.05)
    s.add_argument("--config", help="JSON document with suite / ransac / icp settings")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("localize", help="localize tags from a JSON-lines reading stream")
    s.add_argument("readings")
    s.add_argument("--robot", default="")
    s.add_argument("--resolution", type=float, default=0.02)
    s.add_argument("--meters", action="store_true")
    s.add_argument("--heatmap-dir")
    s.add_argument("--out")
    s.set_defaults(func=cmd_localize)

    s = sub.add_parser("extract-lines", help="RANSAC wall lines of a map")
    s.add_argument("map")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--meters", action="store_true")
    s.add_argument("--overlay", metavar="PNG", help="draw the lines over the map")
    s.add_argument("--out")
    s.set_defaults(func=cmd_extract_lines)

    s = sub.add_parser("ogm-vector", help="OGM direction vector of a map")
    s.add_argument("map")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weighting", choices=("reliability", "complement"), default="reliability")
    s.add_argument("--overlay", metavar="PNG", help="draw both line groups over the map (G1 green, G2 red)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_ogm_vector)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OgmMergeError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
