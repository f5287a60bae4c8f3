"""Command line: measure, batch, phantom, validate."""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fileio, phantom, pipeline, render, stats
from .errors import AutocorError
from .imaging import CropRect
from .landmarks import RoiConfig
from .measurement import Limb, PosteriorSide, SideConvention

log = logging.getLogger("autocor")

DEFAULT_OUT = "autocor-out"
EXIT_FAILED = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# configuration: defaults < config file < flags

def _ints(text: str, n: int) -> tuple[int, ...]:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated integers, got {text!r}")
    return tuple(int(p) for p in parts)


def load_config(path=None) -> tuple[pipeline.PipelineConfig, str]:
    """Pipeline settings and output directory from an INI file.

    Sections and keys (all optional)::

        [roi]       condyle_rect = 500,900,224,448
                    shaft_extension = 50
                    cortex_rows = 100,140
                    min_sep = 10
        [bilateral] d, sigma_color, sigma_space
        [kmeans]    k, eps, max_iter, seed
        [canny]     low, high
        [side]      image_left = Right, image_right = Left
        [output]    dir
    """
    cfg = pipeline.PipelineConfig()
    out = DEFAULT_OUT
    if path is None:
        return cfg, out
    ini = configparser.ConfigParser()
    if not ini.read(path, encoding="utf-8"):
        raise FileNotFoundError(f"config file {path} not found")

    def get(section, key, conv, default):
        if ini.has_option(section, key):
            return conv(ini.get(section, key))
        return default

    roi = cfg.roi
    r = roi.condyle_rect
    roi = RoiConfig(
        condyle_rect=CropRect(*get("roi", "condyle_rect", lambda s: _ints(s, 4),
                                   (r.x0, r.x1, r.y0, r.y1))),
        shaft_extension=get("roi", "shaft_extension", int, roi.shaft_extension),
        cortex_rows=get("roi", "cortex_rows", lambda s: _ints(s, 2), roi.cortex_rows),
        min_sep=get("roi", "min_sep", int, roi.min_sep),
    )
    side = SideConvention(
        image_left=get("side", "image_left", Limb, cfg.side_convention.image_left),
        image_right=get("side", "image_right", Limb, cfg.side_convention.image_right),
    )
    cfg = replace(
        cfg, roi=roi, side_convention=side,
        bilateral_d=get("bilateral", "d", int, cfg.bilateral_d),
        sigma_color=get("bilateral", "sigma_color", float, cfg.sigma_color),
        sigma_space=get("bilateral", "sigma_space", float, cfg.sigma_space),
        k=get("kmeans", "k", int, cfg.k),
        eps=get("kmeans", "eps", float, cfg.eps),
        max_iter=get("kmeans", "max_iter", int, cfg.max_iter),
        seed=get("kmeans", "seed", int, cfg.seed),
        canny_low=get("canny", "low", float, cfg.canny_low),
        canny_high=get("canny", "high", float, cfg.canny_high),
    )
    return cfg, get("output", "dir", str, out)


def resolve_config(args) -> tuple[pipeline.PipelineConfig, Path]:
    cfg, out = load_config(args.config)
    roi = cfg.roi
    if getattr(args, "roi", None):
        roi = replace(roi, condyle_rect=CropRect(*_ints(args.roi, 4)))
    if getattr(args, "cortex_rows", None):
        roi = replace(roi, cortex_rows=_ints(args.cortex_rows, 2))
    cfg = replace(cfg, roi=roi)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "canny_low", None) is not None:
        cfg = replace(cfg, canny_low=args.canny_low)
    if getattr(args, "canny_high", None) is not None:
        cfg = replace(cfg, canny_high=args.canny_high)
    return cfg, Path(args.out or out)


# ---------------------------------------------------------------------------
# measure / batch

@dataclass
class ImageRecord:
    filename: str
    status: str                             # "ok" or "failed"
    measurement: dict | None = None
    error: dict | None = None
    elapsed_ms: float = 0.0

    def csv_row(self) -> dict:
        row = {"filename": self.filename, "status": self.status}
        if self.measurement is not None:
            m = self.measurement
            row.update(limb=m["limb"], posterior_side=m["posterior_side"],
                       warnings="; ".join(m["warnings"]))
            for k in ("aco_px", "pco_px", "fd_px", "acor", "pcor"):
                row[k] = fileio.fmt_float(m[k])
        elif self.error is not None:
            row["warnings"] = f"{self.error['stage']}: {self.error['message']}"
        return row


@dataclass
class BatchResult:
    records: list[ImageRecord] = field(default_factory=list)

    @property
    def n_ok(self) -> int:
        return sum(r.status == "ok" for r in self.records)

    @property
    def n_failed(self) -> int:
        return len(self.records) - self.n_ok


def _error_record(stage: str, exc: Exception) -> dict:
    cause = getattr(exc, "cause", exc)
    rec = {"stage": stage, "type": type(cause).__name__, "message": str(cause)}
    row = getattr(cause, "row", None)
    if row is not None:
        rec["row"] = row
    return rec


def process_image(path, cfg: pipeline.PipelineConfig, overlay_dir=None) -> ImageRecord:
    path = Path(path)
    t0 = time.perf_counter()
    try:
        img = fileio.read_image(path)
    except fileio.DecodeError as exc:
        return ImageRecord(path.name, "failed", error=_error_record("decode", exc),
                           elapsed_ms=1e3 * (time.perf_counter() - t0))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = pipeline.run(img, cfg)
    except pipeline.StageError as exc:
        return ImageRecord(path.name, "failed", error=_error_record(exc.stage, exc),
                           elapsed_ms=1e3 * (time.perf_counter() - t0))
    elapsed = 1e3 * (time.perf_counter() - t0)
    if overlay_dir is not None:
        over = render.draw_overlay(img, res.landmarks, res.measurement)
        fileio.write_png(Path(overlay_dir) / f"{path.stem}_overlay.png", over)
    return ImageRecord(path.name, "ok", measurement=res.measurement.to_dict(), elapsed_ms=elapsed)


def _process_star(job):
    return process_image(*job)


def run_batch(paths, cfg: pipeline.PipelineConfig, parallel: int = 1,
              overlay_dir=None) -> BatchResult:
    """Every path gets exactly one record; records are sorted by filename."""
    jobs = [(p, cfg, overlay_dir) for p in paths]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(parallel, len(jobs))) as pool:
            records = list(pool.map(_process_star, jobs))
    else:
        records = [_process_star(j) for j in jobs]
    records.sort(key=lambda r: r.filename)
    return BatchResult(records)


def cmd_measure(args) -> int:
    cfg, out = resolve_config(args)
    fileio.ensure_dir(out)
    rec = process_image(args.image, cfg, overlay_dir=out)
    if rec.status != "ok":
        print(json.dumps({"filename": rec.filename, "status": "failed", **rec.error}),
              file=sys.stderr)
        return EXIT_FAILED
    # the limb label comes from the configured side convention, not from the image
    print(json.dumps({"filename": rec.filename, **rec.measurement, "limb_basis": "side convention",
                      "elapsed_ms": round(rec.elapsed_ms, 1)}, indent=2))
    return 0


def cmd_batch(args) -> int:
    cfg, out = resolve_config(args)
    fileio.ensure_dir(out)
    paths = fileio.list_images(args.directory)
    if not paths:
        log.warning("no PNG/JPEG images in %s; writing an empty CSV", args.directory)
    overlay_dir = fileio.ensure_dir(out / "overlays") if args.overlays else None
    result = run_batch(paths, cfg, args.parallel, overlay_dir)
    csv_path = out / "results.csv"
    fileio.write_csv(csv_path, [r.csv_row() for r in result.records])
    print(f"{len(result.records)} images: {result.n_ok} ok, {result.n_failed} failed -> {csv_path}",
          file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# phantom / validate

def truth_row(name: str, truth: phantom.PhantomTruth, conv: SideConvention) -> dict:
    return {
        "filename": name,
        "limb": conv.limb(truth.posterior_side).value,
        "posterior_side": truth.posterior_side.value,
        "aco_px": fileio.fmt_float(truth.aco_px),
        "pco_px": fileio.fmt_float(truth.pco_px),
        "fd_px": fileio.fmt_float(truth.fd_px),
        "acor": fileio.fmt_float(truth.acor),
        "pcor": fileio.fmt_float(truth.pcor),
        "warnings": "",
        "status": "ok",
    }


def cmd_phantom(args) -> int:
    out = fileio.ensure_dir(args.out or DEFAULT_OUT)
    seed = 0 if args.seed is None else args.seed
    base = phantom.PhantomSpec(noise_sigma=args.noise, seed=seed)
    if args.pcor is not None or args.acor is not None:
        side = PosteriorSide(args.side)
        specs = [replace(base, pcor=args.pcor if args.pcor is not None else base.pcor,
                         acor=args.acor if args.acor is not None else base.acor,
                         fd_px=args.fd, shaft_tilt_deg=args.tilt, posterior_side=side)]
    else:
        ranges = phantom.SweepRanges(n_pcor=args.n_pcor, n_acor=args.n_acor,
                                     noise_sigma=args.noise, base=base)
        specs = phantom.sweep_specs(ranges, seed)
    width = max(4, len(str(len(specs) - 1)))
    conv = SideConvention()
    rows = []
    for i, spec in enumerate(specs):
        img, truth = phantom.generate(spec)
        name = f"phantom_{i:0{width}d}.png"
        fileio.write_png(out / name, img)
        fileio.write_json(out / f"phantom_{i:0{width}d}.json",
                          {"truth": truth.to_dict(), "spec": phantom.spec_to_dict(spec)})
        rows.append(truth_row(name, truth, conv))
    fileio.write_csv(out / "truth.csv", rows)
    print(f"{len(specs)} phantoms -> {out}", file=sys.stderr)
    return 0


def validation_report(pred_rows, truth_rows, bins=None) -> dict[str, stats.AgreementReport]:
    cols = ("acor", "pcor")
    pred = fileio.keyed_columns(pred_rows, cols, source="predictions")
    truth = fileio.keyed_columns(truth_rows, cols, source="truth")
    if len(pred) != len(pred_rows):
        # failed images carry no ratios; compare on what both files measured
        truth = {k: v for k, v in truth.items() if k in pred}
    keys = fileio.align(pred, truth)
    out = {}
    for c in cols:
        pair = stats.paired_from_columns([pred[k][c] for k in keys], [truth[k][c] for k in keys],
                                         c.upper())
        out[c] = stats.agreement_report(pair, bins=bins)
    return out


def cmd_validate(args) -> int:
    out = fileio.ensure_dir(args.out or DEFAULT_OUT)
    reports = validation_report(fileio.read_csv(args.pred), fileio.read_csv(args.truth), args.bins)
    doc = {}
    for name, rep in reports.items():
        doc[name] = rep.to_dict()
        label = name.upper()
        model = np.array(rep.bland_altman.means + 0.5 * rep.bland_altman.diffs)
        truth = np.array(rep.bland_altman.means - 0.5 * rep.bland_altman.diffs)
        render.plot_scatter(out / f"{name}_scatter.svg", model, truth, label)
        render.plot_histogram(out / f"{name}_diff_hist.svg", rep.hist_counts, rep.hist_edges, label)
        render.plot_bland_altman(out / f"{name}_bland_altman.svg", rep.bland_altman, label)
        c = rep.to_dict()["correlation"]
        print(f"{label}: n={rep.model.n} {c['method']} {c['coefficient']:.4f} (p={c['p']:.3g}), "
              f"mean diff {rep.bland_altman.mean_diff:+.4f}", file=sys.stderr)
    fileio.write_json(out / "report.json", doc)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; flags override it")
    common.add_argument("--seed", type=int, help="k-means / phantom seed")
    common.add_argument("--out", help=f"output directory (default {DEFAULT_OUT})")
    common.add_argument("-v", "--verbose", action="store_true")

    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--canny-low", type=float)
    pipe.add_argument("--canny-high", type=float)
    pipe.add_argument("--roi", help="condyle crop x0,x1,y0,y1")
    pipe.add_argument("--cortex-rows", help="two shaft-patch rows r1,r2")

    p = argparse.ArgumentParser(prog="autocor", description="Condylar offset ratios from lateral knee radiographs.")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common, pipe], help="measure one image")
    m.add_argument("image")
    m.set_defaults(func=cmd_measure)

    b = sub.add_parser("batch", parents=[common, pipe], help="measure every image in a directory")
    b.add_argument("directory")
    b.add_argument("--parallel", type=int, default=1)
    b.add_argument("--overlays", action="store_true", help="also write overlay PNGs")
    b.set_defaults(func=cmd_batch)

    ph = sub.add_parser("phantom", parents=[common], help="write synthetic radiographs with truth")
    ph.add_argument("--n-pcor", type=int, default=20)
    ph.add_argument("--n-acor", type=int, default=10)
    ph.add_argument("--noise", type=float, default=8.0)
    ph.add_argument("--pcor", type=float, help="single phantom instead of a grid")
    ph.add_argument("--acor", type=float)
    ph.add_argument("--fd", type=float, default=100.0)
    ph.add_argument("--tilt", type=float, default=0.0)
    ph.add_argument("--side", choices=[s.value for s in PosteriorSide],
                    default=PosteriorSide.IMAGE_LEFT.value)
    ph.set_defaults(func=cmd_phantom)

    v = sub.add_parser("validate", parents=[common], help="agreement statistics and plots")
    v.add_argument("--pred", required=True)
    v.add_argument("--truth", required=True)
    v.add_argument("--bins", type=int)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (AutocorError, OSError, ValueError) as exc:
        print(f"autocor {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, (OSError, ValueError)) else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
