"""lfdepth command line: run, synth, bench, recv."""
import argparse
import sys
from pathlib import Path

import numpy as np

from lfdepth import _backend, pipeline, stream, synthgen
from lfdepth import io as lfio


def _build_parser():
    parser = argparse.ArgumentParser(prog="lfdepth",
                                     description="Light field depth estimation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process one frame and write disparity/depth maps")
    run.add_argument("--config", required=True, help="key=value config file")
    run.add_argument("--input", help="input directory or scene spec (overrides config)")
    run.add_argument("--out", help="output directory (overrides config)")
    run.add_argument("--lambda", dest="lam", type=int, help="search bound dilation")
    run.add_argument("--p1", type=int, help="small-step SGM penalty")
    run.add_argument("--p2", type=int, help="jump SGM penalty")
    run.add_argument("--range", dest="z_range", metavar="MIN:MAX",
                     help="depth filter range in meters")
    run.add_argument("--stream", metavar="HOST:PORT", help="push the depth frame over TCP")
    run.add_argument("--debug-dump", action="store_true", help="write intermediate images")

    synth = sub.add_parser("synth", help="render a synthetic light field to view files")
    synth.add_argument("--spec", required=True, help="scene spec file")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--bayer", metavar="PATTERN",
                       help="write Bayer mosaics (RGGB/BGGR/GRBG/GBRG) instead of grayscale")

    bench = sub.add_parser("bench", help="time the pipeline per stage and kernel backend")
    bench.add_argument("--config", required=True)
    bench.add_argument("--frames", type=int, default=5)
    bench.add_argument("--backend", choices=("both", "compiled", "python"), default="both")

    recv = sub.add_parser("recv", help="receive streamed frames and write them as PFM")
    recv.add_argument("address", metavar="HOST:PORT")
    recv.add_argument("--out", required=True)
    recv.add_argument("--count", type=int, help="stop after this many frames")
    return parser


def _apply_overrides(cfg, args):
    if args.input:
        cfg.input_path = args.input
    if args.out:
        cfg.out_dir = args.out
    if args.lam is not None:
        cfg.lam = args.lam
    if args.p1 is not None:
        cfg.p1 = args.p1
    if args.p2 is not None:
        cfg.p2 = args.p2
    if args.z_range:
        zmin, zmax = (float(x) for x in args.z_range.split(":"))
        cfg.z_min, cfg.z_max = zmin, zmax
    if args.stream:
        cfg.stream_to = args.stream
    if args.debug_dump:
        cfg.debug_dump = True
    return cfg


def _cmd_run(args):
    cfg = _apply_overrides(pipeline.load_config(args.config), args)
    result = pipeline.run_pipeline(cfg)
    print(pipeline.format_report(result.report))
    for path in result.written:
        print(f"wrote {path}")
    return 0


def _cmd_synth(args):
    spec = synthgen.parse_scene_spec(Path(args.spec).read_text(),
                                     base_dir=Path(args.spec).parent)
    lf, gt = synthgen.render_lightfield(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.bayer:
        rows, cols = lf.grid_rows, lf.grid_cols
        for t in range(rows):
            for s in range(cols):
                gray = lf.views[t, s]
                rgb = np.repeat(gray[:, :, None], 3, axis=2)
                mosaic = synthgen.mosaic_from_rgb(rgb, args.bayer)
                lfio.write_pgm(out / f"view_{t}_{s}.pgm", mosaic)
    else:
        lfio.save_view_grid(out, lf.views)
    lfio.write_pfm(out / "gt_disparity.pfm", gt)
    print(f"wrote {lf.grid_rows * lf.grid_cols} views and gt_disparity.pfm to {out}")
    return 0


def _cmd_bench(args):
    cfg = pipeline.load_config(args.config)
    if args.backend == "both":
        backends = ["compiled", "python"] if _backend.compiled_available() else ["python"]
    else:
        if args.backend == "compiled" and not _backend.compiled_available():
            print("compiled backend not available", file=sys.stderr)
            return 2
        backends = [args.backend]
    results = pipeline.run_bench(cfg, frames=args.frames, backends=backends)
    means = {}
    for backend in backends:
        mean = pipeline.mean_report(results[backend])
        means[backend] = mean
        print(f"--- backend: {backend} (mean over {args.frames} frames) ---")
        print(pipeline.format_report(mean))
        print()
    if len(backends) == 2:
        a, b = means["python"], means["compiled"]
        depth_a = a.depth_initial_ms + a.depth_final_ms
        depth_b = b.depth_initial_ms + b.depth_final_ms
        if depth_b > 0:
            print(f"compiled speedup on depth stages: {depth_a / depth_b:.2f}x")
    print("note: times are wall-clock on this machine; absolute figures depend on")
    print("hardware and are not comparison targets, only the stage trends are.")
    return 0


def _cmd_recv(args):
    host, port = args.address.rsplit(":", 1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kinds = {stream.KIND_DISPARITY: "disparity", stream.KIND_DEPTH: "depth",
             stream.KIND_GRAY: "gray"}
    n = 0
    for msg in stream.receive_frames(host, int(port), limit=args.count):
        name = f"frame_{msg.frame_id:06d}_{kinds[msg.kind]}.pfm"
        lfio.write_pfm(out / name, msg.payload.astype(np.float32))
        n += 1
    print(f"received {n} frames into {out}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "synth": _cmd_synth, "bench": _cmd_bench, "recv": _cmd_recv}
    try:
        return handlers[args.command](args)
    except pipeline.PipelineError as exc:
        print(f"lfdepth: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, stream.ProtocolError) as exc:
        print(f"lfdepth: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
