"""End-to-end pipeline: raw views to filtered metric depth, with timing.

Stages mirror the processing chain: load (or render) the view grid,
preprocess raw mosaics into rectified grayscale views, build the coarse
disparity and per-pixel search bounds from the four cross views, run the
bounded multi-view aggregation + SGM + winner-takes-all, convert to metric
depth and filter to the target range. Every stage is wall-clock timed and
failures carry the stage name.
"""
import time
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from lfdepth import cost as cost_mod
from lfdepth import depthmap, preprocess, rectify, sgm, stream, synthgen
from lfdepth import io as lfio
from lfdepth.census import census_transform
from lfdepth.core import CameraGeometry

MODES = ("synthetic-spec", "rectified-views", "bayer-mosaic-grid")


class PipelineError(RuntimeError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage[{stage}]: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    mode: str = "synthetic-spec"
    input_path: str = ""
    out_dir: str = "out"
    grid_rows: int = 4
    grid_cols: int = 4
    ref_s: int = 1
    ref_t: int = 1
    bayer_pattern: str = "RGGB"
    gamma: str = "auto"  # "auto" or a fixed positive value as text
    remap_path: str = "identity"
    d_min: int = 0
    d_max: int = 16
    lam: int = 2
    bound_window: int = 5
    p1: int = 6
    p2: int = 96
    directions: int = 8
    census_radius: int = 1
    focal_px: float = 700.0
    baseline_m: float = 0.04
    z_min: float = 0.5
    z_max: float = 2.0
    stream_to: str = "off"
    stream_linger_s: float = 1.0
    debug_dump: bool = False
    cross_mode: str = "extreme"
    min_valid_views: int = 4
    coarse_min_valid: int = 2
    exhaustive: bool = False
    overlap: bool = False

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.input_path:
            raise ValueError("input path is required")
        if not Path(self.input_path).exists():
            raise ValueError(f"input path {self.input_path!r} does not exist")
        if self.d_min >= self.d_max:
            raise ValueError(f"disparity range [{self.d_min}, {self.d_max}] is empty")
        if self.gamma != "auto" and float(self.gamma) <= 0:
            raise ValueError(f"fixed gamma must be positive, got {self.gamma}")
        if self.directions not in (4, 8):
            raise ValueError("directions must deliver 4 or 8 paths")
        if self.remap_path not in ("", "identity") and not Path(self.remap_path).exists():
            raise ValueError(f"remap table {self.remap_path!r} does not exist")
        return self

    def geometry(self):
        span = max(self.grid_rows, self.grid_cols) - 1
        return CameraGeometry(focal_px=self.focal_px, baseline_m=self.baseline_m,
                              axis_span=span)

    def sgm_params(self):
        dirs = sgm.DIRECTIONS_8 if self.directions == 8 else sgm.DIRECTIONS_4
        return sgm.SgmParams(p1=self.p1, p2=self.p2, directions=dirs)


_KEY_ALIASES = {
    "input": "input_path",
    "out": "out_dir",
    "lambda": "lam",
    "remap": "remap_path",
    "stream": "stream_to",
    "pattern": "bayer_pattern",
}
_BOOL_KEYS = {"debug_dump", "exhaustive", "overlap"}


def parse_config(text):
    """Parse the key=value config format (one pair per line, # comments)."""
    cfg = PipelineConfig()
    typed = {f.name: f.type for f in dc_fields(PipelineConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = _KEY_ALIASES.get(key, key)
        if key == "grid":
            rows, cols = (int(x) for x in value.lower().split("x"))
            cfg.grid_rows, cfg.grid_cols = rows, cols
            continue
        if key == "ref":
            cfg.ref_s, cfg.ref_t = (int(x) for x in value.split(","))
            continue
        if key == "range":
            zmin, zmax = (float(x) for x in value.split(":"))
            cfg.z_min, cfg.z_max = zmin, zmax
            continue
        if key not in typed:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in _BOOL_KEYS:
            setattr(cfg, key, value.lower() in ("1", "true", "yes", "on"))
        else:
            current = getattr(cfg, key)
            caster = type(current) if not isinstance(current, str) else str
            setattr(cfg, key, caster(value))
    return cfg


def load_config(path):
    return parse_config(Path(path).read_text())


@dataclass
class TimingReport:
    """Per-stage wall-clock milliseconds plus search-work counters."""

    capture_ms: float = 0.0
    preprocess_ms: float = 0.0
    depth_initial_ms: float = 0.0
    depth_final_ms: float = 0.0
    send_ms: float = 0.0
    evaluated_triples: int = 0
    exhaustive_triples: int = 0

    @property
    def total_ms(self):
        return (self.capture_ms + self.preprocess_ms + self.depth_initial_ms
                + self.depth_final_ms + self.send_ms)


_STAGE_LABELS = (
    ("capture/load", "capture_ms"),
    ("preprocessing", "preprocess_ms"),
    ("depth (initial)", "depth_initial_ms"),
    ("depth (final)", "depth_final_ms"),
    ("sending", "send_ms"),
)


def format_report(report):
    """Human-readable stage table followed by a machine-readable dump."""
    lines = [f"{'stage':<18}{'time':>12}"]
    for label, attr in _STAGE_LABELS:
        lines.append(f"{label:<18}{getattr(report, attr):>9.1f} ms")
    lines.append(f"{'total':<18}{report.total_ms:>9.1f} ms")
    if report.exhaustive_triples:
        ratio = report.exhaustive_triples / max(report.evaluated_triples, 1)
        lines.append(
            f"evaluated hypotheses: {report.evaluated_triples} "
            f"(exhaustive would be {report.exhaustive_triples}, {ratio:.2f}x reduction)"
        )
    lines.append("")
    lines.append(report_kv(report))
    return "\n".join(lines)


def report_kv(report):
    pairs = []
    for f in dc_fields(TimingReport):
        value = getattr(report, f.name)
        pairs.append(f"{f.name}={value:.3f}" if isinstance(value, float) else f"{f.name}={value}")
    pairs.append(f"total_ms={report.total_ms:.3f}")
    return "\n".join(pairs)


def parse_report_kv(text):
    values = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or "=" not in line:
            continue
        key, value = line.split("=", 1)
        values[key] = value
    kwargs = {}
    for f in dc_fields(TimingReport):
        if f.name in values:
            caster = int if f.type is int else float
            kwargs[f.name] = caster(values[f.name])
    return TimingReport(**kwargs)


class _StageTimer:
    def __init__(self):
        self.ms = {}

    def run(self, name, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, exc) from exc
        self.ms[name] = self.ms.get(name, 0.0) + (time.perf_counter() - start) * 1e3
        return result


@dataclass
class PipelineResult:
    disparity: np.ndarray
    depth: np.ndarray
    report: TimingReport
    written: list = field(default_factory=list)
    ground_truth: np.ndarray = None


def _load_stage(config):
    gt = None
    if config.mode == "synthetic-spec":
        spec = synthgen.parse_scene_spec(Path(config.input_path).read_text(),
                                         base_dir=Path(config.input_path).parent)
        lf, gt = synthgen.render_lightfield(spec)
        raw = lf.views
        if (lf.grid_rows, lf.grid_cols) != (config.grid_rows, config.grid_cols):
            config.grid_rows, config.grid_cols = lf.grid_rows, lf.grid_cols
        config.ref_s, config.ref_t = lf.ref_s, lf.ref_t
    else:
        raw = lfio.load_view_grid(config.input_path, config.grid_rows, config.grid_cols)
    return raw, gt


def _preprocess_stage(config, raw):
    if config.mode == "bayer-mosaic-grid":
        rows, cols = raw.shape[:2]
        views = None
        for t in range(rows):
            for s in range(cols):
                rgb = preprocess.debayer(raw[t, s], config.bayer_pattern)
                g = preprocess.auto_gamma(rgb) if config.gamma == "auto" else float(config.gamma)
                rgb = preprocess.apply_gamma(rgb, g)
                gray = preprocess.to_grayscale(rgb)
                if views is None:
                    views = np.empty((rows, cols) + gray.shape, dtype=np.uint8)
                views[t, s] = gray
    else:
        views = raw
    if config.remap_path not in ("", "identity"):
        table = lfio.read_remap(config.remap_path)
        views, _ = rectify.rectify_lightfield(views, table)
    return views


def _initial_stage(config, views):
    rows, cols = views.shape[:2]
    fields_grid = [
        [census_transform(views[t, s], config.census_radius) for s in range(cols)]
        for t in range(rows)
    ]
    coarse = None
    bounds = None
    if not config.exhaustive:
        coarse, _ = cost_mod.coarse_disparity(
            fields_grid, config.ref_s, config.ref_t, config.d_min, config.d_max,
            mode=config.cross_mode, min_valid_views=config.coarse_min_valid,
        )
        bounds = cost_mod.disparity_bounds(coarse, config.lam, config.d_min,
                                           config.d_max, window=config.bound_window)
    return fields_grid, bounds, coarse


def _final_stage(config, fields_grid, bounds):
    volume = cost_mod.aggregate_cost(
        fields_grid, config.ref_s, config.ref_t, config.d_min, config.d_max,
        bounds=bounds, min_valid_views=config.min_valid_views,
    )
    summed = sgm.sgm_sum(volume, config.sgm_params())
    disparity = sgm.wta(volume, summed)
    depth = depthmap.range_filter(
        depthmap.disparity_to_depth(disparity, config.geometry()),
        config.z_min, config.z_max,
    )
    return disparity, depth, volume


def run_pipeline(config, write_outputs=True, frame_id=0, server=None):
    """Process one frame; returns a PipelineResult.

    When config.stream_to is set (host:port), the depth frame is pushed to
    connected clients; pass an existing DepthStreamServer as server to reuse
    one across frames. Output files are removed again if a later stage
    fails.
    """
    config.validate()
    timer = _StageTimer()
    written = []
    own_server = None
    try:
        if config.stream_to not in ("", "off") and server is None:
            host, port = config.stream_to.rsplit(":", 1)
            own_server = stream.DepthStreamServer(host=host, port=int(port))
            server = own_server
            time.sleep(config.stream_linger_s)  # give clients a window to attach

        raw, gt = timer.run("load", lambda: _load_stage(config))
        views = timer.run("preprocess", lambda: _preprocess_stage(config, raw))
        fields_grid, bounds, coarse = timer.run(
            "depth-initial", lambda: _initial_stage(config, views))
        disparity, depth, volume = timer.run(
            "depth-final", lambda: _final_stage(config, fields_grid, bounds))

        if server is not None:
            timer.run("send", lambda: server.publish(
                depth, frame_id=frame_id, timestamp_us=int(time.time() * 1e6),
                kind=stream.KIND_DEPTH))

        if write_outputs:
            def write_all():
                out = Path(config.out_dir)
                out.mkdir(parents=True, exist_ok=True)
                for name, data in (("disparity.pfm", disparity), ("depth.pfm", depth)):
                    path = out / name
                    lfio.write_pfm(path, data)
                    written.append(path)
                if gt is not None:
                    path = out / "gt_disparity.pfm"
                    lfio.write_pfm(path, gt)
                    written.append(path)
                if config.debug_dump:
                    dbg = out / "debug"
                    dbg.mkdir(exist_ok=True)
                    rows, cols = views.shape[:2]
                    for t in range(rows):
                        for s in range(cols):
                            path = dbg / f"view_{t}_{s}.pgm"
                            lfio.write_pgm(path, views[t, s])
                            written.append(path)
                    if coarse is not None:
                        path = dbg / "coarse.pfm"
                        lfio.write_pfm(path, coarse)
                        written.append(path)

            timer.run("write", write_all)

        h, w = disparity.shape
        v_total = views.shape[0] * views.shape[1] - 1
        ndisp = config.d_max - config.d_min + 1
        report = TimingReport(
            capture_ms=timer.ms.get("load", 0.0),
            preprocess_ms=timer.ms.get("preprocess", 0.0),
            depth_initial_ms=timer.ms.get("depth-initial", 0.0),
            depth_final_ms=timer.ms.get("depth-final", 0.0),
            send_ms=timer.ms.get("send", 0.0),
            evaluated_triples=volume.evaluated_triples,
            exhaustive_triples=h * w * ndisp * v_total,
        )
        return PipelineResult(disparity=disparity, depth=depth, report=report,
                              written=written, ground_truth=gt)
    except Exception:
        for path in written:
            try:
                Path(path).unlink()
            except OSError:
                pass
        raise
    finally:
        if own_server is not None:
            own_server.flush_and_close()


def run_bench(config, frames=5, backends=None):
    """Time the pipeline over several frames, per kernel backend.

    Returns {backend: [TimingReport, ...]}. With config.overlap, frame k+1
    is loaded and preprocessed while frame k runs its depth stages, matching
    a capture thread feeding a compute thread.
    """
    from concurrent.futures import ThreadPoolExecutor

    from lfdepth import _backend

    config.validate()
    if backends is None:
        backends = ["compiled", "python"] if _backend.compiled_available() else ["python"]
    results = {}
    for backend in backends:
        previous = _backend.use_backend(backend)
        try:
            reports = []
            if config.overlap:
                with ThreadPoolExecutor(max_workers=1) as pool:
                    def prepare():
                        timer = _StageTimer()
                        raw, _ = timer.run("load", lambda: _load_stage(config))
                        views = timer.run("preprocess",
                                          lambda: _preprocess_stage(config, raw))
                        return views, timer
                    pending = pool.submit(prepare)
                    for k in range(frames):
                        views, timer = pending.result()
                        if k + 1 < frames:
                            pending = pool.submit(prepare)
                        fields_grid, bounds, _ = timer.run(
                            "depth-initial", lambda: _initial_stage(config, views))
                        _, _, volume = timer.run(
                            "depth-final", lambda: _final_stage(config, fields_grid, bounds))
                        reports.append(_report_from_timer(timer, config, views, volume))
            else:
                for k in range(frames):
                    result = run_pipeline(config, write_outputs=False)
                    reports.append(result.report)
            results[backend] = reports
        finally:
            _backend.use_backend(previous)
    return results


def _report_from_timer(timer, config, views, volume):
    h, w = views.shape[2:]
    v_total = views.shape[0] * views.shape[1] - 1
    ndisp = config.d_max - config.d_min + 1
    return TimingReport(
        capture_ms=timer.ms.get("load", 0.0),
        preprocess_ms=timer.ms.get("preprocess", 0.0),
        depth_initial_ms=timer.ms.get("depth-initial", 0.0),
        depth_final_ms=timer.ms.get("depth-final", 0.0),
        send_ms=timer.ms.get("send", 0.0),
        evaluated_triples=volume.evaluated_triples,
        exhaustive_triples=h * w * ndisp * v_total,
    )


def mean_report(reports):
    n = max(len(reports), 1)
    return TimingReport(
        capture_ms=sum(r.capture_ms for r in reports) / n,
        preprocess_ms=sum(r.preprocess_ms for r in reports) / n,
        depth_initial_ms=sum(r.depth_initial_ms for r in reports) / n,
        depth_final_ms=sum(r.depth_final_ms for r in reports) / n,
        send_ms=sum(r.send_ms for r in reports) / n,
        evaluated_triples=reports[-1].evaluated_triples if reports else 0,
        exhaustive_triples=reports[-1].exhaustive_triples if reports else 0,
    )
