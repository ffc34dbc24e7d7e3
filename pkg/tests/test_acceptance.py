"""Acceptance suite: every exit criterion, one pass/fail line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""
import threading
import time

import numpy as np
import pytest

from lfdepth import cli, cost, pipeline, sgm, stream
from lfdepth.census import census_transform, hamming
from lfdepth.core import CameraGeometry
from lfdepth.depthmap import disparity_to_depth
from lfdepth.io import read_pfm, read_pgm, write_pfm, write_pgm, write_remap
from lfdepth.preprocess import apply_gamma, auto_gamma, debayer
from lfdepth.rectify import identity_remap
from lfdepth.synthgen import mosaic_from_rgb
from tests.conftest import census_grid, render_plane, render_two_plane
from tests.test_sgm import make_volume, oracle_path


def _criterion(n, label, ok, detail=""):
    print(f"\nacceptance {n} [{label}]: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {n} ({label}) failed: {detail}"


def test_criterion_1_synthetic_accuracy(tmp_path):
    details = []
    ok = True
    for dstar in (3, 7, 12):
        spec = tmp_path / f"plane{dstar}.txt"
        spec.write_text(f"size = 256x256\nlayer = seed:7 d:{dstar}\n")
        cfg = pipeline.PipelineConfig(
            mode="synthetic-spec", input_path=str(spec),
            out_dir=str(tmp_path / f"out{dstar}"), d_min=0, d_max=16,
        )
        start = time.perf_counter()
        result = pipeline.run_pipeline(cfg, write_outputs=False)
        elapsed = time.perf_counter() - start
        scored = result.disparity[8:-8, 8:-8]
        frac = float(np.mean(np.abs(scored - dstar) <= 0.5))
        details.append(f"d*={dstar}: {frac:.4f} in {elapsed:.2f}s")
        ok = ok and frac >= 0.95 and elapsed < 10.0
    _criterion(1, "synthetic accuracy", ok, "; ".join(details))


def test_criterion_2_bounded_search_equivalence():
    spec, (lf, gt) = render_two_plane(size=256, rect=(90, 100, 70, 50))
    fields = census_grid(lf)
    params = sgm.SgmParams()

    coarse, _ = cost.coarse_disparity(fields, 1, 1, 0, 16)
    vol_exh = cost.aggregate_cost(fields, 1, 1, 0, 16)
    disp_exh = sgm.wta(vol_exh, sgm.sgm_sum(vol_exh, params))

    # lambda covering the whole range: bit-identical to exhaustive
    bounds_full = cost.disparity_bounds(coarse, 17, 0, 16)
    vol_full = cost.aggregate_cost(fields, 1, 1, 0, 16, bounds=bounds_full)
    disp_full = sgm.wta(vol_full, sgm.sgm_sum(vol_full, params))
    identical = (np.array_equal(vol_full.costs, vol_exh.costs)
                 and np.array_equal(disp_full, disp_exh, equal_nan=True))

    # default lambda: large work reduction at near-exhaustive accuracy
    bounds = cost.disparity_bounds(coarse, 2, 0, 16)
    vol = cost.aggregate_cost(fields, 1, 1, 0, 16, bounds=bounds)
    disp = sgm.wta(vol, sgm.sgm_sum(vol, params))
    reduction = vol_exh.evaluated_triples / vol.evaluated_triples

    from lfdepth.synthgen import visibility_mask
    vis = visibility_mask(spec)
    frac = float(np.mean((np.abs(disp - gt) <= 0.5)[vis]))

    ok = identical and reduction >= 3.0 and frac >= 0.93
    _criterion(2, "bounded search", ok,
               f"bit-identical={identical}, reduction={reduction:.2f}x, "
               f"non-occluded within 0.5: {frac:.4f}")


def test_criterion_3_sgm_oracle_equivalence():
    rng = np.random.RandomState(2024)
    checked = 0
    ok = True
    for _ in range(1000):
        h, w = rng.randint(1, 9), rng.randint(1, 9)
        nd = rng.randint(1, 7)
        c = rng.randint(0, 64, (h, w, nd)).astype(np.int32)
        p1 = int(rng.randint(0, 21))
        p2 = int(rng.randint(p1, 21))
        vol = make_volume(c)
        params = sgm.SgmParams(p1=p1, p2=p2)
        for r in sgm.DIRECTIONS_8:
            if not np.array_equal(sgm.aggregate_path(vol, r, params),
                                  oracle_path(c, r, p1, p2)):
                ok = False
                break
        checked += 1
        if not ok:
            break
    worked = make_volume(np.array([[[0, 2], [2, 0], [0, 2]]], dtype=np.int32))
    L = sgm.aggregate_path(worked, (1, 0), sgm.SgmParams(p1=1, p2=2))
    worked_ok = np.array_equal(L[0], [[0, 2], [2, 1], [2, 3]])
    _criterion(3, "SGM oracle", ok and worked_ok,
               f"{checked} random volumes x 8 directions exact, "
               f"worked example={'ok' if worked_ok else 'mismatch'}")


def test_criterion_4_census_hamming_properties():
    rng = np.random.RandomState(99)
    img = rng.randint(0, 128, (32, 32)).astype(np.uint8)
    base = census_transform(img).codes
    invariant = all(
        np.array_equal(
            base,
            census_transform(
                np.sort(rng.choice(256, 128, replace=False)).astype(np.uint8)[img]
            ).codes,
        )
        for _ in range(100)
    )

    a = rng.randint(0, 256, 100000).astype(np.uint8)
    b = rng.randint(0, 256, 100000).astype(np.uint8)
    c = rng.randint(0, 256, 100000).astype(np.uint8)
    ab = hamming(a, b)
    metric = (
        bool(np.all(ab >= 0))
        and np.array_equal(ab, hamming(b, a))
        and bool(np.all((ab == 0) == (a == b)))
        and bool(np.all(hamming(a, c) <= ab + hamming(b, c)))
    )

    patch = np.array([[5, 1, 9], [2, 4, 4], [7, 3, 4]], dtype=np.uint8)
    worked = census_transform(patch).codes[1, 1] == 0x52
    _criterion(4, "census/hamming", invariant and metric and worked,
               f"invariance={invariant}, metric axioms={metric}, 0x52={bool(worked)}")


def test_criterion_5_depth_conversion():
    geom = CameraGeometry(focal_px=700.0, baseline_m=0.04, axis_span=3)
    rng = np.random.RandomState(5)
    d = rng.uniform(0.25, 64.0, 10000).astype(np.float32).reshape(100, 100)
    z = disparity_to_depth(d, geom)
    back = geom.focal_px * geom.max_baseline_m / z.astype(np.float64)
    rel = float(np.max(np.abs(back - d) / d))
    bad = np.array([[0.0, -1.0, -7.5, np.nan]], dtype=np.float32)
    invalidated = bool(np.all(np.isnan(disparity_to_depth(bad, geom))))
    ok = rel < 1e-6 and invalidated
    _criterion(5, "disparity-to-depth", ok,
               f"max relative error {rel:.2e}, nonpositive invalidated={invalidated}")


def test_criterion_6_preprocessing():
    rng = np.random.RandomState(6)
    const_ok = all(
        np.all(debayer(np.full((6, 6), v, dtype=np.uint8), p) == v)
        for v in (0, 64, 255) for p in ("RGGB", "BGGR", "GRBG", "GBRG")
    )
    mosaic = rng.randint(0, 256, (12, 12)).astype(np.uint8)
    native_ok = all(
        np.array_equal(mosaic_from_rgb(debayer(mosaic, p), p), mosaic)
        for p in ("RGGB", "BGGR", "GRBG", "GBRG")
    )
    # round trip where 8-bit quantization permits one (x = 0 or x >= 40);
    # darker levels provably collapse at g near 2 (see x=2 check below)
    img = rng.randint(40, 256, (24, 24)).astype(np.uint8)
    img[0, 0] = 0
    gamma_ok = all(
        np.max(np.abs(apply_gamma(apply_gamma(img, g), 1 / g).astype(int)
                      - img.astype(int))) <= 1
        for g in (0.5, 0.75, 1.0, 1.5, 2.0)
    )
    dark = apply_gamma(apply_gamma(np.array([[2]], dtype=np.uint8), 2.0), 0.5)
    gamma_ok = gamma_ok and abs(int(dark[0, 0]) - 2) > 1
    clamp_ok = (auto_gamma(np.zeros((4, 4), dtype=np.uint8)) == pytest.approx(0.4)
                and auto_gamma(np.full((4, 4), 255, dtype=np.uint8)) == pytest.approx(2.5))
    ok = const_ok and native_ok and gamma_ok and clamp_ok
    _criterion(6, "pre-processing", ok,
               f"debayer const={const_ok}, native sites={native_ok}, "
               f"gamma round-trip={gamma_ok}, clamps={clamp_ok}")


def test_criterion_7_io_and_wire(tmp_path):
    rng = np.random.RandomState(7)
    img = rng.randint(0, 256, (9, 11)).astype(np.uint8)
    fmap = rng.uniform(-4, 4, (9, 11)).astype(np.float32)
    fmap[rng.rand(9, 11) < 0.25] = np.nan
    table = identity_remap(7, 5, 4, 4)

    p = tmp_path / "x"
    write_pgm(p, img)
    pgm_ok = np.array_equal(read_pgm(p)[0], img)
    write_pfm(p, fmap)
    pfm_ok = np.array_equal(read_pfm(p).view(np.uint32), fmap.view(np.uint32))
    write_remap(p, table)
    from lfdepth.io import read_remap
    t2 = read_remap(p)
    remap_ok = (np.array_equal(t2.map_x, table.map_x)
                and np.array_equal(t2.map_y, table.map_y))

    blob = stream.encode_frame(fmap, frame_id=9, timestamp_us=10, kind=stream.KIND_DEPTH)
    msg, _ = stream.decode_frame(blob)
    wire_ok = np.array_equal(msg.payload.view(np.uint32), fmap.view(np.uint32))

    write_pgm(p, np.array([[0, 128], [255, 1]], dtype=np.uint8))
    golden_pgm = p.read_bytes() == b"P5\n2 2\n255\n\x00\x80\xff\x01"
    write_pfm(p, np.array([[2.0]], dtype=np.float32))
    golden_pfm = p.read_bytes().endswith(b"\x00\x00\x00\x40")
    golden_frame = stream.encode_frame(
        np.array([[2.0]], dtype=np.float32), 0, 0, stream.KIND_DEPTH
    ) == (b"LFDS\x01" + bytes(16) + b"\x01\x00\x01\x00\x01\x04\x00\x00\x00"
          + b"\x00\x00\x00\x40")
    write_remap(p, identity_remap(704, 704, 4, 4))
    golden_remap = p.read_bytes()[:17] == (
        b"LFRM\x01\x04\x00\x04\x00\xc0\x02\x00\x00\xc0\x02\x00\x00")

    ok = (pgm_ok and pfm_ok and remap_ok and wire_ok
          and golden_pgm and golden_pfm and golden_frame and golden_remap)
    _criterion(7, "I/O and wire", ok,
               f"round trips pgm={pgm_ok} pfm={pfm_ok} remap={remap_ok} wire={wire_ok}; "
               f"goldens pgm={golden_pgm} pfm={golden_pfm} frame={golden_frame} "
               f"remap={golden_remap}")


def test_criterion_8_end_to_end_determinism(tmp_path):
    spec = tmp_path / "scene.txt"
    spec.write_text("size = 96x96\nlayer = seed:3 d:4\n")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        f"mode = synthetic-spec\ninput = {spec}\nout = {tmp_path / 'a'}\n"
        "d_min = 0\nd_max = 12\n"
    )
    rc1 = cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")])
    rc2 = cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "b")])
    same = all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
        for n in ("disparity.pfm", "depth.pfm")
    )
    ok = rc1 == 0 and rc2 == 0 and same
    _criterion(8, "determinism", ok, f"two CLI runs byte-identical={same}")


def test_criterion_9_streaming_loopback(tmp_path, capsys):
    rng = np.random.RandomState(9)
    frames = [rng.uniform(0.2, 3.0, (256, 256)).astype(np.float32) for _ in range(100)]
    for f in frames:
        f[rng.rand(256, 256) < 0.1] = np.nan
    server = stream.DepthStreamServer()
    host, port = server.address
    got = []

    def client():
        got.extend(stream.receive_frames(host, port))

    thread = threading.Thread(target=client)
    thread.start()
    deadline = time.time() + 5
    while server.client_count() < 1 and time.time() < deadline:
        time.sleep(0.01)
    for i, f in enumerate(frames):
        server.publish(f, frame_id=i, timestamp_us=i, kind=stream.KIND_DEPTH)
        time.sleep(0.005)  # 200 fps cadence, well above the pipeline's rate
    server.flush_and_close(timeout=30.0)
    thread.join(timeout=30)

    in_order = [m.frame_id for m in got] == list(range(100))
    bit_equal = in_order and all(
        np.array_equal(m.payload.view(np.uint32), f.view(np.uint32))
        for m, f in zip(got, frames)
    )

    # stage timing is reported as machine-local trends, not absolute targets
    spec = tmp_path / "scene.txt"
    spec.write_text("size = 48x48\nlayer = seed:2 d:2\n")
    cfg = tmp_path / "bench.cfg"
    cfg.write_text(f"mode = synthetic-spec\ninput = {spec}\nout = {tmp_path}\n"
                   "d_min = 0\nd_max = 6\n")
    rc = cli.main(["bench", "--config", str(cfg), "--frames", "1"])
    bench_out = capsys.readouterr().out
    documented = "not comparison targets" in bench_out and rc == 0

    ok = len(got) == 100 and in_order and bit_equal and documented
    _criterion(9, "streaming loopback", ok,
               f"frames={len(got)}, in order={in_order}, bit-equal={bit_equal}, "
               f"bench trend note={documented}")
