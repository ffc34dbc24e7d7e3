import numpy as np
import pytest

from lfdepth.core import CameraGeometry, LightField, correspond, sample


def test_correspond_reference_is_identity():
    for d in (0, 1, 7, -3, 2.5):
        assert correspond(10, 10, 1, 1, 1, 1, d) == (10, 10)


def test_correspond_zero_disparity():
    assert correspond(10, 10, 1, 1, 3, 1, 0) == (10, 10)


def test_correspond_worked_example():
    # (u=10, v=10, ref (1,1), view (3,2), d=2) -> (10 + (1-3)*2, 10 + (1-2)*2)
    assert correspond(10, 10, 1, 1, 3, 2, 2) == (6, 8)


def test_correspond_linear_in_d():
    rng = np.random.RandomState(0)
    for _ in range(200):
        u, v = rng.randint(-50, 50, 2)
        rs, rt, s, t = rng.randint(0, 4, 4)
        d1, d2 = rng.randint(-20, 21, 2)
        a = np.array(correspond(u, v, rs, rt, s, t, d1 + d2))
        b = np.array(correspond(u, v, rs, rt, s, t, d1))
        c = np.array(correspond(u, v, rs, rt, s, t, d2))
        z = np.array(correspond(u, v, rs, rt, s, t, 0))
        assert np.array_equal(a - b, c - z)


@pytest.mark.parametrize("policy", ["nearest", "bilinear"])
def test_sample_identity_at_grid_points(policy):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    for v in range(3):
        for u in range(4):
            assert sample(img, u, v, policy) == img[v, u]


def test_sample_bilinear_midpoint():
    img = np.array([[10, 20, 30]], dtype=np.uint8)
    assert sample(img, 0.5, 0, "bilinear") == 15


def test_sample_out_of_bounds_marker():
    img = np.zeros((4, 4), dtype=np.uint8)
    assert sample(img, -1, 0) is None
    assert sample(img, 0, -1) is None
    assert sample(img, 4, 0) is None
    assert sample(img, 3.6, 0, "bilinear") is None
    assert sample(img, 3.4, 0, "nearest") == 0


def test_sample_nearest_rounds_half_away_from_zero():
    img = np.arange(8, dtype=np.uint8).reshape(1, 8)
    assert sample(img, 1.5, 0) == img[0, 2]
    assert sample(img, 2.5, 0) == img[0, 3]
    assert sample(img, -0.5, 0) is None  # rounds to -1


def test_sample_bilinear_matches_nearest_at_integers():
    rng = np.random.RandomState(1)
    img = rng.randint(0, 256, (5, 7)).astype(np.uint8)
    for v in range(5):
        for u in range(7):
            assert sample(img, u, v, "bilinear") == sample(img, u, v, "nearest")


def test_lightfield_validation():
    views = np.zeros((4, 4, 8, 8), dtype=np.uint8)
    lf = LightField(views=views)
    assert lf.grid_rows == 4 and lf.grid_cols == 4
    assert np.shares_memory(lf.reference, views[1, 1])
    with pytest.raises(ValueError):
        LightField(views=views, ref_s=4)
    with pytest.raises(ValueError):
        LightField(views=np.zeros((4, 4, 8), dtype=np.uint8))


def test_camera_geometry():
    g = CameraGeometry(focal_px=700, baseline_m=0.04, axis_span=3)
    assert g.max_baseline_m == pytest.approx(0.12)
    with pytest.raises(ValueError):
        CameraGeometry(focal_px=0, baseline_m=0.04)
    with pytest.raises(ValueError):
        CameraGeometry(focal_px=700, baseline_m=-1)
