import numpy as np
import pytest

from lfdepth.rectify import RemapTable, apply_remap, identity_remap


def shift_table(width, height, dx, dy, views=1):
    t = identity_remap(width, height, grid_rows=1, grid_cols=views)
    return RemapTable(grid_rows=1, grid_cols=views,
                      map_x=t.map_x + dx, map_y=t.map_y + dy)


def test_identity_remap_is_exact():
    rng = np.random.RandomState(3)
    img = rng.randint(0, 256, (12, 17)).astype(np.uint8)
    table = identity_remap(17, 12, 1, 1)
    out, valid = apply_remap(img, table, 0)
    assert np.array_equal(out, img)
    assert valid.all()


def test_identity_remap_definition():
    t = identity_remap(2, 2, 1, 1)
    assert np.array_equal(t.map_x[0, 0], [0.0, 1.0])
    assert np.array_equal(t.map_y[0][:, 0], [0.0, 1.0])


def test_shift_on_ramp():
    img = np.tile(np.arange(10, dtype=np.uint8), (4, 1))
    out, valid = apply_remap(img, shift_table(10, 4, 1.0, 0.0), 0)
    assert np.array_equal(out[:, :-1], img[:, 1:])
    assert np.all(out[:, -1] == 0)
    assert np.all(~valid[:, -1]) and np.all(valid[:, :-1])


def test_fully_invalid_table():
    img = np.full((5, 5), 200, dtype=np.uint8)
    t = identity_remap(5, 5, 1, 1)
    t = RemapTable(1, 1, np.full_like(t.map_x, -1.0), np.full_like(t.map_y, -1.0))
    out, valid = apply_remap(img, t, 0)
    assert np.all(out == 0)
    assert not valid.any()


def test_shift_composition_on_interior():
    rng = np.random.RandomState(5)
    img = rng.randint(0, 256, (16, 16)).astype(np.uint8)
    a2 = apply_remap(img, shift_table(16, 16, 2.0, 0.0), 0)[0]
    then_b = apply_remap(a2, shift_table(16, 16, 1.0, 1.0), 0)[0]
    combined = apply_remap(img, shift_table(16, 16, 3.0, 1.0), 0)[0]
    assert np.array_equal(then_b[:15, :13], combined[:15, :13])


def test_bilinear_half_pixel():
    img = np.array([[10, 20], [10, 20]], dtype=np.uint8)
    t = identity_remap(2, 2, 1, 1)
    t = RemapTable(1, 1, t.map_x * 0 + 0.5, t.map_y * 0)
    out, valid = apply_remap(img, t, 0)
    assert valid.all()
    assert np.all(out == 15)


def test_bad_view_index():
    img = np.zeros((4, 4), dtype=np.uint8)
    t = identity_remap(4, 4, 2, 2)
    with pytest.raises(ValueError):
        apply_remap(img, t, 4)
    with pytest.raises(ValueError):
        apply_remap(img, t, -1)


def test_table_shape_validation():
    with pytest.raises(ValueError):
        RemapTable(2, 2, np.zeros((3, 4, 4)), np.zeros((3, 4, 4)))
    with pytest.raises(ValueError):
        identity_remap(0, 4)
