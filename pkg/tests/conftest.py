import numpy as np
import pytest

from lfdepth import synthgen
from lfdepth.census import census_transform


def render_plane(dstar, size=128, seed=42, grid=4):
    spec = synthgen.SceneSpec(
        layers=(synthgen.Layer(texture=("noise", seed), disparity=float(dstar)),),
        width=size, height=size, grid_rows=grid, grid_cols=grid,
    )
    return synthgen.render_lightfield(spec)


def render_two_plane(size=128, d_bg=2.0, d_fg=8.0, rect=(45, 50, 36, 26)):
    spec = synthgen.SceneSpec(
        layers=(
            synthgen.Layer(texture=("noise", 42), disparity=d_bg),
            synthgen.Layer(texture=("noise", 99), disparity=d_fg, region=rect),
        ),
        width=size, height=size,
    )
    return spec, synthgen.render_lightfield(spec)


def census_grid(lf, radius=1):
    return [
        [census_transform(lf.views[t, s], radius) for s in range(lf.grid_cols)]
        for t in range(lf.grid_rows)
    ]


@pytest.fixture(scope="session")
def plane_d5():
    lf, gt = render_plane(5, size=96)
    return lf, gt, census_grid(lf)
