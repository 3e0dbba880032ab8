import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from escalate.contours import bilinear, extract_contours_array


def test_constant_grid_has_no_contours():
    x = y = np.linspace(0, 1, 5)
    V = np.full((5, 5), 0.3)
    for level in (0.1, 0.3, 0.5):
        cs = extract_contours_array(x, y, V, [level])
        assert cs.polylines[level] == []


def test_linear_ramp_gives_exact_vertical_line():
    x = np.linspace(0, 1, 8)  # no node at 0.5
    y = np.linspace(0, 1, 6)
    V = np.tile(x, (len(y), 1))
    cs = extract_contours_array(x, y, V, [0.5])
    (line,) = cs.polylines[0.5]
    np.testing.assert_allclose(line[:, 0], 0.5, atol=1e-15)
    assert sorted(line[:, 1].tolist()) == pytest.approx(y.tolist())


def test_ramp_through_grid_nodes():
    x = np.linspace(0, 1, 11)
    y = np.linspace(0, 1, 4)
    V = np.tile(x, (len(y), 1))
    (line,) = extract_contours_array(x, y, V, [0.5]).polylines[0.5]
    np.testing.assert_allclose(line[:, 0], 0.5, atol=1e-15)
    assert len(line) == len(y)


def test_circle_on_quadratic_bowl():
    n = 41
    x = y = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(x, y)
    V = X**2 + Y**2
    r = 0.6
    (loop,) = extract_contours_array(x, y, V, [r * r]).polylines[r * r]
    assert np.array_equal(loop[0], loop[-1])  # closed
    diag = np.hypot(x[1] - x[0], y[1] - y[0])
    radius = np.hypot(loop[:, 0], loop[:, 1])
    assert np.all(np.abs(radius - r) < diag)


def test_two_levels_nest():
    x = y = np.linspace(-1, 1, 31)
    X, Y = np.meshgrid(x, y)
    cs = extract_contours_array(x, y, X**2 + Y**2, [0.1, 0.5])
    assert len(cs.polylines[0.1]) == 1 and len(cs.polylines[0.5]) == 1


@pytest.mark.parametrize("below", [0.2, -0.8])
def test_saddle_resolution(below):
    # BL and TR at 1, BR and TL at `below`: the cell center is 0.5 + below / 2
    x = y = np.array([0.0, 1.0])
    V = np.array([[1.0, below], [below, 1.0]])
    lines = extract_contours_array(x, y, V, [0.5]).polylines[0.5]
    assert len(lines) == 2
    mids = sorted(tuple(line.mean(axis=0)) for line in lines)
    if below > 0:
        # center above: the above corners join, segments cut off TL and BR
        assert mids[0][0] < 0.5 < mids[0][1] and mids[1][0] > 0.5 > mids[1][1]
    else:
        # center below: segments cut off BL and TR
        assert max(mids[0]) < 0.5 < min(mids[1])


def test_input_errors():
    x = y = np.linspace(0, 1, 3)
    V = np.zeros((3, 3))
    with pytest.raises(ValueError):
        extract_contours_array(x, y, V, [])
    with pytest.raises(ValueError):
        extract_contours_array(x, y, V, [0.2, 0.1])
    with pytest.raises(ValueError):
        extract_contours_array(x, y, np.zeros((2, 3)), [0.1])
    V[1, 1] = np.nan
    with pytest.raises(ValueError):
        extract_contours_array(x, y, V, [0.1])


def test_bilinear_reproduces_nodes_and_planes():
    x = np.array([0.0, 1.0, 3.0])
    y = np.array([0.0, 2.0])
    X, Y = np.meshgrid(x, y)
    V = 2 * X - Y + 1
    for px, py in [(0.0, 0.0), (3.0, 2.0), (0.5, 1.5), (2.2, 0.3)]:
        assert bilinear(x, y, V, px, py) == pytest.approx(2 * px - py + 1, abs=1e-14)


grids = st.integers(2, 9).flatmap(lambda ny: st.integers(2, 9).flatmap(
    lambda nx: arrays(np.float64, (ny, nx), elements=st.floats(-1, 1, allow_nan=False))))


@settings(max_examples=200, deadline=None)
@given(grids, st.floats(-0.9, 0.9))
def test_vertices_lie_on_level_and_in_box(V, level):
    ny, nx = V.shape
    x = np.cumsum(np.r_[0.0, np.linspace(0.5, 1.5, nx - 1)])
    y = np.geomspace(1.0, 10.0, ny)
    cs = extract_contours_array(x, y, V, [level])
    for line in cs.polylines[level]:
        assert len(line) >= 2
        assert np.all((line[:, 0] >= x[0]) & (line[:, 0] <= x[-1]))
        assert np.all((line[:, 1] >= y[0]) & (line[:, 1] <= y[-1]))
        for px, py in line:
            assert bilinear(x, y, V, px, py) == pytest.approx(level, abs=1e-9)


lattice_grids = st.integers(2, 9).flatmap(lambda ny: st.integers(2, 9).flatmap(
    lambda nx: arrays(np.float64, (ny, nx), elements=st.integers(-8, 8).map(lambda k: k / 8))))


@settings(max_examples=100, deadline=None)
@given(lattice_grids, st.integers(-8, 7).map(lambda k: k / 8 + 1 / 16))
def test_every_crossed_edge_is_covered(V, level):
    # levels sit between lattice values, so every crossing is a distinct interior point
    ny, nx = V.shape
    x, y = np.arange(nx, dtype=float), np.arange(ny, dtype=float)
    cs = extract_contours_array(x, y, V, [level])
    verts = {tuple(np.round(p, 9)) for line in cs.polylines[level] for p in line}
    above = V >= level
    for i in range(ny):
        for j in range(nx - 1):
            if above[i, j] != above[i, j + 1]:
                t = (level - V[i, j]) / (V[i, j + 1] - V[i, j])
                assert tuple(np.round((j + t, float(i)), 9)) in verts
