import math

import numpy as np
import pytest

from ctqw_search.exceptions import EmptyGraph
from ctqw_search.imaging import RasterImage, pgm_bytes, read_pgm, render_facet, render_field, write_pgm
from ctqw_search.lattice import build_from_coords, build_hex_patch


@pytest.fixture
def spot():
    return build_from_coords([(0, 0)], spacing_um=20.0)


def test_single_spot_peak(spot):
    img = render_facet(spot, [1.0])
    row, col = img.pixel_of(0.0, 0.0)
    assert img.pixels[row, col] == 65535
    assert img.pixels.dtype == np.uint16
    # canvas spans two mode diameters either side of the spot
    assert img.width == img.height == 53


def test_spot_profile(spot):
    # 1/e^2 intensity at half the mode diameter
    field, origin = render_field(spot, [1.0], mode_diameter_um=13.0, scale_um_per_px=0.5)
    img = RasterImage(np.zeros(field.shape, np.uint16), 0.5, origin)
    row, col = img.pixel_of(0.0, 0.0)
    assert field[row, col] == pytest.approx(1.0)
    assert field[row, col + 13] == pytest.approx(math.exp(-2.0), rel=1e-12)
    assert field[row - 13, col] == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_two_equal_peaks():
    g = build_from_coords([(0, 0), (1, 0)], spacing_um=30.0)
    img = render_facet(g, [0.5, 0.5])
    a = img.pixels[img.pixel_of(0.0, 0.0)]
    b = img.pixels[img.pixel_of(30.0, 0.0)]
    assert a == b == 65535


def test_render_is_linear():
    g = build_hex_patch(1).with_spacing(20.0)
    rng = np.random.default_rng(3)
    u, v = rng.random(7), rng.random(7)
    fu, _ = render_field(g, u)
    fv, _ = render_field(g, v)
    fuv, _ = render_field(g, 2 * u + 3 * v)
    np.testing.assert_allclose(fuv, 2 * fu + 3 * fv, atol=1e-12)


def test_zero_intensity_gives_black(spot):
    assert render_facet(spot, [0.0]).pixels.max() == 0


def test_render_errors(spot):
    with pytest.raises(ValueError):
        render_facet(build_from_coords([(0, 0)]), [1.0])
    with pytest.raises(ValueError):
        render_facet(spot, [1.0, 2.0])
    with pytest.raises(ValueError):
        render_facet(spot, [1.0], mode_diameter_um=0.0)


def test_empty_graph():
    with pytest.raises(EmptyGraph):
        build_from_coords([], spacing_um=10.0)


def test_pgm_roundtrip(tmp_path, spot):
    img = render_facet(spot, [1.0], comment="graph_id=x gamma_t=1 target=C")
    data = pgm_bytes(img)
    assert data.startswith(b"P5\n# graph_id=x gamma_t=1 target=C\n53 53\n65535\n")
    assert len(data) == len(b"P5\n# graph_id=x gamma_t=1 target=C\n53 53\n65535\n") + 2 * 53 * 53
    path = tmp_path / "spot.pgm"
    write_pgm(img, path)
    pixels, comments = read_pgm(path)
    assert np.array_equal(pixels, img.pixels)
    assert comments == ["graph_id=x gamma_t=1 target=C"]


def test_big_endian_samples():
    img = RasterImage(np.array([[1, 256]], dtype=np.uint16), 1.0)
    assert pgm_bytes(img).endswith(b"\x00\x01\x01\x00")


def test_read_rejects_other_formats():
    with pytest.raises(ValueError):
        read_pgm(b"P2\n1 1\n255\n0\n")
