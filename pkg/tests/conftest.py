import numpy as np
import pytest
from hypothesis import strategies as st

from tabrec.raster import BBox, BinaryImage, GrayImage


@st.composite
def binary_images(draw, max_side: int = 16):
    w = draw(st.integers(1, max_side))
    h = draw(st.integers(1, max_side))
    bits = draw(st.lists(st.booleans(), min_size=w * h, max_size=w * h))
    return BinaryImage(np.array(bits, dtype=bool).reshape(h, w))


@st.composite
def gray_images(draw, max_side: int = 16):
    w = draw(st.integers(1, max_side))
    h = draw(st.integers(1, max_side))
    vals = draw(st.lists(st.integers(0, 255), min_size=w * h, max_size=w * h))
    return GrayImage(np.array(vals, dtype=np.uint8).reshape(h, w))


@st.composite
def bboxes(draw, bound: int = 64):
    x0 = draw(st.integers(0, bound - 1))
    y0 = draw(st.integers(0, bound - 1))
    x1 = draw(st.integers(x0 + 1, bound))
    y1 = draw(st.integers(y0 + 1, bound))
    return BBox(x0, y0, x1, y1)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
