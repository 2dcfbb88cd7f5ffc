import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vexspace import vexf
from vexspace.errors import FormatError
from vexspace.grid import Grid, SampledField


def test_layout():
    g = Grid((0.0, -1.0), (0.5, 0.25), (2, 3))
    f = SampledField(g, np.arange(6.0).reshape(2, 3) / 3)
    lines = vexf.dumps(f).splitlines()
    assert lines[:5] == ["vexf 1", "dim 2", "shape 2 3", "origin 0.0 -1.0", "spacing 0.5 0.25"]
    # row-major, axis 0 slowest
    assert lines[5:] == [repr(float(v)) for v in np.arange(6.0) / 3]


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 3).flatmap(lambda d: st.tuples(
        st.lists(st.integers(2, 5), min_size=d, max_size=d),
        st.lists(st.floats(-1e3, 1e3), min_size=d, max_size=d),
        st.lists(st.floats(1e-6, 1e3), min_size=d, max_size=d),
    )),
    st.randoms(use_true_random=False),
)
def test_round_trip_is_bit_exact(spec, rnd):
    shape, origin, spacing = spec
    g = Grid(tuple(origin), tuple(spacing), tuple(shape))
    vals = np.array([rnd.uniform(-1e300, 1e300) * rnd.random() ** 40 for _ in range(g.size)])
    f = SampledField(g, vals)
    back = vexf.loads(vexf.dumps(f))
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_file_round_trip(tmp_path):
    g = Grid.from_box([0], [1], [7])
    f = SampledField.from_function(g, np.sin)
    vexf.write(f, tmp_path / "f.vexf")
    assert np.array_equal(vexf.read(tmp_path / "f.vexf").values, f.values)


@pytest.mark.parametrize("text, match", [
    ("vexf 2\ndim 1\nshape 2\norigin 0\nspacing 1\n0\n0\n", "version"),
    ("vexf 1\ndim 1\nshape 2\n", "truncated"),
    ("vexf 1\ndim 1\nshape 3\norigin 0\nspacing 1\n0\n0\n", "expected 3 values"),
    ("vexf 1\ndim 2\nshape 2\norigin 0\nspacing 1\n0\n0\n", "needs 2 entries"),
    ("vexf 1\ndim 1\nshape 2\norigin 0\nspacing 1\n0\nabc\n", "malformed"),
    ("vexf 1\ndims 1\nshape 2\norigin 0\nspacing 1\n0\n0\n", "expected 'dim'"),
])
def test_rejects_malformed(text, match):
    with pytest.raises(FormatError, match=match):
        vexf.loads(text)
