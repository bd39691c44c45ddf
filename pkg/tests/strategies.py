"""Hypothesis strategies for small grids with the ones-vector inside the hull."""

import numpy as np
from hypothesis import strategies as st

from emcert.corpus import GridFunction

# coarse coordinates make collinear and degenerate configurations common
coords = st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
values = st.one_of(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0]), st.floats(0.0, 3.0))


@st.composite
def grids(draw, max_K=3, max_n=8):
    K = draw(st.integers(1, max_K))
    pts = draw(st.lists(st.tuples(*[coords] * K), max_size=max_n, unique=True))
    pts = [p for p in pts if p not in ((1.0,) * K, (0.0,) * K)]
    pts += [(1.0,) * K, (0.0,) * K]
    vals = draw(st.lists(values, min_size=len(pts), max_size=len(pts)))
    return GridFunction(np.array(pts), vals)
