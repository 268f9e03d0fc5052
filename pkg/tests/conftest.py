import itertools
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

from qcollapse.poly import MtpInstance, MultilinearPoly

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_instance(rng: np.random.Generator, n: int, *, terms: int = 5, degree: int = 3,
                    bound: int = 4) -> MtpInstance:
    """Random polynomial shifted and scaled into [0, 1] with a threshold on its grid."""
    raw = {}
    for _ in range(terms):
        size = int(rng.integers(0, min(degree, n) + 1))
        S = tuple(sorted(rng.choice(n, size=size, replace=False) + 1)) if size else ()
        v = int(rng.integers(-bound, bound + 1))
        if v:
            raw[S] = raw.get(S, 0) + v
    raw = {k: v for k, v in raw.items() if v}
    vals = [sum(v for S, v in raw.items() if all(y[i - 1] for i in S))
            for y in itertools.product((0, 1), repeat=n)]
    lo, hi = min(vals), max(vals)
    span = max(hi - lo, 1)
    terms_ = dict(raw)
    if lo:
        terms_[()] = terms_.get((), 0) - lo
    terms_ = {k: v for k, v in terms_.items() if v}
    grid = sorted({v - lo for v in vals})
    a = Fraction(grid[int(rng.integers(0, len(grid)))], span)
    poly = MultilinearPoly(n, max(degree, 0), 0, terms_, scale_den=span)
    return MtpInstance(poly, a, Fraction(1, span), span + 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
    for line in mod.EXTRA:
        terminalreporter.write_line(line)
