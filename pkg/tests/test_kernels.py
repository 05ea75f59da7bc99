"""Backend parity: jit and vectorized kernels agree to roundoff.

Each variant of the kernels module is loaded standalone under its own
PLATFORM_AUCTIONS_BACKEND value so one pytest process can compare both.
The plain-loop implementations double as the reference for the vectorized
numpy code even when numba is absent.
"""

import importlib.util
import os
from pathlib import Path

import numpy as np
import pytest

from platform_auctions import _kernels as installed
from platform_auctions import (
    RESIDUAL_SURPLUS,
    ValuationProfile,
    balanced_check,
    objective_value,
    rsol_exact,
)

KERNELS_PATH = Path(installed.__file__)


def _load_variant(backend: str, name: str):
    old = os.environ.get("PLATFORM_AUCTIONS_BACKEND")
    os.environ["PLATFORM_AUCTIONS_BACKEND"] = backend
    try:
        spec = importlib.util.spec_from_file_location(name, KERNELS_PATH)
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
    finally:
        if old is None:
            os.environ.pop("PLATFORM_AUCTIONS_BACKEND", None)
        else:
            os.environ["PLATFORM_AUCTIONS_BACKEND"] = old
    return mod


HAVE_NUMBA = importlib.util.find_spec("numba") is not None

NP = (installed if installed.BACKEND == "numpy"
      else _load_variant("numpy", "_kernels_numpy_variant"))
if installed.BACKEND == "numba":
    NB = installed
elif HAVE_NUMBA:
    NB = _load_variant("numba", "_kernels_numba_variant")
else:
    NB = None

needs_numba = pytest.mark.skipif(NB is None, reason="numba not installed")


def _pairs():
    out = [NP]
    if NB is not None:
        out.append(NB)
    return out


def test_backend_selection():
    assert NP.BACKEND == "numpy"
    assert NP.backend_name() == "numpy"
    if NB is not None:
        assert NB.BACKEND == "numba"


def test_two_level_oracle_row():
    V = np.array([[5.0, 4.0, 3.0, 2.0, 1.0]])
    for mod in _pairs():
        assert mod.two_level_values(V, 3.0, 1.0, 2, 1.0, -1.0)[0] == pytest.approx(
            13.0 / 3.0, abs=1e-12)
        assert mod.two_level_values(V, 3.0, 1.0, 2, 0.0, 1.0)[0] == pytest.approx(
            14.0 / 3.0, abs=1e-12)


def test_two_level_scalar_and_pair_agree():
    rng = np.random.default_rng(101)
    V = np.ascontiguousarray(rng.exponential(1.0, (300, 6)))
    qs = rng.uniform(0.0, 1.0, 300)
    ps = qs + rng.uniform(0.0, 2.0, 300)
    for alpha, beta in [(1.0, -1.0), (0.0, 1.0), (1.0, 0.0)]:
        ref_scalar = NP._two_level_values_loop(V, 0.8, 0.3, 2, alpha, beta)
        ref_pair = NP._two_level_values_pair_loop(V, ps, qs, 2, alpha, beta)
        for mod in _pairs():
            got = mod.two_level_values(V, 0.8, 0.3, 2, alpha, beta)
            np.testing.assert_allclose(got, ref_scalar, rtol=0, atol=1e-12)
            got = mod.two_level_values(V, ps, qs, 2, alpha, beta)
            np.testing.assert_allclose(got, ref_pair, rtol=0, atol=1e-12)


def test_benchmark_values_agree():
    rng = np.random.default_rng(103)
    V = np.ascontiguousarray(
        np.sort(rng.exponential(1.0, (200, 5)), axis=1)[:, ::-1])
    for k in (1, 2, 5):
        ref = NP._benchmark_values_loop(V, k, 1.0, -1.0)
        for mod in _pairs():
            got = mod.benchmark_values(V, k, 1.0, -1.0)
            np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)


def test_vickrey_values_agree_with_ties():
    rng = np.random.default_rng(107)
    # half-integer values force frequent exact ties at the threshold
    V = np.ascontiguousarray(
        np.sort(rng.integers(0, 5, (400, 6)) / 2.0, axis=1)[:, ::-1])
    for k in (1, 3, 6):
        ref = NP._vickrey_values_loop(V, k, 1.0, -1.0)
        for mod in _pairs():
            got = mod.vickrey_values(V, k, 1.0, -1.0)
            np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)
    tie = np.array([[1.0, 1.0]])
    for mod in _pairs():
        assert mod.vickrey_values(tie, 1, 1.0, -1.0)[0] == pytest.approx(0.0)


def test_ratio_auction_values_agree():
    rng = np.random.default_rng(109)
    V = np.ascontiguousarray(rng.uniform(0.0, 4.0, (300, 2)))
    V[:5] = [[1.0, 2.0], [2.0, 1.0], [2.0, 4.0], [0.0, 0.0], [3.0, 1.5]]
    for r, b in [(2.0, 0.75), (3.0, 0.6)]:
        for alpha, beta in [(1.0, -1.0), (0.0, 1.0)]:
            ref = NP._ratio_auction_values_loop(V, r, b, alpha, beta)
            for mod in _pairs():
                got = mod.ratio_auction_values(V, r, b, alpha, beta)
                np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)


def test_count_balanced_agrees():
    rng = np.random.default_rng(113)
    flags = rng.integers(0, 2, (2000, 7), dtype=np.uint8)
    want = sum(balanced_check(row.astype(bool).tolist()) for row in flags)
    for mod in _pairs():
        assert int(mod.count_balanced(flags)) == want


def test_opt_lottery_price_desc():
    for mod in _pairs():
        p, v = mod.opt_lottery_price_desc(np.array([10.0, 1.0]), 2, 1)
        assert (p, v) == (1.0, 9.0)
    rng = np.random.default_rng(127)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        k = int(rng.integers(1, 4))
        sv = np.sort(rng.exponential(1.0, n))[::-1].copy()
        ref = NP.opt_lottery_price_desc(sv, n, k)
        # optimum dominates every candidate price
        for p in [0.0, *sv]:
            assert ref[1] >= NP._lottery_value_desc(sv, n, k, p) - 1e-12
        for mod in _pairs():
            got = mod.opt_lottery_price_desc(sv, n, k)
            assert got[0] == ref[0]
            assert got[1] == pytest.approx(ref[1], abs=1e-12)


def test_rsol_exact_outcome_agrees():
    rng = np.random.default_rng(131)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        k = int(rng.integers(1, 3))
        values = rng.exponential(1.0, n)
        ref_alloc, ref_pay = NP._rsol_exact_loop(values, k)
        for mod in _pairs():
            alloc, pay = mod.rsol_exact_outcome(values, k)
            np.testing.assert_allclose(alloc, ref_alloc, rtol=0, atol=1e-12)
            np.testing.assert_allclose(pay, ref_pay, rtol=0, atol=1e-12)


def test_rsol_partition_values_agree():
    rng = np.random.default_rng(137)
    values = rng.exponential(1.0, 9)
    flags = rng.integers(0, 2, (500, 9), dtype=np.uint8)
    ref = NP._rsol_partition_values_loop(values, 1, flags, 1.0, -1.0)
    for mod in _pairs():
        got = mod.rsol_partition_values(values, 1, flags, 1.0, -1.0)
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)


def test_partition_values_average_to_exact_outcome():
    rng = np.random.default_rng(139)
    values = rng.exponential(1.0, 5)
    profile = ValuationProfile(values.tolist())
    masks = np.arange(1 << 5)[:, None] >> np.arange(5)[None, :]
    flags = (masks & 1).astype(np.uint8)
    for mod in _pairs():
        vals = mod.rsol_partition_values(values, 2, flags, 1.0, -1.0)
        want = objective_value(rsol_exact(profile, 2), profile, RESIDUAL_SURPLUS)
        assert float(np.mean(vals)) == pytest.approx(want, abs=1e-12)


@needs_numba
def test_numba_pair_dispatch_broadcasts_scalars():
    V = np.ascontiguousarray(np.random.default_rng(149).uniform(0, 2, (50, 3)))
    a = NB.two_level_values(V, np.float64(0.5), 0.2, 1, 1.0, -1.0)
    b = NB.two_level_values(V, 0.5, np.full(50, 0.2), 1, 1.0, -1.0)
    np.testing.assert_allclose(a, b, rtol=0, atol=0)
