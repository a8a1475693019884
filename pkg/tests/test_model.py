"""Instance construction: noise law, signal recipes, assembled model."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spiked_amp as sa
from spiked_amp.model import SignalSpec


def test_wigner_symmetric_bitwise():
    W = sa.sample_wigner(64, 0)
    assert np.array_equal(W, W.T)


def test_wigner_frozen_values():
    W = sa.sample_wigner(5, 11)
    np.testing.assert_allclose(
        W[0],
        [0.4714490064826056, 0.18629095705299598, 0.04752527697865727,
         0.14847881751631828, 0.04984706039404965],
        rtol=0, atol=1e-16,
    )
    np.testing.assert_allclose(
        np.diagonal(W),
        [0.4714490064826056, 0.15605140980946403, 0.7132579907922453,
         0.07204093840650089, -1.1931853818977416],
        rtol=0, atol=1e-16,
    )


def test_wigner_entry_variances():
    # Aggregate over 40 draws at n=60: off-diagonal variance 1/n, diagonal
    # 2/n.  The relative MC error at this sample count is about 1%, so the
    # 6% bands below sit at roughly five standard errors.
    n = 60
    offs, diags = [], []
    for seed in range(40):
        W = sa.sample_wigner(n, 1000 + seed)
        iu = np.triu_indices(n, k=1)
        offs.append(W[iu])
        diags.append(np.diagonal(W))
    off_var = np.var(np.concatenate(offs))
    diag_var = np.var(np.concatenate(diags))
    assert abs(off_var * n - 1.0) < 0.06
    assert abs(diag_var * n - 2.0) < 0.12


def test_wigner_operator_norm_near_two():
    W = sa.sample_wigner(1500, 5)
    top = np.linalg.eigvalsh(W)[-1]
    assert 1.9 < top < 2.15


def test_wigner_rejects_bad_n():
    with pytest.raises(ValueError):
        sa.sample_wigner(0, 1)


def test_wigner_determinism():
    np.testing.assert_array_equal(sa.sample_wigner(30, 9), sa.sample_wigner(30, 9))


def test_z2_signal_entries():
    v = sa.make_signal(SignalSpec(kind="z2", n=100, seed=2))
    np.testing.assert_allclose(np.abs(v), 1.0 / np.sqrt(100), rtol=0, atol=1e-15)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    assert np.any(v > 0) and np.any(v < 0)


def test_sparse_dirac_signal():
    v = sa.make_signal(SignalSpec(kind="sparse-dirac", n=200, k=12, seed=4))
    nz = v[v != 0]
    assert nz.size == 12
    np.testing.assert_allclose(np.abs(nz), 1.0 / np.sqrt(12), rtol=0, atol=1e-15)


def test_sparse_gaussian_signal_unit():
    v = sa.make_signal(SignalSpec(kind="sparse-gaussian", n=200, k=7, seed=4))
    assert np.count_nonzero(v) == 7
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_custom_signal_magnitudes():
    v = sa.make_signal(
        SignalSpec(kind="custom", n=50, k=3, magnitudes=(3.0, -4.0, 0.0), seed=1)
    )
    nz = np.sort(v[v != 0.0])
    np.testing.assert_allclose(nz, [-0.8, 0.6], atol=1e-15)  # normalized (3,-4)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="nope", n=10),
        dict(kind="z2", n=0),
        dict(kind="sparse-dirac", n=10),            # k missing
        dict(kind="sparse-dirac", n=10, k=11),      # k > n
        dict(kind="custom", n=10, k=2),             # magnitudes missing
        dict(kind="custom", n=10, k=2, magnitudes=(0.0, 0.0)),
    ],
)
def test_signal_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        SignalSpec(**kwargs)


def test_make_spiked_assembles_exactly():
    v = sa.make_signal(SignalSpec(kind="z2", n=40, seed=8))
    W = sa.sample_wigner(40, 8)
    m = sa.make_spiked(1.3, v, W)
    np.testing.assert_array_equal(m.observed, 1.3 * np.outer(v, v) + W)
    assert m.n == 40 and m.lam == 1.3
    assert m.sparsity is None  # dense signal


def test_make_spiked_sparsity_count():
    v = sa.make_signal(SignalSpec(kind="sparse-dirac", n=40, k=5, seed=8))
    m = sa.make_spiked(2.0, v, np.zeros((40, 40)))
    assert m.sparsity == 5


def test_make_spiked_rejects_nonunit():
    with pytest.raises(ValueError):
        sa.make_spiked(1.0, np.ones(10), np.zeros((10, 10)))


def test_model_arrays_read_only():
    v = sa.make_signal(SignalSpec(kind="z2", n=10, seed=1))
    m = sa.make_spiked(1.5, v, sa.sample_wigner(10, 1))
    with pytest.raises(ValueError):
        m.observed[0, 0] = 99.0


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=40), seed=st.integers(0, 10**6))
def test_wigner_symmetry_property(n, seed):
    W = sa.sample_wigner(n, seed)
    assert np.array_equal(W, W.T)
    assert W.shape == (n, n)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=60),
    seed=st.integers(0, 10**6),
    kind=st.sampled_from(["z2", "sparse-dirac", "sparse-gaussian"]),
    data=st.data(),
)
def test_signal_unit_norm_property(n, seed, kind, data):
    k = None
    if kind != "z2":
        k = data.draw(st.integers(min_value=1, max_value=n))
    v = sa.make_signal(SignalSpec(kind=kind, n=n, k=k, seed=seed))
    assert abs(np.linalg.norm(v) - 1.0) < 1e-10
