import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tsallisexp.errors import DegenerateSampleError, DomainError, InconsistentLocationError
from tsallisexp.expmodel import (
    EntropicConfig,
    PopulationParams,
    pdf,
    read_sample_csv,
    sample,
    sample_batch,
    summarize,
    summarize_batch,
    summarize_known_location,
    theta,
    tsallis_joint,
    tsallis_single,
    write_sample_csv,
)
from tsallisexp import streams


@pytest.mark.parametrize("k, n, q", [(0, 4, 0.5), (1, 1, 0.5), (1, 4, 1.0), (1, 4, 0.0), (1, 2, 1.5), (1, 4, 2.5)])
def test_config_rejects_invalid(k, n, q):
    with pytest.raises(DomainError):
        EntropicConfig(k, n, q)


def test_config_derived_quantities():
    cfg = EntropicConfig(2, 4, 1.3)
    assert cfg.power == pytest.approx(-0.6)
    assert cfg.shape == 6.0


def test_params_validation():
    with pytest.raises(DomainError):
        PopulationParams((0.0,), 0.0)
    with pytest.raises(DomainError):
        PopulationParams((math.nan,), 1.0)
    with pytest.raises(DomainError):
        PopulationParams((0.0, 1.0), 1.0).check(EntropicConfig(1, 4, 0.5))


@pytest.mark.parametrize(
    "x, u, sigma, expected", [(0.0, 0.0, 1.0, 1.0), (1.0, 0.0, 1.0, math.exp(-1.0)), (-1.0, 0.0, 1.0, 0.0)]
)
def test_pdf(x, u, sigma, expected):
    assert pdf(x, u, sigma) == pytest.approx(expected, abs=1e-15)


def test_sample_is_deterministic():
    cfg = EntropicConfig(2, 5, 0.5)
    params = PopulationParams((0.3, -1.0), 2.0)
    a, b = sample(cfg, params, 99), sample(cfg, params, 99)
    assert a.shape == (2, 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(cfg, params, 100))
    assert np.all(a >= np.array([[0.3], [-1.0]]))


def test_sample_mean_of_deviations():
    cfg = EntropicConfig(1, 1000, 0.5)
    x = sample_batch(cfg, PopulationParams((2.0,), 1.0), streams.substreams(5, 1000))
    assert abs((x - 2.0).mean() - 1.0) < 0.005


def test_minimum_is_exponential_with_scale_sigma_over_n():
    cfg = EntropicConfig(1, 4, 0.5)
    x = sample_batch(cfg, PopulationParams((0.0,), 1.0), streams.substreams(6, 100_000))
    scaled = x.min(axis=2)[:, 0] * 4
    assert abs(scaled.mean() - 1.0) < 0.01


def test_two_t_over_sigma_is_chi_square():
    cfg = EntropicConfig(2, 4, 0.5)
    sigma = 1.7
    x = sample_batch(cfg, PopulationParams((0.0, 3.0), sigma), streams.substreams(8, 200_000))
    y = 2.0 * summarize_batch(x).t / sigma
    dof = 2 * cfg.k * (cfg.n - 1)
    se_mean = math.sqrt(2 * dof / y.size)
    assert abs(y.mean() - dof) < 4 * se_mean
    assert abs(y.var() / (2 * dof) - 1.0) < 0.02


def test_summarize_examples():
    s = summarize([[1.0, 2.0, 4.0]])
    assert (s.x_min, s.t, s.w, s.k, s.n) == ((1.0,), 4.0, (0.25,), 1, 3)
    s = summarize([[0.0, 1.0], [2.0, 3.0]])
    assert s.x_min == (0.0, 2.0) and s.t == 2.0 and s.w == (0.0, 1.0)


def test_summarize_degenerate():
    with pytest.raises(DegenerateSampleError):
        summarize([[1.0, 1.0], [2.0, 2.0]])


def test_summarize_batch_names_replication():
    data = np.ones((3, 1, 4))
    data[0, 0, 0] = 2.0
    with pytest.raises(DegenerateSampleError, match="replication 1"):
        summarize_batch(data)


@given(
    st.floats(0.01, 100.0),
    st.floats(-50.0, 50.0),
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=6, max_size=6, unique=True),
)
def test_summarize_equivariance(r, s, vals):
    data = np.array(vals).reshape(2, 3)
    base = summarize(data)
    moved = summarize(r * data + s)
    assert moved.t == pytest.approx(r * base.t, rel=1e-9)
    assert np.allclose(moved.x_min, r * np.array(base.x_min) + s, rtol=1e-9, atol=1e-9)


def test_known_location_statistic():
    assert summarize_known_location([[1.0, 2.0, 4.0]], [0.0]).s == 7.0
    assert summarize_known_location([[1.0, 2.0, 4.0]], [1.0]).s == 4.0
    data = np.array([[1.0, 2.0], [5.0, 7.0]])
    assert summarize_known_location(data, data.min(axis=1)).s >= summarize(data).t
    with pytest.raises(InconsistentLocationError):
        summarize_known_location(data, [1.5, 0.0])


@pytest.mark.parametrize("q, sigma, expected", [(2.0, 1.0, 0.5), (2.0, 2.0, 0.75), (0.5, 1.0, 2.0)])
def test_tsallis_single(q, sigma, expected):
    assert tsallis_single(q, sigma) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("k, q, sigma, expected", [(2, 2.0, 1.0, 0.75), (3, 2.0, 1.0, 0.875)])
def test_tsallis_joint(k, q, sigma, expected):
    assert tsallis_joint(k, q, sigma) == pytest.approx(expected, rel=1e-14)


@given(st.floats(0.05, 3.0).filter(lambda q: abs(q - 1) > 1e-3), st.floats(0.05, 20.0))
def test_tsallis_joint_reduces_and_is_pseudo_additive(q, sigma):
    assert tsallis_joint(1, q, sigma) == pytest.approx(tsallis_single(q, sigma), rel=1e-10, abs=1e-12)
    s1 = tsallis_single(q, sigma)
    # independent systems: S(A+B) = S(A) + S(B) + (1−q) S(A) S(B)
    assert tsallis_joint(2, q, sigma) == pytest.approx(2 * s1 + (1 - q) * s1 * s1, rel=1e-9, abs=1e-10)


def test_tsallis_near_one_approaches_shannon():
    # Exp(σ) has Shannon entropy 1 + ln σ
    assert tsallis_single(1 + 1e-7, 2.0) == pytest.approx(1 + math.log(2.0), rel=1e-6)


def test_tsallis_rejects_q_one():
    with pytest.raises(DomainError):
        tsallis_joint(2, 1.0, 1.0)


@pytest.mark.parametrize("cfg, sigma, expected", [((1, 4, 0.5), 4.0, 2.0), ((2, 4, 2.0), 2.0, 0.25), ((3, 5, 1.7), 1.0, 1.0)])
def test_theta(cfg, sigma, expected):
    assert theta(EntropicConfig(*cfg), sigma) == pytest.approx(expected, rel=1e-14)


def test_csv_round_trip(tmp_path):
    data = np.array([[1.5, 2.25, 3.0], [0.1, 0.2, 1e-3]])
    path = tmp_path / "s.csv"
    write_sample_csv(data, path)
    assert np.array_equal(read_sample_csv(path), data)


def test_csv_ragged_and_malformed(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("1,2,3\n4,5\n")
    with pytest.raises(DomainError, match="ragged"):
        read_sample_csv(p)
    p.write_text("1,x\n")
    with pytest.raises(DomainError, match="malformed"):
        read_sample_csv(p)
    p.write_text("\n")
    with pytest.raises(DomainError):
        read_sample_csv(p)
