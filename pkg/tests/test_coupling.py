"""Coupling operator J: stencil values, balance identities, linearity."""

import numpy as np
import pytest

import grainkin as gk


def test_stencil_beta1_n8_ones():
    # direct evaluation of the three bands:
    #   row 2: 3*2*1 - 2*1 = 4; rows 3..7: 2(n+1) - 3n + (n-1) = 1;
    #   row 8: 1*7 - 2*8 = -9
    p = gk.Parameters(beta=1.0, n_max=8, domain_length=4, cells=8)
    f = np.ones(7)
    out = gk.apply_coupling(f, p)
    assert out == pytest.approx([4.0, 1.0, 1.0, 1.0, 1.0, 1.0, -9.0], abs=1e-14)
    assert abs(out.sum()) < 1e-13


def test_zero_input_maps_to_zero():
    p = gk.Parameters(beta=0.7, n_max=12, domain_length=8, cells=16)
    assert np.all(gk.apply_coupling(np.zeros(11), p) == 0.0)


def test_length_mismatch_rejected():
    p = gk.Parameters(beta=1.0, n_max=8, domain_length=4, cells=8)
    with pytest.raises(ValueError):
        gk.apply_coupling(np.ones(5), p)


def test_zero_balance_random():
    p = gk.Parameters(beta=1.3, n_max=25, domain_length=20, cells=40)
    kappa_n = (p.beta + 1.0) * p.n_max
    rng = np.random.default_rng(3)
    for _ in range(200):
        f = rng.uniform(0.0, 1.0, p.num_classes)
        s = abs(gk.apply_coupling(f, p).sum())
        assert s <= 1e-12 * kappa_n * np.abs(f).sum()


def test_six_minus_n_weighted_sum_beta1_n8_ones():
    # both sides by hand: weighted sum of the stencil gives 39, and
    # beta*N*f_N - 2*beta*f_2 + sum_{n=3..N} n*f_n = 8 - 2 + 33 = 39
    p = gk.Parameters(beta=1.0, n_max=8, domain_length=4, cells=8)
    f = np.ones(7)
    n = p.class_values
    lhs = float((6.0 - n) @ gk.apply_coupling(f, p))
    assert lhs == pytest.approx(39.0, abs=1e-12)


def test_weighted_identity_random():
    # sum theta_n (Jf)_n = sum_{n<N} (theta_{n+1}-theta_n) beta n f_n
    #                      - sum_{n>2} (theta_n-theta_{n-1}) (beta+1) n f_n
    p = gk.Parameters(beta=0.6, n_max=15, domain_length=10, cells=20)
    n = p.class_values.astype(float)
    rng = np.random.default_rng(11)
    for _ in range(50):
        f = rng.uniform(0.0, 2.0, p.num_classes)
        theta = rng.normal(size=p.num_classes)
        lhs = float(theta @ gk.apply_coupling(f, p))
        rhs = float(
            ((theta[1:] - theta[:-1]) * p.beta * n[:-1] * f[:-1]).sum()
            - ((theta[1:] - theta[:-1]) * (p.beta + 1.0) * n[1:] * f[1:]).sum()
        )
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_linearity_and_homogeneity():
    p = gk.Parameters(beta=1.8, n_max=10, domain_length=6, cells=12)
    rng = np.random.default_rng(5)
    f = rng.uniform(size=p.num_classes)
    h = rng.uniform(size=p.num_classes)
    a = 1.7
    lhs = gk.apply_coupling(a * f + h, p)
    rhs = a * gk.apply_coupling(f, p) + gk.apply_coupling(h, p)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


def test_matrix_matches_operator():
    p = gk.Parameters(beta=0.9, n_max=14, domain_length=10, cells=20)
    J = gk.coupling_matrix(p)
    rng = np.random.default_rng(2)
    f = rng.uniform(size=p.num_classes)
    assert J @ f == pytest.approx(gk.apply_coupling(f, p), rel=1e-14)


def test_kappa_and_tau():
    p = gk.Parameters(beta=0.5, n_max=12, domain_length=8, cells=16)
    cw = gk.CouplingWeights.from_parameters(p)
    assert cw.kappa[0] == 2 * p.beta
    assert cw.kappa[3] == (2 * p.beta + 1) * 5          # n = 5
    assert cw.kappa[-1] == (p.beta + 1) * p.n_max
    # strictly increasing over the interior band n = 3..N-1
    inner = cw.kappa[1:-1]
    assert np.all(np.diff(inner) > 0)
    assert cw.tau == (1 + p.beta) / p.beta > 1
