"""Enumeration oracles, exact consistency checks, and sampling statistics."""

import math
from fractions import Fraction

import pytest

from partition_lab.core import ExtParams, ParameterError, canonicalize
from partition_lab.oracle import (
    chi_square,
    deletion_law_check,
    enumerate_partitions,
    exact_law,
    iter_partitions,
    ks_two_sample,
    leem_check,
    record_independence_residual,
    tau_regen_check,
    xi_order_enumeration_residual,
)

GRID = (
    ExtParams.two_param(0, 1),
    ExtParams.two_param(0, 2),
    ExtParams.two_param(Fraction(1, 2), Fraction(1, 2)),
    ExtParams.two_param(Fraction(1, 3), Fraction(2, 3)),
    ExtParams.two_param(Fraction(2, 3), 0),
    ExtParams.neg_alpha(-1, 3),
    ExtParams.coupon(4),
)


# ---------------------------------------------------------------------------
# enumeration

@pytest.mark.parametrize(("n", "bell"), [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)])
def test_enumeration_hits_bell_numbers(n, bell):
    parts = enumerate_partitions(n)
    assert len(parts) == bell
    assert len(set(parts)) == bell
    for pi in parts:
        assert pi.n == n


def test_enumeration_bounds_and_order():
    assert next(iter_partitions(3)).blocks == ((1, 2, 3),)
    with pytest.raises(ParameterError):
        enumerate_partitions(-1)
    with pytest.raises(ParameterError):
        enumerate_partitions(13)


@pytest.mark.parametrize("params", GRID, ids=str)
def test_exact_law_is_a_probability(params):
    law = exact_law(params, 5)
    assert law.total() == 1
    assert all(p >= 0 for p in law.probs.values())


def test_exact_law_and_perturbation():
    law = exact_law(ExtParams.two_param(0, 1), 3)
    one_block = canonicalize([[1, 2, 3]])
    assert law.probs[one_block] == Fraction(1, 3)
    pert = law.perturbed(one_block, Fraction(1, 1000))
    assert pert.total() == 1
    assert pert.probs[one_block] > law.probs[one_block]
    with pytest.raises(ParameterError):
        law.perturbed(canonicalize([[1, 2]]), Fraction(1, 1000))
    with pytest.raises(ParameterError):
        exact_law(ExtParams.two_param(0, 1), 11)


# ---------------------------------------------------------------------------
# characterization checks (zero for the family, positive when perturbed)

@pytest.mark.parametrize("params", GRID, ids=str)
def test_deletion_law_check_zero(params):
    for n in (2, 4, 5):
        assert deletion_law_check(params, n) == 0


def test_deletion_law_check_sees_perturbation():
    params = ExtParams.two_param(0, 1)
    law = exact_law(params, 3).perturbed(canonicalize([[1, 2, 3]]), Fraction(1, 1000))
    assert deletion_law_check(params, 3, law) == Fraction(1, 3003)


@pytest.mark.parametrize("params", GRID[:5], ids=str)
def test_tau_regen_check_zero(params):
    for n in (2, 4, 5):
        assert tau_regen_check(params, n) == 0


def test_tau_regen_check_sees_perturbation():
    params = ExtParams.two_param(Fraction(1, 2), Fraction(1, 2))
    law = exact_law(params, 4).perturbed(canonicalize([[1, 2, 3, 4]]), Fraction(1, 1000))
    assert tau_regen_check(params, 4, law) == Fraction(6, 7007)


@pytest.mark.parametrize("tau", [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1])
def test_leem_check_zero_exact(tau):
    assert leem_check((Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)), tau) == 0


def test_leem_check_handles_ties_and_validates():
    # equal float weights exercise the tie branches
    assert leem_check((0.25, 0.25, 0.5), 0.5) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ParameterError):
        leem_check((), Fraction(1, 2))
    with pytest.raises(ParameterError):
        leem_check((Fraction(1, 2),), 2)


def test_record_independence_residual_zero():
    assert record_independence_residual((Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))) == 0
    assert record_independence_residual((Fraction(2, 7), Fraction(5, 7))) == 0


@pytest.mark.parametrize("xi", [Fraction(1, 2), 1, 2, 3, math.inf])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_xi_order_enumeration_residual_zero(k, xi):
    assert xi_order_enumeration_residual(k, xi) == 0


def test_xi_order_enumeration_bounds():
    with pytest.raises(ParameterError):
        xi_order_enumeration_residual(0, 1)
    with pytest.raises(ParameterError):
        xi_order_enumeration_residual(9, 1)


# ---------------------------------------------------------------------------
# sampling statistics

def test_chi_square_values():
    assert chi_square([50, 50], [0.5, 0.5]) == (0.0, 1, 1.0)
    stat, dof, pval = chi_square([60, 40], [0.5, 0.5])
    assert stat == pytest.approx(4.0)
    assert dof == 1
    assert pval == pytest.approx(0.0455, abs=1e-4)


def test_chi_square_pools_small_cells():
    stat, dof, pval = chi_square([95, 3, 2], [0.9, 0.05, 0.05])
    assert dof == 2  # the two small cells merge into one bin
    assert 0 < pval < 1


def test_chi_square_validation():
    with pytest.raises(ParameterError):
        chi_square([10, 10], [0.5])
    with pytest.raises(ParameterError):
        chi_square([10, 10], [0.5, -0.5])
    with pytest.raises(ParameterError):
        chi_square([10, 10], [1.0, 0.0])  # observed mass on a dead cell
    with pytest.raises(ParameterError):
        chi_square([100, 0], [1.0, 0.0])  # single bin after pooling


def test_ks_two_sample_sanity():
    same = [1.0, 2.0, 3.0] * 30
    assert ks_two_sample(same, same) == (0.0, 1.0)
    stat, pval = ks_two_sample([0.0] * 50, [1.0] * 50)
    assert stat == 1.0
    assert pval < 1e-10
