import numpy as np
import pytest

from fclear.errors import (
    DimensionMismatch,
    NonPositiveWeight,
    SanityViolation,
    SelfContract,
    SelfReference,
    ValidationError,
)
from fclear.model import (
    batch_check,
    build_system,
    check_clearing,
    evaluate_state,
    rates_from_mapping,
    total_externals,
    update_step,
)


def test_three_bank_quantities(three_bank):
    st = evaluate_state(three_bank, [0.5, 1.0, 1.0])
    # u's liability is its two debts; w owes v 2*(1 - r_u) = 1
    np.testing.assert_allclose(st.total_liab, [4.0, 1.0, 0.0])
    np.testing.assert_allclose(st.assets, [2.0, 1.0, 3.0])
    np.testing.assert_allclose(st.equity, [0.0, 0.0, 3.0])
    np.testing.assert_allclose(st.paid, [2.0, 1.0, 0.0])
    np.testing.assert_allclose(st.unpaid, [2.0, 0.0, 0.0])
    assert st.liab[1, 2] == pytest.approx(1.0)
    assert st.pay[0, 1] == pytest.approx(1.0)


def test_three_bank_clearing_verdicts(three_bank):
    assert check_clearing(three_bank, [0.5, 1.0, 1.0]).ok
    bad = check_clearing(three_bank, [0.6, 1.0, 1.0])
    assert not bad and bad.first_violation == 0
    assert not check_clearing(three_bank, [1.0, 1.0, 1.0]).ok


def test_update_step_fixed_point(three_bank):
    np.testing.assert_allclose(update_step(three_bank, [0.5, 1.0, 1.0]), [0.5, 1.0, 1.0])
    np.testing.assert_allclose(update_step(three_bank, [1.0, 1.0, 1.0])[0], 0.5)


def test_lossy_assets(lossy_pair):
    st = evaluate_state(lossy_pair, [1.0, 3 / 7, 3 / 7, 1.0])
    # a defaulting bank only keeps beta of its incoming payments
    assert st.assets[1] == pytest.approx(0.5 * 1.5 * 4 / 7)
    assert check_clearing(lossy_pair, [1.0, 3 / 7, 3 / 7, 1.0]).ok
    assert check_clearing(lossy_pair, [1.0, 0.0, 1.0, 1.0]).ok


def test_batch_check_matches_single(three_bank):
    R = np.array([[0.5, 1, 1], [0.6, 1, 1], [1, 1, 1]], dtype=float)
    ok, bank_ok, _viol = batch_check(three_bank, R)
    assert ok.tolist() == [True, False, False]
    assert bank_ok.shape == R.shape


def test_duplicate_contracts_are_summed():
    s = build_system([1.0, 0.0], [(0, 1, 1.0), (0, 1, 2.0)])
    assert s.debts[(0, 1)] == 3.0


@pytest.mark.parametrize(
    "kwargs,exc",
    [
        (dict(debts={(0, 0): 1.0}), SelfContract),
        (dict(debts={(0, 1): 0.0}), NonPositiveWeight),
        (dict(debts={(0, 1): 1.0}, cdss={(0, 1, 0): 1.0}), SelfReference),
        (dict(debts={(0, 5): 1.0}), ValidationError),
        (dict(debts={(0, 1): 1.0}, labels=["a"]), DimensionMismatch),
        (dict(debts={(0, 1): 1.0}, alpha=1.5), ValidationError),
    ],
)
def test_validation(kwargs, exc):
    with pytest.raises(exc):
        build_system([1.0, 0.0, 0.0], **kwargs)


def test_strict_sanity():
    with pytest.raises(SanityViolation):
        build_system([0, 0, 0], {(0, 1): 1.0}, {(0, 1, 2): 1.0}, strict_sanity=True)
    build_system([0, 0, 0], {(2, 1): 1.0}, {(0, 1, 2): 1.0}, strict_sanity=True)


def test_rates_out_of_range(three_bank):
    with pytest.raises(ValidationError):
        check_clearing(three_bank, [1.2, 1, 1])
    with pytest.raises(ValidationError):
        check_clearing(three_bank, [1, 1])


def test_labels_and_helpers(three_bank):
    assert three_bank.index("w") == 1 and three_bank.label(2) == "v"
    assert three_bank.lossless and three_bank.n == 3
    assert three_bank.max_weight() == 2.0 and three_bank.min_weight() == 2.0
    assert total_externals(three_bank) == 3.0
    np.testing.assert_allclose(rates_from_mapping(three_bank, {"u": 0.5}), [0.5, 1, 1])
    assert three_bank.digest() == build_system(three_bank.externals, three_bank.debts, three_bank.cdss, labels=["u", "w", "v"]).digest()


def test_bank_without_liabilities_never_defaults():
    s = build_system([0.0, 0.0], {(0, 1): 1.0})
    assert check_clearing(s, [0.0, 1.0]).ok
    assert not check_clearing(s, [0.0, 0.5]).ok
