import numpy as np
import pytest

from fclear.errors import (
    EnumerationTooLarge,
    NotAClearingVector,
    PropagationDiverged,
    TooLarge,
    ValidationError,
)
from fclear.gadgets import SystemBuilder, add_branching
from fclear.model import build_system, check_clearing
from fclear.solver import (
    Driver,
    ParetoVerdict,
    SolveStatus,
    enumerate_binary_solutions,
    enumerate_default_sets,
    iterate_to_fixpoint,
    pareto_compare,
    propagate,
    solution_space_summary,
)


def branching(dx=2.0, dy=1.0):
    b = SystemBuilder()
    x, y = add_branching(b, dx, dy)
    return b.finalize(), int(x), int(y)


def test_picard_three_bank(three_bank):
    rep = iterate_to_fixpoint(three_bank)
    assert rep.status is SolveStatus.CONVERGED
    assert rep.iterations <= 3


def test_clean_gadget_oscillates_from_all_ones():
    s, x, y = branching()
    rep = iterate_to_fixpoint(s)
    assert rep.status is SolveStatus.OSCILLATING and rep.rates is None


def test_unit_gadget_damped_converges_to_half():
    s, x, y = branching(1.0, 1.0)
    r0 = np.ones(s.n)
    r0[[x, y]] = 0.3
    rep = iterate_to_fixpoint(s, r0, damping=0.5)
    assert rep.converged
    assert rep.rates[x] == pytest.approx(0.5) and rep.rates[y] == pytest.approx(0.5)


def test_unit_gadget_flags_continuum():
    s, _x, _y = branching(1.0, 1.0)
    sols = enumerate_default_sets(s)
    assert sols.continuum
    a, b = sols.witnesses
    assert check_clearing(s, a).ok and check_clearing(s, b).ok


def test_max_iter_and_bad_damping(three_bank):
    s, _x, _y = branching(1.0, 1.0)
    r0 = np.ones(s.n)
    r0[1] = 0.2
    rep = iterate_to_fixpoint(s, r0, damping=0.01, max_iter=3)
    assert rep.status is SolveStatus.MAX_ITER
    with pytest.raises(ValidationError):
        iterate_to_fixpoint(three_bank, damping=0.0)


def test_default_set_labels(lossy_pair):
    sols = enumerate_default_sets(lossy_pair)
    assert sols.labels == ["0010", "0100", "0110"]


def test_default_sets_too_large():
    s = build_system([0.0] * 17, {(0, 1): 1.0})
    with pytest.raises(TooLarge):
        enumerate_default_sets(s)


def test_driver_enumeration_and_gates():
    b = SystemBuilder()
    x1, y1 = add_branching(b)
    x2, y2 = add_branching(b)
    s = b.finalize()
    states = ((0.0, 1.0), (1.0, 0.0))
    d0 = Driver("a", (int(x1), int(y1)), states)
    d1 = Driver("b", (int(x2), int(y2)), states)
    sols = enumerate_binary_solutions(system=s, drivers=[d0, d1])
    assert sols.labels == ["00", "01", "10", "11"]
    assert all(check_clearing(s, r).ok for r in sols.solutions)
    # while the first gadget is in state 0 the second is left free, and a free
    # clean gadget oscillates under propagation from all ones
    gated = Driver("b", (int(x2), int(y2)), states, gate=(0, (1,)))
    with pytest.raises(PropagationDiverged) as info:
        enumerate_binary_solutions(system=s, drivers=[d0, gated])
    assert info.value.assignments == ["0*"]
    with pytest.raises(ValidationError):
        enumerate_binary_solutions(system=s, drivers=[Driver("c", (0, 1), states, gate=(3, (0,)))])


def test_enumeration_cap():
    drivers = [Driver(f"d{i}", (0,), ((0.0,), (1.0,))) for i in range(21)]
    s = build_system([0.0], ())
    with pytest.raises(EnumerationTooLarge):
        enumerate_binary_solutions(system=s, drivers=drivers)


def test_propagate_holds_fixed(three_bank):
    R0 = np.array([[0.5, 0.0, 0.0]])
    fixed = np.array([[True, False, False]])
    R, ok = propagate(three_bank, R0, fixed)
    assert ok.all()
    np.testing.assert_allclose(R[0], [0.5, 1.0, 1.0])


def test_pareto_verdicts(lossy_pair):
    a = np.array([1.0, 0.0, 1.0, 1.0])
    b = np.array([1.0, 1.0, 0.0, 1.0])
    mid = np.array([1.0, 3 / 7, 3 / 7, 1.0])
    assert pareto_compare(lossy_pair, a, b) is ParetoVerdict.INCOMPARABLE
    assert pareto_compare(lossy_pair, a, mid) is ParetoVerdict.STRICTLY_BETTER
    assert pareto_compare(lossy_pair, a, a) is ParetoVerdict.EQUAL
    with pytest.raises(NotAClearingVector):
        pareto_compare(lossy_pair, a, np.ones(4))


def test_summary_excludes_dominated(lossy_pair):
    sols = enumerate_default_sets(lossy_pair)
    summ = solution_space_summary(lossy_pair, sols.solutions)
    assert summ.essential_classes == 3
    assert [sols.labels[i] for i in summ.pareto_front] == ["0010", "0100"]
