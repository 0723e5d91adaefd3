import math

import pytest
from hypothesis import given, strategies as st

from specfree import gatecost
from specfree.gatecost import CostQuery, Hardware, Model


def table(model, hw, n, k):
    """Independent transcription of the closed-form cost table (pr_cnots, ctl_cnots, pr_depth, ctl_depth)."""
    if model is Model.TFIM_1D and hw is Hardware.ALL_TO_ALL:
        return (2 * n - 2) * k, (6 * n - 4) * k, 4 * k, 2 * math.ceil(math.log2(n)) + 10 * k
    if model is Model.TFIM_1D:
        return (2 * n - 2) * k, 6 * (n - 1) + (6 * n - 4) * k, 4 * k, 6 * math.ceil(n / 2) + 10 * k
    return 32 * k * n * (n - 1) // 2, 48 * k * n * (n - 1) // 2 + 6 * math.ceil((n - 1) ** 2 / 2), 32 * k, 48 * k + 3 * (n - 2)


@pytest.mark.parametrize("n", [2, 10, 100])
@pytest.mark.parametrize("k", [1, 10, 25])
@pytest.mark.parametrize("model,hw", sorted(gatecost.VALID))
def test_table_grid(model, hw, n, k):
    pr = gatecost.trotter_cost(CostQuery(model, hw, n, k, True))
    ctl = gatecost.trotter_cost(CostQuery(model, hw, n, k, False))
    assert (pr.cnots, ctl.cnots, pr.depth, ctl.depth) == table(model, hw, n, k)


@given(st.integers(1, 5000), st.integers(1, 200), st.sampled_from(sorted(gatecost.VALID)))
def test_formulas_everywhere(n, k, combo):
    model, hw = combo
    pr = gatecost.trotter_cost(CostQuery(model, hw, n, k, True))
    ctl = gatecost.trotter_cost(CostQuery(model, hw, n, k, False))
    assert (pr.cnots, ctl.cnots, pr.depth, ctl.depth) == table(model, hw, n, k)
    assert ctl.depth > pr.depth or (model is Model.FH2D_SPINLESS and n < 2)


def test_depth_budget_claims():
    q = CostQuery("tfim_1d", "line_1d", 100, 1)
    assert gatecost.max_layers(q, 100) == 25
    assert gatecost.max_layers(q.with_pr(False), 100) == 0


def test_cnot_ratio_about_three():
    q = CostQuery("tfim_1d", "all_to_all", 100, 25)
    assert gatecost.cnot_ratio(q, q.with_pr(False)) == pytest.approx(3.0, rel=0.01)
    one = CostQuery("tfim_1d", "all_to_all", 1, 1)
    with pytest.raises(ZeroDivisionError):
        gatecost.cnot_ratio(one, one.with_pr(False))


def test_invalid_combination_and_values():
    with pytest.raises(ValueError):
        CostQuery("tfim_1d", "grid_2d", 4, 1)
    with pytest.raises(ValueError):
        CostQuery("tfim_1d", "line_1d", 0, 1)


def test_ghz_text_depth_alternate():
    q = CostQuery("fh2d_spinless", "grid_2d", 10, 1, False)
    assert gatecost.trotter_cost(q).depth == 48 + 24
    assert gatecost.trotter_cost(q, fh_ghz_text_depth=True).depth == 48 + 12


def test_markdown_table():
    md = gatecost.table_markdown(100, 25)
    assert md.count("\n") == 4 and "| tfim_1d | line_1d | 4950 | 15494 | 100 | 550 |" in md
