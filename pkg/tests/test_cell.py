import numpy as np
import pytest
from conftest import assert_constants_close, backus_oracle, biphase_laminates, multilayer_laminates
from hypothesis import given
from hypothesis import strategies as st

from lamhom.cell import (
    CellProblemKind,
    effective_cell_solver,
    effective_from_profiles,
    profiles_from_solutions,
    solve_cell_problem,
    solve_cell_problems,
)
from lamhom.homogenizer import ProfileKind, effective_constants_biphase, perturbation_profiles_biphase
from lamhom.materials import CONSTANT_NAMES, Laminate, make_isotropic_phase


@given(biphase_laminates())
def test_agrees_with_closed_form(lam):
    a = effective_cell_solver(lam)
    b = effective_constants_biphase(lam)
    for name in CONSTANT_NAMES:
        assert a.get(name) == pytest.approx(b.get(name), rel=1e-11, abs=1e-12), name


@given(biphase_laminates())
def test_profiles_agree_with_closed_form(lam):
    solved = profiles_from_solutions(solve_cell_problems(lam))
    closed = perturbation_profiles_biphase(lam)
    xi = np.linspace(0.0, 1.0, 37)
    for kind in ProfileKind:
        scale = max(1.0, closed[kind].max_abs())
        np.testing.assert_allclose(solved[kind](xi), closed[kind](xi), atol=1e-12 * scale)


@given(multilayer_laminates())
def test_multilayer_matches_layered_averages(lam):
    assert_constants_close(effective_cell_solver(lam), backus_oracle(lam), rtol=1e-10, atol_scale=1.0)


@given(multilayer_laminates(max_layers=4), st.integers(min_value=2, max_value=5))
def test_subdivision_invariance(lam, k):
    a = effective_cell_solver(lam)
    b = effective_cell_solver(lam.subdivided(k))
    for name in CONSTANT_NAMES:
        assert a.get(name) == pytest.approx(b.get(name), rel=1e-11, abs=1e-12), name


@given(multilayer_laminates())
def test_stiffness_symmetric_and_transport_diagonal(lam):
    eff = effective_cell_solver(lam)
    assert eff.C2211 == pytest.approx(eff.C1122, rel=1e-12, abs=1e-14)
    assert eff.K12 == 0.0 and eff.D12 == 0.0
    assert eff.is_admissible()


@given(multilayer_laminates())
def test_each_solution_closes_and_conserves_flux(lam):
    for sol in solve_cell_problems(lam):
        a, b = {
            CellProblemKind.CONDUCTION: (lam.column("K22"), lam.column("K22")),
            CellProblemKind.MECH_12: (lam.column("C1212"), lam.column("C1212")),
        }.get(sol.kind, (None, None))
        assert abs(sol.closure()) <= 1e-12 * max(1.0, np.max(np.abs(sol.slopes)))
        if a is not None:
            np.testing.assert_allclose(a * sol.slopes + b, sol.interface_constant, rtol=1e-12, atol=1e-12)
        prof = sol.profile()
        assert abs(prof.mean()) <= 1e-12 * max(1.0, prof.max_abs())


def test_single_layer_has_zero_fluctuations():
    p = make_isotropic_phase(2.0, 0.3, alpha=1.0, beta=0.5, K=3.0, D=0.7)
    lam = Laminate.from_phases([p], [1.0])
    for sol in solve_cell_problems(lam):
        np.testing.assert_array_equal(sol.slopes, [0.0])
    eff = effective_cell_solver(lam)
    for name in CONSTANT_NAMES:
        assert eff.get(name) == pytest.approx(p.get(name), rel=1e-15)


def test_conduction_slopes_spot_value():
    a = make_isotropic_phase(1.0, 0.3, K=10.0)
    b = make_isotropic_phase(1.0, 0.3, K=1.0)
    sol = solve_cell_problem(Laminate.biphase(a, b, 1.0), CellProblemKind.CONDUCTION)
    np.testing.assert_allclose(sol.slopes, [-9 / 11, 9 / 11], rtol=1e-14)
    assert sol.interface_constant == pytest.approx(20 / 11, rel=1e-14)


def test_missing_solutions_rejected():
    lam = Laminate.biphase(make_isotropic_phase(1.0, 0.3), make_isotropic_phase(2.0, 0.3), 1.0)
    with pytest.raises(ValueError, match="missing"):
        effective_from_profiles(lam, solve_cell_problems(lam)[:-1])


def test_kind_to_profile_mapping_is_one_to_one():
    assert len({k.profile_kind for k in CellProblemKind}) == len(CellProblemKind) == len(ProfileKind)
