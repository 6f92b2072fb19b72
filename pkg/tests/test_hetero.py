import json
import math

import numpy as np
import pytest
from conftest import biphase_laminates
from hypothesis import given, settings
from hypothesis import strategies as st

from lamhom.hetero import (
    GridError,
    MicroGrid,
    compare,
    downscale_first_order,
    homogenize,
    micro_errors,
    moving_average,
    profiles_for,
    run_comparison,
    solve_heterogeneous,
    upscale,
)
from lamhom.homogenizer import EffectiveProperties, ProfileKind
from lamhom.macro import HarmonicLoad, load_for_amplitudes, solve_homogenized
from lamhom.materials import Laminate, biphase_from_ratios, make_isotropic_phase

PHASE = make_isotropic_phase(2.0, 0.3, alpha=1.5, beta=-0.7, K=3.0, D=0.5)
FULL_LOAD = HarmonicLoad(B=1.0, R=0.8, S=-1.2, m=1, n=2, p=1)


def single_layer(cells: int) -> Laminate:
    return Laminate.from_phases([PHASE], [1.0], epsilon=1.0 / cells)


def fig_laminate(thermodiffusive: bool) -> Laminate:
    if thermodiffusive:
        return biphase_from_ratios(rho_C=10, rho_alpha=10, rho_beta=10, rho_K=10, rho_D=10, zeta=1.0)
    return biphase_from_ratios(rho_C=10, rho_alpha=10, rho_K=10, zeta=1.0, beta_b=0.0)


def fig_load(lam: Laminate, thermodiffusive: bool, m=1, n=1, p=1) -> HarmonicLoad:
    return load_for_amplitudes(homogenize(lam), 2, xi_alpha=1.0, xi_beta=1.0 if thermodiffusive else 0.0, m=m, n=n, p=p)


# ------------------------------------------------------------------ grid

def test_grid_nodes_hit_every_interface():
    p = make_isotropic_phase(1.0, 0.3)
    lam = Laminate.from_phases([p, p, p], [0.2, 0.3, 0.5], epsilon=0.25)
    g = MicroGrid(lam, 4, 5)
    assert g.size == 4 * 3 * 5
    assert g.L == pytest.approx(1.0)
    assert g.h.sum() == pytest.approx(g.L, rel=1e-15)
    for c in range(4):
        for edge in lam.interfaces[:-1]:
            assert np.min(np.abs(g.x - (c + edge) * 0.25)) < 1e-15
    assert g.weights.sum() == pytest.approx(g.L, rel=1e-15)


def test_grid_rejects_low_resolution_and_misalignment():
    lam = single_layer(4)
    with pytest.raises(GridError):
        MicroGrid(lam, 4, 3)
    with pytest.raises(GridError):
        MicroGrid(lam, 0, 8)
    other = Laminate.biphase(PHASE, PHASE, 0.3, epsilon=0.25)
    grid = MicroGrid(Laminate.biphase(PHASE, PHASE, 1.0, epsilon=0.25), 4, 8)
    with pytest.raises(GridError, match="interfaces"):
        solve_heterogeneous(other, HarmonicLoad(B=1.0), grid)


def test_solver_preconditions():
    lam = single_layer(4)
    grid = MicroGrid(lam, 4, 8)
    with pytest.raises(ValueError, match="direction"):
        solve_heterogeneous(lam, HarmonicLoad(direction=1, B=1.0), grid)
    with pytest.raises(GridError, match="under-resolved"):
        solve_heterogeneous(lam, HarmonicLoad(B=1.0, m=5), grid)
    with pytest.raises(GridError, match="period"):
        solve_heterogeneous(lam, HarmonicLoad(B=1.0, L=2.0), grid)


# ------------------------------------------------------------------ solver

def test_zero_sources_give_zero_fields():
    lam = fig_laminate(True).with_epsilon(0.25)
    micro = solve_heterogeneous(lam, HarmonicLoad(B=0.0), MicroGrid(lam, 4, 8))
    for name in ("u", "theta", "eta", "sigma", "q", "j"):
        assert np.all(getattr(micro, name) == 0.0)


def test_single_phase_matches_closed_form():
    lam = single_layer(8)
    micro = solve_heterogeneous(lam, FULL_LOAD, MicroGrid(lam, 8, 128))
    macro = solve_homogenized(EffectiveProperties.from_phase(PHASE), FULL_LOAD)
    x = micro.x
    for got, exact in ((micro.u, macro.U(x)), (micro.theta, macro.Theta(x)), (micro.eta, macro.Upsilon(x))):
        assert np.max(np.abs(got - exact)) <= 1e-4 * np.max(np.abs(exact))
    # nodal fluxes follow from the exact source integrals
    sigma = PHASE.C2222 * macro.U(x, 1) - PHASE.alpha22 * macro.Theta(x) - PHASE.beta22 * macro.Upsilon(x)
    assert np.max(np.abs(micro.sigma - sigma)) <= 1e-4 * np.max(np.abs(sigma))
    np.testing.assert_allclose(micro.q, -PHASE.K22 * macro.Theta(x, 1), atol=1e-4 * np.max(np.abs(micro.q)))


def test_second_order_grid_convergence():
    lam = single_layer(4)
    macro = solve_homogenized(EffectiveProperties.from_phase(PHASE), FULL_LOAD)
    errors = []
    for n in (8, 16, 32, 64):
        micro = solve_heterogeneous(lam, FULL_LOAD, MicroGrid(lam, 4, n))
        w = micro.grid.weights
        d = micro.u - macro.U(micro.x)
        errors.append(math.sqrt(np.dot(w, d * d)))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 1.9), orders


@settings(max_examples=25)
@given(biphase_laminates(), st.integers(2, 6), st.sampled_from([4, 8, 16]))
def test_flux_continuity_and_zero_mean(lam, cells, nodes):
    lam = lam.with_epsilon(1.0 / cells)
    micro = solve_heterogeneous(lam, FULL_LOAD, MicroGrid(lam, cells, nodes))
    assert max(micro.flux_jumps.values()) <= 1e-10
    for name in ("u", "theta", "eta"):
        f = getattr(micro, name)
        assert abs(micro.mean(name)) <= 1e-12 * max(np.max(np.abs(f)), 1e-300)
    assert max(micro.source_imbalance.values()) <= 1e-12


def test_cell_averaged_heat_flux_matches_homogenized_flux():
    lam = fig_laminate(False).with_epsilon(0.1)
    load = HarmonicLoad(B=0.0, R=1.0, n=1)
    micro = solve_heterogeneous(lam, load, MicroGrid(lam, 10, 64))
    macro = solve_homogenized(homogenize(lam), load)
    x = micro.x
    centers = (np.arange(10) + 0.5) * 0.1
    q_avg = moving_average(x, micro.q, 1.0, 0.1, centers)
    q_hom = moving_average(x, -macro.K * macro.Theta(x, 1), 1.0, 0.1, centers)
    assert np.max(np.abs(q_avg - q_hom)) <= 1e-5 * np.max(np.abs(q_hom))


# ------------------------------------------------------------------ scale transitions

def test_moving_average_of_constant_and_cosine():
    x = np.sort(np.random.default_rng(3).uniform(0, 1, 400))
    x[0] = 0.0
    np.testing.assert_allclose(moving_average(x, np.full_like(x, 2.5), 1.0, 0.1), 2.5, rtol=1e-14)
    dense = np.arange(4096) / 4096
    f = np.cos(2 * np.pi * dense)
    eps = 0.1
    sinc = math.sin(math.pi * eps) / (math.pi * eps)
    np.testing.assert_allclose(moving_average(dense, f, 1.0, eps), sinc * f, atol=1e-6)


def test_upscaled_fluctuation_vanishes():
    lam = fig_laminate(True).with_epsilon(0.125)
    grid = MicroGrid(lam, 8, 16)
    prof = profiles_for(lam)[ProfileKind.M2]
    fluct = prof(grid.x / lam.epsilon)
    avg = moving_average(grid.x, fluct, grid.L, lam.epsilon)
    assert np.max(np.abs(avg)) <= 1e-14 * prof.max_abs()


def test_upscale_needs_two_cells():
    lam = single_layer(1)
    micro = solve_heterogeneous(lam, HarmonicLoad(B=1.0), MicroGrid(lam, 1, 16))
    with pytest.raises(GridError):
        upscale(micro, lam)


def test_downscale_identical_phases_equals_macro():
    lam = Laminate.biphase(PHASE, PHASE, 0.4, epsilon=0.1)
    macro = solve_homogenized(homogenize(lam), FULL_LOAD)
    pred = downscale_first_order(macro, profiles_for(lam), lam)
    x = pred.x
    np.testing.assert_allclose(pred.u, macro.U(x), atol=1e-15)
    np.testing.assert_allclose(pred.theta, macro.Theta(x), atol=1e-15)
    np.testing.assert_allclose(pred.eta, macro.Upsilon(x), atol=1e-15)


def test_downscaled_temperature_slope_per_layer():
    lam = fig_laminate(False).with_epsilon(0.1)
    load = HarmonicLoad(B=0.0, R=1.0)
    macro = solve_homogenized(homogenize(lam), load)
    grid = MicroGrid(lam, 10, 64)
    pred = downscale_first_order(macro, profiles_for(lam), lam, grid)
    slopes = np.diff(np.append(pred.theta, pred.theta[0])) / grid.h
    mid = grid.x + 0.5 * grid.h
    m2 = profiles_for(lam)[ProfileKind.M2]
    xi = mid / lam.epsilon
    expected = (1.0 + m2.derivative(xi)) * macro.Theta(mid, 1) + lam.epsilon * m2(xi) * macro.Theta(mid, 2)
    assert np.max(np.abs(slopes - expected)) <= 1e-3 * np.max(np.abs(expected))
    # the leading part alone is off by the epsilon * M * Theta'' term
    leading = (1.0 + m2.derivative(xi)) * macro.Theta(mid, 1)
    assert np.max(np.abs(slopes - leading)) <= 1.01 * lam.epsilon * m2.max_abs() * np.max(np.abs(macro.Theta(mid, 2)))


def test_downscale_converges_to_macro_as_cells_shrink():
    base = fig_laminate(True)
    gaps = []
    for cells in (5, 10, 20, 40):
        lam = base.with_epsilon(1.0 / cells)
        macro = solve_homogenized(homogenize(lam), fig_load(lam, True))
        pred = downscale_first_order(macro, profiles_for(lam), lam, nodes_per_layer=8)
        gaps.append(np.max(np.abs(pred.theta - macro.Theta(pred.x))) / macro.theta_amp)
    # the corrector is proportional to epsilon, so the gap halves with each refinement
    np.testing.assert_allclose(np.array(gaps[1:]) / np.array(gaps[:-1]), 0.5, rtol=0.1)


@pytest.mark.parametrize("thermodiffusive", [False, True])
def test_downscaled_fields_track_direct_solve(thermodiffusive):
    errs = {}
    for cells in (10, 20):
        run = run_comparison(fig_laminate(thermodiffusive), fig_load(fig_laminate(thermodiffusive), thermodiffusive), cells)
        pred = downscale_first_order(run.macro, profiles_for(run.laminate), run.laminate, run.micro.grid)
        errs[cells] = micro_errors(pred, run.micro)
    for name, e in errs[10].items():
        if e is None:
            continue
        assert e["l2"] <= 0.10
        assert errs[20][name]["l2"] < e["l2"]


@pytest.mark.parametrize("cells", [5, 10, 20])
def test_up_down_consistency_within_sinc_bound(cells):
    lam = fig_laminate(True).with_epsilon(1.0 / cells)
    macro = solve_homogenized(homogenize(lam), fig_load(lam, True))
    grid = MicroGrid(lam, cells, 32)
    pred = downscale_first_order(macro, profiles_for(lam), lam, grid)
    bound = 1.0 - math.sin(math.pi / cells) / (math.pi / cells)
    for up, name in zip(upscale(pred, lam), ("U", "Theta", "Upsilon")):
        ref = moving_average(grid.x, getattr(macro, name)(grid.x), grid.L, lam.epsilon)
        assert np.max(np.abs(up - ref)) <= bound * np.max(np.abs(ref))


# ------------------------------------------------------------------ comparison

def test_single_phase_comparison_at_discretization_level():
    # the error is the grid error (k h)^2 / 24, below 1e-6 once a wavelength holds 2560 nodes
    load = HarmonicLoad(B=1.0, R=0.8, S=-1.2)
    for lam, cells in ((Laminate.from_phases([PHASE], [1.0]), 40), (Laminate.biphase(PHASE, PHASE, 1.0), 20)):
        report = run_comparison(lam, load, cells, 64).report
        for name in ("U", "Theta", "Upsilon"):
            assert report.l2(name) < 1e-6, (lam.n_layers, name)


@pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (1, 2)])
def test_thermoelastic_comparison_within_five_percent(m, n):
    lam = fig_laminate(False)
    report = run_comparison(lam, fig_load(lam, False, m=m, n=n), 10, 64).report
    assert report.l2("U") <= 0.05 and report.l2("Theta") <= 0.05
    assert report.errors["Upsilon"] is None


def test_errors_shrink_with_finer_microstructure():
    lam = fig_laminate(True)
    load = fig_load(lam, True)
    runs = [run_comparison(lam, load, c, 64).report for c in (5, 10, 20)]
    for name in ("U", "Theta", "Upsilon"):
        assert runs[0].l2(name) > runs[1].l2(name) > runs[2].l2(name)


def test_report_serializes_with_convention():
    lam = fig_laminate(False)
    run = run_comparison(lam, fig_load(lam, False), 4, 8)
    data = json.loads(run.report.to_json())
    assert "moving average" in data["averaging"]
    assert data["grid"]["cells"] == 4 and data["grid"]["nodes"] == 64
    assert data["errors"]["Upsilon"] is None
    assert all(v >= 0 for e in data["errors"].values() if e for v in e.values())
    assert set(data["runtimes"]) >= {"homogenized_s", "heterogeneous_s"}


def test_compare_uses_same_smoothing_on_both_sides():
    # feeding the macro fields back in as "micro" data gives a zero error
    lam = fig_laminate(True).with_epsilon(0.1)
    load = fig_load(lam, True)
    macro = solve_homogenized(homogenize(lam), load)
    micro = solve_heterogeneous(lam, load, MicroGrid(lam, 10, 8))
    micro.u, micro.theta, micro.eta = macro.U(micro.x), macro.Theta(micro.x), macro.Upsilon(micro.x)
    report = compare(macro, micro, lam)
    assert all(e["l2"] == 0.0 for e in report.errors.values())


def test_run_comparison_rejects_bad_ratio():
    with pytest.raises(GridError):
        run_comparison(fig_laminate(False), HarmonicLoad(B=1.0), 1)
    with pytest.raises(GridError):
        run_comparison(fig_laminate(False), HarmonicLoad(B=1.0), 2.5)
