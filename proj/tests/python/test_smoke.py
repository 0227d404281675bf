import json
import math

import numpy as np
import pytest

import thermowork as tw


def test_dimer_scf_conserves_particle_number():
    spec = tw.make_chain(2, 1.0)
    ens = tw.half_filling(2, 1.0, tw.EnsembleKind.canonical)
    state = tw.scf_solve(spec, ens, tw.staggered_potential(spec, 1.0))
    assert state.residual < 1e-10
    assert abs(state.densities.sum() - 2.0) < 1e-10
    # Site 0 sits at -v0 and fills up.
    assert state.densities[0] > 1.0


def test_noninteracting_lr_matches_exact():
    spec = tw.make_chain(2, 0.0)
    ens = tw.half_filling(2, 1.0, tw.EnsembleKind.canonical)
    lr = tw.run_lr_point(spec, ens, 1.0)
    ex = tw.run_exact_point(spec, ens, 1.0)
    np.testing.assert_allclose(lr.isothermal, ex.isothermal, rtol=1e-10, atol=1e-12)
    assert lr.spectrum.total() == pytest.approx(ex.relaxation.total(), rel=1e-10)


def test_cumulants_positive_and_fano_bounded():
    spec = tw.make_chain(4, 2.0)
    ens = tw.half_filling(4, 1.0)
    lr = tw.run_lr_point(spec, ens, 1.0)
    for tau in (0.1, 1.0, 10.0):
        report = tw.cumulant_report(lr.spectrum, tw.DriveProtocol(1.0, 0.01, tau), 4, 2.0)
        assert all(c.total() >= 0.0 for c in report.cumulants)
        assert report.beta_fano >= 2.0 - 1e-12


def test_relaxation_function_at_zero_is_total_weight():
    spec = tw.make_chain(3, 1.0)
    lr = tw.run_lr_point(spec, tw.half_filling(3, 2.0), 0.5)
    assert lr.spectrum.relaxation_function(0.0) == pytest.approx(lr.spectrum.total(), rel=1e-12)


def test_benchmark_u_zero_exact():
    table = tw.benchmark_dimer(tw.EnsembleKind.grand_canonical, U=[0.0])
    assert len(table.rows) == 12
    assert max(table.mean_rel_err) < 1e-8


def test_hxc_half_filling_value():
    h = tw.hxc_potential(1.0, 4.0, 1.0)
    assert h["v_hxc"] == pytest.approx(2.0, rel=1e-12)
    assert h["f_hxc"] > 0.0


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        tw.make_chain(1, 1.0).validate()
    with pytest.raises(tw.CapacityError):
        tw.run_lr_point(tw.make_chain(20, 1.0), tw.half_filling(20, 1.0, tw.EnsembleKind.canonical), 1.0)


def test_presets_are_valid_json():
    for name in tw.preset_names():
        cfg = json.loads(tw.preset_json(name))
        assert cfg["schema_version"] == 1
        assert math.isfinite(cfg["ensemble"]["beta"])
