import math

import numpy as np
import pytest

from weakduality import core, oracle
from weakduality import doubleslit as ds
from weakduality.core import PhysConfig
from weakduality.doubleslit import Selection
from weakduality.errors import DomainError, GridResolutionError
from weakduality.oracle import Grid, GridState

SIGMA = 0.02


@pytest.fixture(scope="module")
def grid():
    return Grid.for_sigma(SIGMA)


class TestGrid:
    @pytest.mark.parametrize("points", [1000, 512, 3000])
    def test_points_must_be_large_power_of_two(self, points):
        with pytest.raises(GridResolutionError):
            Grid(30.0, points)

    def test_half_width_positive(self):
        with pytest.raises(GridResolutionError):
            Grid(0.0, 1024)

    def test_lattice(self):
        g = Grid(4.0, 1024)
        assert g.dx == 8 / 1024
        assert g.x[0] == -4.0 and g.x[-1] == pytest.approx(4.0 - g.dx)
        assert not g.x.flags.writeable and not g.k.flags.writeable
        assert g.k[1] == pytest.approx(2 * math.pi / 8)

    def test_for_sigma_satisfies_its_own_checks(self, skewed_cfg):
        for sigma in (0.1, 0.02, 0.004):
            for c in (PhysConfig(), skewed_cfg):
                g = Grid.for_sigma(sigma, c)
                g.check(sigma, c)
                assert g.half_width > Grid.required_half_width(sigma, c)

    def test_rejects_unresolved_width(self):
        with pytest.raises(GridResolutionError, match="grid steps"):
            Grid(30.0, 2 ** 14).check_resolves(0.001)

    def test_rejects_small_box(self):
        # a 0.02-wide slit spreads to ~25 by t = T, far past a box of half-width 30 with its images
        with pytest.raises(GridResolutionError, match="half_width"):
            Grid(30.0, 2 ** 14).check_extent(0.02, PhysConfig())

    def test_for_sigma_domain(self):
        with pytest.raises(DomainError):
            Grid.for_sigma(0.0)


class TestStates:
    def test_grid_state_shape(self):
        g = Grid(4.0, 1024)
        with pytest.raises(DomainError):
            GridState(g, np.zeros(512))
        with pytest.raises(DomainError):
            GridState(g, np.zeros((3, 1024)))
        s = GridState(g, np.ones(1024))
        assert s.amplitudes.shape == (1, 1024) and not s.tagged
        with pytest.raises(ValueError):
            s.amplitudes[0, 0] = 2

    @pytest.mark.parametrize("tagged", [False, True])
    @pytest.mark.parametrize("which", ["both", "plus", "minus"])
    def test_slit_state_normalized(self, grid, tagged, which):
        s = oracle.make_slit_state(SIGMA, tagged, grid, which=which)
        assert s.norm == pytest.approx(1.0, abs=1e-13)
        assert s.tagged == tagged

    def test_single_slit_location(self, grid):
        s = oracle.make_slit_state(SIGMA, False, grid, which="minus")
        density = np.abs(s.amplitudes[0]) ** 2
        assert np.sum(grid.x * density) * grid.dx == pytest.approx(-1.0, abs=1e-12)

    def test_bad_which(self, grid):
        with pytest.raises(DomainError):
            oracle.make_slit_state(SIGMA, False, grid, which="left")

    def test_detect_needs_matching_spinor(self, grid):
        s = oracle.make_slit_state(SIGMA, True, grid)
        with pytest.raises(DomainError):
            oracle.detect_amplitude(s, 0.0, SIGMA)
        with pytest.raises(DomainError):
            oracle.detect_amplitude(oracle.make_slit_state(SIGMA, False, grid), 0.0, SIGMA, (0.0, 0.0))


class TestPropagation:
    def test_unitary(self, grid):
        s = oracle.make_slit_state(SIGMA, True, grid)
        assert oracle.propagate(s, 1.0).norm == pytest.approx(s.norm, abs=1e-12)

    def test_backward_inverts_forward(self, grid):
        s = oracle.make_slit_state(SIGMA, False, grid)
        back = oracle.unpropagate(oracle.propagate(s, 0.7), 0.7)
        assert np.max(np.abs(back.amplitudes - s.amplitudes)) < 1e-10

    def test_negative_time(self, grid):
        s = oracle.make_slit_state(SIGMA, False, grid)
        with pytest.raises(DomainError):
            oracle.propagate(s, -1.0)
        with pytest.raises(DomainError):
            oracle.unpropagate(s, -1.0)

    def test_zero_time(self, grid):
        s = oracle.make_slit_state(SIGMA, False, grid)
        assert oracle.propagate(s, 0.0) is s

    def test_matches_analytic_gaussian(self, skewed_cfg):
        c = skewed_cfg
        sigma, t = 0.1, 0.9
        g = Grid.for_sigma(sigma, c)
        s = oracle.make_slit_state(sigma, False, g, c, which="plus")
        moved = oracle.propagate(s, t, c).amplitudes[0]
        exact = core.evaluate(core.evolve_gaussian(core.gaussian_from_slit(c.x_i, sigma, c), t, c), g.x)
        assert np.max(np.abs(moved - exact)) < 1e-10

    def test_raw_fringe_matches_gaussian_closed_form(self, grid):
        for x_f in (0.0, 0.5, -1.1):
            got = oracle.oracle_fringe_probability(x_f, SIGMA, grid, normalized=False)
            assert got == pytest.approx(ds.fringe_probability_gaussian(x_f, SIGMA, SIGMA), rel=1e-9)


class TestWeakValues:
    def test_position_at_detection(self, grid):
        r = oracle.oracle_weak_value_x(1.0, Selection(0.4), SIGMA, grid)
        assert r.value == pytest.approx(0.4, abs=1e-3)
        assert not r.near_singular

    def test_trajectory_start(self, grid):
        r = oracle.oracle_weak_value_x(0.0, Selection(0.5), SIGMA, grid)
        assert r.value == pytest.approx(ds.weak_trajectory(0.5).values[0], abs=1e-2)

    def test_midflight_position(self, grid):
        r = oracle.oracle_weak_value_x(0.5, Selection(0.5), SIGMA, grid)
        assert r.value == pytest.approx(complex(0.25, -0.27315124492189524), abs=1e-2)

    def test_momentum(self, grid):
        # at this width the smoothing bias is about 2e-3; the default width brings it under 1e-3
        got = oracle.oracle_weak_value_p(Selection(0.5), SIGMA, grid)
        assert got == pytest.approx(ds.momentum_weak_value(0.5).value, abs=5e-3)

    def test_tagged_components_add_up(self, grid):
        sel = Selection(0.3, (1.2, 0.4))
        total = oracle.oracle_weak_value_x(0.5, sel, SIGMA, grid, "x").value
        plus = oracle.oracle_weak_value_x(0.5, sel, SIGMA, grid, "x+").value
        minus = oracle.oracle_weak_value_x(0.5, sel, SIGMA, grid, "x-").value
        assert plus + minus == pytest.approx(total, abs=1e-12)

    def test_operator_validation(self, grid):
        with pytest.raises(DomainError):
            oracle.oracle_weak_value_x(0.5, Selection(0.3), SIGMA, grid, "p")
        with pytest.raises(DomainError):
            oracle.oracle_weak_value_x(0.5, Selection(0.3), SIGMA, grid, "x+")
        with pytest.raises(DomainError):
            oracle.oracle_weak_value_x(1.5, Selection(0.3), SIGMA, grid)

    def test_refuses_too_small_lattice(self):
        with pytest.raises(GridResolutionError):
            oracle.oracle_weak_value_p(Selection(0.5), SIGMA, Grid(30.0, 2 ** 14))


class TestConvergenceSweep:
    def _check(self, offset):
        return oracle.SweepCheck("toy", lambda s, g: 2.0 + offset(s), 2.0, 1e-3)

    def test_converging(self):
        g = Grid.for_sigma(0.01)
        report = oracle.convergence_sweep(self._check(lambda s: s * s), (0.1, 0.05, 0.02, 0.01), g)
        assert report.passed and report.monotone
        assert report.final_error == pytest.approx(1e-4)
        assert [r.sigma for r in report.rows] == [0.1, 0.05, 0.02, 0.01]

    def test_stalling(self):
        g = Grid.for_sigma(0.01)
        report = oracle.convergence_sweep(self._check(lambda s: 0.01), (0.1, 0.05, 0.01), g)
        assert not report.passed
        assert "exceeds tolerance" in report.message

    def test_oscillating(self):
        g = Grid.for_sigma(0.01)
        wobble = {0.1: 1e-4, 0.05: 5e-4, 0.02: 1e-5, 0.01: 6e-4}
        report = oracle.convergence_sweep(self._check(lambda s: wobble[s]), (0.1, 0.05, 0.02, 0.01), g)
        assert not report.monotone and not report.passed

    def test_relative_error(self):
        check = oracle.SweepCheck("rel", lambda s, g: 4.0, 2.0, 1e-3, relative=True)
        assert check.error(4.0) == pytest.approx(1.0)

    def test_widths_must_decrease(self):
        g = Grid.for_sigma(0.01)
        with pytest.raises(DomainError):
            oracle.convergence_sweep(self._check(lambda s: 0.0), (0.01, 0.1), g)
        with pytest.raises(DomainError):
            oracle.convergence_sweep(self._check(lambda s: 0.0), (), g)

    def test_unresolvable_width_raises(self):
        with pytest.raises(GridResolutionError):
            oracle.convergence_sweep(self._check(lambda s: 0.0), (0.1, 0.0001), Grid.for_sigma(0.01))
