"""Exit criteria of the package, one test per criterion.

Each test records a PASS/FAIL line (shown in the terminal summary and with
``-s``) and then asserts, so a failing criterion is both reported and red.
Tolerances are the pinned ones; nothing here is loosened to make a
criterion pass.
"""

import io
import math

import numpy as np
import pytest

from weakduality import cli, oracle, weak
from weakduality import doubleslit as ds
from weakduality.core import PhysConfig
from weakduality.doubleslit import Selection
from weakduality.errors import GridResolutionError, SingularTransitionError

pytestmark = pytest.mark.acceptance

CFG = PhysConfig()
DERIVATIVE_XF = (0.0, 0.3, -0.3, 0.5, -0.5, 0.8, -0.8)
INTERIOR_TIMES = (0.2, 0.4, 0.6, 0.8)
# dense sweep away from the zeros at +-pi/2 (defaults: phase = x_f)
SWEEP_XF = [round(x, 10) for x in np.arange(-1.45, 1.4501, 0.01)]


def _zero_offsets_in_steps(xs, probs, dx):
    """Distance of each local minimum of probs to the nearest destructive zero, in units of dx."""
    offsets = []
    for j in range(1, len(probs) - 1):
        if probs[j] < probs[j - 1] and probs[j] <= probs[j + 1]:
            # parabolic refinement of the sampled minimum
            a, b, c = probs[j - 1], probs[j], probs[j + 1]
            step = xs[1] - xs[0]
            x_min = xs[j] + 0.5 * step * (a - c) / (a - 2 * b + c)
            n = round((x_min * CFG.phase_scale - math.pi / 2) / math.pi)
            zero = (math.pi / 2 + n * math.pi) / CFG.phase_scale
            offsets.append(abs(x_min - zero) / dx)
    return offsets


def _unguarded_fringe(x_fs, sigma, grid):
    """Spectral fringe law on ``grid`` without the extent check, to size the wrap-around."""
    x, k = grid.x, grid.k
    g = lambda c: (2 * np.pi * sigma ** 2) ** -0.25 * np.exp(-((x - c) ** 2) / (4 * sigma ** 2))
    psi = g(CFG.x_i) + g(-CFG.x_i)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    psi_t = np.fft.ifft(np.fft.fft(psi) * np.exp(-0.5j * CFG.hbar * CFG.T / CFG.m * k ** 2))
    weight = math.sqrt(8 * math.pi * sigma ** 2) ** 2
    return np.array([abs(np.sum(g(xf) * psi_t) * grid.dx) ** 2 / weight for xf in x_fs])


def test_criterion_01_fringe_law_on_the_stated_lattice(record):
    sigma, grid = 0.02, oracle.Grid(30.0, 2 ** 14)
    xs = [round(x, 10) for x in np.arange(-1.4, 1.4001, 0.1)]
    away = [x for x in xs if abs(math.cos(x * CFG.phase_scale)) > 0.1]
    try:
        rel = max(abs(oracle.oracle_fringe_probability(x, sigma, grid, CFG) / ds.fringe_probability(x, CFG) - 1)
                  for x in away)
        fine = np.linspace(1.2, 1.9, 141)
        probs = [oracle.oracle_fringe_probability(x, sigma, grid, CFG) for x in fine]
        offsets = _zero_offsets_in_steps(fine, probs, grid.dx)
        passed = rel < 1e-3 and bool(offsets) and max(offsets) <= 1.0
        detail = f"max rel. error {rel:.3e} (tol 1e-3), zero offset {max(offsets):.2f} grid steps (tol 1)"
    except GridResolutionError as exc:
        # diagnostics only: what the stated lattice would give with its guard removed
        raw = _unguarded_fringe(away, sigma, grid)
        rel_raw = float(np.max(np.abs(raw / np.array([ds.fringe_probability(x) for x in away]) - 1)))
        passed = False
        detail = (f"sigma = 0.02, L = 30, N = 2^14 rejected: {exc}; "
                  f"unguarded, the wrapped packets give max rel. error {rel_raw:.3f}")
    record(1, passed, detail)
    assert passed, detail


@pytest.fixture(scope="module")
def oracle_setup():
    return oracle.DEFAULT_SIGMA, oracle.DEFAULT_GRID


def test_criterion_02_momentum_weak_value(record, oracle_setup):
    sigma, grid = oracle_setup
    err_a = err_b = 0.0
    for x_f in DERIVATIVE_XF:
        closed = ds.momentum_weak_value(x_f, CFG).value
        branches = ds.momentum_branches(x_f, CFG)
        derived = weak.weak_value_from_derivative(lambda a: branches[0](a) + branches[1](a), h=1e-3)
        err_a = max(err_a, abs(derived - closed))
        err_b = max(err_b, abs(oracle.oracle_weak_value_p(Selection(x_f, cfg=CFG), sigma, grid) - closed))
    passed = err_a < 1e-8 and err_b < 1e-3
    record(2, passed, f"(a) derivative form abs. error {err_a:.2e} (tol 1e-8); "
                      f"(b) grid oracle abs. error {err_b:.2e} (tol 1e-3, sigma = {sigma})")
    assert passed


def test_criterion_03_branch_momenta(record, oracle_setup):
    sigma, grid = oracle_setup
    points = (0.5, -0.8)
    sigmas = oracle.SWEEP_SIGMAS + (sigma,)
    re_err = 0.0
    ims = {s: 0.0 for s in sigmas}
    for which, sign in (("plus", 1), ("minus", -1)):
        for x_f in points:
            expected = CFG.m * (x_f - sign * CFG.x_i) / CFG.T
            for s in sigmas:
                value = oracle.oracle_weak_value_p(Selection(x_f, cfg=CFG), s, grid, which=which)
                ims[s] = max(ims[s], abs(value.imag))
                if s == sigma:
                    re_err = max(re_err, abs(value.real - expected))
    trail = [ims[s] for s in sigmas]
    shrinking = all(b < a for a, b in zip(trail, trail[1:]))
    passed = re_err < 1e-3 and shrinking and trail[-1] < 1e-3
    sweep = ", ".join(f"{s:g}: {ims[s]:.1e}" for s in sigmas)
    record(3, passed, f"Re abs. error {re_err:.2e} (tol 1e-3); max |Im| over the sweep {sweep}")
    assert passed


def test_criterion_04_index_forms(record):
    closed_spread = numeric_spread = 0.0
    for x_f in SWEEP_XF:
        k = ds.plain_branch_amplitudes(x_f, CFG)
        decomp = weak.BranchDecomposition.from_amplitudes(k, ds.branch_momentum_weak_values(x_f, CFG))
        pw = ds.momentum_weak_value(x_f, CFG).value
        forms = [pw.imag, ds.interference_index_closed(x_f, CFG),
                 weak.interference_index_gap(pw, decomp), weak.interference_index_offdiagonal(decomp)]
        closed_spread = max(closed_spread, max(forms) - min(forms))
        definition = weak.interference_index_definition(ds.momentum_branches(x_f, CFG))
        numeric_decomp = weak.branch_decomposition(ds.momentum_branches(x_f, CFG))
        numeric = [definition, weak.interference_index_gap(weak.combine_branches(numeric_decomp).value,
                                                           numeric_decomp),
                   weak.interference_index_offdiagonal(numeric_decomp)]
        numeric_spread = max(numeric_spread, max(abs(v - pw.imag) for v in numeric))
    passed = closed_spread < 1e-9 and numeric_spread < 1e-4
    record(4, passed, f"closed-form spread {closed_spread:.2e} (tol 1e-9); numeric-derivative forms "
                      f"{numeric_spread:.2e} (tol 1e-4) over {len(SWEEP_XF)} points")
    assert passed


def test_criterion_05_weak_trajectory(record, oracle_setup):
    sigma, grid = oracle_setup
    boundary_exact = mean_err = 0.0
    for x_f in SWEEP_XF:
        s = ds.weak_trajectory(x_f, None, CFG)
        boundary_exact = max(boundary_exact, abs(s.values[-1] - complex(x_f, 0.0)))
        x_plus, x_minus = ds.classical_trajectories(x_f, s.times, CFG)
        mean_err = max(mean_err, float(np.max(np.abs(s.values.real - (x_plus + x_minus) / 2))))
    oracle_err = 0.0
    for x_f in (0.0, 0.3, -0.5, 0.8, -1.2):
        times = [f * CFG.T for f in INTERIOR_TIMES]
        closed = ds.weak_trajectory(x_f, [0.0] + times + [CFG.T], CFG).values[1:-1]
        for t, ref in zip(times, closed):
            got = oracle.oracle_weak_value_x(t, Selection(x_f, cfg=CFG), sigma, grid).value
            oracle_err = max(oracle_err, abs(got - ref))
    passed = boundary_exact == 0.0 and mean_err <= 4 * np.finfo(float).eps and oracle_err < 1e-2
    record(5, passed, f"x_w(T) - x_f = {boundary_exact:g}; Re x_w vs classical mean {mean_err:.1e} "
                      f"(rounding only); oracle abs. error {oracle_err:.2e} (tol 1e-2)")
    assert passed


def test_criterion_06_ehrenfest(record):
    err = 0.0
    for x_f in SWEEP_XF:
        s = ds.weak_trajectory(x_f, None, CFG)
        pw = ds.momentum_weak_value(x_f, CFG).value
        err = max(err, float(np.max(np.abs(CFG.m * np.diff(s.values) / np.diff(s.times) - pw))))
    passed = err < 1e-10
    record(6, passed, f"max |m dx_w/dt - p_w| {err:.2e} (tol 1e-10)")
    assert passed


def test_criterion_07_scale_factors(record):
    anchors = []
    for x_f in (0.0, 0.3, -1.0):
        for eta in (0.0, 1.0):
            at = {th: ds.scale_factors(x_f, th, eta, CFG) for th in (0.0, math.pi)}
            anchors += [at[0.0].r_plus - 1, at[0.0].r_minus, at[math.pi].r_plus, at[math.pi].r_minus - 1]
            if 1 + math.cos(ds.chi(x_f, eta, CFG)) > 1e-3:
                half = ds.scale_factors(x_f, math.pi / 2, eta, CFG)
                anchors += [half.r_plus - 0.5, half.r_minus - 0.5]
    anchor_err = max(abs(a) for a in anchors)
    derived_err = 0.0
    for theta in np.linspace(0, math.pi, 13):
        for chi_ in np.linspace(0, 2 * math.pi, 24, endpoint=False):
            if 1 + math.sin(theta) * math.cos(chi_) < 1e-2:
                continue
            # eta chosen so that chi(x_f = 0, eta) = chi_
            eta = (-chi_) % (2 * math.pi)
            sf = ds.scale_factors(0.0, float(theta), eta, CFG)
            ch, sh = math.cos(theta / 2), math.sin(theta / 2)
            z_plus = ch / (ch + np.exp(1j * sf.chi) * sh)
            z_minus = sh / (sh + np.exp(-1j * sf.chi) * ch)
            derived_err = max(derived_err, abs(complex(sf.r_plus, sf.i_plus) - z_plus),
                              abs(complex(sf.r_minus, sf.i_minus) - z_minus))
    passed = anchor_err < 1e-14 and derived_err < 1e-12
    record(7, passed, f"anchors {anchor_err:.1e} (tol 1e-14); derived forms vs division {derived_err:.1e} (tol 1e-12)")
    assert passed


def test_criterion_08_normalized_trajectories(record):
    err = 0.0
    for theta in (math.pi / 4, math.pi / 2, 3 * math.pi / 4):
        for eta in (0.0, math.pi / 3):
            for x_f in SWEEP_XF[::5]:
                try:
                    plus, minus = ds.normalized_tagged_trajectories(x_f, theta, eta, None, CFG)
                except SingularTransitionError:
                    continue
                x_plus, x_minus = ds.classical_trajectories(x_f, plus.times, CFG)
                err = max(err, float(np.max(np.abs(plus.values.real - x_plus))),
                          float(np.max(np.abs(minus.values.real - x_minus))))
    passed = err < 1e-12
    record(8, passed, f"max |Re x~_w - x_cl| {err:.1e} (tol 1e-12)")
    assert passed


def test_criterion_09_tagged_sum_rule(record):
    # Near a cancellation of the tagged branches (D = 1 + sin(theta) cos(chi) -> 0) the weak values
    # grow like 1/sqrt(D) and their rounding floor like eps / D, so an absolute 1e-12 cannot hold there
    # in double precision. Those points are reported separately, relative to |x_w|.
    err = 0.0
    checked = 0
    ill = []
    for theta in np.linspace(0, math.pi, 7):
        for eta in (0.0, math.pi / 3, 4.0):
            for x_f in SWEEP_XF[::5]:
                for t in (0.0, 0.3, 0.7, 1.0):
                    try:
                        xp, xm = ds.tagged_weak_values(x_f, float(theta), eta, t, CFG)
                        total = ds.tagged_position_weak_value(x_f, float(theta), eta, t, CFG).value
                    except SingularTransitionError:
                        continue
                    if 1 + math.sin(theta) * math.cos(ds.chi(x_f, eta, CFG)) < 1e-2:
                        ill.append(abs(xp + xm - total) / max(1.0, abs(total)))
                        continue
                    err = max(err, abs(xp + xm - total))
                    checked += 1
    passed = err < 1e-12
    detail = f"max |x+_w + x-_w - (x (x) 1)_w| {err:.1e} (tol 1e-12) at {checked} samples"
    if ill:
        detail += f"; {len(ill)} samples with D < 1e-2 agree to rel. {max(ill):.1e}"
    record(9, passed, detail)
    assert passed


def test_criterion_10_complementarity(record):
    xs = np.linspace(-math.pi, math.pi, 128, endpoint=False)

    def variance(theta):
        return float(np.var([ds.tagged_transition_probability(x, theta, 0.0, CFG) for x in xs]))

    which_path = max(variance(0.0), variance(math.pi))
    fringes = variance(math.pi / 2)
    passed = which_path < 1e-12 and fringes > 1e-6
    record(10, passed, f"fringe variance {which_path:.1e} at theta = 0, pi (tol 1e-12); "
                       f"{fringes:.2e} at pi/2 (needs > 1e-6)")
    assert passed


def test_criterion_11_divergence(record):
    zero = math.pi / 2
    below = [ds.weak_trajectory(zero - 2.0 ** -k, None, CFG).values[0].imag for k in range(3, 11)]
    above = ds.weak_trajectory(zero + 2.0 ** -10, None, CFG).values[0].imag
    growing = all(abs(b) > abs(a) for a, b in zip(below, below[1:]))
    flips = math.copysign(1, below[-1]) != math.copysign(1, above)
    flagged = ds.weak_trajectory(zero - 0.5 * weak.EPS_DIV, None, CFG).near_singular
    clear = not ds.weak_trajectory(zero - 2.0 ** -10, None, CFG).near_singular
    passed = growing and flips and flagged and clear
    record(11, passed, f"|Im x_w(0)| increasing {growing}, sign flip {flips} "
                       f"({below[-1]:.1f} -> {above:.1f}), near_singular within eps_div {flagged}")
    assert passed


def test_criterion_12_pi_sum(record):
    err = 0.0
    for x_f in SWEEP_XF:
        p_plus, p_minus = ds.relative_probabilities(x_f, CFG)
        err = max(err, abs(p_plus + p_minus - 1 / (2 * math.cos(x_f * CFG.phase_scale) ** 2)))
    centre = sum(ds.relative_probabilities(0.0, CFG))
    passed = err < 1e-12 and abs(centre - 0.5) < 1e-12
    record(12, passed, f"max |Pi+ + Pi- - 1/(2 cos^2)| {err:.1e} (tol 1e-12); at x_f = 0: {centre!r}")
    assert passed


def test_criterion_13_determinism(record):
    runs = {
        "fringe": (cli.cmd_fringe, cli.RunConfig(xf_step=0.01, sigma_slit=0.01)),
        "weakp": (cli.cmd_weakp, cli.RunConfig(xf_step=0.01)),
        "traj": (cli.cmd_traj, cli.RunConfig(xf_step=0.05)),
        "tagged": (cli.cmd_tagged, cli.RunConfig(xf_step=0.05)),
    }
    identical = {}
    for name, (cmd, run) in runs.items():
        identical[name] = all(cmd(run).render(fmt) == cmd(run).render(fmt) for fmt in ("csv", "json"))
    report = io.StringIO()
    status, table = cli.cmd_verify(cli.RunConfig(), report)
    failed = [row[0] for row in table.rows if not row[1]]
    passed = all(identical.values()) and status == 0
    record(13, passed, f"byte-identical reruns {identical}; verify exit {status}"
                       + (f", failing checks {failed}" if failed else f", {len(table.rows)} checks passed"))
    assert passed, report.getvalue()
