"""Closed-form results for the double slit with point slits and a point detector.

Conventions: slits at +x_i and -x_i, detection at x_f after a flight time T,
fringe phase  phi = m x_f x_i / (hbar T).  The branch amplitudes are

    K_pm = <x_f| U(T) |pm x_i> / sqrt(2),

so that |K_+ + K_-|^2 = (m / (pi hbar T)) cos^2(phi). Position eigenstates are
delta-normalized, which makes every "probability" here a density in x_f.

Momentum weak values use the translation V_p(alpha)^dagger |x_f> = |x_f - alpha hbar>,
which keeps alpha * p dimensionless for any hbar.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import core
from .core import PhysConfig
from .errors import DomainError, NormalizationUndefinedError, SingularTransitionError
from .weak import (
    EPS_DIV,
    BranchDecomposition,
    WeakValueResult,
    combine_branches,
)

__all__ = [
    "DEFAULT_TIME_SAMPLES",
    "Selection",
    "TrajectorySeries",
    "ScaleFactors",
    "default_times",
    "fringe_phase",
    "plain_branch_amplitudes",
    "momentum_branches",
    "tagged_branch_amplitudes",
    "fringe_probability",
    "fringe_probability_gaussian",
    "momentum_weak_value",
    "branch_momentum_weak_values",
    "interference_index_closed",
    "relative_probabilities",
    "weak_trajectory",
    "classical_trajectories",
    "chi",
    "scale_factors",
    "tagged_weak_values",
    "tagged_position_weak_value",
    "tagged_transition_probability",
    "tagged_weak_trajectories",
    "normalized_tagged_trajectories",
]

DEFAULT_TIME_SAMPLES = 101

# a denominator within a few ulps of zero counts as an exact destructive hit
_EXACT_ZERO_ULPS = 4.0


@dataclass(frozen=True)
class Selection:
    """Pre-selection (slit superposition) and post-selection (screen point).

    With ``spin_post = (theta, eta)`` the pre-selected state is the
    spin-tagged superposition (|x_i>|+> + |-x_i>|->)/sqrt(2) and the
    post-selected spinor is cos(theta/2)|+> + e^{i eta} sin(theta/2)|->.
    """

    x_f: float
    spin_post: Optional[tuple[float, float]] = None
    slit_sigma: Optional[float] = None
    cfg: PhysConfig = field(default_factory=PhysConfig)

    def __post_init__(self):
        if self.slit_sigma is not None and not self.slit_sigma > 0:
            raise DomainError(f"slit_sigma must be positive, got {self.slit_sigma!r}")
        if self.spin_post is not None:
            theta, eta = self.spin_post
            if not 0 <= theta <= math.pi:
                raise DomainError(f"theta must lie in [0, pi], got {theta!r}")
            if not 0 <= eta < 2 * math.pi:
                raise DomainError(f"eta must lie in [0, 2 pi), got {eta!r}")

    @property
    def tagged(self) -> bool:
        return self.spin_post is not None

    @property
    def post_spinor(self) -> tuple[complex, complex]:
        """Components (c_+, c_-) of the post-selected spinor."""
        if self.spin_post is None:
            raise DomainError("selection carries no spin post-selection")
        theta, eta = self.spin_post
        return complex(math.cos(theta / 2)), cmath.exp(1j * eta) * math.sin(theta / 2)


@dataclass(frozen=True)
class TrajectorySeries:
    times: np.ndarray
    values: np.ndarray
    transition_probability: float
    near_singular: bool

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise DomainError("times and values differ in length")


@dataclass(frozen=True)
class ScaleFactors:
    r_plus: float
    i_plus: float
    r_minus: float
    i_minus: float
    chi: float


def default_times(cfg: PhysConfig = PhysConfig(), samples: int = DEFAULT_TIME_SAMPLES) -> np.ndarray:
    """Uniform time grid on [0, T] with exact endpoints."""
    if samples < 2:
        raise DomainError("a time grid needs at least two samples")
    return np.linspace(0.0, cfg.T, samples)


def _check_times(times, cfg: PhysConfig) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise DomainError("times must be a one-dimensional list of at least two samples")
    if np.any(np.diff(times) <= 0):
        raise DomainError("times must be strictly increasing")
    if times[0] != 0 or not math.isclose(times[-1], cfg.T, rel_tol=1e-12):
        raise DomainError(f"times must run from 0 to T = {cfg.T}")
    times = times.copy()
    times[-1] = cfg.T
    return times


def fringe_phase(x_f: float, cfg: PhysConfig = PhysConfig()) -> float:
    return cfg.phase_scale * x_f


def _fringe_cos(x_f: float, cfg: PhysConfig) -> float:
    """cos of the fringe phase; raises at an exact destructive zero."""
    phase = fringe_phase(x_f, cfg)
    c = math.cos(phase)
    if abs(c) <= _EXACT_ZERO_ULPS * np.finfo(float).eps * max(1.0, abs(phase)):
        raise SingularTransitionError(
            f"x_f = {x_f!r} is a destructive zero of the two-slit amplitude")
    return c


def _amplitude_scale(cfg: PhysConfig) -> float:
    """|K(0)| at a fringe maximum, sqrt(m / (pi hbar T))."""
    return math.sqrt(cfg.m / (math.pi * cfg.hbar * cfg.T))


def plain_branch_amplitudes(x_f: float, cfg: PhysConfig = PhysConfig(),
                            alpha: float = 0.0) -> tuple[complex, complex]:
    """(K_+(alpha), K_-(alpha)) with the screen point translated to x_f - alpha hbar."""
    x = x_f - alpha * cfg.hbar
    s = 1 / math.sqrt(2)
    return (s * core.free_propagator(x, cfg.x_i, cfg.T, cfg),
            s * core.free_propagator(x, -cfg.x_i, cfg.T, cfg))


def momentum_branches(x_f: float, cfg: PhysConfig = PhysConfig()):
    """Callables alpha -> K_pm(alpha) for the generic weak engine."""
    return [lambda a: plain_branch_amplitudes(x_f, cfg, a)[0],
            lambda a: plain_branch_amplitudes(x_f, cfg, a)[1]]


def fringe_probability(x_f: float, cfg: PhysConfig = PhysConfig()) -> float:
    """(m / (pi hbar T)) cos^2(m x_f x_i / (hbar T))."""
    return cfg.m / (math.pi * cfg.hbar * cfg.T) * math.cos(fringe_phase(x_f, cfg)) ** 2


def fringe_probability_gaussian(x_f: float, sigma_slit: float, sigma_det: float,
                                cfg: PhysConfig = PhysConfig(), normalized: bool = False) -> float:
    """Transition probability for Gaussian slits and a Gaussian detector.

    Raw value |<g_det(x_f)| U(T) |g(x_i) + g(-x_i)> / sqrt(2)|^2 with every
    Gaussian normalized. With ``normalized=True`` the result is divided by
    the delta weights of both widths, making it directly comparable with
    fringe_probability in the small-width limit.
    """
    if not (sigma_slit > 0 and sigma_det > 0):
        raise DomainError("slit and detector widths must be positive")
    det = core.gaussian_from_slit(x_f, sigma_det, cfg)
    amp = 0j
    for x0 in (cfg.x_i, -cfg.x_i):
        evolved = core.evolve_gaussian(core.gaussian_from_slit(x0, sigma_slit, cfg), cfg.T, cfg)
        amp += core.overlap(det, evolved)
    prob = abs(amp) ** 2 / 2
    if normalized:
        prob /= (core.delta_weight(sigma_slit) * core.delta_weight(sigma_det)) ** 2
    return prob


def momentum_weak_value(x_f: float, cfg: PhysConfig = PhysConfig()) -> WeakValueResult:
    """p_w = m (x_f + i x_i tan(phi)) / T."""
    c = _fringe_cos(x_f, cfg)
    tan = math.sin(fringe_phase(x_f, cfg)) / c
    value = cfg.m * complex(x_f, cfg.x_i * tan) / cfg.T
    scale = _amplitude_scale(cfg)
    return WeakValueResult(value, scale * abs(c), abs(c) < EPS_DIV)


def branch_momentum_weak_values(x_f: float, cfg: PhysConfig = PhysConfig()) -> tuple[float, float]:
    """((p_+)_w, (p_-)_w) = (m (x_f - x_i) / T, m (x_f + x_i) / T)."""
    return cfg.m * (x_f - cfg.x_i) / cfg.T, cfg.m * (x_f + cfg.x_i) / cfg.T


def interference_index_closed(x_f: float, cfg: PhysConfig = PhysConfig()) -> float:
    """m x_i tan(phi) / T, the imaginary part of p_w."""
    c = _fringe_cos(x_f, cfg)
    return cfg.m * cfg.x_i * math.sin(fringe_phase(x_f, cfg)) / c / cfg.T


def relative_probabilities(x_f: float, cfg: PhysConfig = PhysConfig()) -> tuple[float, float]:
    """(Pi_+, Pi_-) from the branch amplitudes."""
    k_plus, k_minus = plain_branch_amplitudes(x_f, cfg)
    total = abs(k_plus + k_minus) ** 2
    if total == 0:
        raise SingularTransitionError("branch amplitudes cancel exactly")
    return abs(k_plus) ** 2 / total, abs(k_minus) ** 2 / total


def weak_trajectory(x_f: float, times=None, cfg: PhysConfig = PhysConfig()) -> TrajectorySeries:
    """x_w(t) = x_f t / T + i x_i (t - T) tan(phi) / T."""
    times = default_times(cfg) if times is None else _check_times(times, cfg)
    c = _fringe_cos(x_f, cfg)
    tan = math.sin(fringe_phase(x_f, cfg)) / c
    values = x_f * times / cfg.T + 1j * cfg.x_i * (times - cfg.T) * tan / cfg.T
    return TrajectorySeries(times, values, fringe_probability(x_f, cfg), abs(c) < EPS_DIV)


def classical_trajectories(x_f: float, t, cfg: PhysConfig = PhysConfig()):
    """Straight lines from +x_i and -x_i at t = 0 to x_f at t = T."""
    if np.any(np.asarray(t) < 0) or np.any(np.asarray(t) > cfg.T):
        raise DomainError(f"t must lie in [0, T], got {t!r}")
    s = np.asarray(t, dtype=float) / cfg.T
    # convex form, so both lines hit x_f exactly at t = T
    x_plus = cfg.x_i * (1 - s) + x_f * s
    x_minus = -cfg.x_i * (1 - s) + x_f * s
    if np.ndim(x_plus) == 0:
        return float(x_plus), float(x_minus)
    return x_plus, x_minus


def chi(x_f: float, eta: float, cfg: PhysConfig = PhysConfig()) -> float:
    """Relative phase of the tagged branches, 2 m x_f x_i / (hbar T) - eta."""
    return 2 * fringe_phase(x_f, cfg) - eta


def _tagged_denominator(theta: float, chi_: float) -> float:
    """|cos(theta/2) + e^{i chi} sin(theta/2)|^2 = 1 + sin(theta) cos(chi)."""
    d = 1 + math.sin(theta) * math.cos(chi_)
    if d <= 0:
        raise SingularTransitionError(
            f"tagged amplitudes cancel (theta = {theta!r}, chi = {chi_!r})")
    return d


def scale_factors(x_f: float, theta: float, eta: float, cfg: PhysConfig = PhysConfig()) -> ScaleFactors:
    """Real and imaginary scale factors of the tagged weak trajectories.

    With D = 1 + sin(theta) cos(chi):
        R+ = (1 + cos theta + sin theta cos chi) / (2 D)
        R- = (1 - cos theta + sin theta cos chi) / (2 D)
        I+ = -sin theta sin chi / (2 D),   I- = -I+
    """
    c = chi(x_f, eta, cfg)
    d = _tagged_denominator(theta, c)
    st, ct = math.sin(theta), math.cos(theta)
    cross = st * math.cos(c)
    im = st * math.sin(c) / (2 * d)
    return ScaleFactors(
        r_plus=(1 + ct + cross) / (2 * d),
        i_plus=-im,
        r_minus=(1 - ct + cross) / (2 * d),
        i_minus=im,
        chi=c,
    )


def tagged_branch_amplitudes(x_f: float, theta: float, eta: float,
                             cfg: PhysConfig = PhysConfig()) -> tuple[complex, complex]:
    """(K_+, K_-): spin-projected two-slit amplitudes for the tagged selection."""
    c_plus = math.cos(theta / 2)
    c_minus = cmath.exp(1j * eta) * math.sin(theta / 2)
    k_plus, k_minus = plain_branch_amplitudes(x_f, cfg)
    return c_plus * k_plus, c_minus.conjugate() * k_minus


def tagged_transition_probability(x_f: float, theta: float, eta: float,
                                  cfg: PhysConfig = PhysConfig()) -> float:
    """|K(0)|^2 for the spin-tagged selection, from the amplitudes."""
    k_plus, k_minus = tagged_branch_amplitudes(x_f, theta, eta, cfg)
    return abs(k_plus + k_minus) ** 2


def tagged_weak_values(x_f: float, theta: float, eta: float, t,
                       cfg: PhysConfig = PhysConfig()):
    """(x+_w(t), x-_w(t)) = ((R+ + i I+) x+_cl(t), (R- + i I-) x-_cl(t)); ``t`` may be an array.

    Built from the scale factors rather than by complex division, so the
    real parts divided by R+- return the classical lines to the last bit.
    """
    sf = scale_factors(x_f, theta, eta, cfg)
    x_plus, x_minus = classical_trajectories(x_f, t, cfg)
    return (complex(sf.r_plus, sf.i_plus) * np.asarray(x_plus),
            complex(sf.r_minus, sf.i_minus) * np.asarray(x_minus))


def tagged_position_weak_value(x_f: float, theta: float, eta: float, t: float,
                               cfg: PhysConfig = PhysConfig()) -> WeakValueResult:
    """Weak value of x (x) identity for the tagged selection.

    Assembled by the generic engine from the spin-projected amplitudes and
    the point-to-point weak values of each branch, without the tagged
    closed forms.
    """
    amps = tagged_branch_amplitudes(x_f, theta, eta, cfg)
    branch_values = [core.free_x_weak_value(x_f, x0, t, cfg) for x0 in (cfg.x_i, -cfg.x_i)]
    decomp = BranchDecomposition.from_amplitudes(amps, branch_values)
    return combine_branches(decomp, scale=_amplitude_scale(cfg) / math.sqrt(2))


def tagged_weak_trajectories(x_f: float, theta: float, eta: float, times=None,
                             cfg: PhysConfig = PhysConfig()) -> tuple[TrajectorySeries, TrajectorySeries]:
    times = default_times(cfg) if times is None else _check_times(times, cfg)
    k_plus, k_minus = tagged_branch_amplitudes(x_f, theta, eta, cfg)
    total = k_plus + k_minus
    if total == 0:
        raise SingularTransitionError("tagged transition amplitude is exactly zero")
    plus, minus = tagged_weak_values(x_f, theta, eta, times, cfg)
    prob = abs(total) ** 2
    flag = abs(total) < EPS_DIV * _amplitude_scale(cfg) / math.sqrt(2)
    return (TrajectorySeries(times, plus, prob, flag),
            TrajectorySeries(times, minus, prob, flag))


def _check_scale(r: float, branch: str, theta: float):
    if abs(r) <= 64 * np.finfo(float).eps:
        raise NormalizationUndefinedError(
            f"R{branch}(theta = {theta!r}) vanishes; the normalized trajectory is undefined")


def normalized_tagged_trajectories(x_f: float, theta: float, eta: float, times=None,
                                   cfg: PhysConfig = PhysConfig(),
                                   branches: Sequence[str] = ("+", "-")):
    """Tagged trajectories divided by their real scale factors R+ and R-.

    Returns a (plus, minus) pair; a branch left out of ``branches`` is
    returned as None and its scale factor is not checked.
    """
    sf = scale_factors(x_f, theta, eta, cfg)
    plus, minus = tagged_weak_trajectories(x_f, theta, eta, times, cfg)
    out = []
    for name, series, r in (("+", plus, sf.r_plus), ("-", minus, sf.r_minus)):
        if name not in branches:
            out.append(None)
            continue
        _check_scale(r, name, theta)
        out.append(TrajectorySeries(series.times, series.values / r,
                                    series.transition_probability, series.near_singular))
    return tuple(out)
