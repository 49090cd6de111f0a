"""Physical configuration, the free-particle propagator and complex Gaussians.

Every wavefunction handled analytically here has the form

    psi(x) = exp(log_coeff - quad * x**2 + lin * x)

with complex coefficients. The family is closed under free evolution and
products, so all inner products reduce to the Gaussian integral

    int exp(-A x**2 + B x) dx = sqrt(pi / A) * exp(B**2 / (4 A)),   Re A > 0,

evaluated in log space so that very narrow states neither overflow nor
underflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "PhysConfig",
    "ComplexGaussian",
    "free_propagator",
    "gaussian_from_slit",
    "delta_weight",
    "evolve_gaussian",
    "evaluate",
    "overlap",
    "log_overlap",
    "moment_overlap",
    "free_x_amplitude",
    "free_x_weak_value",
]


@dataclass(frozen=True)
class PhysConfig:
    """Mass, action scale, flight time and slit half-separation (dimensionless)."""

    m: float = 1.0
    hbar: float = 1.0
    T: float = 1.0
    x_i: float = 1.0

    def __post_init__(self):
        for name in ("m", "hbar", "T", "x_i"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    @property
    def phase_scale(self) -> float:
        """m * x_i / (hbar * T): the fringe phase per unit screen position."""
        return self.m * self.x_i / (self.hbar * self.T)


@dataclass(frozen=True)
class ComplexGaussian:
    """exp(log_coeff - quad x^2 + lin x)."""

    log_coeff: complex
    quad: complex
    lin: complex

    def __post_init__(self):
        if complex(self.quad).real < 0:
            raise DomainError(f"Re(quad) must be >= 0, got {self.quad!r}")

    @property
    def norm(self) -> float:
        return math.sqrt(overlap(self, self).real)


def free_propagator(x_to, x_from, t: float, cfg: PhysConfig = PhysConfig()):
    """Free-particle kernel <x_to|exp(-i H t / hbar)|x_from>.

    The prefactor sqrt(m / (2 pi i hbar t)) is taken on the principal branch,
    i.e. a positive magnitude times exp(-i pi / 4). Positions may be numpy
    arrays (broadcast) or complex numbers (analytic continuation).
    """
    if not t > 0:
        raise DomainError(f"propagation time must be positive, got {t!r}")
    pref = math.sqrt(cfg.m / (2 * math.pi * cfg.hbar * t)) * cmath.exp(-0.25j * math.pi)
    dx = np.subtract(x_to, x_from)
    out = pref * np.exp(1j * cfg.m * dx * dx / (2 * cfg.hbar * t))
    return complex(out) if np.ndim(out) == 0 else out


def gaussian_from_slit(x0: float, sigma: float, cfg: PhysConfig = PhysConfig()) -> ComplexGaussian:
    """Normalized Gaussian (2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / (4 sigma^2)).

    ``sigma`` is the standard deviation of |psi|^2. The state carries zero
    mean momentum. ``cfg`` is accepted for signature symmetry; the spatial
    profile does not depend on it.
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    quad = 1.0 / (4 * sigma * sigma)
    return ComplexGaussian(
        log_coeff=complex(-quad * x0 * x0 - 0.25 * math.log(2 * math.pi * sigma * sigma)),
        quad=complex(quad),
        lin=complex(2 * quad * x0),
    )


def delta_weight(sigma: float) -> float:
    """Integral of the normalized slit Gaussian, (8 pi sigma^2)^(1/4).

    A normalized Gaussian of width sigma approximates delta_weight(sigma)
    times a Dirac delta; dividing amplitudes by these weights recovers the
    point-state (delta-normalized) values in the small-width limit.
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    return (8 * math.pi * sigma * sigma) ** 0.25


def evolve_gaussian(g: ComplexGaussian, t: float, cfg: PhysConfig = PhysConfig()) -> ComplexGaussian:
    """Exact free evolution of ``g`` over time ``t``.

    With tau = 2 hbar t / m and D = 1 + i quad tau:
    quad -> quad / D, lin -> lin / D,
    log_coeff -> log_coeff + i lin^2 tau / (4 D) - Log(D) / 2.
    Im D = Re(quad) tau > 0, so the principal Log is the continuous branch.
    """
    if t < 0:
        raise DomainError(f"evolution time must be non-negative, got {t!r}")
    if not complex(g.quad).real > 0:
        raise DomainError("free evolution needs a normalizable state (Re quad > 0)")
    if t == 0:
        return g
    tau = 2 * cfg.hbar * t / cfg.m
    d = 1 + 1j * g.quad * tau
    return ComplexGaussian(
        log_coeff=g.log_coeff + 1j * g.lin * g.lin * tau / (4 * d) - 0.5 * cmath.log(d),
        quad=g.quad / d,
        lin=g.lin / d,
    )


def evaluate(g: ComplexGaussian, x):
    """Sample ``g`` at positions ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    return np.exp(g.log_coeff - g.quad * x * x + g.lin * x)


def _product_coeffs(bra: ComplexGaussian, ket: ComplexGaussian) -> tuple[complex, complex, complex]:
    a = bra.quad.conjugate() + ket.quad
    if not a.real > 0:
        raise DomainError("product of bra and ket is not integrable (Re of total quad <= 0)")
    b = bra.lin.conjugate() + ket.lin
    c = bra.log_coeff.conjugate() + ket.log_coeff
    return a, b, c


def log_overlap(bra: ComplexGaussian, ket: ComplexGaussian) -> complex:
    """Principal log of <bra|ket>, up to multiples of 2 pi i."""
    a, b, c = _product_coeffs(bra, ket)
    return c + b * b / (4 * a) + 0.5 * cmath.log(math.pi / a)


def overlap(bra: ComplexGaussian, ket: ComplexGaussian) -> complex:
    """<bra|ket> = int conj(bra(x)) ket(x) dx."""
    return cmath.exp(log_overlap(bra, ket))


def moment_overlap(bra: ComplexGaussian, ket: ComplexGaussian, power: int) -> complex:
    """<bra| x^power |ket> for power in {0, 1, 2}."""
    if power not in (0, 1, 2):
        raise DomainError(f"power must be 0, 1 or 2, got {power!r}")
    a, b, _ = _product_coeffs(bra, ket)
    base = overlap(bra, ket)
    if power == 0:
        return base
    mean = b / (2 * a)
    if power == 1:
        return mean * base
    return (1 / (2 * a) + mean * mean) * base


def _free_x_coeffs(x_f: float, x0: float, t: float, cfg: PhysConfig) -> tuple[float, float]:
    """Linear and quadratic alpha coefficients of log <x_f|U(T-t) e^{-i alpha x} U(t)|x0>.

    Completing the square in the intermediate Fresnel integral puts the
    stationary point on the straight line from x0 to x_f; the alpha^2 term
    carries the spreading accumulated on both legs (zero when either leg is
    the identity).
    """
    T = cfg.T
    if not 0 <= t <= T:
        raise DomainError(f"t must lie in [0, T], got {t!r}")
    line = x0 * (1 - t / T) + x_f * (t / T)
    spread = cfg.hbar * t * (T - t) / (2 * cfg.m * T)
    return line, spread


def free_x_amplitude(x_f: float, x0: float, t: float, alpha: float,
                     cfg: PhysConfig = PhysConfig()) -> complex:
    """<x_f| U(T - t) exp(-i alpha x) U(t) |x0> between position eigenstates."""
    line, spread = _free_x_coeffs(x_f, x0, t, cfg)
    return free_propagator(x_f, x0, cfg.T, cfg) * cmath.exp(-1j * alpha * line - 1j * alpha * alpha * spread)


def free_x_weak_value(x_f: float, x0: float, t: float, cfg: PhysConfig = PhysConfig()) -> float:
    """i d/d(alpha) log of free_x_amplitude at alpha = 0, taken analytically.

    This is the weak value of x at time t between position eigenstates
    |x0> and |x_f>.
    """
    return _free_x_coeffs(x_f, x0, t, cfg)[0]
