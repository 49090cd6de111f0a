"""Generic weak-value engine.

Amplitudes are plain Python complex numbers. Families of amplitudes
K(alpha) = <psi| V_A(alpha) |phi> with V_A(alpha) = exp(-i alpha A) are
passed around as callables ``alpha -> complex``; a list of such callables,
one per intermediate process, describes a branch split K = sum_k K_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DomainError, SingularTransitionError

__all__ = [
    "EPS_DIV",
    "DEFAULT_STEP",
    "WeakValueResult",
    "BranchDecomposition",
    "weak_value_ratio",
    "richardson_derivative",
    "weak_value_from_derivative",
    "decompose_probability",
    "branch_decomposition",
    "combine_branches",
    "interference_index_definition",
    "interference_index_gap",
    "interference_index_offdiagonal",
]

Amplitude = Callable[[float], complex]

EPS_DIV = 1e-8
DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class WeakValueResult:
    """A weak value together with the size of its denominator.

    ``near_singular`` marks transitions whose amplitude is below
    ``EPS_DIV`` times the caller's amplitude scale. The value is still
    reported; near a destructive zero it is legitimately large.
    """

    value: complex
    denom_mag: float
    near_singular: bool


@dataclass(frozen=True)
class BranchDecomposition:
    branch_amplitudes: tuple[complex, ...]
    branch_weak_values: tuple[complex, ...]
    relative_probabilities: tuple[float, ...]

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex],
                        weak_values: Sequence[complex]) -> "BranchDecomposition":
        """Build the decomposition, deriving Pi_k = |K_k|^2 / |sum K|^2."""
        amplitudes = tuple(complex(k) for k in amplitudes)
        weak_values = tuple(complex(a) for a in weak_values)
        if len(amplitudes) != len(weak_values):
            raise DomainError("one weak value is needed per branch amplitude")
        total = abs(sum(amplitudes)) ** 2
        if total == 0:
            raise SingularTransitionError("branch amplitudes sum to zero")
        probs = tuple(abs(k) ** 2 / total for k in amplitudes)
        return cls(amplitudes, weak_values, probs)

    @property
    def total_amplitude(self) -> complex:
        return sum(self.branch_amplitudes)


def weak_value_ratio(numerator: complex, denominator: complex, scale: float = 1.0,
                     eps_div: float = EPS_DIV) -> WeakValueResult:
    """<psi|A|phi> / <psi|phi> with near-singularity bookkeeping."""
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale!r}")
    denominator = complex(denominator)
    if denominator == 0:
        raise SingularTransitionError("transition amplitude is exactly zero")
    mag = abs(denominator)
    return WeakValueResult(complex(numerator) / denominator, mag, mag < eps_div * scale)


def richardson_derivative(f: Callable[[float], complex], h: float = DEFAULT_STEP) -> complex:
    """f'(0) from central differences at h and h/2 plus one Richardson step.

    The leading O(h^2) error cancels, leaving O(h^4).
    """
    if not h > 0:
        raise DomainError(f"step must be positive, got {h!r}")
    d1 = (f(h) - f(-h)) / (2 * h)
    half = h / 2
    d2 = (f(half) - f(-half)) / h
    return (4 * d2 - d1) / 3


def weak_value_from_derivative(K: Amplitude, h: float = DEFAULT_STEP) -> complex:
    """A_w = i K'(0) / K(0)."""
    k0 = complex(K(0.0))
    if k0 == 0:
        raise SingularTransitionError("K(0) is exactly zero")
    return 1j * richardson_derivative(K, h) / k0


def decompose_probability(branches: Sequence[Amplitude], alpha: float) -> tuple[float, float]:
    """Split |K(alpha)|^2 into its diagonal and off-diagonal parts."""
    if len(branches) < 2:
        raise DomainError("a decomposition needs at least two branches")
    values = [complex(k(alpha)) for k in branches]
    diagonal = sum(abs(v) ** 2 for v in values)
    return diagonal, abs(sum(values)) ** 2 - diagonal


def branch_decomposition(branches: Sequence[Amplitude], h: float = DEFAULT_STEP) -> BranchDecomposition:
    """Amplitudes K_k(0) and branch weak values from the derivative form."""
    amplitudes = [complex(k(0.0)) for k in branches]
    weak_values = [weak_value_from_derivative(k, h) for k in branches]
    return BranchDecomposition.from_amplitudes(amplitudes, weak_values)


def combine_branches(decomp: BranchDecomposition, scale: float = 1.0,
                     eps_div: float = EPS_DIV) -> WeakValueResult:
    """Total weak value sum_k A^k_w K_k(0) / sum_k K_k(0).

    This is the ratio form with the completeness relation inserted in the
    numerator, so it needs only branch-level information.
    """
    numerator = sum(a * k for a, k in zip(decomp.branch_weak_values, decomp.branch_amplitudes))
    return weak_value_ratio(numerator, decomp.total_amplitude, scale, eps_div)


def interference_index_definition(branches: Sequence[Amplitude], h: float = DEFAULT_STEP) -> float:
    """Half the log-derivative of the off-diagonal probability at alpha = 0.

    The derivative of |K|^2 - sum |K_k|^2 is taken numerically and divided
    by |K(0)|^2. A single branch has no off-diagonal part and gives 0.
    """
    k0 = sum(complex(k(0.0)) for k in branches)
    if k0 == 0:
        raise SingularTransitionError("K(0) is exactly zero")

    def offdiagonal(alpha: float) -> float:
        values = [complex(k(alpha)) for k in branches]
        return abs(sum(values)) ** 2 - sum(abs(v) ** 2 for v in values)

    return 0.5 * richardson_derivative(offdiagonal, h).real / abs(k0) ** 2


def interference_index_gap(total_weak: complex, decomp: BranchDecomposition) -> float:
    """Im(A_w - sum_k Pi_k A^k_w)."""
    average = sum(p * a for p, a in zip(decomp.relative_probabilities, decomp.branch_weak_values))
    return (complex(total_weak) - average).imag


def interference_index_offdiagonal(decomp: BranchDecomposition) -> float:
    """sum_{j != k} Im(A^k_w K_k(0) conj(K_j(0)) / |K(0)|^2)."""
    amps = decomp.branch_amplitudes
    k0 = sum(amps)
    if k0 == 0:
        raise SingularTransitionError("K(0) is exactly zero")
    norm = abs(k0) ** 2
    total = 0.0
    for k, (a_k, amp_k) in enumerate(zip(decomp.branch_weak_values, amps)):
        for j, amp_j in enumerate(amps):
            if j != k:
                total += (a_k * amp_k * amp_j.conjugate() / norm).imag
    return total
