"""Inexact gradient oracles.

Given a true gradient, an oracle produces a direction ``d`` whose distance
to the gradient is bounded relative to the gradient norm:

    ||d - g|| <= delta * ||g||,   0 <= delta < 1.

Three oracles are provided: an exact pass-through, componentwise binary32
mantissa compression (the storage model behind compressed gradient
descent), and an adversarial corruption that spends the whole error budget
pushing away from the minimizer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RoundingMode",
    "OracleKind",
    "InexactnessModel",
    "CompressedValue",
    "compress_component",
    "compress_array",
    "certified_delta",
    "exhaustive_max_relative_error",
    "paper_compression_delta",
    "apply_inexactness",
    "adversarial_is_degenerate",
    "verify_relative_inexactness",
    "certified_delta_of",
    "bit_cost",
]

_MANTISSA_BITS = 23
_EXP_MASK = np.uint32(0xFF)
_SIGN_MASK = np.uint32(0x80000000)
_MAG_MASK = np.uint32(0x7FFFFFFF)
_INF_PATTERN = np.uint64(0x7F800000)


class RoundingMode(enum.Enum):
    """How the discarded low mantissa bits are resolved."""

    TRUNCATE_TOWARD_ZERO = "truncate_toward_zero"
    ROUND_NEAREST_EVEN = "round_nearest_even"
    ROUND_UP = "round_up"


class OracleKind(enum.Enum):
    EXACT = "exact"
    COMPRESSED = "compressed"
    ADVERSARIAL = "adversarial"


@dataclass(frozen=True)
class CompressedValue:
    """A compressed scalar and its storage footprint.

    ``bits_used`` counts 1 sign bit, 8 exponent bits and ``n_bit`` kept
    mantissa bits, i.e. ``9 + n_bit``.
    """

    value: float
    bits_used: int


@dataclass(frozen=True)
class InexactnessModel:
    """Description of how inexact directions are produced.

    ``delta`` is the relative inexactness level: exact bound for the
    adversarial oracle, reported worst-case bound for compression.  The
    certified per-mode compression bound may differ from the reported one;
    see :func:`certified_delta`.
    """

    kind: OracleKind
    delta: float = 0.0
    n_bit: int = 0
    rounding_mode: RoundingMode = RoundingMode.TRUNCATE_TOWARD_ZERO
    reference_minimizer: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0 <= self.n_bit <= _MANTISSA_BITS:
            raise ValueError(f"n_bit must lie in [0, 23], got {self.n_bit}")
        if self.kind is OracleKind.ADVERSARIAL and self.reference_minimizer is None:
            raise ValueError("adversarial oracle requires a reference minimizer")

    @classmethod
    def exact(cls) -> "InexactnessModel":
        return cls(kind=OracleKind.EXACT)

    @classmethod
    def compressed(
        cls,
        n_bit: int,
        rounding_mode: RoundingMode = RoundingMode.TRUNCATE_TOWARD_ZERO,
    ) -> "InexactnessModel":
        """Mantissa compression keeping ``n_bit`` bits; the reported delta
        is the (1/2)^(n_bit+1) worst-case bound used throughout the
        experiment protocols."""
        return cls(
            kind=OracleKind.COMPRESSED,
            delta=paper_compression_delta(n_bit),
            n_bit=n_bit,
            rounding_mode=rounding_mode,
        )

    @classmethod
    def adversarial(cls, delta: float, reference_minimizer: np.ndarray) -> "InexactnessModel":
        return cls(
            kind=OracleKind.ADVERSARIAL,
            delta=delta,
            reference_minimizer=np.asarray(reference_minimizer, dtype=np.float64),
        )


def paper_compression_delta(n_bit: int) -> float:
    """Reported relative-error level for an n_bit mantissa: (1/2)^(n_bit+1)."""
    if not 0 <= n_bit <= _MANTISSA_BITS:
        raise ValueError(f"n_bit must lie in [0, 23], got {n_bit}")
    return 0.5 ** (n_bit + 1)


def _compress_bits(bits: np.ndarray, n_bit: int, mode: RoundingMode) -> np.ndarray:
    """Reduce the 23-bit fraction field of binary32 bit patterns to n_bit bits.

    Zeros, subnormals, infinities and NaNs pass through unchanged.  Rounding
    operates on the combined (exponent | fraction) magnitude integer, so a
    round across a binade boundary carries into the exponent.  If the carry
    would leave the finite range (exponent 254 -> 255), the component falls
    back to truncation so every output stays finite; the fallback error is
    covered by the certified bounds (see certified_delta).
    """
    bits = np.asarray(bits, dtype=np.uint32)
    exponent = (bits >> np.uint32(_MANTISSA_BITS)) & _EXP_MASK
    passthrough = (exponent == 0) | (exponent == 255)
    shift = _MANTISSA_BITS - n_bit
    if shift == 0:
        return bits.copy()
    sign = bits & _SIGN_MASK
    mag = (bits & _MAG_MASK).astype(np.uint64)
    low_mask = np.uint64((1 << shift) - 1)
    truncated = mag & ~low_mask
    if mode is RoundingMode.TRUNCATE_TOWARD_ZERO:
        out = truncated
    else:
        kept = mag >> np.uint64(shift)
        remainder = mag & low_mask
        if mode is RoundingMode.ROUND_NEAREST_EVEN:
            half = np.uint64(1 << (shift - 1))
            bump = (remainder > half) | ((remainder == half) & ((kept & np.uint64(1)) == 1))
        elif mode is RoundingMode.ROUND_UP:
            bump = remainder != 0
        else:
            raise ValueError(f"unknown rounding mode: {mode}")
        out = (kept + bump.astype(np.uint64)) << np.uint64(shift)
        out = np.where(out >= _INF_PATTERN, truncated, out)
    result = out.astype(np.uint32) | sign
    return np.where(passthrough, bits, result)


def compress_array(values: np.ndarray, n_bit: int, mode: RoundingMode) -> np.ndarray:
    """Componentwise binary32 mantissa compression of a float array.

    Values are first converted to binary32 (round to nearest), then the
    fraction field is reduced.  Returns float64 values exactly representable
    in the reduced format.
    """
    if not 0 <= n_bit <= _MANTISSA_BITS:
        raise ValueError(f"n_bit must lie in [0, 23], got {n_bit}")
    as32 = np.asarray(values, dtype=np.float32)
    bits = as32.view(np.uint32)
    return _compress_bits(bits, n_bit, mode).view(np.float32).astype(np.float64)


def compress_component(a: float, n_bit: int, mode: RoundingMode) -> CompressedValue:
    """Compress a single scalar; see :func:`compress_array` for semantics."""
    value = float(compress_array(np.array([a]), n_bit, mode)[0])
    return CompressedValue(value=value, bits_used=9 + n_bit)


def certified_delta(n_bit: int, mode: RoundingMode) -> float:
    """Worst-case per-component relative error bound of a rounding mode.

    Bounds are the suprema of |b - reduce(b)| / b over mantissas b in [1, 2):

    * truncation:          1 / (2^n_bit + 1)   (approached, not attained)
    * round nearest even:  (1/2)^(n_bit + 1)
    * round up:            (1/2)^n_bit

    At n_bit = 23 no bits are discarded and the bound is 0.  Note that only
    round-to-nearest matches the (1/2)^(n_bit+1) level reported for
    compressed gradients; truncation and upward rounding admit roughly
    twice resp. four times that error.  Each bound dominates the attained
    maximum of :func:`exhaustive_max_relative_error`, including the
    truncation fallback near the top of the finite exponent range.
    """
    if not 0 <= n_bit <= _MANTISSA_BITS:
        raise ValueError(f"n_bit must lie in [0, 23], got {n_bit}")
    if n_bit == _MANTISSA_BITS:
        return 0.0
    if mode is RoundingMode.TRUNCATE_TOWARD_ZERO:
        return 1.0 / (2.0 ** n_bit + 1.0)
    if mode is RoundingMode.ROUND_NEAREST_EVEN:
        return 0.5 ** (n_bit + 1)
    if mode is RoundingMode.ROUND_UP:
        return 0.5 ** n_bit
    raise ValueError(f"unknown rounding mode: {mode}")


def exhaustive_max_relative_error(n_bit: int, mode: RoundingMode) -> float:
    """Attained maximum relative error over every binary32 fraction field.

    Scans all 2^23 mantissas b in [1, 2); by exponent scale invariance this
    certifies every normalized finite value outside the exponent-saturation
    band, where the truncation fallback only shrinks the error.
    """
    if not 0 <= n_bit <= _MANTISSA_BITS:
        raise ValueError(f"n_bit must lie in [0, 23], got {n_bit}")
    fractions = np.arange(1 << _MANTISSA_BITS, dtype=np.uint32)
    bits = (np.uint32(127) << np.uint32(_MANTISSA_BITS)) | fractions
    original = bits.view(np.float32).astype(np.float64)
    reduced = _compress_bits(bits, n_bit, mode).view(np.float32).astype(np.float64)
    return float(np.max(np.abs(original - reduced) / original))


def apply_inexactness(
    g: np.ndarray, x: np.ndarray, model: InexactnessModel
) -> np.ndarray:
    """Produce the inexact direction d for a true gradient g at a point x.

    Exact copies g; compressed reduces each component's mantissa;
    adversarial returns g + delta * ||g|| * u with u the unit vector from
    the reference minimizer to x (the worst admissible perturbation).  The
    degenerate case x == x* returns g unchanged; callers can detect it via
    :func:`adversarial_is_degenerate`.
    """
    g = np.asarray(g, dtype=np.float64)
    if model.kind is OracleKind.EXACT:
        return g.copy()
    if model.kind is OracleKind.COMPRESSED:
        return compress_array(g, model.n_bit, model.rounding_mode)
    offset = np.asarray(x, dtype=np.float64) - model.reference_minimizer
    distance = float(np.linalg.norm(offset))
    if distance == 0.0:
        return g.copy()
    return g + model.delta * float(np.linalg.norm(g)) * (offset / distance)


def adversarial_is_degenerate(x: np.ndarray, model: InexactnessModel) -> bool:
    """True when the adversarial direction is undefined (x equals x*)."""
    if model.kind is not OracleKind.ADVERSARIAL:
        return False
    offset = np.asarray(x, dtype=np.float64) - model.reference_minimizer
    return float(np.linalg.norm(offset)) == 0.0


def verify_relative_inexactness(
    d: np.ndarray, g: np.ndarray, delta: float, tol_abs: float = 1e-12
) -> bool:
    """Check ||d - g|| <= delta * ||g|| + tol_abs.

    The absolute slack absorbs double-precision noise at the boundary,
    where the adversarial oracle sits by construction.
    """
    d = np.asarray(d, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if d.shape != g.shape:
        raise ValueError(f"dimension mismatch: {d.shape} vs {g.shape}")
    return float(np.linalg.norm(d - g)) <= delta * float(np.linalg.norm(g)) + tol_abs


def certified_delta_of(model: InexactnessModel) -> float:
    """The tightest delta for which every emitted direction is certified."""
    if model.kind is OracleKind.EXACT:
        return 0.0
    if model.kind is OracleKind.COMPRESSED:
        return certified_delta(model.n_bit, model.rounding_mode)
    return model.delta


def bit_cost(iterations: int, n_bit: int, dimension: int) -> int:
    """Total storage of a compressed run:

    iterations x (9 + n_bit) x dimension bits
    (1 sign + 8 exponent + n_bit mantissa bits per gradient component).
    """
    if iterations < 0 or n_bit < 0 or dimension < 0:
        raise ValueError("bit_cost arguments must be nonnegative")
    return iterations * (9 + n_bit) * dimension
