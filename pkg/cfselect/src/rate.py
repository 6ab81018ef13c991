"""Computation rate, MMSE scaling and effective noise of a coefficient vector."""
from logging import getLogger

import numpy as np
import numpy.typing as npt

from cfselect.src.exceptions import InvalidInputError, ReductionError
from cfselect.src.flops import FlopCounter, charge
from cfselect.src.models import Channel, CoeffVector, RateResult
from cfselect.src.rings import ComplexArray, FloatArray, RingId, embed, quantize_array

log = getLogger(__name__)

_TINY = np.finfo(np.float64).tiny


def _coefficients(ch: Channel, a: CoeffVector) -> ComplexArray:
    if len(a) != ch.users:
        raise InvalidInputError(
            f"Coefficient vector has {len(a)} entries, the channel has {ch.users}."
        )
    if a.is_zero:
        raise InvalidInputError("The zero coefficient vector is not allowed.")
    return a.as_complex()


def log_rate(ratio: npt.ArrayLike) -> FloatArray:
    """log2+ of a power ratio, elementwise."""
    ratio = np.asarray(ratio, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.maximum(0.0, np.log2(np.maximum(ratio, _TINY)))


def mmse_alpha(
    ch: Channel, a: CoeffVector, counter: FlopCounter | None = None
) -> complex:
    coeffs = _coefficients(ch, a)
    charge(counter, adds=ch.users - 1, muls=ch.users + 1)
    return complex(ch.mmse_scale * np.vdot(ch.h, coeffs))


def noise_terms(
    ch: Channel, alpha: complex, coeffs: ComplexArray
) -> tuple[float, float]:
    """Self noise P*||alpha*h - a||^2 and scaled Gaussian noise |alpha|^2*sigma2."""
    self_noise = ch.power_p * float(np.sum(np.abs(alpha * ch.h - coeffs) ** 2))
    scaled_noise = abs(alpha) ** 2 * (ch.power_p / ch.snr)
    return self_noise, scaled_noise


def rate_at_alpha(ch: Channel, alpha: complex, a: CoeffVector) -> RateResult:
    """Rate of `a` decoded with an arbitrary scaling factor alpha."""
    self_noise, scaled_noise = noise_terms(ch, alpha, _coefficients(ch, a))
    sigma2_eff = self_noise + scaled_noise
    return RateResult(
        rate=float(log_rate(ch.power_p / max(sigma2_eff, _TINY))),
        alpha=alpha,
        sigma2_eff=sigma2_eff,
        self_noise=self_noise,
        scaled_gaussian_noise=scaled_noise,
    )


def charge_quadratic_forms(
    counter: FlopCounter | None, rows: int, length: int
) -> None:
    if counter is not None:
        counter.inner_products(count=2 * rows, length=length)
        counter.add(adds=rows, muls=2 * rows)


def quadratic_forms(
    ch: Channel, coeffs: ComplexArray, counter: FlopCounter | None = None
) -> FloatArray:
    """a^H M a for every row of `coeffs`, evaluated as ||a||^2 - s*|h^H a|^2.

    Args:
        ch: the channel.
        coeffs: complex array of shape (M, L), one candidate per row.
        counter: optional flop counter.

    Returns: array of M quadratic forms."""
    coeffs = np.atleast_2d(coeffs)
    rows, length = coeffs.shape
    projection = coeffs @ np.conj(ch.h)
    norms = np.sum(coeffs.real**2 + coeffs.imag**2, axis=1)
    charge_quadratic_forms(counter, rows, length)
    return np.maximum(norms - ch.mmse_scale * np.abs(projection) ** 2, 0.0)


def rate_of_pair(
    ch: Channel, a: CoeffVector, counter: FlopCounter | None = None
) -> RateResult:
    coeffs = _coefficients(ch, a)
    quadratic = float(quadratic_forms(ch, coeffs[None, :], counter)[0])
    alpha = complex(ch.mmse_scale * np.vdot(ch.h, coeffs))
    self_noise, scaled_noise = noise_terms(ch, alpha, coeffs)
    return RateResult(
        rate=float(log_rate(1.0 / max(quadratic, _TINY))),
        alpha=alpha,
        sigma2_eff=self_noise + scaled_noise,
        self_noise=self_noise,
        scaled_gaussian_noise=scaled_noise,
    )


def effective_noise_batch(
    ch: Channel,
    alphas: npt.ArrayLike,
    ring: RingId,
    counter: FlopCounter | None = None,
) -> tuple[FloatArray, npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Effective noise of alpha*h against its own quantization, for many alphas.

    Returns: (sigma2_eff, c1, c2) where c1, c2 have shape (len(alphas), L)."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.complex128))
    scaled = alphas[:, None] * ch.h[None, :]
    c1, c2 = quantize_array(ring, scaled)
    residual = scaled - embed(ring, c1, c2)
    self_noise = np.sum(residual.real**2 + residual.imag**2, axis=1)
    if counter is not None:
        samples, length = scaled.shape
        counter.add(adds=samples * (2 * length), muls=samples * (2 * length + 2))
    noise = np.abs(alphas) ** 2 * (ch.power_p / ch.snr) + ch.power_p * self_noise
    return noise, c1, c2


def effective_noise(
    ch: Channel, alpha: complex, ring: RingId, counter: FlopCounter | None = None
) -> float:
    noise, _, _ = effective_noise_batch(ch, [alpha], ring, counter)
    return float(noise[0])


def rate_of_alpha(
    ch: Channel, alpha: complex, ring: RingId
) -> tuple[RateResult, CoeffVector]:
    """Rate as a function of alpha with a = Q(alpha*h). A zero quantization gives
    rate 0 and a result flagged invalid."""
    if not np.isfinite(alpha):
        raise InvalidInputError(f"Scaling factor must be finite, got {alpha}.")
    c1, c2 = quantize_array(ring, complex(alpha) * ch.h)
    a = CoeffVector.from_coords(ring, c1, c2)
    self_noise, scaled_noise = noise_terms(ch, complex(alpha), a.as_complex())
    sigma2_eff = self_noise + scaled_noise
    rate = 0.0 if a.is_zero else float(log_rate(ch.power_p / max(sigma2_eff, _TINY)))
    return (
        RateResult(
            rate=rate,
            alpha=complex(alpha),
            sigma2_eff=sigma2_eff,
            self_noise=self_noise,
            scaled_gaussian_noise=scaled_noise,
            valid=not a.is_zero,
        ),
        a,
    )


def gram_matrix(ch: Channel) -> tuple[ComplexArray, ComplexArray]:
    """M = I - s*h*h^H and its lower Cholesky factor, M = L L^H."""
    matrix = np.eye(ch.users, dtype=np.complex128) - ch.mmse_scale * np.outer(
        ch.h, np.conj(ch.h)
    )
    try:
        factor = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        log.exception("Cholesky factorisation failed for h=%s.", ch.h)
        raise ReductionError("The rate matrix is not positive definite.") from exc
    return matrix, factor
