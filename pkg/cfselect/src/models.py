from dataclasses import asdict, dataclass, field
from math import log10
from pathlib import Path
from typing import Iterable

import numpy as np
import numpy.typing as npt

from cfselect.src.exceptions import ConfigError, InvalidInputError
from cfselect.src.rings import ComplexArray, RingElement, RingId, embed, multiply

ALGORITHM_NAMES = ("ex1", "ex2", "ll", "clll", "linear")


@dataclass(frozen=True, eq=False)
class Channel:
    """Channel vector h observed at one relay, with SNR = P / sigma2."""

    h: ComplexArray
    snr: float
    power_p: float = 1.0
    sigma2: float | None = None

    def __post_init__(self) -> None:
        h = np.atleast_1d(np.asarray(self.h, dtype=np.complex128))
        if h.ndim != 1 or h.size == 0:
            raise InvalidInputError(f"Channel must be a non-empty vector, got {h!r}.")
        if not np.all(np.isfinite(h)):
            raise InvalidInputError(f"Channel gains must be finite, got {h!r}.")
        if not np.isfinite(self.snr) or self.snr <= 0:
            raise InvalidInputError(f"SNR must be finite and positive, got {self.snr}.")
        if not np.isfinite(self.power_p) or self.power_p <= 0:
            raise InvalidInputError(f"Power must be positive, got {self.power_p}.")

        sigma2 = self.power_p / self.snr
        if self.sigma2 is not None and not np.isclose(
            self.sigma2, sigma2, rtol=1e-9, atol=0.0
        ):
            raise InvalidInputError(
                f"Noise variance {self.sigma2} is inconsistent with "
                f"P={self.power_p} and SNR={self.snr}."
            )
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "snr", float(self.snr))
        object.__setattr__(self, "power_p", float(self.power_p))
        object.__setattr__(self, "sigma2", float(sigma2))

    @classmethod
    def from_snr_db(
        cls, h: npt.ArrayLike, snr_db: float, power_p: float = 1.0
    ) -> "Channel":
        return cls(h=np.asarray(h), snr=10 ** (snr_db / 10), power_p=power_p)

    @property
    def users(self) -> int:
        return int(self.h.size)

    @property
    def snr_db(self) -> float:
        return 10 * log10(self.snr)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.h) ** 2))

    @property
    def h_max_sq(self) -> float:
        return float(np.max(np.abs(self.h) ** 2))

    @property
    def mmse_scale(self) -> float:
        """s = SNR / (1 + SNR*||h||^2), so that a^H M a = ||a||^2 - s*|h^H a|^2."""
        return self.snr / (1 + self.snr * self.norm_sq)

    @property
    def phi(self) -> float:
        """Norm bound sqrt(1 + SNR*||h||^2) on the optimal coefficient vector."""
        return float(np.sqrt(1 + self.snr * self.norm_sq))

    def require_nonzero_gains(self) -> None:
        if np.any(self.h == 0):
            raise InvalidInputError(f"Every channel gain must be nonzero: {self.h}.")


@dataclass(frozen=True)
class CoeffVector:
    a: tuple[RingElement, ...]
    ring: RingId

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(self.a))
        for element in self.a:
            if element.ring is not self.ring:
                raise InvalidInputError(
                    f"Element {element} does not belong to {self.ring.value}."
                )

    @classmethod
    def from_coords(
        cls, ring: RingId, c1: Iterable[int], c2: Iterable[int]
    ) -> "CoeffVector":
        return cls(
            tuple(RingElement(int(x), int(y), ring) for x, y in zip(c1, c2)), ring
        )

    @classmethod
    def from_key(cls, ring: RingId, key: Iterable[int]) -> "CoeffVector":
        """Builds the vector from interleaved coordinates (c1_0, c2_0, c1_1, ...)."""
        flat = [int(value) for value in key]
        return cls.from_coords(ring, flat[0::2], flat[1::2])

    def __len__(self) -> int:
        return len(self.a)

    def __str__(self) -> str:
        return "[" + ", ".join(str(element) for element in self.a) + "]"

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(value for e in self.a for value in (e.c1, e.c2))

    @property
    def is_zero(self) -> bool:
        return all(element.is_zero for element in self.a)

    def as_complex(self) -> ComplexArray:
        return embed(
            self.ring, [e.c1 for e in self.a], [e.c2 for e in self.a]
        ).astype(np.complex128)

    def scaled(self, unit: RingElement) -> "CoeffVector":
        return CoeffVector(tuple(multiply(unit, e) for e in self.a), self.ring)


@dataclass(frozen=True)
class RateResult:
    rate: float
    alpha: complex
    sigma2_eff: float
    self_noise: float
    scaled_gaussian_noise: float
    valid: bool = True


@dataclass(frozen=True)
class SelectionResult:
    a_opt: CoeffVector
    rate: float
    alpha: complex
    candidates_examined: int
    flops: int | None = None
    algorithm: str = ""


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Representatives of the alpha-plane regions: cell vertices (S-I), crossings
    of edges of two different users (S-II) and points on the border of the valid
    range."""

    alphas_s1: ComplexArray
    alphas_s2: ComplexArray
    alphas_boundary: ComplexArray = field(
        default_factory=lambda: np.empty(0, dtype=np.complex128)
    )

    def __len__(self) -> int:
        return self.alphas_s1.size + self.alphas_s2.size + self.alphas_boundary.size

    def representatives(self) -> ComplexArray:
        return np.concatenate([self.alphas_s1, self.alphas_s2, self.alphas_boundary])


@dataclass(frozen=True)
class GammaSample:
    gamma_opt: float
    channel_id: int

    def __post_init__(self) -> None:
        if not 0 < self.gamma_opt <= 1 + 1e-9:
            raise InvalidInputError(
                f"Normalised width must lie in (0, 1], got {self.gamma_opt}."
            )
        object.__setattr__(self, "gamma_opt", min(float(self.gamma_opt), 1.0))


@dataclass(frozen=True)
class ResultRow:
    snr_db: float
    algorithm: str
    mean_rate: float
    rate_std: float
    mean_flops: float
    mean_candidates: float
    trials: int

    def as_dict(self) -> dict[str, float | str | int]:
        return asdict(self)


@dataclass(frozen=True)
class ExperimentConfig:
    ring: RingId
    users: int
    snr_points_db: tuple[float, ...]
    trials: int = 1000
    seed: int = 0
    algorithms: tuple[str, ...] = ("ex2", "ll", "clll", "linear")
    table_path: Path | None = None
    count_flops: bool = False
    budget: float = 1e8

    def __post_init__(self) -> None:
        object.__setattr__(self, "ring", RingId.parse(self.ring))
        object.__setattr__(self, "snr_points_db", tuple(self.snr_points_db))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not isinstance(self.users, int) or self.users < 1:
            raise ConfigError(f"Number of users must be a positive int: {self.users}.")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"Trials must be a positive int: {self.trials}.")
        if not self.snr_points_db:
            raise ConfigError("At least one SNR point is required.")
        if not all(np.isfinite(snr) for snr in self.snr_points_db):
            raise ConfigError(f"SNR points must be finite: {self.snr_points_db}.")
        unknown = [name for name in self.algorithms if name not in ALGORITHM_NAMES]
        if unknown or not self.algorithms:
            raise ConfigError(
                f"Unsupported algorithms: {unknown}. Choose from {ALGORITHM_NAMES}."
            )
        if self.budget <= 0:
            raise ConfigError(f"Budget must be positive: {self.budget}.")
