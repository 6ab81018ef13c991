import numpy as np

from cfselect.src.exceptions import InvalidInputError
from cfselect.src.models import Channel
from cfselect.src.rings import ComplexArray


def trial_rng(seed: int, trial: int, *stream: int) -> np.random.Generator:
    """Independent PCG64 stream for one trial; extra integers split it further."""
    sequence = np.random.SeedSequence(seed, spawn_key=(trial, *stream))
    return np.random.Generator(np.random.PCG64(sequence))


def gen_gains(users: int, rng: np.random.Generator) -> ComplexArray:
    """i.i.d. CN(0, 1) gains: real and imaginary parts each of variance 1/2."""
    if users < 1:
        raise InvalidInputError(f"Number of users must be positive, got {users}.")
    parts = rng.standard_normal((2, users)) * np.sqrt(0.5)
    return parts[0] + 1j * parts[1]


def gen_channel(
    users: int, rng: np.random.Generator, snr_db: float = 20.0, power_p: float = 1.0
) -> Channel:
    return Channel.from_snr_db(gen_gains(users, rng), snr_db, power_p)
