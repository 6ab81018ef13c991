from dataclasses import dataclass

ADD_FLOPS = 2
MUL_FLOPS = 6


@dataclass
class FlopCounter:
    """Counts complex additions and multiplications. One complex addition costs 2
    real flops and one complex multiplication 6; rounding is free.

    A counter is created per selector invocation and passed down explicitly."""

    complex_adds: int = 0
    complex_muls: int = 0

    @property
    def total_flops(self) -> int:
        return ADD_FLOPS * self.complex_adds + MUL_FLOPS * self.complex_muls

    def add(self, adds: int = 0, muls: int = 0) -> None:
        self.complex_adds += int(adds)
        self.complex_muls += int(muls)

    def inner_products(self, count: int, length: int) -> None:
        """Records `count` complex inner products of vectors of `length`."""
        self.add(adds=count * max(length - 1, 0), muls=count * length)

    def reset(self) -> None:
        self.complex_adds = 0
        self.complex_muls = 0


def charge(counter: FlopCounter | None, adds: int = 0, muls: int = 0) -> None:
    if counter is not None:
        counter.add(adds=adds, muls=muls)
