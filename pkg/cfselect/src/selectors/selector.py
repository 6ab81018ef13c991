from abc import ABC, abstractmethod

from cfselect.src.flops import FlopCounter
from cfselect.src.models import Channel, SelectionResult
from cfselect.src.rings import RingId


class Selector(ABC):
    """Chooses the integer coefficient vector a relay should decode."""

    name: str = ""

    def __init__(self, ring: RingId | str) -> None:
        self.ring = RingId.parse(ring)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(ring={self.ring.value!r})"

    @abstractmethod
    def select(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> SelectionResult:
        """Selects a nonzero coefficient vector for the channel.

        Args:
            ch: the channel seen by the relay.
            counter: optional flop counter, charged by the arithmetic performed.

        Returns: SelectionResult with the vector, its rate and MMSE scaling."""
