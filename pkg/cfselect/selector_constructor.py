from logging import getLogger

from cfselect.src.exceptions import ConfigError
from cfselect.src.rings import RingId
from cfselect.src.selectors.clll import DEFAULT_DELTA, CLLLSelector
from cfselect.src.selectors.exhaustive import (
    DEFAULT_BUDGET,
    ExhaustiveOneSelector,
    ExhaustiveTwoSelector,
)
from cfselect.src.selectors.linear import LinearSearchSelector
from cfselect.src.selectors.ll import LLSelector
from cfselect.src.selectors.selector import Selector
from cfselect.src.thresholds import ThresholdTable, published_table

log = getLogger(__name__)
SELECTORS: dict[str, type[Selector]] = {
    "ex1": ExhaustiveOneSelector,
    "ex2": ExhaustiveTwoSelector,
    "ll": LLSelector,
    "clll": CLLLSelector,
    "linear": LinearSearchSelector,
}


def create_selector(name: str, ring: RingId | str, **kwargs) -> Selector:
    """Constructor for the coefficient selectors. Validates the keyword arguments of
    the chosen algorithm and fills in the missing ones.

    Args:
        name: one of ex1, ex2, ll, clll, linear.
        ring: the coefficient ring or one of its names.
        budget: search-size bound of ex1.
        delta: Lovasz parameter of clll, in (1/4, 1].
        table: ThresholdTable of the linear search.
        full_disc: let ex2 search every phase of alpha.

    Returns: the Selector object."""
    if name not in SELECTORS:
        raise ConfigError(f"The algorithm {name!r} is not supported.")
    ring = RingId.parse(ring)

    if name == "ex1":
        budget = kwargs.get("budget", DEFAULT_BUDGET)
        if isinstance(budget, bool) or not isinstance(budget, (int, float)):
            raise ConfigError("The budget value should be INT or FLOAT type.")
        if budget <= 0:
            raise ConfigError(f"The budget must be positive, got {budget}.")
        return ExhaustiveOneSelector(ring, budget=float(budget))

    if name == "ex2":
        return ExhaustiveTwoSelector(ring, full_disc=bool(kwargs.get("full_disc")))

    if name == "clll":
        delta = kwargs.get("delta", DEFAULT_DELTA)
        if isinstance(delta, bool) or not isinstance(delta, (int, float)):
            raise ConfigError("The delta value should be FLOAT type.")
        if not 0.25 < delta <= 1:
            raise ConfigError(f"The delta value must lie in (1/4, 1], got {delta}.")
        return CLLLSelector(ring, delta=delta)

    if name == "linear":
        table = kwargs.get("table", None)
        if table is None:
            log.info("No threshold table given. Using the published table...")
            table = published_table(ring)
        if not isinstance(table, ThresholdTable):
            raise ConfigError("The table value should be a ThresholdTable.")
        return LinearSearchSelector(ring, table=table)

    return SELECTORS[name](ring)
