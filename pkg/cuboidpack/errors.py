"""Exception hierarchy shared by every cuboidpack module."""


class PackingError(Exception):
    """Base class for all cuboidpack failures."""


class PreconditionError(PackingError, ValueError):
    """An operation was called outside its documented input range."""


class UnknownItemError(PackingError, KeyError):
    """A placement references an item id missing from the item table."""

    def __init__(self, item_id):
        super().__init__(item_id)
        self.item_id = item_id

    def __str__(self):
        return f"unknown item id {self.item_id!r}"


class ContractViolation(PackingError):
    """A cut or alignment contract does not hold for the given packing."""


class InfeasibleError(PackingError):
    """A linear program or capacity system has no feasible solution."""


class OracleCapExceeded(PackingError):
    """Exact search refused: too many items for the configured cap."""


class SearchBudgetExceeded(PackingError):
    """Exact search gave up after exhausting its node budget."""


class InstanceFormatError(PackingError, ValueError):
    """Malformed instance, packing or descriptor file."""
