"""Exception types shared across the package."""


class ContractError(ValueError):
    """A model, intensity or density violates an assumption the numerics rely on."""


class DensityError(ContractError):
    """A sampling density is not positive or cannot be normalized."""


class NumericalError(RuntimeError):
    """A computation produced non-finite or otherwise unusable values."""
