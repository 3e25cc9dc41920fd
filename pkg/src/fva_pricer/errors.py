"""Exception types shared across the library."""


class PricingError(Exception):
    """Base class for all fva-pricer errors."""


class ConfigError(PricingError, ValueError):
    """Invalid market, instrument, or solver configuration."""


class InvalidRateOrder(ConfigError):
    """Rates violate the required ordering rebate <= r <= r_b, repo >= r."""


class InvalidHaircut(ConfigError):
    """A haircut lies outside [0, 1)."""


class NonPositiveVol(ConfigError):
    """Volatility is not strictly positive."""


class BadStrikes(ConfigError):
    """Strategy strikes are missing, unordered, or non-positive."""


class GridTooCoarse(ConfigError):
    """The spatial grid cannot place the spot at an interior node."""


class HaircutNotZero(PricingError):
    """A zero-haircut closed form was requested with a nonzero haircut."""


class PriceOutOfBounds(PricingError):
    """Target price violates static no-arbitrage bounds."""


class NoConvergence(PricingError):
    """The funding-boundary iteration exhausted its iteration budget."""


class PsorDiverged(NoConvergence):
    """Projected SOR sweeps exhausted their iteration budget."""


class OracleUnavailable(PricingError):
    """No pricing oracle exists for the requested hedge simulation."""
