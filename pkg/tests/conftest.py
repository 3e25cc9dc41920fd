import pytest

from fva_pricer import FundingConfig, PdeGrid

# the calibration case shared by most numerical tests
SPOT = 100.0
STRIKE = 100.0
EXPIRY = 2.0
RATE = 0.10
VOL = 0.5


@pytest.fixture(scope="session")
def classic_config() -> FundingConfig:
    return FundingConfig.classic(r=RATE, sigma=VOL)


@pytest.fixture(scope="session")
def funded_config() -> FundingConfig:
    """300 bp unsecured spread, 50 bp secured spreads, standard haircuts."""
    return FundingConfig(r=RATE, r_b=RATE + 0.03, q=0.0, sigma=VOL,
                         repo_rate=RATE + 0.005, repo_haircut=0.25,
                         rebate_rate=RATE - 0.005, sec_haircut=0.15)


@pytest.fixture(scope="session")
def fine_grid(classic_config) -> PdeGrid:
    """The calibration grid: 2000 nodes, dt = 0.02."""
    return PdeGrid.build(SPOT, STRIKE, VOL, EXPIRY, n_nodes=2000, dt=0.02)


@pytest.fixture(scope="session")
def coarse_grid(classic_config) -> PdeGrid:
    """Small grid for fast qualitative tests."""
    return PdeGrid.build(SPOT, STRIKE, VOL, EXPIRY, n_nodes=500, dt=0.04)


def make_config(spread: float = 0.0, repo_spread: float = 0.0,
                rebate_spread: float | None = None, repo_haircut: float = 0.0,
                sec_haircut: float = 0.0, r: float = RATE, sigma: float = VOL,
                q: float = 0.0) -> FundingConfig:
    if rebate_spread is None:
        rebate_spread = -repo_spread
    return FundingConfig(r=r, r_b=r + spread, q=q, sigma=sigma,
                         repo_rate=r + repo_spread, repo_haircut=repo_haircut,
                         rebate_rate=r + rebate_spread, sec_haircut=sec_haircut)
