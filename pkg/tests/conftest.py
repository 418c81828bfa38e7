import numpy as np
import pytest

from charsum import characters, dickman, lfun, model, scan


@pytest.fixture(scope="session")
def ctx7():
    return characters.build_context(7)


@pytest.fixture(scope="session")
def ctx101():
    return characters.build_context(101)


@pytest.fixture(scope="session")
def ctx1009():
    return characters.build_context(1009)


@pytest.fixture(scope="session")
def ctx10007():
    return characters.build_context(10007)


@pytest.fixture(scope="session")
def ctx100003():
    return characters.build_context(100003)


@pytest.fixture(scope="session")
def table():
    return dickman.build_table()


@pytest.fixture(scope="session")
def scan10007(ctx10007):
    return scan.scan_all(ctx10007)


@pytest.fixture(scope="session")
def scan100003(ctx100003):
    return scan.scan_all(ctx100003)


@pytest.fixture(scope="session")
def l1_10007(ctx10007):
    return lfun.l1_all(ctx10007)


@pytest.fixture(scope="session")
def l1_100003(ctx100003):
    return lfun.l1_all(ctx100003)


@pytest.fixture(scope="session")
def model_m10k():
    """The 1e4-sample model run shared by the distribution tests."""
    cfg = model.ModelConfig(samples=10_000, seed=12345)
    return cfg, model.sample_many(cfg)
