import pytest

from rfharvest import channel, datasets, harvesters


@pytest.fixture(scope="session")
def nakagami5():
    return channel.FadingChannel(nakagami_m=5.0)


@pytest.fixture(scope="session")
def link_d5():
    return channel.LinkBudget(transmit_power_mw=1500.0, distance_m=5.0,
                              path_loss_exponent=2.1)


@pytest.fixture(scope="session")
def rectenna_a_model():
    return datasets.reference_model("rectenna-A")


@pytest.fixture(scope="session")
def rectenna_a_pwl(rectenna_a_model):
    return harvesters.PiecewiseLinearHarvester.from_model(rectenna_a_model, 585, "db")


@pytest.fixture(scope="session")
def module_b_curve():
    return datasets.bundled_curve("module-B")
