import pytest

from pafluid.errors import ConfigError
from pafluid.params import ModelParams


def test_rates():
    g = ModelParams.power("graph", 0.3, 0.0)
    u = ModelParams.power("urn", 0.3, 0.0)
    assert (g.p0, g.q0) == (0.3, 1.7)
    assert (u.p0, u.q0) == (0.3, pytest.approx(0.7))


@pytest.mark.parametrize("model,p", [("graph", 0.0), ("graph", 1.1), ("urn", 1.0), ("urn", 0.0),
                                     ("urn", -0.2), ("tree", 0.5)])
def test_domain(model, p):
    with pytest.raises(ConfigError):
        ModelParams.power(model, p, 0.0)


def test_urn_p1_message_cites_degenerate():
    with pytest.raises(ConfigError, match="degenerate"):
        ModelParams.power("urn", 1.0, 0.0)


def test_graph_p1_accepted():
    assert ModelParams.power("graph", 1.0, 0.5).q0 == 1.0


def test_to_dict():
    d = ModelParams.power("urn", 0.5, 0.5).to_dict()
    assert d["weight"]["kappa"] == 0.5 and d["q0"] == 0.5
