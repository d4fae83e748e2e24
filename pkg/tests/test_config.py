import pytest

from refkato.config import KahlerConfig, RiemannianConfig
from refkato.exterior import BidegreeSpace, ExteriorSpace


def test_riemannian_config():
    c = RiemannianConfig(4, 2)
    assert c.space == ExteriorSpace(4, 2)
    assert c.tensor_space.dim == 4 * 6
    assert c.as_dict() == {"variant": "riemannian", "n": 4, "k": 2}
    for n, k in [(0, 0), (3, 4), (3, -1)]:
        with pytest.raises(ValueError):
            RiemannianConfig(n, k)


def test_kahler_config():
    c = KahlerConfig(3, 1, 2)
    assert c.space == BidegreeSpace(3, 1, 2)
    assert c.tensor_space.dim == 6 * 9
    assert "family" not in c.as_dict()
    assert c.with_family("L2").as_dict()["family"] == "L2"
    with pytest.raises(ValueError):
        KahlerConfig(2, 3, 0)
    with pytest.raises(ValueError):
        KahlerConfig(2, 1, 1, family="L3")
    assert KahlerConfig(2, 1, 1) != KahlerConfig(2, 1, 1, "L1")
