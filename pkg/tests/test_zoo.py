import numpy as np
import pytest

from qcapacity.channels import apply
from qcapacity.structure import detect_cq
from qcapacity.zoo import ZOO_SWEEP, UnknownChannelError, blocksum, zoo, zoo_defaults, zoo_names


def completeness(c):
    gram = np.einsum("kji,kjl->il", c.kraus.conj(), c.kraus)
    return np.abs(gram - np.eye(c.dim_in)).max()


def test_identity():
    c = zoo("identity", d=2)
    assert c.num_kraus == 1
    assert np.allclose(c.kraus[0], np.eye(2))


def test_depolarizing():
    c = zoo("depolarizing", p=0.5)
    assert c.num_kraus == 4
    assert completeness(c) <= 1e-12


def test_cq_orthogonal():
    found = detect_cq(zoo("cq_orthogonal", d=3))
    assert found is not None and found.residual == 0.0


@pytest.mark.parametrize("name, params", ZOO_SWEEP)
def test_sweep_entries_are_channels(name, params):
    c = zoo(name, **params)
    assert completeness(c) <= 1e-12
    assert name in c.name


def test_names_and_defaults():
    assert set(name for name, _ in ZOO_SWEEP) <= set(zoo_names())
    assert zoo_defaults("depolarizing") == {"p": 0.5}
    with pytest.raises(UnknownChannelError):
        zoo_defaults("nope")


def test_unknown_name():
    with pytest.raises(UnknownChannelError):
        zoo("nope")


def test_unknown_parameter():
    with pytest.raises(ValueError):
        zoo("identity", p=3)


def test_bad_value():
    with pytest.raises(ValueError):
        zoo("depolarizing", p=2.0)


def test_blocksum_shape():
    c = blocksum()
    assert (c.dim_in, c.dim_out) == (3, 2)
    # the classical block passes basis states through
    assert np.allclose(apply(c, np.diag([1.0, 0, 0])), np.diag([1.0, 0]))
    # the extra level is sent to the maximally mixed state
    assert np.allclose(apply(c, np.diag([0, 0, 1.0])), np.eye(2) / 2)


@pytest.mark.parametrize("povm, n", [("trine", 3), ("bb84", 4), ("tetrahedral", 4)])
def test_measurements(povm, n):
    c = zoo("qc_measurement", povm=povm)
    assert c.dim_out == n
    out = apply(c, np.eye(2) / 2)
    assert np.allclose(out, np.diag(np.diag(out)))
