"""Smoke tests for the python bindings: every exposed operation round-trips."""

import pytest

import smpcfl


@pytest.fixture(scope="module")
def cfg():
    return smpcfl.FixedPointConfig(k=32, f=16)


def test_encode_decode_roundtrip(cfg):
    assert smpcfl.encode(1.5, cfg) == 98304
    assert smpcfl.decode(98304, cfg) == 1.5
    assert abs(smpcfl.decode(smpcfl.encode(-0.25, cfg), cfg) + 0.25) < 2**-16


def test_ring_ops(cfg):
    n = 2**32
    assert smpcfl.ring_add(n - 1, 1, cfg) == 0
    assert smpcfl.ring_mul(3, 4, cfg) == 12


def test_share_reconstruct(cfg):
    secret = [5, 98304, 2**32 - 1]
    for n in (2, 3, 5):
        shares = smpcfl.share(secret, n, seed=42, cfg=cfg)
        assert len(shares) == n
        assert smpcfl.reconstruct(shares, cfg) == secret


def test_share_determinism(cfg):
    a = smpcfl.share([7], 3, seed=1, cfg=cfg)
    b = smpcfl.share([7], 3, seed=1, cfg=cfg)
    assert a == b


def test_secure_multiply(cfg):
    got = smpcfl.secure_multiply(1.5, 2.0, seed=3, cfg=smpcfl.FixedPointConfig(k=48, f=16))
    assert abs(got - 3.0) < 2**-15


def test_secure_leq_zero(cfg):
    assert smpcfl.secure_leq_zero(-3.0, 4, cfg) == 1
    assert smpcfl.secure_leq_zero(0.0, 5, cfg) == 1
    assert smpcfl.secure_leq_zero(2.5, 6, cfg) == 0


def test_secure_aggregate():
    cfg48 = smpcfl.FixedPointConfig(k=48, f=16)
    got = smpcfl.secure_aggregate([[2.0, 1.0], [4.0, 2.0], [6.0, 3.0]], seed=7, cfg=cfg48)
    assert abs(got[0] - 4.0) < 2**-15
    assert abs(got[1] - 2.0) < 2**-15


def test_bad_config_raises():
    with pytest.raises(Exception):
        smpcfl.FixedPointConfig(k=8, f=7)
