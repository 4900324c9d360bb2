"""Secret-sharing MPC primitives and federated-learning protocols."""

from smpcfl._core import (
    FixedPointConfig,
    SmpcError,
    decode,
    encode,
    reconstruct,
    ring_add,
    ring_mul,
    secure_aggregate,
    secure_leq_zero,
    secure_multiply,
    selftest,
    share,
)

__all__ = [
    "FixedPointConfig",
    "SmpcError",
    "decode",
    "encode",
    "reconstruct",
    "ring_add",
    "ring_mul",
    "secure_aggregate",
    "secure_leq_zero",
    "secure_multiply",
    "selftest",
    "share",
]
