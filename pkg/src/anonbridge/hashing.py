"""MiMC sponge permutation and the commitment hashes built from it.

Construction: a 220-round exponent-5 Feistel permutation over a two-lane
state in the BN254 scalar field, round constants derived by iterating
keccak256 from the ASCII seed ``mimcsponge``. ``mimc_hash2`` absorbs both
inputs into the state and runs exactly one permutation, so the op-counter
charges one permutation per tree-hash call.

Commitments use the same permutation under distinct domain-separation
constants so that ``commit`` and ``nullifier_hash`` can never collide
with each other or with tree nodes.
"""

from . import ops
from .field import P, check, reduce_bytes
from .keccak import keccak256

N_ROUNDS = 5  # exponent
N_PERM_ROUNDS = 220

_CONSTANT_SEED = b"mimcsponge"


def _round_constants() -> list:
    cs = []
    s = keccak256(_CONSTANT_SEED)
    for _ in range(N_PERM_ROUNDS):
        s = keccak256(s)
        cs.append(int.from_bytes(s, "big") % P)
    return cs


_C = _round_constants()

# domain-separation constants for the pluggable commitment hash
DOMAIN_COMMIT = reduce_bytes(keccak256(b"anonbridge/commit"))
DOMAIN_NULLIFIER = reduce_bytes(keccak256(b"anonbridge/nullifier"))


def _permute_raw(x_left: int, x_right: int) -> tuple:
    for i in range(N_PERM_ROUNDS - 1):
        t = pow((x_left + _C[i]) % P, 5, P)
        x_left, x_right = (x_right + t) % P, x_left
    t = pow((x_left + _C[N_PERM_ROUNDS - 1]) % P, 5, P)
    x_right = (x_right + t) % P
    return x_left, x_right


def permute(x_left: int, x_right: int) -> tuple:
    """One full Feistel permutation of the two-lane state. Cost: 1 unit."""
    ops.charge_permutation()
    return _permute_raw(x_left, x_right)


def mimc_hash2(left: int, right: int) -> int:
    """Two-to-one hash used for Merkle tree nodes. Exactly 1 permutation."""
    check(left)
    check(right)
    return permute(left, right)[0]


def mimc_sponge(inputs, domain: int) -> int:
    """Absorb ``inputs`` one lane at a time under a domain constant."""
    x_left, x_right = domain % P, 0
    for v in inputs:
        x_left = (x_left + check(v)) % P
        x_left, x_right = permute(x_left, x_right)
    return x_left


def commit(secret: int, nullifier: int) -> int:
    """Hiding, binding commitment to (secret, nullifier)."""
    return mimc_sponge((secret, nullifier), DOMAIN_COMMIT)


def nullifier_hash(nullifier: int) -> int:
    """Public image of the nullifier; published at settlement."""
    return mimc_sponge((nullifier,), DOMAIN_NULLIFIER)
