"""Cost-vs-depth measurements, reported as operation counts.

The unit costs are 1 per MiMC permutation, 1 per keccak block, 1 per
signature verification, 1 per proof verification -- never gas.
"""

from .. import circuit as circuit_mod
from .. import ops
from ..circuit import ProofSystem, SettlementPublic, SettlementWitness
from ..dact import make_leaf
from ..hashing import commit, nullifier_hash
from ..merkle import MerkleTree
from ..rng import SeededRng, random_field_31
from ..signing import KeyPair


def measure_depth(depth: int, seed: int = 0) -> dict:
    """Insert/prove/verify costs for one tree depth."""
    rng = SeededRng(seed).child(f"sweep/{depth}")
    ops.reset()

    tree = MerkleTree(depth)
    setup_perms = ops.snapshot().permutations

    secret, nullifier = random_field_31(rng), random_field_31(rng)
    c = commit(secret, nullifier)
    tpc = int.from_bytes(rng.bytes(9), "big") & ((1 << 73) - 1)
    source_chain = 1001
    leaf = make_leaf(c, tpc, source_chain)

    before = ops.snapshot()
    index = tree.insert(leaf.value)
    insert_perms = ops.snapshot().delta(before).permutations

    signer = KeyPair.generate(rng)
    signature = signer.sign(leaf.value.to_bytes(32, "big"))
    path = tree.path(index)
    proofs = ProofSystem(rng.child("deity"))
    public = SettlementPublic(nullifier_hash(nullifier), tree.root, tpc,
                              signer.verifying_key)
    witness = SettlementWitness(nullifier, secret, path, source_chain, signature)

    before = ops.snapshot()
    proof = proofs.prove(circuit_mod.SETTLEMENT, witness, public)
    prove_delta = ops.snapshot().delta(before)

    before = ops.snapshot()
    assert proofs.verify(circuit_mod.SETTLEMENT, proof)
    verify_delta = ops.snapshot().delta(before)

    return {
        "depth": depth,
        "capacity": 1 << depth,
        "setup_permutations": setup_perms,
        "insert_permutations": insert_perms,
        "prove_constraints": prove_delta.constraint_evals,
        "prove_permutations": prove_delta.permutations,
        "verify_ops": verify_delta.proof_verifies,
        "verify_keccak_blocks": verify_delta.keccak_blocks,
        "verify_permutations": verify_delta.permutations,
    }


def sweep_depths(depths: list, seed: int = 0) -> list:
    """Per-depth cost series; the simulator's analogue of the gas curves."""
    return [measure_depth(d, seed) for d in depths]
