"""Settlement and revert constraint systems and the simulated prover."""

import pytest
from dataclasses import replace

from anonbridge import ops
from anonbridge.circuit import (
    REVERT,
    SETTLEMENT,
    Proof,
    ProofSystem,
    RevertPublic,
    RevertWitness,
    SettlementPublic,
    SettlementWitness,
    revert_constraints,
    settlement_constraints,
)
from anonbridge.dact import leaf_bytes, make_leaf
from anonbridge.errors import ConstraintViolation, InvalidProof
from anonbridge.field import P, to_bytes32
from anonbridge.hashing import commit, nullifier_hash
from anonbridge.merkle import MerkleTree
from anonbridge.rng import SeededRng, random_field_31
from anonbridge.signing import KeyPair


def build_case(seed=0, depth=8, source=1001):
    """One fully consistent (witness, public) pair for each circuit."""
    rng = SeededRng(seed)
    secret, nullifier = random_field_31(rng), random_field_31(rng)
    c = commit(secret, nullifier)
    tpc = int.from_bytes(rng.bytes(9), "big") & ((1 << 73) - 1)
    leaf = make_leaf(c, tpc, source)
    tree = MerkleTree(depth)
    # bury the leaf among decoys, as far as capacity allows
    r = rng.py_random()
    pre = r.randint(0, min(5, tree.capacity - 1))
    post = r.randint(0, min(5, tree.capacity - pre - 1))
    for _ in range(pre):
        tree.insert(random_field_31(rng))
    index = tree.insert(leaf.value)
    for _ in range(post):
        tree.insert(random_field_31(rng))
    path = tree.path(index)
    dapp = KeyPair.generate(rng)
    sig = dapp.sign(leaf_bytes(leaf.value))
    sw = SettlementWitness(nullifier, secret, path, source, sig)
    sp = SettlementPublic(nullifier_hash(nullifier), tree.root, tpc, dapp.verifying_key)
    rw = RevertWitness(nullifier, secret, path, tpc)
    rp = RevertPublic(c, source, nullifier_hash(nullifier), tree.root)
    return sw, sp, rw, rp, rng


class TestConstraints:
    def test_honest_cases_satisfy_both_circuits(self):
        for seed in range(5):
            sw, sp, rw, rp, _ = build_case(seed)
            assert settlement_constraints(sw, sp)
            assert revert_constraints(rw, rp)

    def test_settlement_failure_names(self):
        sw, sp, rw, rp, _ = build_case(1)
        proofs = ProofSystem(SeededRng(99))
        cases = [
            (replace(sp, nullifier_hash=(sp.nullifier_hash + 1) % P), sw, "nullifier_hash"),
            (replace(sp, merkle_root=(sp.merkle_root + 1) % P), sw, "merkle_path"),
            (replace(sp, tpc=sp.tpc ^ 1), sw, "merkle_path"),   # leaf no longer in tree
            (sp, replace(sw, secret=(sw.secret + 1) % P), "merkle_path"),
            (sp, replace(sw, leaf_signature=bytes(64)), "signature"),
        ]
        for public, witness, name in cases:
            assert not settlement_constraints(witness, public)
            with pytest.raises(ConstraintViolation) as err:
                proofs.prove(SETTLEMENT, witness, public)
            assert err.value.constraint == name

    def test_revert_failure_names(self):
        sw, sp, rw, rp, _ = build_case(2)
        proofs = ProofSystem(SeededRng(99))
        cases = [
            (replace(rp, commitment=(rp.commitment + 1) % P), rw, "commitment"),
            (replace(rp, nullifier_hash=(rp.nullifier_hash + 1) % P), rw, "nullifier_hash"),
            (replace(rp, merkle_root=(rp.merkle_root + 1) % P), rw, "merkle_path"),
            (rp, replace(rw, tpc=rw.tpc ^ 1), "merkle_path"),
        ]
        for public, witness, name in cases:
            assert not revert_constraints(witness, public)
            with pytest.raises(ConstraintViolation) as err:
                proofs.prove(REVERT, witness, public)
            assert err.value.constraint == name

    def test_wrong_source_chain_rejected(self):
        sw, sp, _, _, _ = build_case(3)
        assert not settlement_constraints(replace(sw, source_chain=1002), sp)


class TestProver:
    def test_prove_verify_round_trip(self):
        sw, sp, rw, rp, rng = build_case(4)
        proofs = ProofSystem(rng.child("keys"))
        s_proof = proofs.prove(SETTLEMENT, sw, sp)
        r_proof = proofs.prove(REVERT, rw, rp)
        assert proofs.verify(SETTLEMENT, s_proof)
        assert proofs.verify(REVERT, r_proof)

    def test_unknown_circuit(self):
        sw, sp, *_ , rng = build_case(4)
        proofs = ProofSystem(rng.child("keys"))
        with pytest.raises(InvalidProof):
            proofs.prove(99, sw, sp)

    def test_attestation_not_transferable_across_circuits(self):
        sw, sp, rw, rp, rng = build_case(5)
        proofs = ProofSystem(rng.child("keys"))
        s_proof = proofs.prove(SETTLEMENT, sw, sp)
        assert not proofs.verify(REVERT, s_proof)
        forged = Proof(REVERT, rp, s_proof.attestation)
        assert not proofs.verify(REVERT, forged)

    def test_tampered_publics_rejected(self):
        sw, sp, *_, rng = build_case(6)
        proofs = ProofSystem(rng.child("keys"))
        proof = proofs.prove(SETTLEMENT, sw, sp)
        tampered = Proof(
            SETTLEMENT, replace(sp, tpc=sp.tpc ^ 1), proof.attestation
        )
        assert not proofs.verify(SETTLEMENT, tampered)

    def test_different_key_holders_incompatible(self):
        sw, sp, *_, _ = build_case(7)
        a, b = ProofSystem(SeededRng(1)), ProofSystem(SeededRng(2))
        proof = a.prove(SETTLEMENT, sw, sp)
        assert a.verify(SETTLEMENT, proof)
        assert not b.verify(SETTLEMENT, proof)

    def test_serialization_layout(self):
        sw, sp, *_, rng = build_case(8)
        proofs = ProofSystem(rng.child("keys"))
        proof = proofs.prove(SETTLEMENT, sw, sp)
        blob = proof.serialize()
        assert blob[0] == SETTLEMENT
        assert blob[1:33] == to_bytes32(sp.nullifier_hash)
        assert blob[33:65] == to_bytes32(sp.merkle_root)
        assert blob[65:97] == to_bytes32(sp.tpc)
        assert blob[97:129] == sp.dapp_verifying_key
        assert blob[129:] == proof.attestation and len(proof.attestation) == 32


class TestHiding:
    def test_proof_bytes_carry_no_witness_material(self):
        """Byte-scan: serialized proofs never contain witness encodings."""
        proofs = ProofSystem(SeededRng(77))
        for seed in range(1000):
            sw, sp, rw, rp, _ = build_case(seed, depth=4)
            blob = proofs.prove(SETTLEMENT, sw, sp).serialize()
            blob += proofs.prove(REVERT, rw, rp).serialize()
            for secret_value in (sw.secret, sw.nullifier):
                enc = to_bytes32(secret_value)
                assert enc not in blob
                assert enc[1:] not in blob  # 31-byte tail too
            assert sw.leaf_signature not in blob

    def test_settlement_publics_hide_the_commitment(self):
        sw, sp, *_, _ = build_case(9)
        c = commit(sw.secret, sw.nullifier)
        assert to_bytes32(c) not in sp.canonical_bytes()


class TestCosts:
    def test_verify_cost_constant_in_depth(self):
        deltas = set()
        for depth in (2, 4, 8, 16):
            sw, sp, *_, _ = build_case(depth, depth=depth)
            proofs = ProofSystem(SeededRng(depth))
            proof = proofs.prove(SETTLEMENT, sw, sp)
            before = ops.snapshot()
            proofs.verify(SETTLEMENT, proof)
            d = ops.snapshot().delta(before)
            assert d.proof_verifies == 1
            assert d.permutations == 0 and d.sig_verifies == 0
            deltas.add(tuple(d.as_dict().items()))
        assert len(deltas) == 1  # identical across depths

    def test_prove_constraints_linear_in_depth(self):
        for depth in (2, 4, 8):
            sw, sp, *_, _ = build_case(depth, depth=depth)
            proofs = ProofSystem(SeededRng(depth))
            before = ops.snapshot().constraint_evals
            proofs.prove(SETTLEMENT, sw, sp)
            # nullifier + path-fold (depth) + membership + signature
            assert ops.snapshot().constraint_evals - before == depth + 3
