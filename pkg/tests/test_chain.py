"""Contract state machines: registration, deposit, mixer, withdraw, revert."""

import pytest

from anonbridge.chain import (
    ROUTER_ROOT_WINDOW,
    Chain,
    advance_blocks,
    decode_deposit_event,
    mixer_store_signature,
    mixer_submit,
    router_deposit,
    router_register_dapp,
    router_revert_execute,
    router_revert_halt,
    router_revert_initiate_source,
    router_revert_mark_destination,
    router_update_root,
    router_withdraw,
)
from anonbridge.circuit import ProofSystem
from anonbridge.dact import (
    DepositRequest,
    PayloadIntent,
    dapp_global_hash,
    obfuscate,
    trustless_public_commitment,
)
from anonbridge.errors import (
    AlreadyPending,
    AlreadyRegistered,
    ChainIdOutOfTier,
    CoolDownActive,
    DoubleSpend,
    DuplicateCommitment,
    Halted,
    IndexUnknown,
    NoPending,
    TpcMismatch,
    Unauthorized,
    UnknownCommitment,
    UnknownDapp,
    UnknownRoot,
    WindowActive,
    WindowExpired,
    WrongChain,
)
from anonbridge.hashing import commit
from anonbridge.rng import SeededRng, random_field_31

AUTH = b"\xaa" * 32


class Harness:
    """Minimal two-chain rig: source 1001, multiplexer+destination 1002."""

    def __init__(self, seed=0, depth=8):
        self.rng = SeededRng(seed)
        self.src = Chain(1001, oracle_auth=AUTH)
        self.dst = Chain(1002, depth=depth, oracle_auth=AUTH)
        self.proofs = ProofSystem(self.rng.child("keys"))
        self.addr_src = self.rng.bytes(20)
        self.addr_dst = self.rng.bytes(20)
        for chain, addr in ((self.src, self.addr_src), (self.dst, self.addr_dst)):
            chain.deployed_dapps.add(addr)
        from anonbridge.signing import KeyPair

        self.key = KeyPair.generate(self.rng.child("dapp"))
        self.ghash = router_register_dapp(
            self.src, self.addr_src, [self.addr_dst], self.key.verifying_key
        )
        router_register_dapp(
            self.dst, self.addr_dst, [self.addr_dst], self.key.verifying_key,
            home_address=self.addr_src,
        )

    def deposit(self, dest=1002, version=1):
        from anonbridge.dact import note_new

        note = note_new(self.rng)
        payload = self.rng.bytes(32)
        od = obfuscate(PayloadIntent(payload, dest), note.salt)
        req = DepositRequest(commit(note.secret, note.nullifier), od, version, self.addr_src)
        event = router_deposit(self.src, req)
        return note, payload, req, event

    def settle_case(self, dest=1002, version=1):
        """Deposit, relay, sign, push root; returns everything a withdraw needs."""
        from anonbridge.circuit import SETTLEMENT, SettlementPublic, SettlementWitness
        from anonbridge.dact import leaf_bytes, make_leaf
        from anonbridge.hashing import nullifier_hash

        note, payload, req, event = self.deposit(dest, version)
        index = mixer_submit(self.dst, event)
        _, tpc, source = decode_deposit_event(event.payload)
        leaf = make_leaf(req.commitment, tpc, source)
        sig = self.key.sign(leaf_bytes(leaf.value))
        mixer_store_signature(self.dst, index, sig)
        tree = self.dst.mixer.tree
        router_update_root(self.src, tree.root, AUTH)
        router_update_root(self.dst, tree.root, AUTH)
        public = SettlementPublic(
            nullifier_hash(note.nullifier), tree.root, tpc, self.key.verifying_key
        )
        witness = SettlementWitness(note.nullifier, note.secret, tree.path(index),
                                    source, sig)
        proof = self.proofs.prove(SETTLEMENT, witness, public)
        return note, payload, req, proof, tpc

    def revert_proof(self, note, req, tpc):
        from anonbridge.circuit import REVERT, RevertPublic, RevertWitness
        from anonbridge.dact import make_leaf
        from anonbridge.hashing import nullifier_hash

        tree = self.dst.mixer.tree
        leaf = make_leaf(req.commitment, tpc, 1001)
        index = tree.leaves.index(leaf.value)
        public = RevertPublic(req.commitment, 1001, nullifier_hash(note.nullifier),
                              tree.root)
        witness = RevertWitness(note.nullifier, note.secret, tree.path(index), tpc)
        return self.proofs.prove(REVERT, witness, public), tree.path(index)


class TestRegistration:
    def test_chain_requires_valid_tier(self):
        with pytest.raises(ChainIdOutOfTier):
            Chain(17)

    def test_only_deployed_contracts_register(self):
        h = Harness()
        with pytest.raises(Unauthorized):
            router_register_dapp(h.src, b"\x01" * 20, [h.addr_dst], b"\x00" * 32)

    def test_first_writer_wins(self):
        h = Harness()
        with pytest.raises(AlreadyRegistered):
            router_register_dapp(h.src, h.addr_src, [h.addr_dst], b"\x01" * 32)

    def test_global_hash_identical_across_chains(self):
        h = Harness()
        assert h.src.router.dapp_registry[h.ghash] == h.addr_src
        assert h.dst.router.dapp_registry[h.ghash] == h.addr_dst

    def test_remote_caller_must_be_in_array(self):
        h = Harness()
        intruder = h.rng.bytes(20)
        h.dst.deployed_dapps.add(intruder)
        with pytest.raises(Unauthorized):
            router_register_dapp(h.dst, intruder, [h.addr_dst], b"\x02" * 32,
                                 home_address=h.addr_src)

    def test_registered_hash_matches_direct_computation(self):
        h = Harness()
        assert h.ghash == dapp_global_hash(h.addr_src, [h.addr_dst])


class TestDepositAndMixer:
    def test_deposit_emits_three_words(self):
        h = Harness()
        note, payload, req, event = h.deposit()
        assert event.kind == "deposit" and len(event.payload) == 96
        c, tpc, src = decode_deposit_event(event.payload)
        assert c == req.commitment and src == 1001
        od = obfuscate(PayloadIntent(payload, 1002), note.salt)
        assert tpc == trustless_public_commitment(h.ghash, 1, od)

    def test_unknown_dapp_rejected(self):
        h = Harness()
        req = DepositRequest(1, b"\x00" * 32, 1, b"\x09" * 20)
        with pytest.raises(UnknownDapp):
            router_deposit(h.src, req)

    def test_duplicate_commitment_rejected_at_router_and_mixer(self):
        h = Harness()
        note, payload, req, event = h.deposit()
        with pytest.raises(DuplicateCommitment):
            router_deposit(h.src, req)
        mixer_submit(h.dst, event)
        with pytest.raises(DuplicateCommitment):
            mixer_submit(h.dst, event)

    def test_signature_storage_rules(self):
        h = Harness()
        _, _, _, event = h.deposit()
        index = mixer_submit(h.dst, event)
        with pytest.raises(IndexUnknown):
            mixer_store_signature(h.dst, index + 1, b"s")
        mixer_store_signature(h.dst, index, b"s")
        with pytest.raises(Unauthorized):
            mixer_store_signature(h.dst, index, b"t")
        assert h.dst.mixer.leaf_signatures[index] == b"s"


class TestRootSync:
    def test_requires_oracle_auth(self):
        h = Harness()
        with pytest.raises(Unauthorized):
            router_update_root(h.src, 1, b"\xbb" * 32)

    def test_window_of_two(self):
        h = Harness()
        for root in (11, 22, 33, 44):
            router_update_root(h.src, root, AUTH)
        assert h.src.router.known_roots == [33, 44]
        assert len(h.src.router.known_roots) == ROUTER_ROOT_WINDOW


class TestWithdraw:
    def test_happy_path_invokes_hook(self):
        h = Harness()
        received = []
        h.dst.dapp_hooks[h.addr_dst] = type(
            "Hook", (), {"on_settle": staticmethod(received.append)}
        )
        note, payload, req, proof, tpc = h.settle_case()
        out = router_withdraw(h.dst, proof, payload, note.salt, 1002, 1, h.proofs)
        assert out.payload == payload and received == [payload]
        assert proof.public.nullifier_hash in h.dst.router.nullifier_spent

    def test_check_order(self):
        """Each rejection fires before later checks get a chance."""
        h = Harness()
        note, payload, req, proof, tpc = h.settle_case()
        # unknown root (push two fresh roots to evict)
        router_update_root(h.dst, 1, AUTH)
        router_update_root(h.dst, 2, AUTH)
        with pytest.raises(UnknownRoot):
            router_withdraw(h.dst, proof, payload, note.salt, 1002, 1, h.proofs)
        router_update_root(h.dst, h.dst.mixer.tree.root, AUTH)
        # wrong destination claim
        with pytest.raises(WrongChain):
            router_withdraw(h.dst, proof, payload, note.salt, 1001, 1, h.proofs)
        # unregistered verifying key
        from dataclasses import replace
        from anonbridge.circuit import Proof

        alien = Proof(proof.circuit_id,
                      replace(proof.public, dapp_verifying_key=b"\x05" * 32),
                      proof.attestation)
        with pytest.raises(UnknownDapp):
            router_withdraw(h.dst, alien, payload, note.salt, 1002, 1, h.proofs)
        # tampered payload breaks the TPC recomputation
        bad = bytes([payload[0] ^ 1]) + payload[1:]
        with pytest.raises(TpcMismatch):
            router_withdraw(h.dst, proof, bad, note.salt, 1002, 1, h.proofs)
        # wrong version does too
        with pytest.raises(TpcMismatch):
            router_withdraw(h.dst, proof, payload, note.salt, 1002, 2, h.proofs)
        # valid submission settles, resubmission double-spends
        router_withdraw(h.dst, proof, payload, note.salt, 1002, 1, h.proofs)
        with pytest.raises(DoubleSpend):
            router_withdraw(h.dst, proof, payload, note.salt, 1002, 1, h.proofs)

    def test_invalid_attestation(self):
        from anonbridge.circuit import Proof
        from anonbridge.errors import InvalidProof

        h = Harness()
        note, payload, req, proof, tpc = h.settle_case()
        forged = Proof(proof.circuit_id, proof.public, b"\x00" * 32)
        with pytest.raises(InvalidProof):
            router_withdraw(h.dst, forged, payload, note.salt, 1002, 1, h.proofs)


class TestRevert:
    WINDOW, COOLDOWN = 100, 10

    def _pending(self, h):
        note, payload, req, proof, tpc = h.settle_case()
        rproof, path = h.revert_proof(note, req, tpc)
        router_revert_mark_destination(h.dst, rproof, payload, note.salt, 1, h.ghash,
                                       path, h.proofs)
        end = router_revert_initiate_source(h.src, rproof, h.proofs,
                                            self.WINDOW, self.COOLDOWN)
        return note, payload, req, rproof, end

    def test_mark_sets_both_flags(self):
        h = Harness()
        note, payload, req, rproof, _ = self._pending(h)
        nh = rproof.public.nullifier_hash
        assert nh in h.dst.router.nullifier_spent
        assert nh in h.dst.router.nullifier_reverted

    def test_mark_rejects_wrong_destination(self):
        """A chain whose id is not bound in the intent refuses the mark."""
        h = Harness(depth=8)
        note, payload, req, proof, tpc = h.settle_case()
        rproof, path = h.revert_proof(note, req, tpc)
        # the source chain also knows the root but is not the destination
        with pytest.raises(TpcMismatch):
            router_revert_mark_destination(h.src, rproof, payload, note.salt, 1,
                                           h.ghash, path, h.proofs)

    def test_mark_after_settlement_is_double_spend(self):
        h = Harness()
        note, payload, req, proof, tpc = h.settle_case()
        router_withdraw(h.dst, proof, payload, note.salt, 1002, 1, h.proofs)
        rproof, path = h.revert_proof(note, req, tpc)
        with pytest.raises(DoubleSpend):
            router_revert_mark_destination(h.dst, rproof, payload, note.salt, 1,
                                           h.ghash, path, h.proofs)

    def test_initiate_guards(self):
        h = Harness()
        note, payload, req, rproof, _ = self._pending(h)
        with pytest.raises(AlreadyPending):
            router_revert_initiate_source(h.src, rproof, h.proofs,
                                          self.WINDOW, self.COOLDOWN)
        with pytest.raises(WrongChain):
            router_revert_initiate_source(h.dst, rproof, h.proofs,
                                          self.WINDOW, self.COOLDOWN)

    def test_initiate_unknown_commitment(self):
        h = Harness()
        note, payload, req, proof, tpc = h.settle_case()
        rproof, _ = h.revert_proof(note, req, tpc)
        h.src.router.commitment_log.clear()
        with pytest.raises(UnknownCommitment):
            router_revert_initiate_source(h.src, rproof, h.proofs,
                                          self.WINDOW, self.COOLDOWN)

    def test_window_boundary_exact(self):
        h = Harness()
        note, payload, req, rproof, end = self._pending(h)
        nh = rproof.public.nullifier_hash
        advance_blocks(h.src, self.WINDOW - 1)
        with pytest.raises(WindowActive):
            router_revert_execute(h.src, nh)
        advance_blocks(h.src, 1)
        assert h.src.chain_id and h.src.router.pending_reverts[nh].window_end == end
        router_revert_execute(h.src, nh)  # exactly at window end
        assert nh not in h.src.router.pending_reverts
        assert nh in h.src.router.nullifier_reverted

    def test_halt_blocks_execution(self):
        h = Harness()
        note, payload, req, rproof, _ = self._pending(h)
        nh = rproof.public.nullifier_hash
        with pytest.raises(Unauthorized):
            router_revert_halt(h.src, nh, b"\x01" * 20)
        router_revert_halt(h.src, nh, h.addr_src)
        advance_blocks(h.src, self.WINDOW)
        with pytest.raises(Halted):
            router_revert_execute(h.src, nh)

    def test_halt_after_expiry_rejected(self):
        h = Harness()
        note, payload, req, rproof, _ = self._pending(h)
        advance_blocks(h.src, self.WINDOW)
        with pytest.raises(WindowExpired):
            router_revert_halt(h.src, rproof.public.nullifier_hash, h.addr_src)

    def test_no_pending(self):
        h = Harness()
        with pytest.raises(NoPending):
            router_revert_execute(h.src, 12345)
        with pytest.raises(NoPending):
            router_revert_halt(h.src, 12345, h.addr_src)

    def test_cooldown(self):
        h = Harness()
        note, payload, req, rproof, _ = self._pending(h)
        nh = rproof.public.nullifier_hash
        # clear the pending entry without executing, then re-initiate early
        del h.src.router.pending_reverts[nh]
        with pytest.raises(CoolDownActive):
            router_revert_initiate_source(h.src, rproof, h.proofs,
                                          self.WINDOW, self.COOLDOWN)
        advance_blocks(h.src, self.COOLDOWN)
        router_revert_initiate_source(h.src, rproof, h.proofs,
                                      self.WINDOW, self.COOLDOWN)

    def test_executed_revert_cannot_reopen(self):
        h = Harness()
        note, payload, req, rproof, _ = self._pending(h)
        nh = rproof.public.nullifier_hash
        advance_blocks(h.src, self.WINDOW)
        router_revert_execute(h.src, nh)
        advance_blocks(h.src, self.COOLDOWN)
        with pytest.raises(AlreadyPending):
            router_revert_initiate_source(h.src, rproof, h.proofs,
                                          self.WINDOW, self.COOLDOWN)

    def test_fee_collected(self):
        h = Harness()
        self._pending(h)
        assert h.src.router.fees_collected == 1


class TestClock:
    def test_advance_guards(self):
        h = Harness()
        with pytest.raises(ValueError):
            advance_blocks(h.src, 0)
        assert advance_blocks(h.src, 3) == 3
