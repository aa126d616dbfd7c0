"""Settlement and revert constraint systems behind a simulated prover.

Proofs are MACs under a per-circuit "deity key" held solely by the
proving object, which refuses to MAC the public signals unless every
constraint holds. This makes soundness and hiding testable contracts:
the prove/verify seam is exactly where a real SNARK backend would slot
in, and the proof object carries nothing witness-derived beyond the
public signals.

Serialization: circuit_id byte || canonical public signals || 32-byte
attestation. Settlement publics are nullifier_hash (32) || merkle_root
(32) || tpc (32) || verifying_key (32); revert publics are commitment
(32) || source_chain (32) || nullifier_hash (32) || merkle_root (32).
"""

from dataclasses import dataclass

from . import ops
from .dact import make_leaf, leaf_bytes, validate_chain_id
from .errors import ConstraintViolation, InvalidProof
from .field import to_bytes32
from .hashing import commit, nullifier_hash
from .keccak import keccak256
from .merkle import MerklePath, verify_path
from .signing import verify as verify_signature

SETTLEMENT = 1
REVERT = 2

_CIRCUIT_IDS = (SETTLEMENT, REVERT)


@dataclass(frozen=True)
class SettlementWitness:
    nullifier: int
    secret: int
    path: MerklePath
    source_chain: int
    leaf_signature: bytes


@dataclass(frozen=True)
class SettlementPublic:
    nullifier_hash: int
    merkle_root: int
    tpc: int
    dapp_verifying_key: bytes

    def canonical_bytes(self) -> bytes:
        return (
            to_bytes32(self.nullifier_hash)
            + to_bytes32(self.merkle_root)
            + to_bytes32(self.tpc)
            + self.dapp_verifying_key
        )


@dataclass(frozen=True)
class RevertWitness:
    nullifier: int
    secret: int
    path: MerklePath
    tpc: int  # bound through leaf reconstruction, never revealed


@dataclass(frozen=True)
class RevertPublic:
    commitment: int
    source_chain: int
    nullifier_hash: int
    merkle_root: int

    def canonical_bytes(self) -> bytes:
        return (
            to_bytes32(self.commitment)
            + to_bytes32(self.source_chain)
            + to_bytes32(self.nullifier_hash)
            + to_bytes32(self.merkle_root)
        )


@dataclass(frozen=True)
class Proof:
    circuit_id: int
    public: object  # SettlementPublic | RevertPublic
    attestation: bytes

    def serialize(self) -> bytes:
        return bytes([self.circuit_id]) + self.public.canonical_bytes() + self.attestation


def settlement_constraints(w: SettlementWitness, p: SettlementPublic) -> bool:
    """All four settlement constraints, in order; boolean, never raises."""
    try:
        _check_settlement(w, p)
        return True
    except ConstraintViolation:
        return False


def _check_settlement(w: SettlementWitness, p: SettlementPublic) -> None:
    validate_chain_id(w.source_chain)
    ops.charge_constraint()
    if nullifier_hash(w.nullifier) != p.nullifier_hash:
        raise ConstraintViolation("nullifier_hash")
    ops.charge_constraint()
    c = commit(w.secret, w.nullifier)
    leaf = make_leaf(c, p.tpc, w.source_chain)
    ops.charge_constraint(len(w.path.elements))
    if not verify_path(p.merkle_root, leaf.value, w.path):
        raise ConstraintViolation("merkle_path")
    ops.charge_constraint()
    if not verify_signature(p.dapp_verifying_key, leaf_bytes(leaf.value), w.leaf_signature):
        raise ConstraintViolation("signature")


def revert_constraints(w: RevertWitness, p: RevertPublic) -> bool:
    """Revert circuit: no signature check; commitment and source public."""
    try:
        _check_revert(w, p)
        return True
    except ConstraintViolation:
        return False


def _check_revert(w: RevertWitness, p: RevertPublic) -> None:
    validate_chain_id(p.source_chain)
    ops.charge_constraint()
    if commit(w.secret, w.nullifier) != p.commitment:
        raise ConstraintViolation("commitment")
    ops.charge_constraint()
    if nullifier_hash(w.nullifier) != p.nullifier_hash:
        raise ConstraintViolation("nullifier_hash")
    leaf = make_leaf(p.commitment, w.tpc, p.source_chain)
    ops.charge_constraint(len(w.path.elements))
    if not verify_path(p.merkle_root, leaf.value, w.path):
        raise ConstraintViolation("merkle_path")


class ProofSystem:
    """Holds the per-circuit deity keys; one instance per scenario."""

    def __init__(self, rng):
        self._keys = {cid: rng.bytes(32) for cid in _CIRCUIT_IDS}

    def _mac(self, circuit_id: int, public) -> bytes:
        return keccak256(
            self._keys[circuit_id] + bytes([circuit_id]) + public.canonical_bytes()
        )

    def prove(self, circuit_id: int, witness, public) -> Proof:
        """MAC the public signals iff the circuit constraints hold."""
        if circuit_id == SETTLEMENT:
            _check_settlement(witness, public)
        elif circuit_id == REVERT:
            _check_revert(witness, public)
        else:
            raise InvalidProof(f"unknown circuit id {circuit_id}")
        return Proof(circuit_id, public, self._mac(circuit_id, public))

    def verify(self, circuit_id: int, proof: Proof) -> bool:
        """Constant-cost check that the attestation covers the publics."""
        ops.charge_proof_verify()
        if proof.circuit_id != circuit_id:
            return False
        return self._mac(circuit_id, proof.public) == proof.attestation
