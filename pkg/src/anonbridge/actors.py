"""Behavioral models: user wallet, oracle network, dApp signer and watcher.

Actors own their state exclusively and are stepped by the deterministic
scenario scheduler. Adversarial behavior lives in the oracle policy and
in scenario drivers, never inside the contracts.
"""

from dataclasses import dataclass, field

from . import circuit as circuit_mod
from .chain import (
    Chain,
    decode_deposit_event,
    mixer_store_signature,
    mixer_submit,
    router_deposit,
    router_update_root,
)
from .circuit import (
    ProofSystem,
    RevertPublic,
    RevertWitness,
    SettlementPublic,
    SettlementWitness,
)
from .dact import (
    DepositRequest,
    Note,
    PayloadIntent,
    leaf_bytes,
    make_leaf,
    note_new,
    obfuscate,
    parse_deposit,
    serialize_deposit,
    trustless_public_commitment,
)
from .errors import SignatureMissing, ThresholdUnmet, UnknownCommitment
from .hashing import commit, nullifier_hash
from .rng import SeededRng
from .signing import KeyPair


# -- dApp contract (per chain) -------------------------------------------------

class DappContract:
    """Minimal value-transfer dApp: escrows deposits, receives payloads.

    Settlement delivers the raw 32-byte payload; revert refunds the
    escrowed value to the depositing wallet.
    """

    def __init__(self, address: bytes):
        self.address = address
        self.received_payloads: list = []
        self.escrow: dict = {}  # commitment -> (value, wallet)

    def on_settle(self, payload: bytes) -> None:
        self.received_payloads.append(payload)

    def on_revert(self, commitment: int) -> None:
        value, wallet = self.escrow.pop(commitment)
        wallet.balance += value

    def forward_deposit(self, chain: Chain, wallet, req: DepositRequest, value: int):
        """The dApp SC interface that passes user data to the Router.

        Round-trips the request through the canonical wire format, the
        same bytes a real transaction would carry.
        """
        req = parse_deposit(serialize_deposit(req))
        event = router_deposit(chain, req)
        wallet.balance -= value
        self.escrow[req.commitment] = (value, wallet)
        return event


# -- wallet --------------------------------------------------------------------

@dataclass
class NoteRecord:
    note: Note
    intent: PayloadIntent
    version: int
    ghash: bytes
    source_chain: int
    dapp_address: bytes
    value: int


class Wallet:
    """Holds notes and builds proofs; note material never leaves here."""

    def __init__(self, name: str, rng: SeededRng, balance: int = 100):
        self.name = name
        self.rng = rng
        self.balance = balance
        self.notes: dict = {}  # commitment -> NoteRecord

    def deposit(self, chain: Chain, dapp_contract: DappContract, ghash: bytes,
                intent: PayloadIntent, version: int, value: int = 1) -> int:
        """Create a note, obfuscate the intent, and submit via the dApp."""
        note = note_new(self.rng)
        c = commit(note.secret, note.nullifier)
        od = obfuscate(intent, note.salt)
        req = DepositRequest(c, od, version, dapp_contract.address)
        dapp_contract.forward_deposit(chain, self, req, value)
        self.notes[c] = NoteRecord(
            note, intent, version, ghash, chain.chain_id, dapp_contract.address, value
        )
        return c

    def _record(self, commitment: int) -> NoteRecord:
        rec = self.notes.get(commitment)
        if rec is None:
            raise UnknownCommitment(f"wallet holds no note for {commitment}")
        return rec

    def _locate_leaf(self, commitment: int, mixer_chain: Chain):
        rec = self._record(commitment)
        od = obfuscate(rec.intent, rec.note.salt)
        tpc = trustless_public_commitment(rec.ghash, rec.version, od)
        leaf = make_leaf(commitment, tpc, rec.source_chain)
        tree = mixer_chain.mixer.tree
        try:
            index = tree.leaves.index(leaf.value)
        except ValueError:
            raise UnknownCommitment(
                f"leaf for commitment {commitment} not in the global tree"
            ) from None
        return rec, tpc, leaf, index

    def build_settlement(self, commitment: int, mixer_chain: Chain,
                         proofs: ProofSystem, dapp_verifying_key: bytes):
        """Settlement proof plus the withdraw call parameters."""
        rec, tpc, leaf, index = self._locate_leaf(commitment, mixer_chain)
        signature = mixer_chain.mixer.leaf_signatures.get(index)
        if signature is None:
            raise SignatureMissing(f"leaf {index} has no dApp signature yet")
        tree = mixer_chain.mixer.tree
        path = tree.path(index)
        public = SettlementPublic(
            nullifier_hash(rec.note.nullifier), tree.root, tpc, dapp_verifying_key
        )
        witness = SettlementWitness(
            rec.note.nullifier, rec.note.secret, path, rec.source_chain, signature
        )
        proof = proofs.prove(circuit_mod.SETTLEMENT, witness, public)
        return proof, rec.intent.payload, rec.note.salt, rec.version

    def build_revert(self, commitment: int, mixer_chain: Chain, proofs: ProofSystem):
        """Revert proof plus the destination-mark call parameters."""
        rec, tpc, leaf, index = self._locate_leaf(commitment, mixer_chain)
        tree = mixer_chain.mixer.tree
        path = tree.path(index)
        public = RevertPublic(
            commitment, rec.source_chain, nullifier_hash(rec.note.nullifier), tree.root
        )
        witness = RevertWitness(rec.note.nullifier, rec.note.secret, path, tpc)
        proof = proofs.prove(circuit_mod.REVERT, witness, public)
        return proof, rec.intent.payload, rec.note.salt, rec.version, rec.ghash, path


# -- oracle network -------------------------------------------------------------

@dataclass
class OraclePolicy:
    mode: str = "honest"  # honest | forge_root | censor_dapp | censor_chain | replay
    forged_root: int = 0
    censor_dapp: bytes = b""      # global hash of the censored dApp
    censor_chain: int = 0
    relay_period: int = 1
    root_push_period: int = 1


class Oracle:
    """Relays deposit events to the mixer and pushes roots to routers."""

    def __init__(self, policy: OraclePolicy, auth: bytes, rng: SeededRng):
        self.policy = policy
        self.auth = auth
        self.rng = rng
        self.offline = False
        self._cursors: dict = {}     # chain id -> next event index to scan
        self._relayed: list = []     # events already relayed (for replay mode)
        self.dropped: list = []      # censored items, for transcript assertions

    def relay(self, chains: dict, mixer_chain: Chain) -> list:
        """Scan all event logs and push new deposit events into the mixer."""
        if self.offline:
            return []
        actions = []
        for cid in sorted(chains):
            chain = chains[cid]
            start = self._cursors.get(cid, 0)
            for ev in chain.event_log[start:]:
                if ev.kind != "deposit":
                    continue
                if self.policy.mode == "censor_chain" and cid == self.policy.censor_chain:
                    self.dropped.append(("deposit", cid))
                    continue
                index = mixer_submit(mixer_chain, ev)
                self._relayed.append(ev)
                actions.append(("relayed", cid, index))
                if self.policy.mode == "replay":
                    # resubmit the same event; the mixer must dedupe
                    try:
                        mixer_submit(mixer_chain, ev)
                        actions.append(("replay_accepted", cid, index))
                    except Exception as exc:  # noqa: BLE001 - recorded, not raised
                        actions.append(("replay_rejected", cid, type(exc).__name__))
            self._cursors[cid] = len(chain.event_log)
        return actions

    def push_root(self, chains: dict, mixer_chain: Chain) -> int:
        """Push the latest (or forged) root into every Router."""
        if self.offline:
            return 0
        root = (
            self.policy.forged_root
            if self.policy.mode == "forge_root"
            else mixer_chain.mixer.tree.root
        )
        for cid in sorted(chains):
            router_update_root(chains[cid], root, self.auth)
        return root

    def route_withdraw(self, ghash: bytes, dest_chain: int) -> bool:
        """Whether the oracle network is willing to relay this withdraw."""
        if self.offline:
            return False
        if self.policy.mode == "censor_dapp" and ghash == self.policy.censor_dapp:
            self.dropped.append(("withdraw", ghash.hex()))
            return False
        if self.policy.mode == "censor_chain" and dest_chain == self.policy.censor_chain:
            self.dropped.append(("withdraw", dest_chain))
            return False
        return True

    def attempt_forged_settlement(self, proofs: ProofSystem, depth: int,
                                  source_chain: int, victim_vk: bytes):
        """The network-abuse move: forge a root, then try to prove.

        The oracle fabricates its own note and tree, injects the forged
        root, and attempts a settlement proof against the victim dApp's
        verifying key. It can only sign with its own key, so proving
        must fail at the signature constraint.
        """
        from .merkle import MerkleTree

        secret = int.from_bytes(self.rng.bytes(31), "big")
        nullifier = int.from_bytes(self.rng.bytes(31), "big")
        c = commit(secret, nullifier)
        tpc = int.from_bytes(self.rng.bytes(9), "big") & ((1 << 73) - 1)
        leaf = make_leaf(c, tpc, source_chain)
        tree = MerkleTree(depth)
        index = tree.insert(leaf.value)
        path = tree.path(index)
        self.policy.forged_root = tree.root
        forged_sig = KeyPair.generate(self.rng).sign(leaf_bytes(leaf.value))
        public = SettlementPublic(
            nullifier_hash(nullifier), tree.root, tpc, victim_vk
        )
        witness = SettlementWitness(nullifier, secret, path, source_chain, forged_sig)
        # raises ConstraintViolation("signature")
        return proofs.prove(circuit_mod.SETTLEMENT, witness, public), tree.root


# -- dApp signer and revert watcher ----------------------------------------------

@dataclass
class ResilienceRules:
    max_reverts_per_period: int = 1000
    period_blocks: int = 1000
    max_value_per_revert: int = 10**9


class DappSigner:
    """Signs recognized leaves and polices revert windows.

    scheme: "single" or "threshold"; threshold signing is simulated as
    k-of-n share collection gating one ordinary signature.
    """

    def __init__(self, name: str, rng: SeededRng, scheme: str = "single",
                 n: int = 1, k: int = 1, resilience: ResilienceRules = None):
        self.name = name
        self.key = KeyPair.generate(rng)
        self.scheme = scheme
        self.n, self.k = n, k
        self.online_shares = set(range(n))
        self.resilience = resilience or ResilienceRules()
        self.offline = False
        self.contracts: dict = {}   # chain id -> DappContract
        self.ghash: bytes = b""
        self._halts_issued: list = []
        self._reverts_seen: list = []  # (block, value)

    @property
    def verifying_key(self) -> bytes:
        return self.key.verifying_key

    def threshold_sign(self, message: bytes) -> bytes:
        """Aggregate signature; fails when fewer than k shares are online."""
        if self.scheme == "threshold" and len(self.online_shares) < self.k:
            raise ThresholdUnmet(
                f"{len(self.online_shares)} shares online, need {self.k} of {self.n}"
            )
        return self.key.sign(message)

    def _own_deposits(self, chains: dict) -> dict:
        """Leaf value -> deposit event, for deposits through our contracts."""
        own_addresses = {c.address.hex() for c in self.contracts.values()}
        leaves = {}
        for cid in sorted(chains):
            for ev in chains[cid].event_log:
                if ev.kind != "deposit":
                    continue
                if ev.context.get("dapp_address") not in own_addresses:
                    continue
                commitment, tpc, src = decode_deposit_event(ev.payload)
                leaves[make_leaf(commitment, tpc, src).value] = ev
        return leaves

    def scan_and_sign(self, chains: dict, mixer_chain: Chain) -> list:
        """Sign every unsigned mixer leaf that originated from our dApp.

        A leaf with no matching source-chain deposit event is never
        signed, whatever the mixer state claims.
        """
        if self.offline:
            return []
        own = self._own_deposits(chains)
        signed = []
        tree = mixer_chain.mixer.tree
        for index, leaf_value in enumerate(tree.leaves):
            if index in mixer_chain.mixer.leaf_signatures:
                continue
            if leaf_value not in own:
                continue  # not ours, or never originated on a source chain
            sig = self.threshold_sign(leaf_bytes(leaf_value))
            mixer_store_signature(mixer_chain, index, sig)
            signed.append(index)
        return signed

    def watch_reverts(self, chains: dict) -> list:
        """Halt pending reverts that fail the destination-flag audit.

        Halts when no chain shows the nullifier as both Spent and
        Reverted, when some chain shows it Spent without Reverted, or
        when the resilience rate/value rules trip.
        """
        from .chain import router_revert_halt

        if self.offline:
            return []
        halts = []
        for cid in sorted(chains):
            chain = chains[cid]
            own_address = self.contracts[cid].address if cid in self.contracts else None
            for nh, pending in list(chain.router.pending_reverts.items()):
                if pending.halted or chain.height >= pending.window_end:
                    continue
                if chain.router.commitment_log.get(pending.commitment) != own_address:
                    continue  # another dApp's transaction
                properly_marked = False
                spent_without_revert = False
                for other_cid in sorted(chains):
                    if other_cid == cid:
                        continue
                    other = chains[other_cid].router
                    if nh in other.nullifier_spent:
                        if nh in other.nullifier_reverted:
                            properly_marked = True
                        else:
                            spent_without_revert = True
                value = self.contracts[cid].escrow.get(pending.commitment, (0, None))[0]
                reason = None
                if spent_without_revert:
                    reason = "spent_without_revert"
                elif not properly_marked:
                    reason = "no_destination_mark"
                elif value > self.resilience.max_value_per_revert:
                    reason = "value_threshold"
                elif self._rate_exceeded(chain.height):
                    reason = "rate_threshold"
                if reason is not None:
                    router_revert_halt(chain, nh, own_address)
                    halts.append((cid, nh, reason))
                    self._halts_issued.append((cid, nh, reason))
                else:
                    self._reverts_seen.append((chain.height, value))
        return halts

    def _rate_exceeded(self, height: int) -> bool:
        recent = [b for b, _ in self._reverts_seen
                  if b > height - self.resilience.period_blocks]
        return len(recent) >= self.resilience.max_reverts_per_period
