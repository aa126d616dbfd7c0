"""In-process ledgers and the three contract state machines.

One ``Chain`` per supported blockchain, each carrying a Router contract;
the multiplexer chain additionally carries the Mixer with the global
Merkle tree. There is no consensus or mempool: the scenario scheduler
serializes every call, and a block clock advances only through
``advance_blocks``.
"""

from dataclasses import dataclass, field

from . import circuit as circuit_mod
from .dact import (
    DepositRequest,
    PayloadIntent,
    dapp_global_hash,
    make_leaf,
    obfuscate,
    trustless_public_commitment,
    validate_chain_id,
)
from .errors import (
    AlreadyPending,
    AlreadyRegistered,
    CoolDownActive,
    DoubleSpend,
    DuplicateCommitment,
    Halted,
    IndexUnknown,
    InvalidProof,
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
from .field import to_bytes32
from .merkle import MerkleTree, MerklePath, verify_path

ROUTER_ROOT_WINDOW = 2      # a Router only remembers the latest two roots
MIXER_ROOT_HISTORY = 100


@dataclass
class Event:
    kind: str
    payload: bytes          # canonical protocol fields only
    emitting_chain: int
    block: int
    context: dict = field(default_factory=dict)  # observable tx metadata


def deposit_event_payload(commitment: int, tpc: int, source_chain: int) -> bytes:
    return to_bytes32(commitment) + to_bytes32(tpc) + to_bytes32(source_chain)


def decode_deposit_event(payload: bytes) -> tuple:
    assert len(payload) == 96, "deposit event carries exactly three words"
    return (
        int.from_bytes(payload[:32], "big"),
        int.from_bytes(payload[32:64], "big"),
        int.from_bytes(payload[64:96], "big"),
    )


@dataclass
class PendingRevert:
    commitment: int
    window_end: int
    halted: bool = False


class RouterState:
    def __init__(self):
        self.dapp_registry: dict = {}      # global hash -> local dApp address
        self.dapp_keys: dict = {}          # verifying key -> global hash
        self.registered_addresses: set = set()
        self.known_roots: list = []        # latest two, oldest first
        self.nullifier_spent: set = set()
        self.nullifier_reverted: set = set()
        self.pending_reverts: dict = {}    # nullifier_hash -> PendingRevert
        self.commitment_log: dict = {}     # commitment -> dApp address (source side)
        self.last_initiate: dict = {}      # commitment -> block of last initiate
        self.fees_collected: int = 0


class MixerState:
    def __init__(self, depth: int):
        self.commitments_seen: set = set()
        self.tree = MerkleTree(depth, root_history=MIXER_ROOT_HISTORY)
        self.leaf_signatures: dict = {}    # leaf index -> signature bytes


class Chain:
    def __init__(self, chain_id: int, depth: int = None, oracle_auth: bytes = b""):
        validate_chain_id(chain_id)
        self.chain_id = chain_id
        self.height = 0
        self.event_log: list = []
        self.router = RouterState()
        self.mixer = MixerState(depth) if depth is not None else None
        self.oracle_auth = oracle_auth
        self.deployed_dapps: set = set()   # addresses allowed to call register
        self.dapp_hooks: dict = {}         # address -> hook object

    def emit(self, kind: str, payload: bytes, **context) -> Event:
        ev = Event(kind, payload, self.chain_id, self.height, context)
        self.event_log.append(ev)
        return ev


# -- Router: registration and deposit ----------------------------------------

def router_register_dapp(chain: Chain, caller: bytes, other_addresses: list,
                         verifying_key: bytes, home_address: bytes = None) -> bytes:
    """Register a dApp's global hash, local address, and verifying key.

    Message-sender check: only a deployed dApp contract may call. The
    global hash must be identical on every chain for the TPC to verify
    cross-chain, so registrations away from the dApp's home chain submit
    the home address and the same array; the Router recomputes the hash
    and requires the local caller to appear in that array, which blocks
    hash squatting. First writer wins; a registered hash is permanent.
    """
    if caller not in chain.deployed_dapps:
        raise Unauthorized(f"{caller.hex()} is not a dApp contract on chain {chain.chain_id}")
    home = home_address if home_address is not None else caller
    if home != caller and caller not in other_addresses:
        raise Unauthorized("caller is not part of the dApp's address array")
    ghash = dapp_global_hash(home, other_addresses)
    if ghash in chain.router.dapp_registry:
        raise AlreadyRegistered(f"global hash {ghash.hex()} already registered")
    chain.router.dapp_registry[ghash] = caller
    chain.router.dapp_keys[verifying_key] = ghash
    chain.router.registered_addresses.add(caller)
    return ghash


def router_deposit(chain: Chain, req: DepositRequest) -> Event:
    """Accept a deposit, derive the TPC, and emit the three-field event."""
    router = chain.router
    if req.dapp_address not in router.registered_addresses:
        raise UnknownDapp(f"dApp {req.dapp_address.hex()} not registered")
    if req.commitment in router.commitment_log:
        raise DuplicateCommitment(f"commitment {req.commitment} already submitted")
    ghash = next(h for h, a in router.dapp_registry.items() if a == req.dapp_address)
    tpc = trustless_public_commitment(ghash, req.version, req.obfuscated_data)
    router.commitment_log[req.commitment] = req.dapp_address
    return chain.emit(
        "deposit",
        deposit_event_payload(req.commitment, tpc, chain.chain_id),
        dapp_address=req.dapp_address.hex(),
    )


# -- Mixer --------------------------------------------------------------------

def mixer_submit(chain: Chain, event: Event) -> int:
    """Relay a deposit event into the global tree; dedupe on commitment."""
    mixer = chain.mixer
    commitment, tpc, source_chain = decode_deposit_event(event.payload)
    if commitment in mixer.commitments_seen:
        raise DuplicateCommitment(f"commitment {commitment} already in the tree")
    leaf = make_leaf(commitment, tpc, source_chain)
    index = mixer.tree.insert(leaf.value)
    mixer.commitments_seen.add(commitment)
    chain.emit("leaf_inserted", to_bytes32(leaf.value) + to_bytes32(index))
    return index


def mixer_store_signature(chain: Chain, leaf_index: int, signature: bytes) -> None:
    """First-write-wins signature storage by leaf index."""
    mixer = chain.mixer
    if not 0 <= leaf_index < mixer.tree.next_index:
        raise IndexUnknown(f"no leaf at index {leaf_index}")
    if leaf_index in mixer.leaf_signatures:
        raise Unauthorized(f"signature for leaf {leaf_index} already stored")
    mixer.leaf_signatures[leaf_index] = signature


# -- Router: root sync and withdrawal ----------------------------------------

def router_update_root(chain: Chain, root: int, oracle_auth: bytes) -> None:
    """Oracle-authenticated root push; keeps only the latest two roots."""
    if oracle_auth != chain.oracle_auth:
        raise Unauthorized("root update requires oracle network authentication")
    chain.router.known_roots.append(root)
    if len(chain.router.known_roots) > ROUTER_ROOT_WINDOW:
        del chain.router.known_roots[:-ROUTER_ROOT_WINDOW]
    chain.emit("root_update", to_bytes32(root))


@dataclass(frozen=True)
class SettlementOutcome:
    dapp_address: bytes
    payload: bytes
    nullifier_hash: int


def router_withdraw(chain: Chain, proof, payload: bytes, salt: int,
                    dest_chain_claim: int, version: int, proofs) -> SettlementOutcome:
    """Destination-side settlement; the six contract checks, in order."""
    router = chain.router
    public = proof.public
    # 1. not double spending
    if public.nullifier_hash in router.nullifier_spent:
        raise DoubleSpend(f"nullifier hash {public.nullifier_hash} already spent")
    # 2. root is known
    if public.merkle_root not in router.known_roots:
        raise UnknownRoot(f"root {public.merkle_root} not among the latest two")
    # 3. this chain is the destination bound inside the TPC
    if dest_chain_claim != chain.chain_id:
        raise WrongChain(f"claimed destination {dest_chain_claim} != {chain.chain_id}")
    ghash = router.dapp_keys.get(public.dapp_verifying_key)
    if ghash is None:
        raise UnknownDapp("verifying key maps to no registered dApp")
    od = obfuscate(PayloadIntent(payload, chain.chain_id), salt)
    if trustless_public_commitment(ghash, version, od) != public.tpc:
        raise TpcMismatch("recomputed TPC does not match the proof's public signal")
    # 4. the proof verifies
    if not proofs.verify(circuit_mod.SETTLEMENT, proof):
        raise InvalidProof("settlement attestation rejected")
    # 5. resolve and invoke the destination dApp
    dapp_address = router.dapp_registry[ghash]
    router.nullifier_spent.add(public.nullifier_hash)
    chain.emit("settled", to_bytes32(public.nullifier_hash), dapp_address=dapp_address.hex())
    hook = chain.dapp_hooks.get(dapp_address)
    if hook is not None:
        hook.on_settle(payload)
    return SettlementOutcome(dapp_address, payload, public.nullifier_hash)


# -- Router: revert -----------------------------------------------------------

def router_revert_mark_destination(chain: Chain, proof, payload: bytes, salt: int,
                                   version: int, ghash: bytes, path: MerklePath,
                                   proofs) -> None:
    """Flag the nullifier as Spent and Reverted on the destination chain.

    The call carries (payload, salt, version, global hash, merkle path in
    the clear) so the Router can rebuild the leaf with itself as the
    destination and confirm membership -- the same binding the withdraw
    check performs via the TPC. Revert already reveals the commitment, so
    the extra disclosure costs no anonymity the protocol still had.
    """
    router = chain.router
    public = proof.public
    if not proofs.verify(circuit_mod.REVERT, proof):
        raise InvalidProof("revert attestation rejected")
    if public.merkle_root not in router.known_roots:
        raise UnknownRoot(f"root {public.merkle_root} not among the latest two")
    if public.nullifier_hash in router.nullifier_spent:
        raise DoubleSpend(f"nullifier hash {public.nullifier_hash} already spent")
    if ghash not in router.dapp_registry:
        raise UnknownDapp("global hash not registered on this chain")
    od = obfuscate(PayloadIntent(payload, chain.chain_id), salt)
    tpc = trustless_public_commitment(ghash, version, od)
    leaf = make_leaf(public.commitment, tpc, public.source_chain)
    if not verify_path(public.merkle_root, leaf.value, path):
        raise TpcMismatch("this chain is not the destination bound in the intent")
    router.nullifier_spent.add(public.nullifier_hash)
    router.nullifier_reverted.add(public.nullifier_hash)
    chain.emit("revert_marked", to_bytes32(public.nullifier_hash))


def router_revert_initiate_source(chain: Chain, proof, proofs,
                                  window: int, cooldown: int, fee: int = 1) -> int:
    """Open the revert time window on the source chain; returns window end."""
    router = chain.router
    public = proof.public
    if not proofs.verify(circuit_mod.REVERT, proof):
        raise InvalidProof("revert attestation rejected")
    if public.merkle_root not in router.known_roots:
        raise UnknownRoot(f"root {public.merkle_root} not among the latest two")
    if public.source_chain != chain.chain_id:
        raise WrongChain(f"revert bound to source {public.source_chain}, this is {chain.chain_id}")
    if public.commitment not in router.commitment_log:
        raise UnknownCommitment(f"commitment {public.commitment} never deposited here")
    if public.nullifier_hash in router.pending_reverts:
        raise AlreadyPending(f"revert for {public.nullifier_hash} already pending")
    if public.nullifier_hash in router.nullifier_reverted:
        raise AlreadyPending(f"revert for {public.nullifier_hash} already executed")
    last = router.last_initiate.get(public.commitment)
    if last is not None and chain.height < last + cooldown:
        raise CoolDownActive(f"cool-down until block {last + cooldown}")
    router.last_initiate[public.commitment] = chain.height
    window_end = chain.height + window
    router.pending_reverts[public.nullifier_hash] = PendingRevert(
        public.commitment, window_end
    )
    router.fees_collected += fee
    chain.emit(
        "revert_initiated",
        to_bytes32(public.commitment) + to_bytes32(public.nullifier_hash),
        window_end=window_end,
    )
    return window_end


def router_revert_halt(chain: Chain, nullifier_hash: int, caller: bytes) -> None:
    """dApp-only halt inside the window; permanently blocks execution."""
    router = chain.router
    pending = router.pending_reverts.get(nullifier_hash)
    if pending is None:
        raise NoPending(f"no pending revert for {nullifier_hash}")
    if caller not in router.registered_addresses:
        raise Unauthorized("only the registered dApp may halt a revert")
    if chain.height >= pending.window_end:
        raise WindowExpired(f"window closed at block {pending.window_end}")
    pending.halted = True
    chain.emit("revert_halted", to_bytes32(nullifier_hash))


def router_revert_execute(chain: Chain, nullifier_hash: int) -> None:
    """Anyone may execute an unhalted revert once the window expired."""
    router = chain.router
    pending = router.pending_reverts.get(nullifier_hash)
    if pending is None:
        raise NoPending(f"no pending revert for {nullifier_hash}")
    if pending.halted:
        raise Halted("revert was halted by the dApp")
    if chain.height < pending.window_end:
        raise WindowActive(f"window open until block {pending.window_end}")
    router.nullifier_reverted.add(nullifier_hash)
    dapp_address = router.commitment_log[pending.commitment]
    del router.pending_reverts[nullifier_hash]
    chain.emit("revert_executed", to_bytes32(nullifier_hash),
               dapp_address=dapp_address.hex())
    hook = chain.dapp_hooks.get(dapp_address)
    if hook is not None:
        hook.on_revert(pending.commitment)


def advance_blocks(chain: Chain, n: int) -> int:
    if n < 1:
        raise ValueError("must advance at least one block")
    chain.height += n
    return chain.height
