"""Deterministic scenario driver.

Builds the chain topology, actors, and proof system from a config, then
exposes one method per script action. Every action and contract call is
logged to the transcript; op-counter deltas are attributed per operation
for the metrics report.
"""

from dataclasses import dataclass

from .. import circuit as circuit_mod
from .. import ops
from ..actors import (
    DappContract,
    DappSigner,
    Oracle,
    OraclePolicy,
    ResilienceRules,
    Wallet,
)
from ..chain import (
    Chain,
    advance_blocks,
    router_register_dapp,
    router_revert_execute,
    router_revert_initiate_source,
    router_revert_mark_destination,
    router_withdraw,
)
from ..circuit import ProofSystem
from ..dact import PayloadIntent
from ..errors import ConfigInvalid, ConstraintViolation, SimError
from ..field import to_bytes32
from ..rng import SeededRng
from .config import ScenarioConfig
from .transcript import Transcript


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str = ""


class UnexpectedOutcome(SimError):
    """A scripted action did not produce its expected result."""


@dataclass
class DepositInfo:
    wallet: str
    commitment: int
    source: int
    dest: int
    payload: bytes
    version: int
    value: int


def _error_name(exc: Exception) -> str:
    if isinstance(exc, ConstraintViolation):
        return f"ConstraintViolation:{exc.constraint}"
    return type(exc).__name__


class Simulation:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        ops.reset()
        self.config = config
        self.rng = SeededRng(config.seed)
        self.transcript = Transcript()
        self.metrics: dict = {}
        self.verdicts: list = []
        self.proofs = ProofSystem(self.rng.child("deity-keys"))

        oracle_auth = self.rng.child("oracle-auth").bytes(32)
        self.chains = {}
        for cid in config.chains:
            depth = config.merkle_depth if cid == config.multiplexer else None
            self.chains[cid] = Chain(cid, depth=depth, oracle_auth=oracle_auth)
        self.mixer_chain = self.chains[config.multiplexer]

        self.transcript.log("header", config=config.to_json())

        # one dApp spanning every chain
        dapp_cfg = dict(config.dapp)
        resilience = ResilienceRules(
            max_reverts_per_period=dapp_cfg.pop("max_reverts_per_period", 1000),
            period_blocks=dapp_cfg.pop("period_blocks", 1000),
            max_value_per_revert=dapp_cfg.pop("max_value_per_revert", 10**9),
        )
        self.dapp = DappSigner(
            "dapp", self.rng.child("dapp-keys"),
            scheme=dapp_cfg.pop("scheme", "single"),
            n=dapp_cfg.pop("n", 1), k=dapp_cfg.pop("k", 1),
            resilience=resilience,
        )
        if dapp_cfg:
            raise ConfigInvalid(f"unknown dapp config fields: {sorted(dapp_cfg)}")
        self._deploy_and_register(self.dapp, "dapp")

        policy_cfg = dict(config.oracle)
        censor = policy_cfg.pop("censor_dapp", False)
        policy = OraclePolicy(**policy_cfg)
        if censor:
            policy.censor_dapp = self.dapp.ghash
        self.oracle = Oracle(policy, oracle_auth, self.rng.child("oracle"))

        self.wallets = {
            name: Wallet(name, self.rng.child(f"wallet/{name}"))
            for name in config.wallets
        }

        self.deposits: dict = {}        # label -> DepositInfo
        self._settle_params: dict = {}  # label -> (proof, payload, salt, version)
        self._revert_params: dict = {}  # label -> build_revert output
        self._n_deposits = 0

    # -- setup helpers ---------------------------------------------------------

    def _deploy_and_register(self, signer: DappSigner, tag: str) -> None:
        addr_rng = self.rng.child(f"{tag}-addresses")
        for cid in self.config.chains:
            contract = DappContract(addr_rng.bytes(20))
            signer.contracts[cid] = contract
            chain = self.chains[cid]
            chain.deployed_dapps.add(contract.address)
            chain.dapp_hooks[contract.address] = contract
        # home chain registers first and fixes the global hash; the other
        # chains submit the same array plus the home address
        home_cid = self.config.chains[0]
        home = signer.contracts[home_cid].address
        others = [signer.contracts[c].address for c in self.config.chains if c != home_cid]
        for cid in self.config.chains:
            contract = signer.contracts[cid]
            ghash = self._call(
                "router_register_dapp", cid,
                lambda: router_register_dapp(
                    self.chains[cid], contract.address, others,
                    signer.verifying_key,
                    home_address=None if cid == home_cid else home,
                ),
                caller=contract.address.hex(),
            )
            if cid == home_cid:
                signer.ghash = ghash

    def deploy_extra_dapp(self, tag: str, scheme: str = "single",
                          n: int = 1, k: int = 1) -> DappSigner:
        """Second dApp for wrong-dApp and registration-attack scenarios."""
        signer = DappSigner(tag, self.rng.child(f"{tag}-keys"), scheme=scheme, n=n, k=k)
        self._deploy_and_register(signer, tag)
        return signer

    # -- logging / metrics wrapper ----------------------------------------------

    def _call(self, op: str, chain, fn, expect=None, **logged):
        before = ops.snapshot()
        error = None
        result = None
        try:
            result = fn()
        except SimError as exc:
            error = exc
        delta = ops.snapshot().delta(before)
        bucket = self.metrics.setdefault(op, ops.OpCounts())
        for k, v in delta.as_dict().items():
            setattr(bucket, k, getattr(bucket, k) + v)
        self.transcript.log(
            "call", op=op, chain=chain,
            ok=error is None,
            error=_error_name(error) if error else None,
            **logged,
        )
        if expect in (None, "ok"):
            if error is not None:
                raise error
        else:
            if error is None or _error_name(error) != expect:
                got = _error_name(error) if error else "ok"
                raise UnexpectedOutcome(f"{op}: expected {expect}, got {got}")
        return result

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.verdicts.append(Verdict(name, bool(passed), detail))

    # -- script actions -----------------------------------------------------------

    def deposit(self, wallet: str, source: int, dest: int, label: str = None,
                payload: bytes = None, version: int = 1, value: int = 1,
                expect=None) -> str:
        if label is None:
            label = f"d{self._n_deposits}"
        self._n_deposits += 1
        w = self.wallets[wallet]
        if payload is None:
            payload = self.rng.child(f"payload/{label}").bytes(32)
        contract = self.dapp.contracts[source]

        def _do():
            intent = PayloadIntent(payload, dest)  # tier check before submission
            return w.deposit(self.chains[source], contract, self.dapp.ghash,
                             intent, version, value)

        commitment = self._call(
            "router_deposit", source, _do, expect=expect,
            wallet=wallet, dapp_address=contract.address.hex(), version=version,
            value=value,
        )
        if commitment is not None:
            # re-log with the actual emitted event payload for byte-scans
            ev = self.chains[source].event_log[-1]
            self.transcript.log("event", op="deposit_event", chain=source,
                                payload=ev.payload.hex(), block=ev.block)
            self.deposits[label] = DepositInfo(
                wallet, commitment, source, dest, payload, version, value
            )
        return label

    def relay(self, expect=None):
        def _do():
            return self.oracle.relay(self.chains, self.mixer_chain)

        actions = self._call("oracle_relay", self.config.multiplexer, _do,
                             expect=expect)
        for act in actions or []:
            if act[0] == "relayed":
                _, cid, index = act
                leaf = self.mixer_chain.mixer.tree.leaves[index]
                self.transcript.log("event", op="leaf_inserted",
                                    chain=self.config.multiplexer,
                                    source=cid, index=index,
                                    leaf=to_bytes32(leaf).hex())
            else:
                self.transcript.log("event", op=act[0],
                                    chain=self.config.multiplexer, detail=str(act[1:]))
        return actions

    def push_root(self, expect=None):
        def _do():
            return self.oracle.push_root(self.chains, self.mixer_chain)

        root = self._call("router_update_root", None, _do, expect=expect)
        if root is not None and not self.oracle.offline:
            for cid in sorted(self.chains):
                self.transcript.log("event", op="root_update", chain=cid,
                                    root=to_bytes32(root).hex())
        return root

    def sign(self, expect=None):
        def _do():
            return self.dapp.scan_and_sign(self.chains, self.mixer_chain)

        signed = self._call("mixer_store_signature", self.config.multiplexer,
                            _do, expect=expect)
        for index in signed or []:
            sig = self.mixer_chain.mixer.leaf_signatures[index]
            self.transcript.log("event", op="signature_stored",
                                chain=self.config.multiplexer,
                                index=index, signature=sig.hex())
        return signed

    def withdraw(self, label: str = None, expect=None, actor: str = "wallet",
                 chain: int = None, claim_dest: int = None, via_oracle: bool = False,
                 tamper_payload: bool = False, reuse_proof: bool = False,
                 verifying_key: bytes = None):
        if actor == "oracle":
            # network-abuse move: forge a tree, then attempt a settlement proof
            def _forge():
                proof, root = self.oracle.attempt_forged_settlement(
                    self.proofs, self.config.merkle_depth, self.config.chains[0],
                    self.dapp.verifying_key,
                )
                return proof

            return self._call("forged_settlement_attempt", None, _forge,
                              expect=expect)

        info = self.deposits[label]
        w = self.wallets[info.wallet]
        dest_chain = self.chains[chain if chain is not None else info.dest]
        vk = verifying_key if verifying_key is not None else self.dapp.verifying_key

        def _do():
            if reuse_proof:
                proof, payload, salt, version = self._settle_params[label]
            else:
                proof, payload, salt, version = w.build_settlement(
                    info.commitment, self.mixer_chain, self.proofs, vk
                )
                self._settle_params[label] = (proof, payload, salt, version)
            if via_oracle and not self.oracle.route_withdraw(
                self.dapp.ghash, dest_chain.chain_id
            ):
                return "censored"
            if tamper_payload:
                payload = bytes([payload[0] ^ 1]) + payload[1:]
            claim = claim_dest if claim_dest is not None else dest_chain.chain_id
            return router_withdraw(dest_chain, proof, payload, salt, claim,
                                   version, self.proofs)

        result = self._call(
            "router_withdraw", dest_chain.chain_id, _do, expect=expect,
            deposit=label, via_oracle=via_oracle,
        )
        if result == "censored":
            self.transcript.log("event", op="withdraw_censored",
                                chain=dest_chain.chain_id, deposit=label)
        return result

    def revert_mark(self, label: str, expect=None, chain: int = None):
        info = self.deposits[label]
        w = self.wallets[info.wallet]
        dest_chain = self.chains[chain if chain is not None else info.dest]

        def _do():
            if label in self._revert_params:
                built = self._revert_params[label]
            else:
                built = w.build_revert(info.commitment, self.mixer_chain, self.proofs)
                self._revert_params[label] = built
            proof, payload, salt, version, ghash, path = built
            router_revert_mark_destination(
                dest_chain, proof, payload, salt, version, ghash, path, self.proofs
            )
            return proof

        return self._call(
            "router_revert_mark", dest_chain.chain_id, _do, expect=expect,
            deposit=label,
            commitment=to_bytes32(info.commitment).hex(),
        )

    def revert_init(self, label: str, expect=None, chain: int = None):
        info = self.deposits[label]
        w = self.wallets[info.wallet]
        src_chain = self.chains[chain if chain is not None else info.source]

        def _do():
            if label in self._revert_params:
                built = self._revert_params[label]
            else:
                built = w.build_revert(info.commitment, self.mixer_chain, self.proofs)
                self._revert_params[label] = built
            proof = built[0]
            return router_revert_initiate_source(
                src_chain, proof, self.proofs,
                self.config.window, self.config.cooldown, self.config.revert_fee,
            )

        return self._call(
            "router_revert_initiate", src_chain.chain_id, _do, expect=expect,
            deposit=label,
            commitment=to_bytes32(info.commitment).hex(),
        )

    def execute(self, label: str, expect=None):
        info = self.deposits[label]
        src_chain = self.chains[info.source]
        proof = self._revert_params[label][0]
        nh = proof.public.nullifier_hash

        return self._call(
            "router_revert_execute", src_chain.chain_id,
            lambda: router_revert_execute(src_chain, nh),
            expect=expect, deposit=label,
        )

    def halt(self, expect=None):
        """The dApp watcher pass; issues halts where the audit fails."""
        halts = self._call(
            "dapp_watch_reverts", None,
            lambda: self.dapp.watch_reverts(self.chains),
            expect=expect,
        )
        for cid, nh, reason in halts or []:
            self.transcript.log("event", op="revert_halted", chain=cid,
                                nullifier_hash=to_bytes32(nh).hex(), reason=reason)
        return halts

    def advance(self, blocks: int = 1, chain: int = None, expect=None):
        targets = [chain] if chain is not None else sorted(self.chains)

        def _do():
            for cid in targets:
                advance_blocks(self.chains[cid], blocks)
            return blocks

        return self._call("advance_blocks", chain, _do, expect=expect,
                          blocks=blocks)

    def go_offline(self, who: str, expect=None):
        def _do():
            if who == "oracle":
                self.oracle.offline = True
            elif who == "dapp":
                self.dapp.offline = True
            else:
                raise ConfigInvalid(f"unknown actor {who!r}")

        return self._call("go_offline", None, _do, expect=expect, actor=who)

    # -- inspection helpers ---------------------------------------------------------

    def settled(self, label: str) -> bool:
        info = self.deposits[label]
        payloads = self.dapp.contracts[info.dest].received_payloads
        return info.payload in payloads

    def reverted(self, label: str) -> bool:
        info = self.deposits[label]
        return info.commitment not in self.dapp.contracts[info.source].escrow \
            and label in self._revert_params

    def secrets_for_analysis(self) -> list:
        """Per-deposit sensitive encodings, read out-of-band from wallets."""
        out = []
        for label, info in self.deposits.items():
            note = self.wallets[info.wallet].notes[info.commitment].note
            out.append({
                "label": label,
                "payload": info.payload.hex(),
                "dest_chain_id": to_bytes32(info.dest).hex(),
                "salt": to_bytes32(note.salt).hex(),
                "secret": to_bytes32(note.secret).hex(),
                "nullifier": to_bytes32(note.nullifier).hex(),
                "commitment": to_bytes32(info.commitment).hex(),
                "source_chain": info.source,
            })
        return out

    def metrics_report(self) -> dict:
        per_op = {op: c.as_dict() for op, c in sorted(self.metrics.items())}
        total = ops.snapshot().as_dict()
        return {"per_op": per_op, "total": total}
