"""Scenario runner, builtin attack library, and invariant verdicts."""

from dataclasses import dataclass, replace as dc_replace

from ..chain import router_register_dapp, router_withdraw
from ..circuit import Proof
from ..errors import ConfigInvalid, SimError
from .config import ScenarioConfig
from .linkability import analyze_linkability
from .simulation import Simulation, Verdict

SOURCE, MUX, DEST = 1001, 1002, 1003


@dataclass
class RunResult:
    config: ScenarioConfig
    transcript: object
    metrics: dict
    verdicts: list
    sim: Simulation

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


# -- standard invariant verdicts ------------------------------------------------

def _check_settle_xor_revert(sim: Simulation) -> Verdict:
    """At most one of {settled, revert-executed} per nullifier hash."""
    outcomes: dict = {}
    for chain in sim.chains.values():
        for ev in chain.event_log:
            if ev.kind in ("settled", "revert_executed"):
                nh = ev.payload.hex()
                outcomes.setdefault(nh, []).append(ev.kind)
    bad = {nh: ks for nh, ks in outcomes.items() if len(ks) > 1}
    return Verdict("settle_xor_revert", not bad, str(bad) if bad else "")


def _check_deposit_minimality(sim: Simulation) -> Verdict:
    """Deposit events decode to exactly (commitment, tpc, source chain)."""
    from ..chain import decode_deposit_event

    for chain in sim.chains.values():
        for ev in chain.event_log:
            if ev.kind != "deposit":
                continue
            if len(ev.payload) != 96:
                return Verdict("deposit_minimality", False,
                               f"payload length {len(ev.payload)}")
            _, _, src = decode_deposit_event(ev.payload)
            if src != chain.chain_id:
                return Verdict("deposit_minimality", False,
                               "source chain field mismatch")
    return Verdict("deposit_minimality", True)


def _check_linkability(sim: Simulation) -> Verdict:
    report = analyze_linkability(sim.transcript.records, sim.secrets_for_analysis())
    return Verdict("no_hidden_field_leakage", report["violations"] == 0,
                   f"violations={report['violations']}")


def standard_verdicts(sim: Simulation) -> list:
    return [
        _check_settle_xor_revert(sim),
        _check_deposit_minimality(sim),
        _check_linkability(sim),
    ]


# -- builtin scenarios -----------------------------------------------------------

def _drive_happy_path(sim: Simulation) -> str:
    d = sim.deposit("alice", SOURCE, DEST)
    sim.relay()
    sim.sign()
    sim.push_root()
    return d


def settlement_happy_path(sim: Simulation):
    d = _drive_happy_path(sim)
    sim.withdraw(d)
    sim.check("payload_delivered", sim.settled(d))


def double_spend(sim: Simulation):
    """Resubmitting a settled proof must fail, whatever happens in between."""
    d = _drive_happy_path(sim)
    sim.withdraw(d)
    # a seed-chosen amount of unrelated activity between the two submissions
    r = sim.rng.child("interleave").py_random()
    fillers = [
        lambda: sim.advance(r.randint(1, 5)),
        lambda: sim.deposit("alice", SOURCE, DEST),
        lambda: (sim.relay(), sim.sign(), sim.push_root()),
    ]
    for _ in range(r.randint(0, 4)):
        r.choice(fillers)()
    sim.withdraw(d, reuse_proof=True, expect="DoubleSpend")
    sim.relay()
    sim.push_root()  # fresh root so the revert attempt fails on the spend flag
    sim.revert_mark(d, expect="DoubleSpend")
    sim.check("double_spend_rejected", True)
    sim.check("payload_delivered_once",
              sim.dapp.contracts[DEST].received_payloads.count(
                  sim.deposits[d].payload) == 1)


def oracle_forged_root(sim: Simulation):
    """Forged roots are accepted by routers yet settle nothing: the proof
    cannot be built without the dApp's leaf signature."""
    sim.deposit("alice", SOURCE, DEST)
    sim.relay()
    sim.sign()
    sim.withdraw(actor="oracle", expect="ConstraintViolation:signature")
    forged = sim.oracle.policy.forged_root
    sim.push_root()  # policy forge_root: injects the forged root everywhere
    sim.withdraw(actor="oracle", expect="ConstraintViolation:signature")
    sim.check("forged_root_accepted_by_router",
              all(forged in c.router.known_roots for c in sim.chains.values()))
    settled_events = [ev for c in sim.chains.values()
                      for ev in c.event_log if ev.kind == "settled"]
    sim.check("no_forged_settlement", not settled_events)


def oracle_censorship(sim: Simulation):
    """Oracles drop the relayed withdraw; the user reverts without them."""
    d = _drive_happy_path(sim)
    res = sim.withdraw(d, via_oracle=True)
    sim.check("withdraw_censored", res == "censored")
    sim.check("not_settled", not sim.settled(d))
    sim.revert_mark(d)
    sim.revert_init(d)
    sim.halt()  # honest revert: the watcher sees the destination mark, no halt
    sim.advance(sim.config.window)
    sim.execute(d)
    wallet = sim.wallets["alice"]
    sim.check("funds_recovered", wallet.balance == 100)


def custody_total_outage(sim: Simulation):
    """Oracles and dApp die after root sync and destination mark; the
    revert still executes at window expiry."""
    d = _drive_happy_path(sim)
    sim.revert_mark(d)
    sim.go_offline("oracle")
    sim.go_offline("dapp")
    sim.revert_init(d)
    sim.halt()  # offline dApp issues nothing
    sim.advance(sim.config.window)
    sim.execute(d)
    sim.check("funds_recovered", sim.wallets["alice"].balance == 100)
    sim.check("no_halt_issued", not sim.dapp._halts_issued)


def dapp_hash_squat(sim: Simulation):
    """Stealing another dApp's global hash fails: the Router recomputes
    the hash and requires the caller to be part of the address array."""
    victim = sim.dapp
    attacker = sim.deploy_extra_dapp("attacker")
    home_cid = sim.config.chains[0]
    victim_home = victim.contracts[home_cid].address
    victim_others = [victim.contracts[c].address
                     for c in sim.config.chains if c != home_cid]
    chain = sim.chains[DEST]

    # attacker's own contract claims the victim's array
    sim._call(
        "router_register_dapp", DEST,
        lambda: router_register_dapp(
            chain, attacker.contracts[DEST].address, victim_others,
            attacker.verifying_key, home_address=victim_home,
        ),
        expect="Unauthorized",
    )
    # exact duplicate of the victim's registration
    sim._call(
        "router_register_dapp", DEST,
        lambda: router_register_dapp(
            chain, victim.contracts[DEST].address, victim_others,
            attacker.verifying_key, home_address=victim_home,
        ),
        expect="AlreadyRegistered",
    )
    ok = all(
        c.router.dapp_registry.get(victim.ghash) == victim.contracts[cid].address
        for cid, c in sim.chains.items()
    )
    sim.check("victim_registration_intact", ok)


def unsigned_leaf_settlement(sim: Simulation):
    d = sim.deposit("alice", SOURCE, DEST)
    sim.relay()
    sim.push_root()  # nobody signs
    sim.withdraw(d, expect="SignatureMissing")
    sim.check("not_settled", not sim.settled(d))


def settle_then_revert(sim: Simulation):
    """Double spend through the settlement-revert logic, stopped by the
    chained destination flags and the vigilant dApp."""
    d = _drive_happy_path(sim)
    sim.withdraw(d)
    sim.revert_mark(d, expect="DoubleSpend")
    sim.revert_init(d)  # the source contract cannot see the destination spend
    halts = sim.halt()
    sim.check("watcher_halts_spent_revert",
              bool(halts) and halts[0][2] == "spent_without_revert")
    sim.advance(sim.config.window)
    sim.execute(d, expect="Halted")
    sim.check("settled_not_reverted",
              sim.settled(d) and not sim.reverted(d))


def withdraw_revert_race(sim: Simulation):
    """Seed-chosen interleaving of settle and revert attempts; exactly one
    of the two outcomes must win."""
    d = _drive_happy_path(sim)
    r = sim.rng.child("race").py_random()
    settle_steps = [("withdraw",)]
    revert_steps = [("mark",), ("init",), ("watch",), ("advance",), ("execute",)]
    merged = []
    while settle_steps or revert_steps:
        pool = []
        if settle_steps:
            pool.append(settle_steps)
        if revert_steps:
            pool.append(revert_steps)
        merged.append(r.choice(pool).pop(0))
    for (step,) in merged:
        try:
            if step == "withdraw":
                sim.withdraw(d)
            elif step == "mark":
                sim.revert_mark(d)
            elif step == "init":
                sim.revert_init(d)
            elif step == "watch":
                sim.halt()
            elif step == "advance":
                sim.advance(sim.config.window)
            elif step == "execute":
                sim.halt()  # the dApp stays vigilant up to execution
                sim.execute(d)
        except SimError:
            pass  # rejections are the mechanism under test
    settled, reverted = sim.settled(d), sim.reverted(d)
    sim.check("exactly_one_outcome", settled != reverted,
              f"settled={settled} reverted={reverted}")


def wrong_chain_withdraw(sim: Simulation):
    d = _drive_happy_path(sim)
    sim.withdraw(d, chain=SOURCE, expect="TpcMismatch")
    sim.withdraw(d, claim_dest=SOURCE, expect="WrongChain")
    sim.withdraw(d)
    sim.check("honest_withdraw_still_works", sim.settled(d))


def payload_tamper(sim: Simulation):
    d = _drive_happy_path(sim)
    sim.withdraw(d, tamper_payload=True, expect="TpcMismatch")
    sim.withdraw(d)
    sim.check("original_payload_delivered", sim.settled(d))


def wrong_dapp_call(sim: Simulation):
    """A proof bound to dApp A can never invoke dApp B."""
    other = sim.deploy_extra_dapp("dapp_b")
    d = _drive_happy_path(sim)
    # proving against B's key fails: B never signed the leaf
    sim.withdraw(d, verifying_key=other.verifying_key,
                 expect="ConstraintViolation:signature")
    # grafting B's key onto a valid proof breaks the TPC recomputation
    proof, payload, salt, version = sim.wallets["alice"].build_settlement(
        sim.deposits[d].commitment, sim.mixer_chain, sim.proofs,
        sim.dapp.verifying_key,
    )
    grafted = Proof(
        proof.circuit_id,
        dc_replace(proof.public, dapp_verifying_key=other.verifying_key),
        proof.attestation,
    )
    sim._call(
        "router_withdraw", DEST,
        lambda: router_withdraw(sim.chains[DEST], grafted, payload, salt,
                                DEST, version, sim.proofs),
        expect="TpcMismatch",
    )
    sim.check("no_cross_dapp_delivery",
              not other.contracts[DEST].received_payloads)


def oracle_replay(sim: Simulation):
    """Replayed deposit events bounce off the mixer's commitment dedupe."""
    sim.deposit("alice", SOURCE, DEST)
    sim.relay()  # policy replay: resubmits each event immediately
    rejected = [r for r in sim.transcript.records
                if r.get("op") == "replay_rejected"]
    sim.check("replay_rejected",
              bool(rejected) and "DuplicateCommitment" in rejected[0]["detail"])
    sim.check("single_leaf", sim.mixer_chain.mixer.tree.next_index == 1)


_BASE = dict(chains=[SOURCE, MUX, DEST], multiplexer=MUX, merkle_depth=16,
             wallets=["alice"])

BUILTINS = {
    "settlement_happy_path": (settlement_happy_path, {}),
    "double_spend": (double_spend, {}),
    "oracle_forged_root": (oracle_forged_root, {"oracle": {"mode": "forge_root"}}),
    "oracle_censorship": (oracle_censorship,
                          {"oracle": {"mode": "censor_dapp", "censor_dapp": True}}),
    "custody_total_outage": (custody_total_outage, {}),
    "dapp_hash_squat": (dapp_hash_squat, {}),
    "unsigned_leaf_settlement": (unsigned_leaf_settlement, {}),
    "settle_then_revert": (settle_then_revert, {}),
    "withdraw_revert_race": (withdraw_revert_race, {}),
    "wrong_chain_withdraw": (wrong_chain_withdraw, {}),
    "payload_tamper": (payload_tamper, {}),
    "oracle_replay": (oracle_replay, {"oracle": {"mode": "replay"}}),
    "wrong_dapp_call": (wrong_dapp_call, {}),
}

# the nine adversarial scenarios of the attack matrix
ATTACK_MATRIX = [
    "oracle_forged_root",
    "oracle_censorship",
    "dapp_hash_squat",
    "unsigned_leaf_settlement",
    "double_spend",
    "withdraw_revert_race",
    "wrong_chain_withdraw",
    "payload_tamper",
    "wrong_dapp_call",
]


def builtin_config(name: str, seed: int = 0, **overrides) -> ScenarioConfig:
    if name not in BUILTINS:
        raise ConfigInvalid(f"unknown builtin scenario {name!r}")
    _, defaults = BUILTINS[name]
    params = dict(_BASE)
    params.update(defaults)
    params.update(overrides)
    return ScenarioConfig(seed=seed, name=name, builtin=name, **params)


# -- declarative script interpreter -----------------------------------------------

def _run_script(sim: Simulation, script: list) -> None:
    for action in script:
        a = dict(action)
        op = a.pop("op")
        expect = a.pop("expect", None)
        if op == "deposit":
            payload = bytes.fromhex(a["payload"]) if "payload" in a else None
            sim.deposit(a["wallet"], a["source"], a["dest"],
                        label=a.get("label"), payload=payload,
                        version=a.get("version", 1), value=a.get("value", 1),
                        expect=expect)
        elif op == "relay":
            sim.relay(expect=expect)
        elif op == "push_root":
            sim.push_root(expect=expect)
        elif op == "sign":
            sim.sign(expect=expect)
        elif op == "withdraw":
            sim.withdraw(a.get("deposit"), expect=expect,
                         actor=a.get("actor", "wallet"),
                         chain=a.get("chain"), claim_dest=a.get("claim_dest"),
                         via_oracle=a.get("via_oracle", False),
                         tamper_payload=a.get("tamper_payload", False),
                         reuse_proof=a.get("reuse_proof", False))
        elif op == "revert_mark":
            sim.revert_mark(a["deposit"], expect=expect, chain=a.get("chain"))
        elif op == "revert_init":
            sim.revert_init(a["deposit"], expect=expect, chain=a.get("chain"))
        elif op == "halt":
            sim.halt(expect=expect)
        elif op == "execute":
            sim.execute(a["deposit"], expect=expect)
        elif op == "advance":
            sim.advance(a.get("blocks", 1), chain=a.get("chain"), expect=expect)
        elif op == "go_offline":
            sim.go_offline(a["actor"], expect=expect)
        else:
            raise ConfigInvalid(f"unknown action {op!r}")


def run_scenario(config: ScenarioConfig) -> RunResult:
    """Execute a scenario; deterministic in (config, seed)."""
    config.validate()
    sim = Simulation(config)
    try:
        if config.builtin is not None:
            driver, _ = BUILTINS[config.builtin]
            driver(sim)
        else:
            _run_script(sim, config.script)
    except SimError as exc:
        sim.check("scenario_completed", False, f"{type(exc).__name__}: {exc}")
    sim.verdicts.extend(standard_verdicts(sim))
    sim.transcript.log("verdicts", results=[
        {"name": v.name, "passed": v.passed} for v in sim.verdicts
    ])
    return RunResult(config, sim.transcript, sim.metrics_report(), sim.verdicts, sim)


def run_attacks(seed: int = 0) -> list:
    """The full attack matrix; every verdict must pass."""
    return [run_scenario(builtin_config(name, seed=seed)) for name in ATTACK_MATRIX]
