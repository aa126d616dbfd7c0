"""Operation counter: the simulator's stand-in for gas metering.

Costs are plain counts (1 unit per sponge permutation, 1 per keccak block,
1 per signature verification, 1 per elementary constraint check, 1 per
proof verification) and are never converted to currency units.

The counter is a process-global single-writer object; the scenario
scheduler owns it and resets it between scenarios.
"""

from dataclasses import dataclass, field, asdict


@dataclass
class OpCounts:
    permutations: int = 0
    keccak_blocks: int = 0
    sig_verifies: int = 0
    constraint_evals: int = 0
    proof_verifies: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def delta(self, earlier: "OpCounts") -> "OpCounts":
        return OpCounts(
            self.permutations - earlier.permutations,
            self.keccak_blocks - earlier.keccak_blocks,
            self.sig_verifies - earlier.sig_verifies,
            self.constraint_evals - earlier.constraint_evals,
            self.proof_verifies - earlier.proof_verifies,
        )

    def copy(self) -> "OpCounts":
        return OpCounts(**self.as_dict())


_counter = OpCounts()


def charge_permutation(n: int = 1) -> None:
    _counter.permutations += n


def charge_keccak_blocks(n: int) -> None:
    _counter.keccak_blocks += n


def charge_sig_verify(n: int = 1) -> None:
    _counter.sig_verifies += n


def charge_constraint(n: int = 1) -> None:
    _counter.constraint_evals += n


def charge_proof_verify(n: int = 1) -> None:
    _counter.proof_verifies += n


def snapshot() -> OpCounts:
    return _counter.copy()


def reset() -> None:
    global _counter
    _counter.permutations = 0
    _counter.keccak_blocks = 0
    _counter.sig_verifies = 0
    _counter.constraint_evals = 0
    _counter.proof_verifies = 0
