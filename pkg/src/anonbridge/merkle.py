"""Fixed-depth incremental Merkle tree with a bounded root history.

Tornado-style construction: per-level filled-subtree cache, empty
positions padded with precomputed zero nodes, exactly ``depth`` hash
calls per insert. Paths are recomputed from the append-only leaf list
on demand; the simulator is not performance-critical at desk scale.
"""

from dataclasses import dataclass

from .errors import DepthOutOfRange, IndexUnknown, TreeFull
from .field import P, reduce_bytes
from .hashing import mimc_hash2
from .keccak import keccak256

MAX_DEPTH = 32

# nothing-up-my-sleeve constant for the empty leaf
ZERO = reduce_bytes(keccak256(b"anonbridge/empty-leaf"))


@dataclass
class MerklePath:
    elements: list  # sibling node per level, leaf level first
    indices: list   # 0 = our node is the left child at that level

    def __post_init__(self):
        assert len(self.elements) == len(self.indices)
        assert all(b in (0, 1) for b in self.indices)


class MerkleTree:
    def __init__(self, depth: int, root_history: int = 100):
        if not 1 <= depth <= MAX_DEPTH:
            raise DepthOutOfRange(f"depth must be in 1..{MAX_DEPTH}, got {depth}")
        self.depth = depth
        self.next_index = 0
        self.leaves: list = []
        # zero node per level: zeros[0] = empty leaf, zeros[i+1] = H(z, z).
        # Charged once here, `depth` permutations.
        self.zeros = [ZERO]
        for _ in range(depth):
            self.zeros.append(mimc_hash2(self.zeros[-1], self.zeros[-1]))
        self.filled_subtrees = list(self.zeros[:depth])
        self.root_history_size = root_history
        self.root_history: list = [self.zeros[depth]]

    @property
    def capacity(self) -> int:
        return 1 << self.depth

    @property
    def root(self) -> int:
        return self.root_history[-1]

    def insert(self, leaf: int) -> int:
        """Insert a leaf; returns its index. Exactly ``depth`` hash calls."""
        if self.next_index == self.capacity:
            raise TreeFull(f"tree of depth {self.depth} is full")
        index = self.next_index
        current = leaf
        idx = index
        for level in range(self.depth):
            if idx % 2 == 0:
                self.filled_subtrees[level] = current
                current = mimc_hash2(current, self.zeros[level])
            else:
                current = mimc_hash2(self.filled_subtrees[level], current)
            idx //= 2
        self.leaves.append(leaf)
        self.next_index += 1
        self.root_history.append(current)
        if len(self.root_history) > self.root_history_size:
            del self.root_history[: len(self.root_history) - self.root_history_size]
        return index

    def path(self, index: int) -> MerklePath:
        """Sibling path for the leaf at ``index`` against the current root."""
        if not 0 <= index < self.next_index:
            raise IndexUnknown(f"no leaf at index {index}")
        level_nodes = list(self.leaves)
        elements, indices = [], []
        idx = index
        for level in range(self.depth):
            sib = idx ^ 1
            zero = self.zeros[level]
            elements.append(level_nodes[sib] if sib < len(level_nodes) else zero)
            indices.append(idx % 2)
            nxt = []
            for i in range(0, len(level_nodes), 2):
                left = level_nodes[i]
                right = level_nodes[i + 1] if i + 1 < len(level_nodes) else zero
                # reuse incremental hash function; cost is irrelevant here
                # but keeps node values identical by construction
                nxt.append(_node_hash(left, right))
            level_nodes = nxt
            idx //= 2
        return MerklePath(elements, indices)

    def is_known_root(self, root: int) -> bool:
        return root in self.root_history


# uncounted, memoized node hash for path reconstruction: paths are a
# read-only view, not contract work, so they must not perturb the
# op-counter. Same function as mimc_hash2 by construction.
_path_cache: dict = {}


def _node_hash(left: int, right: int) -> int:
    key = (left, right)
    if key not in _path_cache:
        from .hashing import _permute_raw

        _path_cache[key] = _permute_raw(left, right)[0]
    return _path_cache[key]


def verify_path(root: int, leaf: int, path: MerklePath) -> bool:
    """Fold ``leaf`` through the path and compare against ``root``."""
    current = leaf % P
    for sibling, bit in zip(path.elements, path.indices):
        if bit == 0:
            current = mimc_hash2(current, sibling)
        else:
            current = mimc_hash2(sibling, current)
    return current == root
