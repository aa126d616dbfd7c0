"""Ordered, replayable transcript of every actor action and contract call."""

import hashlib
import json


class Transcript:
    def __init__(self):
        self.records: list = []

    def log(self, kind: str, **fields) -> dict:
        rec = {"i": len(self.records), "kind": kind}
        rec.update(fields)
        self.records.append(rec)
        return rec

    def to_jsonl(self) -> bytes:
        lines = [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.records]
        return ("\n".join(lines) + "\n").encode()

    def digest(self) -> str:
        # transcript identity, not a protocol hash; sha256 keeps it off the op-counter
        return hashlib.sha256(self.to_jsonl()).hexdigest()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_jsonl())

    @staticmethod
    def load_records(path) -> list:
        with open(path, "rb") as fh:
            return [json.loads(line) for line in fh.read().splitlines() if line]
