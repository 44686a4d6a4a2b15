"""Append-only result store: line-delimited JSON records with content
hashes, laid out as results/<kind>/<date>-<hash prefix>.jsonl.

A record's hash covers every semantic field (kind, machine, word,
payload, budgets, tool version) over a canonical serialization, and
nothing else; no timestamps enter the hashed region, so re-running a
pipeline on the same inputs and budgets reproduces byte-identical
records.  Appends deduplicate by hash.  One writer per store; any
number of concurrent readers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import List, Optional

TOOL_VERSION = "0.1.0"

_HASH_PREFIX = 2


class StoreError(Exception):
    """Integrity or usage failure in the result store."""


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False)


@dataclass(frozen=True)
class ResultRecord:
    """One stored result: what ran, on what, and what came out.

    kind is the record family (run, decide, enumeration, ...); machine
    is the subject's text form (may be empty for aggregate records);
    payload carries the outcome or verdict dict; budgets the limits it
    ran under.  hash is computed when omitted and verified whenever
    supplied or read back.
    """

    kind: str
    machine: str = ""
    word: str = ""
    payload: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)
    version: str = TOOL_VERSION
    hash: Optional[str] = None

    def __post_init__(self):
        if self.hash is None:
            object.__setattr__(self, "hash", self.content_hash())

    def semantic_fields(self) -> dict:
        return {"kind": self.kind, "machine": self.machine,
                "word": self.word, "payload": self.payload,
                "budgets": self.budgets, "version": self.version}

    def content_hash(self) -> str:
        blob = _canonical(self.semantic_fields()).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    def verify(self) -> None:
        if self.hash != self.content_hash():
            raise StoreError(
                f"content hash mismatch: stored {self.hash}, "
                f"computed {self.content_hash()}")

    @property
    def status(self) -> Optional[str]:
        return self.payload.get("kind", self.payload.get("status"))

    def to_line(self) -> str:
        fields = self.semantic_fields()
        fields["hash"] = self.hash
        return _canonical(fields)

    @staticmethod
    def from_line(line: str) -> "ResultRecord":
        try:
            fields = json.loads(line)
        except json.JSONDecodeError as e:
            raise StoreError(f"unreadable record line: {e}") from None
        if not isinstance(fields, dict):
            raise StoreError("record line is not an object")
        try:
            r = ResultRecord(kind=fields["kind"], machine=fields["machine"],
                             word=fields["word"], payload=fields["payload"],
                             budgets=fields["budgets"],
                             version=fields["version"],
                             hash=fields.get("hash"))
        except KeyError as e:
            raise StoreError(f"record missing field {e}") from None
        r.verify()
        return r


class Store:
    """Directory-backed store rooted at <root>/results."""

    def __init__(self, root):
        self.root = Path(root)
        self.results = self.root / "results"

    def _kind_dir(self, kind: str) -> Path:
        if not kind or "/" in kind or kind.startswith("."):
            raise StoreError(f"bad record kind {kind!r}")
        return self.results / kind

    def _shard(self, r: ResultRecord) -> Path:
        stamp = date.today().strftime("%Y%m%d")
        return self._kind_dir(r.kind) / f"{stamp}-{r.hash[:_HASH_PREFIX]}.jsonl"

    def _hashes(self, kind: str) -> set:
        seen = set()
        kind_dir = self._kind_dir(kind)
        if kind_dir.is_dir():
            for path in sorted(kind_dir.glob("*.jsonl")):
                with open(path, encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            seen.add(ResultRecord.from_line(line).hash)
        return seen

    def append(self, r: ResultRecord) -> dict:
        """Durably append one record; duplicates are skipped.

        Returns an acknowledgment {hash, appended, note?, path}.
        Rejects records whose stored hash does not match their content.
        """
        r.verify()
        if r.hash in self._hashes(r.kind):
            return {"hash": r.hash, "appended": False,
                    "note": "duplicate record deduplicated"}
        shard = self._shard(r)
        shard.parent.mkdir(parents=True, exist_ok=True)
        with open(shard, "a", encoding="utf-8") as fh:
            fh.write(r.to_line() + "\n")
        return {"hash": r.hash, "appended": True, "path": str(shard)}

    def query(self, kind: Optional[str] = None,
              machine: Optional[str] = None,
              status: Optional[str] = None) -> List[ResultRecord]:
        """All records matching the filters, in hash order."""
        out = []
        if not self.results.is_dir():
            return out
        kind_dirs = ([self._kind_dir(kind)] if kind is not None
                     else sorted(p for p in self.results.iterdir()
                                 if p.is_dir()))
        for kind_dir in kind_dirs:
            if not kind_dir.is_dir():
                continue
            for path in sorted(kind_dir.glob("*.jsonl")):
                with open(path, encoding="utf-8") as fh:
                    for line in fh:
                        if not line.strip():
                            continue
                        r = ResultRecord.from_line(line)
                        if machine is not None and r.machine != machine:
                            continue
                        if status is not None and r.status != status:
                            continue
                        out.append(r)
        out.sort(key=lambda r: r.hash)
        return out
