"""Embedded durable entity store.

Single-node storage with write-ahead durability: every committed transaction
is appended as one fsynced JSON line to ``store.log`` under the data
directory and replayed on open. All transactions run under one process-wide
lock, which makes the isolation trivially serializable at desk scale.

Entities are schemaful dict bodies keyed by (kind, id). Unique keys and
id-valued references are declared per kind and enforced at commit time.
Users and courses are soft-deleted (tombstone flag) so gradebooks never
dangle; other kinds delete hard.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from typing import Any, Callable, Iterable, Iterator, Optional

from .domain import format_ts, now_utc
from .errors import CitadelError, ConstraintViolation, NotFound, ReferentialViolation

SCHEMA_VERSION = 1

# Declared body fields per kind; query filters must reference these.
KIND_FIELDS: dict[str, tuple[str, ...]] = {
    "user": (
        "id", "username", "password_digest", "full_name", "email", "phone",
        "role", "department_id", "is_library", "deleted",
    ),
    "faculty": ("id", "name"),
    "department": ("id", "name", "faculty_id"),
    "course": (
        "id", "code", "title", "department_id", "lecturer_id", "session",
        "syllabus", "deleted",
    ),
    "enrollment": ("id", "student_id", "course_code", "session", "registered_at"),
    "assessment": (
        "id", "course_code", "kind", "title", "opens_at", "closes_at",
        "duration_limit", "questions", "points_total", "ca_weight",
    ),
    "attempt": (
        "id", "assessment_id", "student_id", "started_at", "deadline",
        "submitted_at", "answers", "auto_score", "expired",
    ),
    "assignment": ("id", "course_code", "title", "brief", "due_at", "max_score", "ca_weight"),
    "submission": (
        "id", "assignment_id", "student_id", "content", "submitted_at",
        "score", "graded_by",
    ),
    "result": (
        "id", "student_id", "course_code", "ca_score", "exam_score", "total",
        "letter", "grade_point",
    ),
    "content_item": (
        "id", "owner_course", "kind", "filename", "media_type", "size_bytes",
        "sha256", "uploaded_by", "uploaded_at", "blob_ref",
    ),
    "download_event": ("id", "student_id", "content_id"),
    "message": ("id", "from_user", "to_user", "subject", "body", "sent_at", "read"),
    "notice": (
        "id", "author_id", "author_role", "scope_kind", "scope_ref", "title",
        "body", "posted_at",
    ),
    "chat_message": ("id", "room", "seq", "author_id", "body", "posted_at"),
    "timetable_entry": ("id", "course_code", "date", "start", "end", "activity", "venue"),
    "library_book": ("id", "title", "author", "isbn", "location", "copies_total"),
    "session_token": ("id", "token", "user_id", "role", "issued_at", "expires_at"),
}

UNIQUE_KEYS: dict[str, list[tuple[str, ...]]] = {
    "user": [("username",)],
    "faculty": [("name",)],
    "department": [("faculty_id", "name")],
    "course": [("code", "session")],
    "enrollment": [("student_id", "course_code", "session")],
    "attempt": [("assessment_id", "student_id")],
    "submission": [("assignment_id", "student_id")],
    "download_event": [("student_id", "content_id")],
    "chat_message": [("room", "seq")],
    "library_book": [("title", "author", "isbn")],
    "session_token": [("token",)],
}

# field -> (target kind, required). Optional refs are checked only when set.
ID_REFS: dict[str, list[tuple[str, str, bool]]] = {
    "department": [("faculty_id", "faculty", True)],
    "user": [("department_id", "department", False)],
    "course": [("department_id", "department", True), ("lecturer_id", "user", True)],
    "enrollment": [("student_id", "user", True)],
    "attempt": [("assessment_id", "assessment", True), ("student_id", "user", True)],
    "submission": [("assignment_id", "assignment", True), ("student_id", "user", True)],
    "content_item": [("uploaded_by", "user", True)],
    "download_event": [("student_id", "user", True), ("content_id", "content_item", True)],
    "message": [("from_user", "user", True), ("to_user", "user", True)],
    "notice": [("author_id", "user", True)],
    "chat_message": [("author_id", "user", True)],
    "session_token": [("user_id", "user", True)],
}

SOFT_DELETE_KINDS = {"user", "course"}


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class Record:
    __slots__ = ("kind", "id", "body", "version", "created_at", "updated_at")

    def __init__(self, kind, id, body, version, created_at, updated_at):
        self.kind = kind
        self.id = id
        self.body = body
        self.version = version
        self.created_at = created_at
        self.updated_at = updated_at

    def to_line_obj(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": self.kind,
            "id": self.id,
            "version": self.version,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "body": self.body,
        }


class Aborted(CitadelError):
    def __init__(self, reason: str):
        super().__init__("bad_request", f"transaction aborted: {reason}")


class Transaction:
    """Buffered intents over a snapshot; constraints evaluated at commit.

    Obtained from Store.transaction(); reads see this transaction's own
    buffered writes layered over the committed state.
    """

    def __init__(self, store: "Store"):
        self._store = store
        self._puts: dict[tuple[str, str], dict] = {}
        self._deletes: set[tuple[str, str]] = set()

    def put(self, kind: str, body: dict, id: Optional[str] = None) -> str:
        if kind not in KIND_FIELDS:
            raise CitadelError("bad_request", f"unknown entity kind: {kind}")
        body = dict(body)
        entity_id = id or body.get("id") or uuid.uuid4().hex
        body["id"] = entity_id
        unknown = set(body) - set(KIND_FIELDS[kind])
        if unknown:
            raise CitadelError("unknown_field", f"undeclared fields for {kind}: {sorted(unknown)}")
        self._puts[(kind, entity_id)] = body
        self._deletes.discard((kind, entity_id))
        return entity_id

    def delete(self, kind: str, id: str) -> None:
        if self.get(kind, id, default=None) is None:
            raise NotFound(f"{kind} {id} not found")
        if kind in SOFT_DELETE_KINDS:
            body = dict(self.get(kind, id))
            body["deleted"] = True
            self._puts[(kind, id)] = body
        else:
            self._puts.pop((kind, id), None)
            self._deletes.add((kind, id))

    _MISSING = object()

    def get(self, kind: str, id: str, default: Any = _MISSING) -> dict:
        if (kind, id) in self._puts:
            return dict(self._puts[(kind, id)])
        if (kind, id) in self._deletes:
            rec = None
        else:
            rec = self._store._records.get(kind, {}).get(id)
        if rec is None:
            if default is not self._MISSING:
                return default
            raise NotFound(f"{kind} {id} not found")
        return dict(rec.body)

    def query(
        self,
        kind: str,
        filter: Optional[dict] = None,
        where: Optional[Callable[[dict], bool]] = None,
        include_deleted: bool = False,
    ) -> list[dict]:
        return self._store._query_merged(
            kind, filter, where, include_deleted, puts=self._puts, deletes=self._deletes
        )


class Store:
    """Transactional entity storage rooted at a data directory."""

    def __init__(self, data_dir: str, clock: Callable[[], Any] = now_utc):
        self.data_dir = data_dir
        self.clock = clock
        self._lock = threading.RLock()
        self._records: dict[str, dict[str, Record]] = {k: {} for k in KIND_FIELDS}
        os.makedirs(data_dir, exist_ok=True)
        self._log_path = os.path.join(data_dir, "store.log")
        self._replay()
        self._log = open(self._log_path, "a", encoding="utf-8")

    # -- lifecycle ---------------------------------------------------------

    def _replay(self) -> None:
        if not os.path.exists(self._log_path):
            return
        with open(self._log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                for op in entry["tx"]:
                    if op["op"] == "put":
                        rec = Record(
                            op["kind"], op["id"], op["body"], op["version"],
                            op["created_at"], op["updated_at"],
                        )
                        self._records[op["kind"]][op["id"]] = rec
                    elif op["op"] == "del":
                        self._records[op["kind"]].pop(op["id"], None)

    def close(self) -> None:
        with self._lock:
            self._log.close()

    # -- transactions ------------------------------------------------------

    def atomically(self, fn: Callable[[Transaction], Any]) -> Any:
        """Run ``fn`` inside a transaction; commit on return, abort on raise.

        Constraint and reference checks run at commit; on any failure no
        effects are visible or durable.
        """
        with self._lock:
            tx = Transaction(self)
            result = fn(tx)
            self._commit(tx)
            return result

    def _commit(self, tx: Transaction) -> None:
        now = format_ts(self.clock())
        ops = []
        staged: dict[tuple[str, str], Record] = {}
        for (kind, entity_id), body in tx._puts.items():
            existing = self._records[kind].get(entity_id)
            if existing is not None:
                rec = Record(kind, entity_id, body, existing.version + 1, existing.created_at, now)
            else:
                rec = Record(kind, entity_id, body, 1, now, now)
            staged[(kind, entity_id)] = rec
        self._check_constraints(staged, tx._deletes)
        for rec in staged.values():
            ops.append({
                "op": "put", "kind": rec.kind, "id": rec.id, "body": rec.body,
                "version": rec.version, "created_at": rec.created_at,
                "updated_at": rec.updated_at,
            })
        for (kind, entity_id) in tx._deletes:
            ops.append({"op": "del", "kind": kind, "id": entity_id})
        if not ops:
            return
        line = canonical_json({"schema": SCHEMA_VERSION, "tx": ops})
        self._log.write(line + "\n")
        self._log.flush()
        os.fsync(self._log.fileno())
        for rec in staged.values():
            self._records[rec.kind][rec.id] = rec
        for (kind, entity_id) in tx._deletes:
            self._records[kind].pop(entity_id, None)

    def _check_constraints(self, staged: dict[tuple[str, str], Record], deletes: set) -> None:
        def live(kind: str) -> Iterator[dict]:
            seen = set()
            for (k, i), rec in staged.items():
                if k == kind:
                    seen.add(i)
                    yield rec.body
            for i, rec in self._records[kind].items():
                if i not in seen and (kind, i) not in deletes:
                    yield rec.body

        def exists(kind: str, entity_id: str) -> bool:
            if (kind, entity_id) in staged:
                return not staged[(kind, entity_id)].body.get("deleted")
            if (kind, entity_id) in deletes:
                return False
            rec = self._records[kind].get(entity_id)
            return rec is not None and not rec.body.get("deleted")

        for (kind, entity_id), rec in staged.items():
            if rec.body.get("deleted"):
                continue
            for key in UNIQUE_KEYS.get(kind, []):
                mine = tuple(rec.body.get(f) for f in key)
                for other in live(kind):
                    if other["id"] == entity_id or other.get("deleted"):
                        continue
                    if tuple(other.get(f) for f in key) == mine:
                        raise ConstraintViolation("_".join(key))
            for field, target, required in ID_REFS.get(kind, []):
                value = rec.body.get(field)
                if value is None:
                    if required:
                        raise ReferentialViolation(field, f"{kind}.{field} is required")
                    continue
                if not exists(target, value):
                    raise ReferentialViolation(field, f"{kind}.{field} -> missing {target} {value}")

    # -- convenience single-op API ----------------------------------------

    def put(self, kind: str, body: dict, id: Optional[str] = None) -> str:
        return self.atomically(lambda tx: tx.put(kind, body, id=id))

    def get(self, kind: str, id: str) -> dict:
        with self._lock:
            rec = self._records.get(kind, {}).get(id)
            if rec is None:
                raise NotFound(f"{kind} {id} not found")
            return dict(rec.body)

    def get_record(self, kind: str, id: str) -> Record:
        with self._lock:
            rec = self._records.get(kind, {}).get(id)
            if rec is None:
                raise NotFound(f"{kind} {id} not found")
            return rec

    def delete(self, kind: str, id: str) -> None:
        self.atomically(lambda tx: tx.delete(kind, id))

    def query(
        self,
        kind: str,
        filter: Optional[dict] = None,
        where: Optional[Callable[[dict], bool]] = None,
        sort: Optional[list[tuple[str, bool]]] = None,
        page: Optional[tuple[int, int]] = None,
        include_deleted: bool = False,
    ) -> list[dict]:
        """Snapshot query with field-equality filter, predicate, sort, page.

        ``sort`` is a list of (field, descending) pairs; ``page`` is
        (page_number starting at 1, per_page).
        """
        with self._lock:
            rows = self._query_merged(kind, filter, where, include_deleted, puts={}, deletes=set())
        if sort:
            for field, descending in reversed(sort):
                if field not in KIND_FIELDS[kind]:
                    raise CitadelError("unknown_field", f"unknown sort field {field!r} for {kind}")
                rows.sort(key=lambda b: (b.get(field) is None, b.get(field)), reverse=descending)
        if page:
            number, per_page = page
            start = (max(number, 1) - 1) * per_page
            rows = rows[start:start + per_page]
        return rows

    def _query_merged(self, kind, filter, where, include_deleted, puts, deletes) -> list[dict]:
        if kind not in KIND_FIELDS:
            raise CitadelError("bad_request", f"unknown entity kind: {kind}")
        if filter:
            unknown = set(filter) - set(KIND_FIELDS[kind])
            if unknown:
                raise CitadelError("unknown_field", f"unknown filter fields: {sorted(unknown)}")
        merged: dict[str, dict] = {}
        for i, rec in self._records[kind].items():
            if (kind, i) not in deletes:
                merged[i] = rec.body
        for (k, i), body in puts.items():
            if k == kind:
                merged[i] = body
        out = []
        for body in merged.values():
            if not include_deleted and body.get("deleted"):
                continue
            if filter and any(body.get(f) != v for f, v in filter.items()):
                continue
            if where and not where(body):
                continue
            out.append(dict(body))
        return out

    # -- export ------------------------------------------------------------

    def dump_lines(self) -> Iterator[str]:
        """All committed entities as canonical JSON lines, sorted (kind, id)."""
        with self._lock:
            records = [
                rec
                for kind in sorted(self._records)
                for _, rec in sorted(self._records[kind].items())
            ]
        for rec in records:
            yield canonical_json(rec.to_line_obj())
