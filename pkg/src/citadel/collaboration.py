"""Person-to-person messages, broadcast notices, and per-course chat rooms.

Chat delivery is poll/long-poll: every post gets the next dense sequence
number for its room (assigned inside the insert transaction), and a fetch
may wait up to a timeout for anything newer than the caller's last seen
sequence.
"""

from __future__ import annotations

import threading
from typing import Optional

from .auth import Principal
from .core import AppContext, courses_of_student, find_course, is_enrolled, teaches
from .domain import Role, format_ts
from .errors import CitadelError, Forbidden, NotFound

MESSAGE_BODY_LIMIT = 10_000

NOTICE_SCOPES = ("all", "department", "course")


# -- direct messages -------------------------------------------------------

def _lecturer_ids_of_student(store, student_id: str) -> set[str]:
    return {c["lecturer_id"] for c in courses_of_student(store, student_id)}


def _classmate_ids(store, student_id: str) -> set[str]:
    mates: set[str] = set()
    for course in courses_of_student(store, student_id):
        for enr in store.query("enrollment", filter={
            "course_code": course["code"], "session": course["session"],
        }):
            mates.add(enr["student_id"])
    mates.discard(student_id)
    return mates


def _may_message(store, sender: dict, recipient: dict) -> bool:
    """Recipient graph: students reach their course lecturers and classmates;
    lecturers reach their enrolled students and fellow staff; registrars
    reach anyone."""
    s_role, r_id = Role(sender["role"]), recipient["id"]
    if s_role == Role.REGISTRAR:
        return True
    if s_role == Role.STUDENT:
        return (
            r_id in _lecturer_ids_of_student(store, sender["id"])
            or r_id in _classmate_ids(store, sender["id"])
        )
    # lecturer
    if recipient["role"] in (Role.LECTURER.value, Role.REGISTRAR.value):
        return True
    my_students: set[str] = set()
    for course in store.query("course", filter={"lecturer_id": sender["id"]}):
        for enr in store.query("enrollment", filter={
            "course_code": course["code"], "session": course["session"],
        }):
            my_students.add(enr["student_id"])
    return r_id in my_students


def send_message(ctx: AppContext, principal: Principal, to_user: str,
                 subject: str, body: str) -> dict:
    if len(body) > MESSAGE_BODY_LIMIT:
        raise CitadelError("too_long", f"body exceeds {MESSAGE_BODY_LIMIT} characters")
    sender = ctx.store.get("user", principal.user_id)
    try:
        recipient = ctx.store.get("user", to_user)
    except NotFound:
        raise Forbidden("recipient not reachable", code="forbidden_recipient")
    if not _may_message(ctx.store, sender, recipient):
        raise Forbidden("recipient not reachable", code="forbidden_recipient")
    mid = ctx.store.put("message", {
        "from_user": principal.user_id, "to_user": to_user,
        "subject": subject, "body": body,
        "sent_at": format_ts(ctx.clock()), "read": False,
    })
    return ctx.store.get("message", mid)


def list_inbox(ctx: AppContext, principal: Principal, page: tuple[int, int] = (1, 25)) -> list[dict]:
    return ctx.store.query(
        "message",
        filter={"to_user": principal.user_id},
        sort=[("sent_at", True), ("id", False)],
        page=page,
    )


def mark_read(ctx: AppContext, principal: Principal, message_id: str) -> dict:
    def txn(tx):
        message = tx.get("message", message_id)
        if message["to_user"] != principal.user_id:
            raise Forbidden("only the recipient may mark a message read")
        if not message["read"]:  # idempotent; read never flips back
            message["read"] = True
            tx.put("message", message)
        return message
    return ctx.store.atomically(txn)


# -- notices ---------------------------------------------------------------

def post_notice(ctx: AppContext, principal: Principal, scope_kind: str,
                scope_ref: Optional[str], title: str, body: str,
                id: Optional[str] = None) -> dict:
    if scope_kind not in NOTICE_SCOPES:
        raise Forbidden(f"unknown scope {scope_kind!r}", code="forbidden_scope")
    author = ctx.store.get("user", principal.user_id)
    if principal.role == Role.LECTURER:
        if scope_kind != "course":
            raise Forbidden("lecturers may only post to their own courses", code="forbidden_scope")
        course = find_course(ctx.store, scope_ref)
        if course["lecturer_id"] != principal.user_id:
            raise Forbidden("lecturers may only post to their own courses", code="forbidden_scope")
    elif scope_kind == "department":
        ctx.store.get("department", scope_ref)
    elif scope_kind == "course":
        find_course(ctx.store, scope_ref)
    author_role = "Library" if author.get("is_library") else author["role"]
    nid = ctx.store.put("notice", {
        "author_id": principal.user_id, "author_role": author_role,
        "scope_kind": scope_kind, "scope_ref": scope_ref,
        "title": title, "body": body, "posted_at": format_ts(ctx.clock()),
    }, id=id)
    return ctx.store.get("notice", nid)


def _in_scope(ctx: AppContext, user: dict, notice: dict) -> bool:
    if notice["scope_kind"] == "all" or notice["author_id"] == user["id"]:
        return True
    if notice["scope_kind"] == "department":
        return user.get("department_id") == notice["scope_ref"]
    course_rows = ctx.store.query("course", filter={"code": notice["scope_ref"]})
    if not course_rows:
        return False
    course = max(course_rows, key=lambda c: c["session"])
    if course["lecturer_id"] == user["id"]:
        return True
    return user["role"] == Role.STUDENT.value and is_enrolled(ctx.store, user["id"], course)


def list_notices(ctx: AppContext, principal: Principal, page: tuple[int, int] = (1, 25)) -> list[dict]:
    """Notices the caller can see (scope membership), newest first."""
    user = ctx.store.get("user", principal.user_id)
    rows = [n for n in ctx.store.query("notice") if _in_scope(ctx, user, n)]
    rows.sort(key=lambda n: (n["posted_at"], n["id"]), reverse=True)
    number, per_page = page
    start = (max(number, 1) - 1) * per_page
    return rows[start:start + per_page]


# -- chat ------------------------------------------------------------------

class ChatHub:
    """Wakes long-poll waiters when a room gains a message."""

    def __init__(self):
        self._cond = threading.Condition()
        self._latest: dict[str, int] = {}

    def published(self, room: str, seq: int) -> None:
        with self._cond:
            self._latest[room] = max(self._latest.get(room, 0), seq)
            self._cond.notify_all()

    def wait_for(self, room: str, after_seq: int, timeout: float) -> None:
        deadline = threading.TIMEOUT_MAX if timeout is None else timeout
        with self._cond:
            self._cond.wait_for(
                lambda: self._latest.get(room, 0) > after_seq, timeout=deadline
            )


def _require_room_member(ctx: AppContext, principal: Principal, room: str) -> dict:
    try:
        course = find_course(ctx.store, room)
    except NotFound:
        raise Forbidden(f"no such room {room}", code="forbidden_room")
    if teaches(principal, course):
        return course
    if principal.role == Role.STUDENT and is_enrolled(ctx.store, principal.user_id, course):
        return course
    raise Forbidden(f"not a member of room {room}", code="forbidden_room")


def chat_post(ctx: AppContext, principal: Principal, room: str, body: str) -> dict:
    course = _require_room_member(ctx, principal, room)
    def txn(tx):
        existing = tx.query("chat_message", filter={"room": course["code"]})
        seq = max((m["seq"] for m in existing), default=0) + 1
        return tx.put("chat_message", {
            "room": course["code"], "seq": seq, "author_id": principal.user_id,
            "body": body, "posted_at": format_ts(ctx.clock()),
        })
    mid = ctx.store.atomically(txn)
    message = ctx.store.get("chat_message", mid)
    ctx.chat_hub.published(course["code"], message["seq"])
    return message


def chat_fetch(ctx: AppContext, principal: Principal, room: str, after_seq: int = 0,
               wait_seconds: float = 0.0) -> list[dict]:
    """Messages with seq > after_seq in ascending order; optionally long-poll
    up to ``wait_seconds`` for something new before answering empty."""
    course = _require_room_member(ctx, principal, room)
    def fetch() -> list[dict]:
        rows = ctx.store.query(
            "chat_message",
            filter={"room": course["code"]},
            where=lambda m: m["seq"] > after_seq,
            sort=[("seq", False)],
        )
        return rows
    rows = fetch()
    if not rows and wait_seconds > 0:
        ctx.chat_hub.wait_for(course["code"], after_seq, timeout=wait_seconds)
        rows = fetch()
    return rows
