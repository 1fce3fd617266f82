"""Login, sessions, password hashing, and role-based authorization.

Passwords are digested with scrypt (memory-hard, salted); session tokens are
256-bit values from the OS CSPRNG, presented as ``Authorization: Bearer``.
Login failures are indistinguishable between unknown-user and wrong-password,
and a per-username rate limit kicks in after repeated failures.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
from collections import defaultdict, deque
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Optional

from .domain import Role, format_ts, parse_ts
from .errors import CitadelError, Forbidden, Unauthenticated
from .store import Store

SCRYPT_N = 2 ** 14
SCRYPT_R = 8
SCRYPT_P = 1
MIN_PASSWORD_LEN = 8

RATE_LIMIT_FAILURES = 5
RATE_LIMIT_WINDOW = timedelta(minutes=15)

# Capability -> roles allowed. Deny by default: any (role, capability) pair
# not listed here is forbidden. Ownership checks (own course, own attempt,
# own inbox) are enforced by the service layer on top of this matrix.
ALL_ROLES = frozenset(Role)
PERMISSION_MATRIX: dict[str, frozenset[Role]] = {
    "logout": ALL_ROLES,
    "change_password": ALL_ROLES,
    # registry administration
    "create_faculty": frozenset({Role.REGISTRAR}),
    "create_department": frozenset({Role.REGISTRAR}),
    "create_user": frozenset({Role.REGISTRAR}),
    "create_course": frozenset({Role.REGISTRAR}),
    "create_enrollment": frozenset({Role.REGISTRAR}),
    "list_courses": ALL_ROLES,
    # student self-service
    "view_my_courses": frozenset({Role.STUDENT}),
    "self_enroll": frozenset({Role.STUDENT}),
    "view_my_timetable": frozenset({Role.STUDENT}),
    "view_my_results": frozenset({Role.STUDENT}),
    "view_classmates": frozenset({Role.STUDENT}),
    "view_lecturers": frozenset({Role.STUDENT}),
    # content
    "upload_material": frozenset({Role.LECTURER}),
    "list_materials": frozenset({Role.STUDENT, Role.LECTURER}),
    "download_content": frozenset({Role.STUDENT, Role.LECTURER}),
    "set_syllabus": frozenset({Role.LECTURER}),
    "view_syllabus": frozenset({Role.STUDENT, Role.LECTURER}),
    "manage_library": frozenset({Role.REGISTRAR}),
    "search_library": ALL_ROLES,
    "manage_timetable": frozenset({Role.LECTURER, Role.REGISTRAR}),
    # assessment
    "create_assessment": frozenset({Role.LECTURER}),
    "list_assessments": frozenset({Role.STUDENT, Role.LECTURER}),
    "start_attempt": frozenset({Role.STUDENT}),
    "save_answers": frozenset({Role.STUDENT}),
    "submit_attempt": frozenset({Role.STUDENT}),
    "create_assignment": frozenset({Role.LECTURER}),
    "list_assignments": frozenset({Role.STUDENT, Role.LECTURER}),
    "submit_assignment": frozenset({Role.STUDENT}),
    "grade_submission": frozenset({Role.LECTURER}),
    # collaboration
    "send_message": ALL_ROLES,
    "list_messages": ALL_ROLES,
    "mark_read": ALL_ROLES,
    "post_notice": frozenset({Role.LECTURER, Role.REGISTRAR}),
    "list_notices": ALL_ROLES,
    "chat_post": frozenset({Role.STUDENT, Role.LECTURER}),
    "chat_fetch": frozenset({Role.STUDENT, Role.LECTURER}),
    # reporting
    "view_report": frozenset({Role.LECTURER, Role.REGISTRAR}),
}


@dataclass(frozen=True)
class Principal:
    user_id: str
    role: Role


def hash_password(password: str, salt: Optional[bytes] = None) -> str:
    """Digest a password; the salt and scrypt parameters ride in the digest.

    A caller-supplied salt exists only so seeded fixtures can be
    bit-deterministic; normal paths use fresh CSPRNG salts.
    """
    if salt is None:
        salt = secrets.token_bytes(16)
    derived = hashlib.scrypt(
        password.encode("utf-8"), salt=salt, n=SCRYPT_N, r=SCRYPT_R, p=SCRYPT_P
    )
    return f"scrypt${SCRYPT_N}${SCRYPT_R}${SCRYPT_P}${salt.hex()}${derived.hex()}"


def verify_password(password: str, digest: str) -> bool:
    try:
        algo, n, r, p, salt_hex, hash_hex = digest.split("$")
        if algo != "scrypt":
            return False
        derived = hashlib.scrypt(
            password.encode("utf-8"), salt=bytes.fromhex(salt_hex),
            n=int(n), r=int(r), p=int(p),
        )
        return hmac.compare_digest(derived.hex(), hash_hex)
    except (ValueError, AttributeError):
        return False

# Digest used to equalize timing when the username does not exist.
_DUMMY_DIGEST = hash_password("definitely-not-a-password", salt=b"\x00" * 16)


class RateLimiter:
    """Sliding-window failure counter per username, thread-safe."""

    def __init__(self, limit: int = RATE_LIMIT_FAILURES, window: timedelta = RATE_LIMIT_WINDOW):
        self.limit = limit
        self.window = window
        self._failures: dict[str, deque] = defaultdict(deque)
        self._lock = threading.Lock()

    def check(self, username: str, now: datetime) -> bool:
        """True when the username is still allowed to attempt a login."""
        with self._lock:
            q = self._failures[username]
            while q and now - q[0] > self.window:
                q.popleft()
            return len(q) < self.limit

    def record_failure(self, username: str, now: datetime) -> None:
        with self._lock:
            self._failures[username].append(now)

    def reset(self, username: str) -> None:
        with self._lock:
            self._failures.pop(username, None)


class AuthService:
    def __init__(self, store: Store, session_ttl: timedelta, clock, rate_limiter: Optional[RateLimiter] = None):
        self.store = store
        self.session_ttl = session_ttl
        self.clock = clock
        self.rate_limiter = rate_limiter or RateLimiter()

    def login(self, username: str, password: str) -> dict:
        """Issue a session token, or raise an opaque ``denied`` error.

        The denial is identical for unknown usernames and wrong passwords;
        a dummy digest is verified in the unknown-user path so timing does
        not leak existence either.
        """
        now = self.clock()
        if not self.rate_limiter.check(username, now):
            raise CitadelError("denied", "access denied")
        users = self.store.query("user", filter={"username": username})
        user = users[0] if users else None
        if user is None:
            verify_password(password, _DUMMY_DIGEST)
            self.rate_limiter.record_failure(username, now)
            raise CitadelError("denied", "access denied")
        if not verify_password(password, user["password_digest"]):
            self.rate_limiter.record_failure(username, now)
            raise CitadelError("denied", "access denied")
        self.rate_limiter.reset(username)
        token = secrets.token_urlsafe(32)
        self.store.put("session_token", {
            "token": token,
            "user_id": user["id"],
            "role": user["role"],
            "issued_at": format_ts(now),
            "expires_at": format_ts(now + self.session_ttl),
        })
        return {"token": token, "role": user["role"], "user_id": user["id"],
                "expires_at": format_ts(now + self.session_ttl)}

    def authenticate(self, token: str) -> Principal:
        rows = self.store.query("session_token", filter={"token": token})
        if not rows:
            raise Unauthenticated()
        session = rows[0]
        if self.clock() > parse_ts(session["expires_at"]):
            raise Unauthenticated("session expired")
        return Principal(user_id=session["user_id"], role=Role(session["role"]))

    def logout(self, token: str) -> None:
        for session in self.store.query("session_token", filter={"token": token}):
            self.store.delete("session_token", session["id"])

    def revoke_user_sessions(self, user_id: str) -> None:
        for session in self.store.query("session_token", filter={"user_id": user_id}):
            self.store.delete("session_token", session["id"])

    def change_password(self, principal: Principal, old: str, new: str) -> None:
        user = self.store.get("user", principal.user_id)
        if not verify_password(old, user["password_digest"]):
            raise CitadelError("bad_old", "current password does not verify")
        check_password_policy(new)
        user["password_digest"] = hash_password(new)
        self.store.put("user", user)
        self.revoke_user_sessions(principal.user_id)


def check_password_policy(password: str) -> None:
    if len(password) < MIN_PASSWORD_LEN:
        raise CitadelError("weak_new", f"password must be at least {MIN_PASSWORD_LEN} characters")


def authorize(principal: Principal, capability: str) -> None:
    """Matrix gate: forbidden unless the role is explicitly granted."""
    allowed = PERMISSION_MATRIX.get(capability, frozenset())
    if principal.role not in allowed:
        raise Forbidden(f"role {principal.role.value} may not {capability}")


def role_allowed(role: Role, capability: str) -> bool:
    return role in PERMISSION_MATRIX.get(capability, frozenset())
