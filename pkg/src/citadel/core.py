"""Application context wiring the store, config, clock, and shared services."""

from __future__ import annotations

import os
from datetime import datetime, timedelta
from typing import Callable, Optional

from .auth import AuthService, Principal
from .config import Config
from .domain import Role, now_utc
from .errors import Forbidden, NotFound
from .store import Store


class AppContext:
    """Everything a request handler needs; one per process.

    ``clock`` is injectable so tests can pin time; all services read time
    through it.
    """

    def __init__(self, config: Config, clock: Callable[[], datetime] = now_utc):
        self.config = config
        self.clock = clock
        self.store = Store(config.data_dir, clock=clock)
        self.auth = AuthService(
            self.store, session_ttl=timedelta(hours=config.session_ttl_hours), clock=clock
        )
        self.blob_dir = os.path.join(config.data_dir, "blobs")
        os.makedirs(self.blob_dir, exist_ok=True)
        # imported lazily to avoid a module cycle
        from .collaboration import ChatHub
        self.chat_hub = ChatHub()

    def close(self) -> None:
        self.store.close()


# -- shared lookups --------------------------------------------------------

def find_course(store: Store, code: str) -> dict:
    """Course by code; with multiple academic sessions, the latest wins."""
    rows = store.query("course", filter={"code": code})
    if not rows:
        raise NotFound(f"course {code} not found")
    return max(rows, key=lambda c: c["session"])


def get_user(store: Store, user_id: str) -> dict:
    return store.get("user", user_id)


def is_enrolled(store: Store, student_id: str, course: dict) -> bool:
    rows = store.query("enrollment", filter={
        "student_id": student_id,
        "course_code": course["code"],
        "session": course["session"],
    })
    return bool(rows)


def teaches(principal: Principal, course: dict) -> bool:
    return principal.role == Role.LECTURER and course["lecturer_id"] == principal.user_id


def require_course_owner(principal: Principal, course: dict) -> None:
    if not teaches(principal, course):
        raise Forbidden(f"lecturer does not own course {course['code']}")


def require_member(store: Store, principal: Principal, course: dict) -> None:
    """Enrolled student or the course's lecturer; everyone else is out."""
    if teaches(principal, course):
        return
    if principal.role == Role.STUDENT and is_enrolled(store, principal.user_id, course):
        return
    raise Forbidden(f"not a member of course {course['code']}")


def enrollments_of(store: Store, student_id: str) -> list[dict]:
    return store.query("enrollment", filter={"student_id": student_id})


def courses_of_student(store: Store, student_id: str) -> list[dict]:
    out = []
    for enr in enrollments_of(store, student_id):
        rows = store.query("course", filter={
            "code": enr["course_code"], "session": enr["session"],
        })
        out.extend(rows)
    out.sort(key=lambda c: c["code"])
    return out
