"""Registry administration: faculties, departments, user accounts, courses,
and enrollments."""

from __future__ import annotations

from typing import Optional

from .auth import check_password_policy, hash_password
from .core import AppContext, find_course
from .domain import (
    COURSE_CODE_PATTERN, SESSION_PATTERN, IdentityCheck, Role, format_ts,
    validate_identity,
)
from .errors import Invalid, NotFound
from .store import Store


def create_faculty(ctx: AppContext, name: str, id: Optional[str] = None) -> dict:
    if not name.strip():
        raise Invalid("faculty name must be non-empty")
    fid = ctx.store.put("faculty", {"name": name}, id=id)
    return ctx.store.get("faculty", fid)


def create_department(ctx: AppContext, name: str, faculty_id: str, id: Optional[str] = None) -> dict:
    if not name.strip():
        raise Invalid("department name must be non-empty")
    did = ctx.store.put("department", {"name": name, "faculty_id": faculty_id}, id=id)
    return ctx.store.get("department", did)


def create_user(
    ctx: AppContext,
    username: str,
    password: str,
    full_name: str,
    email: str,
    phone: str,
    role: Role,
    department_id: Optional[str] = None,
    is_library: bool = False,
    id: Optional[str] = None,
    salt: Optional[bytes] = None,
) -> dict:
    """Register a person. Students carry a matric number and a department;
    staff carry an STF id. The role is fixed at creation."""
    check = validate_identity(username, role)
    if check != IdentityCheck.VALID:
        raise Invalid(f"username {username!r} invalid for role {role.value}: {check.value}")
    if role == Role.STUDENT and not department_id:
        raise Invalid("students must belong to a department")
    check_password_policy(password)
    body = {
        "username": username,
        "password_digest": hash_password(password, salt=salt),
        "full_name": full_name,
        "email": email,
        "phone": phone,
        "role": role.value,
        "department_id": department_id,
        "is_library": is_library,
        "deleted": False,
    }
    uid = ctx.store.put("user", body, id=id)
    return public_user(ctx.store.get("user", uid))


def public_user(user: dict) -> dict:
    """User view with the password digest stripped."""
    return {k: v for k, v in user.items() if k != "password_digest"}


def create_course(
    ctx: AppContext,
    code: str,
    title: str,
    department_id: str,
    lecturer_id: str,
    session: str,
    syllabus: Optional[list[str]] = None,
    id: Optional[str] = None,
) -> dict:
    if not COURSE_CODE_PATTERN.match(code):
        raise Invalid(f"course code {code!r} must match LLL999 / LLLL999")
    if not SESSION_PATTERN.match(session):
        raise Invalid(f"session {session!r} must look like 2023/2024")
    lecturer = ctx.store.get("user", lecturer_id)
    if lecturer["role"] != Role.LECTURER.value:
        raise Invalid(f"user {lecturer_id} is not a lecturer")
    cid = ctx.store.put("course", {
        "code": code,
        "title": title,
        "department_id": department_id,
        "lecturer_id": lecturer_id,
        "session": session,
        "syllabus": list(syllabus or []),
        "deleted": False,
    }, id=id)
    return ctx.store.get("course", cid)


def enroll(ctx: AppContext, student_id: str, course_code: str, id: Optional[str] = None) -> dict:
    """Register a student on a course for the course's academic session.

    Any student may register any catalogue course (no faculty restriction);
    duplicates are rejected by the store's unique key.
    """
    student = ctx.store.get("user", student_id)
    if student["role"] != Role.STUDENT.value:
        raise Invalid(f"user {student_id} is not a student")
    course = find_course(ctx.store, course_code)
    eid = ctx.store.put("enrollment", {
        "student_id": student_id,
        "course_code": course["code"],
        "session": course["session"],
        "registered_at": format_ts(ctx.clock()),
    }, id=id)
    return ctx.store.get("enrollment", eid)


def list_courses(store: Store) -> list[dict]:
    rows = store.query("course")
    rows.sort(key=lambda c: (c["code"], c["session"]))
    return rows
