"""File-backed content: lecture materials, assignment artifacts, generic
downloads, plus the library catalogue, syllabus, and timetable records.

Blobs live on the local filesystem under the data directory, content-addressed
by sha256, so identical uploads are stored once.
"""

from __future__ import annotations

import hashlib
import os
from datetime import date, time
from typing import Optional

from .auth import Principal
from .core import (
    AppContext, courses_of_student, find_course, is_enrolled, require_course_owner,
    require_member, teaches,
)
from .domain import Role, TimetableEntry, format_ts, timetable_for_day
from .errors import CitadelError, Forbidden, Invalid, NotFound
from .store import Store

CONTENT_KINDS = ("LectureMaterial", "AssignmentBrief", "Submission", "GeneralDownload")


def sanitize_filename(filename: str) -> str:
    """Strip directory components; reject names that vanish entirely."""
    name = filename.replace("\\", "/").split("/")[-1].strip()
    if not name or name in (".", ".."):
        raise Invalid(f"unusable filename {filename!r}")
    return name


def store_blob(ctx: AppContext, data: bytes) -> tuple[str, str]:
    """Write bytes content-addressed; returns (sha256 hex, blob_ref)."""
    digest = hashlib.sha256(data).hexdigest()
    path = os.path.join(ctx.blob_dir, digest)
    if not os.path.exists(path):
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    return digest, digest


def read_blob(ctx: AppContext, blob_ref: str) -> bytes:
    path = os.path.join(ctx.blob_dir, blob_ref)
    if not os.path.exists(path):
        raise NotFound(f"blob {blob_ref} missing")
    with open(path, "rb") as fh:
        return fh.read()


def upload_material(
    ctx: AppContext,
    principal: Principal,
    course_code: str,
    data: bytes,
    filename: str,
    media_type: str,
    kind: str = "LectureMaterial",
    id: Optional[str] = None,
) -> dict:
    course = find_course(ctx.store, course_code)
    require_course_owner(principal, course)
    return _store_content(ctx, principal, course, data, filename, media_type, kind, id=id)


def _store_content(ctx, principal, course, data, filename, media_type, kind, id=None) -> dict:
    if kind not in CONTENT_KINDS:
        raise Invalid(f"unknown content kind {kind!r}")
    if len(data) > ctx.config.max_upload_bytes:
        raise CitadelError("too_large", f"upload exceeds {ctx.config.max_upload_mib} MiB")
    digest, blob_ref = store_blob(ctx, data)
    item_id = ctx.store.put("content_item", {
        "owner_course": course["code"],
        "kind": kind,
        "filename": sanitize_filename(filename),
        "media_type": media_type,
        "size_bytes": len(data),
        "sha256": digest,
        "uploaded_by": principal.user_id,
        "uploaded_at": format_ts(ctx.clock()),
        "blob_ref": blob_ref,
    }, id=id)
    return ctx.store.get("content_item", item_id)


def list_materials(ctx: AppContext, principal: Principal, course_code: str) -> list[dict]:
    course = find_course(ctx.store, course_code)
    require_member(ctx.store, principal, course)
    rows = ctx.store.query("content_item", filter={"owner_course": course["code"]})
    if principal.role == Role.STUDENT:
        # students never see other students' submissions in the listing
        rows = [r for r in rows if r["kind"] != "Submission" or r["uploaded_by"] == principal.user_id]
    rows.sort(key=lambda r: (r["uploaded_at"], r["id"]))
    return rows


def download(ctx: AppContext, principal: Principal, content_id: str) -> tuple[bytes, dict]:
    """Authorize, stream, and (for students) count the download once."""
    item = ctx.store.get("content_item", content_id)
    course = find_course(ctx.store, item["owner_course"])
    require_member(ctx.store, principal, course)
    if item["kind"] == "Submission":
        if not (teaches(principal, course) or item["uploaded_by"] == principal.user_id):
            raise Forbidden("submissions are visible to their author and the course lecturer")
    data = read_blob(ctx, item["blob_ref"])
    if principal.role == Role.STUDENT:
        try:
            ctx.store.put("download_event", {
                "student_id": principal.user_id, "content_id": content_id,
            })
        except CitadelError as exc:
            if exc.code != "constraint_violation":  # re-download: already counted
                raise
    return data, item


# -- library ---------------------------------------------------------------

def add_book(ctx: AppContext, title: str, author: str, isbn: Optional[str],
             location: str, copies_total: int, id: Optional[str] = None) -> dict:
    if copies_total < 0:
        raise Invalid("copies_total must be non-negative")
    try:
        bid = ctx.store.put("library_book", {
            "title": title, "author": author, "isbn": isbn,
            "location": location, "copies_total": copies_total,
        }, id=id)
    except CitadelError as exc:
        if exc.code == "constraint_violation":
            raise CitadelError("duplicate_book", "book already in catalogue")
        raise
    return ctx.store.get("library_book", bid)


def update_book(ctx: AppContext, book_id: str, changes: dict) -> dict:
    book = ctx.store.get("library_book", book_id)
    for field in ("title", "author", "isbn", "location", "copies_total"):
        if field in changes:
            book[field] = changes[field]
    if book["copies_total"] < 0:
        raise Invalid("copies_total must be non-negative")
    ctx.store.put("library_book", book)
    return ctx.store.get("library_book", book_id)


def remove_book(ctx: AppContext, book_id: str) -> None:
    ctx.store.delete("library_book", book_id)


def search_library(store: Store, query: str, page: tuple[int, int] = (1, 25)) -> list[dict]:
    """Case-insensitive substring match on title or author, by title."""
    needle = query.lower()
    rows = store.query(
        "library_book",
        where=lambda b: needle in b["title"].lower() or needle in b["author"].lower(),
        sort=[("title", False)],
        page=page,
    )
    return rows


# -- syllabus --------------------------------------------------------------

def set_syllabus(ctx: AppContext, principal: Principal, course_code: str, topics: list[str]) -> list[str]:
    """Full replacement; the whole list is written in one transaction."""
    def txn(tx):
        rows = tx.query("course", filter={"code": course_code})
        if not rows:
            raise NotFound(f"course {course_code} not found")
        course = max(rows, key=lambda c: c["session"])
        require_course_owner(principal, course)
        course["syllabus"] = list(topics)
        tx.put("course", course)
        return course["syllabus"]
    return ctx.store.atomically(txn)


def view_syllabus(ctx: AppContext, principal: Principal, course_code: str) -> list[str]:
    course = find_course(ctx.store, course_code)
    require_member(ctx.store, principal, course)
    return list(course["syllabus"])


# -- timetable -------------------------------------------------------------

def add_timetable_entry(
    ctx: AppContext,
    principal: Principal,
    course_code: str,
    day: str,
    start: str,
    end: str,
    activity: str,
    venue: str,
    id: Optional[str] = None,
) -> dict:
    course = find_course(ctx.store, course_code)
    if principal.role == Role.LECTURER:
        require_course_owner(principal, course)
    try:
        entry = TimetableEntry(
            id=id or "", course_code=course["code"], date=date.fromisoformat(day),
            start=time.fromisoformat(start), end=time.fromisoformat(end),
            activity=activity, venue=venue,
        )
        entry.validate()
    except ValueError as exc:
        raise Invalid(str(exc), code="invalid_entry")
    eid = ctx.store.put("timetable_entry", {
        "course_code": course["code"], "date": day, "start": start,
        "end": end, "activity": activity, "venue": venue,
    }, id=id)
    return ctx.store.get("timetable_entry", eid)


def remove_timetable_entry(ctx: AppContext, principal: Principal, entry_id: str) -> None:
    entry = ctx.store.get("timetable_entry", entry_id)
    course = find_course(ctx.store, entry["course_code"])
    if principal.role == Role.LECTURER:
        require_course_owner(principal, course)
    ctx.store.delete("timetable_entry", entry_id)


def _to_entry(body: dict) -> TimetableEntry:
    return TimetableEntry(
        id=body["id"], course_code=body["course_code"],
        date=date.fromisoformat(body["date"]), start=time.fromisoformat(body["start"]),
        end=time.fromisoformat(body["end"]), activity=body["activity"], venue=body["venue"],
    )


def my_timetable(ctx: AppContext, principal: Principal, day: str) -> list[dict]:
    """The student's schedule for one day, restricted to enrolled courses."""
    my_codes = {c["code"] for c in courses_of_student(ctx.store, principal.user_id)}
    rows = ctx.store.query("timetable_entry", where=lambda e: e["course_code"] in my_codes)
    entries = timetable_for_day([_to_entry(r) for r in rows], date.fromisoformat(day))
    return [
        {"id": e.id, "course_code": e.course_code, "date": e.date.isoformat(),
         "start": e.start.isoformat("minutes"), "end": e.end.isoformat("minutes"),
         "activity": e.activity, "venue": e.venue}
        for e in entries
    ]
