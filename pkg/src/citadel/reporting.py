"""Administrative progress reporting plus the classmate/lecturer directory
views that ride on the same aggregates."""

from __future__ import annotations

import csv
import io

from .assessment import compute_result
from .auth import Principal
from .core import AppContext, courses_of_student, find_course, require_course_owner
from .domain import Role, format_ts
from .errors import Forbidden

CSV_HEADER = [
    "matric", "name", "materials_downloaded", "assignments_submitted",
    "assignments_total", "quizzes_taken", "quizzes_total", "ca", "exam",
    "total", "letter",
]


def view_classmates(ctx: AppContext, principal: Principal, course_code: str) -> list[dict]:
    """Fellow enrolled students of a course, caller excluded, by full name."""
    course = find_course(ctx.store, course_code)
    enrollments = ctx.store.query("enrollment", filter={
        "course_code": course["code"], "session": course["session"],
    })
    ids = {e["student_id"] for e in enrollments}
    if principal.user_id not in ids:
        raise Forbidden("not enrolled in this course")
    rows = []
    for sid in ids - {principal.user_id}:
        user = ctx.store.get("user", sid)
        rows.append({
            "full_name": user["full_name"], "matric": user["username"],
            "email": user["email"], "phone": user["phone"],
        })
    rows.sort(key=lambda r: (r["full_name"], r["matric"]))
    return rows


def view_lecturers(ctx: AppContext, principal: Principal) -> list[dict]:
    """Distinct lecturers of the caller's registered courses."""
    by_lecturer: dict[str, list[str]] = {}
    for course in courses_of_student(ctx.store, principal.user_id):
        by_lecturer.setdefault(course["lecturer_id"], []).append(course["code"])
    rows = []
    for lecturer_id, codes in by_lecturer.items():
        user = ctx.store.get("user", lecturer_id)
        rows.append({
            "full_name": user["full_name"], "staff_id": user["username"],
            "email": user["email"], "courses": sorted(codes),
        })
    rows.sort(key=lambda r: (r["full_name"], r["staff_id"]))
    return rows


def generate_report(ctx: AppContext, principal: Principal, course_code: str) -> dict:
    """Per-student progress aggregates for one course.

    Counts are over raw rows: distinct material downloads, submissions
    present, quiz attempts scored; grade columns come from the gradebook.
    """
    course = find_course(ctx.store, course_code)
    if principal.role == Role.LECTURER:
        require_course_owner(principal, course)
    elif principal.role != Role.REGISTRAR:
        raise Forbidden("reports are for the course lecturer or the registry")

    materials = {
        m["id"] for m in ctx.store.query("content_item", filter={"owner_course": course["code"]})
    }
    assignments = ctx.store.query("assignment", filter={"course_code": course["code"]})
    quizzes = [
        a for a in ctx.store.query("assessment", filter={"course_code": course["code"]})
        if a["kind"] == "Quiz"
    ]
    rows = []
    for enr in ctx.store.query("enrollment", filter={
        "course_code": course["code"], "session": course["session"],
    }):
        sid = enr["student_id"]
        student = ctx.store.get("user", sid)
        downloaded = sum(
            1 for ev in ctx.store.query("download_event", filter={"student_id": sid})
            if ev["content_id"] in materials
        )
        submitted = sum(
            1 for a in assignments
            if ctx.store.query("submission", filter={"assignment_id": a["id"], "student_id": sid})
        )
        taken = sum(
            1 for q in quizzes
            for at in ctx.store.query("attempt", filter={"assessment_id": q["id"], "student_id": sid})
            if at["auto_score"] is not None
        )
        result = compute_result(ctx, course["code"], sid)
        rows.append({
            "student_id": sid,
            "matric": student["username"],
            "name": student["full_name"],
            "materials_downloaded": downloaded,
            "assignments_submitted": submitted,
            "assignments_total": len(assignments),
            "quizzes_taken": taken,
            "quizzes_total": len(quizzes),
            "ca_score": result["ca_score"],
            "exam_score": result["exam_score"],
            "total": result["total"],
            "letter": result["letter"],
        })
    rows.sort(key=lambda r: r["matric"])
    return {
        "course_code": course["code"],
        "generated_at": format_ts(ctx.clock()),
        "rows": rows,
    }


def report_to_csv(report: dict) -> str:
    """RFC 4180 quoting, UTF-8, LF line endings, rows sorted by matric."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report["rows"]:
        writer.writerow([
            row["matric"], row["name"], row["materials_downloaded"],
            row["assignments_submitted"], row["assignments_total"],
            row["quizzes_taken"], row["quizzes_total"],
            format_number(row["ca_score"]), format_number(row["exam_score"]),
            format_number(row["total"]), row["letter"],
        ])
    return buf.getvalue()


def format_number(value: float) -> str:
    """Integers render bare; fractions keep their shortest repr."""
    if float(value) == int(value):
        return str(int(value))
    return repr(float(value))
