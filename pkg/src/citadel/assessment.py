"""Timed quizzes and exams, auto-scoring, assignments, and the gradebook.

Quizzes feed the continuous-assessment component (capped at 30 points per
course); a course's exam maps to the 70-point exam component. Questions are
multiple choice with exactly one correct option, which is what makes
auto-scoring possible. One attempt per student per assessment; answers are
autosaved so an expired attempt is scored over whatever was saved.
"""

from __future__ import annotations

from datetime import timedelta
from typing import Optional

from .auth import Principal
from .core import AppContext, find_course, is_enrolled, require_course_owner, require_member
from .domain import (
    CA_MAX, EXAM_MAX, Role, WindowState, compute_grade, format_ts, parse_ts,
    window_state,
)
from .errors import CitadelError, Forbidden, Invalid, NotFound

ASSESSMENT_KINDS = ("Quiz", "Exam")
MIN_OPTIONS, MAX_OPTIONS = 2, 6


def validate_questions(questions: list[dict]) -> float:
    """Check the MCQ invariants and return the points total."""
    if not questions:
        raise Invalid("assessment needs at least one question", code="invalid_spec")
    total = 0.0
    for i, q in enumerate(questions):
        options = q.get("options") or []
        if not MIN_OPTIONS <= len(options) <= MAX_OPTIONS:
            raise Invalid(f"question {i}: needs {MIN_OPTIONS}-{MAX_OPTIONS} options", code="invalid_spec")
        correct = q.get("correct_index")
        if not isinstance(correct, int) or not 0 <= correct < len(options):
            raise Invalid(f"question {i}: correct_index out of range", code="invalid_spec")
        points = q.get("points", 1)
        if not isinstance(points, (int, float)) or points <= 0:
            raise Invalid(f"question {i}: points must be positive", code="invalid_spec")
        if not str(q.get("prompt", "")).strip():
            raise Invalid(f"question {i}: empty prompt", code="invalid_spec")
        total += float(points)
    return total


def create_assessment(
    ctx: AppContext,
    principal: Principal,
    course_code: str,
    kind: str,
    title: str,
    opens_at: str,
    closes_at: str,
    questions: list[dict],
    duration_limit: Optional[int] = None,
    ca_weight: float = 0.0,
    id: Optional[str] = None,
) -> dict:
    """Author a quiz or exam. The CA-budget check (sum of quiz weights <= 30)
    runs inside the insert transaction so concurrent creations cannot
    overshoot."""
    course = find_course(ctx.store, course_code)
    require_course_owner(principal, course)
    if kind not in ASSESSMENT_KINDS:
        raise Invalid(f"kind must be one of {ASSESSMENT_KINDS}", code="invalid_spec")
    opens, closes = parse_ts(opens_at), parse_ts(closes_at)
    if opens >= closes:
        raise Invalid("opens_at must precede closes_at", code="invalid_spec")
    if duration_limit is not None:
        if duration_limit <= 0 or timedelta(minutes=duration_limit) > closes - opens:
            raise Invalid("duration_limit must fit inside the window", code="invalid_spec")
    points_total = validate_questions(questions)
    if kind == "Exam":
        if ca_weight:
            raise Invalid("exams do not carry a CA weight", code="invalid_spec")
    elif ca_weight < 0:
        raise Invalid("ca_weight must be non-negative", code="invalid_spec")

    def txn(tx):
        existing = tx.query("assessment", filter={"course_code": course["code"]})
        if kind == "Exam" and any(a["kind"] == "Exam" for a in existing):
            raise Invalid("course already has an exam", code="invalid_spec")
        budget = sum(a["ca_weight"] for a in existing if a["kind"] == "Quiz")
        if kind == "Quiz" and budget + ca_weight > CA_MAX:
            raise CitadelError(
                "ca_budget_exceeded",
                f"quiz CA weights would total {budget + ca_weight}, cap is {CA_MAX}",
            )
        return tx.put("assessment", {
            "course_code": course["code"], "kind": kind, "title": title,
            "opens_at": format_ts(opens), "closes_at": format_ts(closes),
            "duration_limit": duration_limit, "questions": questions,
            "points_total": points_total, "ca_weight": float(ca_weight),
        }, id=id)

    aid = ctx.store.atomically(txn)
    return ctx.store.get("assessment", aid)


def student_view(assessment: dict) -> dict:
    """Assessment with the answer key stripped, for takers."""
    view = dict(assessment)
    view["questions"] = [
        {"prompt": q["prompt"], "options": q["options"], "points": q.get("points", 1)}
        for q in assessment["questions"]
    ]
    return view


def list_assessments(ctx: AppContext, principal: Principal, course_code: str) -> list[dict]:
    course = find_course(ctx.store, course_code)
    require_member(ctx.store, principal, course)
    rows = ctx.store.query("assessment", filter={"course_code": course["code"]})
    rows.sort(key=lambda a: (a["opens_at"], a["id"]))
    if principal.role == Role.STUDENT:
        rows = [student_view(a) for a in rows]
    return rows


def effective_deadline(assessment: dict, started_at) -> str:
    closes = parse_ts(assessment["closes_at"])
    limit = assessment.get("duration_limit")
    if limit is not None:
        return format_ts(min(closes, started_at + timedelta(minutes=limit)))
    return format_ts(closes)


def start_attempt(ctx: AppContext, principal: Principal, assessment_id: str) -> dict:
    now = ctx.clock()
    assessment = ctx.store.get("assessment", assessment_id)
    course = find_course(ctx.store, assessment["course_code"])
    if not is_enrolled(ctx.store, principal.user_id, course):
        raise CitadelError("not_enrolled", f"not enrolled in {course['code']}")
    state = window_state(now, parse_ts(assessment["opens_at"]), parse_ts(assessment["closes_at"]))
    if state == WindowState.NOT_YET_OPEN:
        raise CitadelError("window_not_open", "assessment has not opened yet")
    if state == WindowState.CLOSED:
        raise CitadelError("window_closed", "assessment window has closed")

    def txn(tx):
        prior = tx.query("attempt", filter={
            "assessment_id": assessment_id, "student_id": principal.user_id,
        })
        if prior:
            raise CitadelError("already_attempted", "one attempt per assessment")
        return tx.put("attempt", {
            "assessment_id": assessment_id,
            "student_id": principal.user_id,
            "started_at": format_ts(now),
            "deadline": effective_deadline(assessment, now),
            "submitted_at": None,
            "answers": [None] * len(assessment["questions"]),
            "auto_score": None,
            "expired": False,
        })

    attempt_id = ctx.store.atomically(txn)
    return ctx.store.get("attempt", attempt_id)


def score_answers(questions: list[dict], answers: list) -> float:
    """Sum of points where the selected index matches the key."""
    total = 0.0
    for q, a in zip(questions, answers):
        if a is not None and a == q["correct_index"]:
            total += float(q.get("points", 1))
    return total


def _own_open_attempt(ctx: AppContext, tx, principal: Principal, attempt_id: str) -> dict:
    attempt = tx.get("attempt", attempt_id)
    if attempt["student_id"] != principal.user_id:
        raise Forbidden("not your attempt")
    if attempt["submitted_at"] is not None or attempt["expired"]:
        raise CitadelError("already_submitted", "attempt is final")
    return attempt


def save_answers(ctx: AppContext, principal: Principal, attempt_id: str, answers: list) -> dict:
    """Autosave the current answer vector; runs on every change client-side.

    Past the effective deadline the attempt is finalized as expired, scored
    over the previously saved answers (the late vector is discarded).
    """
    def txn(tx):
        attempt = _own_open_attempt(ctx, tx, principal, attempt_id)
        assessment = tx.get("assessment", attempt["assessment_id"])
        _check_shape(assessment, answers)
        if ctx.clock() > parse_ts(attempt["deadline"]):
            # the expiry must commit even though the save is rejected
            _finalize_expired(tx, attempt, assessment)
            return None
        attempt["answers"] = list(answers)
        tx.put("attempt", attempt)
        return attempt

    attempt = ctx.store.atomically(txn)
    if attempt is None:
        raise CitadelError("deadline_passed", "deadline passed; saved answers were scored")
    return attempt


def _check_shape(assessment: dict, answers: list) -> None:
    if len(answers) != len(assessment["questions"]):
        raise CitadelError("answer_shape_mismatch", "answer vector length must equal question count")
    for a, q in zip(answers, assessment["questions"]):
        if a is not None and (not isinstance(a, int) or not 0 <= a < len(q["options"])):
            raise CitadelError("answer_shape_mismatch", f"answer {a!r} out of option range")


def _finalize_expired(tx, attempt: dict, assessment: dict) -> None:
    attempt["expired"] = True
    attempt["auto_score"] = score_answers(assessment["questions"], attempt["answers"])
    tx.put("attempt", attempt)


def submit_attempt(ctx: AppContext, principal: Principal, attempt_id: str,
                   answers: Optional[list] = None) -> dict:
    """Final submission. On time: the vector (or last autosave) is scored and
    stamped. Late: rejected, attempt expires with the autosaved score."""
    def txn(tx):
        attempt = _own_open_attempt(ctx, tx, principal, attempt_id)
        assessment = tx.get("assessment", attempt["assessment_id"])
        if answers is not None:
            _check_shape(assessment, answers)
        now = ctx.clock()
        if now > parse_ts(attempt["deadline"]):
            # late: expire with the autosaved score, discard the late vector
            _finalize_expired(tx, attempt, assessment)
            return None
        if answers is not None:
            attempt["answers"] = list(answers)
        attempt["submitted_at"] = format_ts(now)
        attempt["auto_score"] = score_answers(assessment["questions"], attempt["answers"])
        tx.put("attempt", attempt)
        return attempt

    attempt = ctx.store.atomically(txn)
    if attempt is None:
        raise CitadelError("deadline_passed", "deadline passed; saved answers were scored")
    return attempt


# -- assignments -----------------------------------------------------------

def create_assignment(
    ctx: AppContext,
    principal: Principal,
    course_code: str,
    title: str,
    brief: str,
    due_at: str,
    max_score: float,
    ca_weight: float = 0.0,
    id: Optional[str] = None,
) -> dict:
    course = find_course(ctx.store, course_code)
    require_course_owner(principal, course)
    if max_score <= 0:
        raise Invalid("max_score must be positive", code="invalid_spec")
    if ca_weight < 0:
        raise Invalid("ca_weight must be non-negative", code="invalid_spec")
    aid = ctx.store.put("assignment", {
        "course_code": course["code"], "title": title, "brief": brief,
        "due_at": format_ts(parse_ts(due_at)), "max_score": float(max_score),
        "ca_weight": float(ca_weight),
    }, id=id)
    return ctx.store.get("assignment", aid)


def list_assignments(ctx: AppContext, principal: Principal, course_code: str) -> list[dict]:
    course = find_course(ctx.store, course_code)
    require_member(ctx.store, principal, course)
    rows = ctx.store.query("assignment", filter={"course_code": course["code"]})
    rows.sort(key=lambda a: (a["due_at"], a["id"]))
    return rows


def submit_assignment(ctx: AppContext, principal: Principal, assignment_id: str, content: str) -> dict:
    """Submit or resubmit before the due time; late submissions are rejected."""
    now = ctx.clock()
    def txn(tx):
        assignment = tx.get("assignment", assignment_id)
        course_rows = tx.query("course", filter={"code": assignment["course_code"]})
        course = max(course_rows, key=lambda c: c["session"])
        if not ctx_is_enrolled(tx, principal.user_id, course):
            raise CitadelError("not_enrolled", f"not enrolled in {course['code']}")
        if now > parse_ts(assignment["due_at"]):
            raise CitadelError("deadline_passed", "assignment is past due")
        prior = tx.query("submission", filter={
            "assignment_id": assignment_id, "student_id": principal.user_id,
        })
        body = {
            "assignment_id": assignment_id, "student_id": principal.user_id,
            "content": content, "submitted_at": format_ts(now),
            "score": None, "graded_by": None,
        }
        if prior:  # resubmission replaces, grade resets
            return tx.put("submission", body, id=prior[0]["id"])
        return tx.put("submission", body)
    sid = ctx.store.atomically(txn)
    return ctx.store.get("submission", sid)


def ctx_is_enrolled(tx, student_id: str, course: dict) -> bool:
    return bool(tx.query("enrollment", filter={
        "student_id": student_id, "course_code": course["code"], "session": course["session"],
    }))


def grade_submission(ctx: AppContext, principal: Principal, submission_id: str, score: float) -> dict:
    def txn(tx):
        submission = tx.get("submission", submission_id)
        assignment = tx.get("assignment", submission["assignment_id"])
        course_rows = tx.query("course", filter={"code": assignment["course_code"]})
        require_course_owner(principal, max(course_rows, key=lambda c: c["session"]))
        if not 0 <= score <= assignment["max_score"]:
            raise CitadelError("out_of_range", f"score must be in [0, {assignment['max_score']}]")
        submission["score"] = float(score)
        submission["graded_by"] = principal.user_id
        tx.put("submission", submission)
        return submission["id"]
    sid = ctx.store.atomically(txn)
    return ctx.store.get("submission", sid)


# -- gradebook -------------------------------------------------------------

def compute_result(ctx: AppContext, course_code: str, student_id: str) -> dict:
    """Aggregate a student's raw attempts and graded assignments into a
    GradeResult. Pure read; repeated calls agree until the rows change.

    CA = sum over quizzes of (auto_score/points_total) * ca_weight
       + sum over CA-weighted assignments of (score/max_score) * ca_weight,
    clamped to [0, 30]. Exam = (exam auto_score/points_total) * 70.
    """
    course = find_course(ctx.store, course_code)
    if not is_enrolled(ctx.store, student_id, course):
        raise CitadelError("not_enrolled", f"student not enrolled in {course_code}")
    ca = 0.0
    exam = 0.0
    for assessment in ctx.store.query("assessment", filter={"course_code": course["code"]}):
        attempts = ctx.store.query("attempt", filter={
            "assessment_id": assessment["id"], "student_id": student_id,
        })
        scored = [a for a in attempts if a["auto_score"] is not None]
        if not scored:
            continue
        fraction = scored[0]["auto_score"] / assessment["points_total"]
        if assessment["kind"] == "Quiz":
            ca += fraction * assessment["ca_weight"]
        else:
            exam = fraction * EXAM_MAX
    for assignment in ctx.store.query("assignment", filter={"course_code": course["code"]}):
        if not assignment["ca_weight"]:
            continue
        subs = ctx.store.query("submission", filter={
            "assignment_id": assignment["id"], "student_id": student_id,
        })
        if subs and subs[0]["score"] is not None:
            ca += (subs[0]["score"] / assignment["max_score"]) * assignment["ca_weight"]
    ca = min(max(ca, 0.0), CA_MAX)
    exam = min(max(exam, 0.0), EXAM_MAX)
    fragment = compute_grade(ca, exam)
    return {
        "student_id": student_id,
        "course_code": course["code"],
        "ca_score": ca,
        "exam_score": exam,
        "total": fragment.total,
        "letter": fragment.letter,
        "grade_point": fragment.grade_point,
    }


def list_results(ctx: AppContext, principal: Principal, student_id: Optional[str] = None,
                 course_code: Optional[str] = None) -> list[dict]:
    """Results scoped by role: students their own, lecturers their course,
    registrars anything."""
    if principal.role == Role.STUDENT:
        if student_id not in (None, principal.user_id):
            raise Forbidden("students see only their own results")
        student_id = principal.user_id
        results = []
        for enr in ctx.store.query("enrollment", filter={"student_id": student_id}):
            results.append(compute_result(ctx, enr["course_code"], student_id))
        results.sort(key=lambda r: r["course_code"])
        return results
    if course_code is None:
        raise Invalid("course_code required for staff result listings")
    course = find_course(ctx.store, course_code)
    if principal.role == Role.LECTURER:
        require_course_owner(principal, course)
    results = [
        compute_result(ctx, course["code"], enr["student_id"])
        for enr in ctx.store.query("enrollment", filter={
            "course_code": course["code"], "session": course["session"],
        })
    ]
    results.sort(key=lambda r: (r["course_code"], r["student_id"]))
    return results
