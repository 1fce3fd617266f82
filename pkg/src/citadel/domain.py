"""Pure domain rules: identity formats, grading arithmetic, assessment
windows, and timetable queries.

Everything here is a function over immutable values; no storage or transport
concerns. The grading scale is the standard Nigerian 5-point scale with a
continuous-assessment component capped at 30 and an exam component capped
at 70.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, datetime, time, timezone
from enum import Enum
from typing import Iterable, Sequence

MATRIC_PATTERN = re.compile(r"^[A-Z]{2,4}/\d{2}/\d{4}$")
STAFF_PATTERN = re.compile(r"^STF/\d{4}$")
COURSE_CODE_PATTERN = re.compile(r"^[A-Z]{3,4}\d{3}$")
SESSION_PATTERN = re.compile(r"^\d{4}/\d{4}$")

CA_MAX = 30.0
EXAM_MAX = 70.0

# total lower bound -> (letter, grade point), scanned in order.
GRADE_SCALE: tuple[tuple[float, str, float], ...] = (
    (70.0, "A", 5.0),
    (60.0, "B", 4.0),
    (50.0, "C", 3.0),
    (45.0, "D", 2.0),
    (40.0, "E", 1.0),
    (0.0, "F", 0.0),
)


class Role(str, Enum):
    STUDENT = "Student"
    LECTURER = "Lecturer"
    REGISTRAR = "Registrar"


class WindowState(str, Enum):
    NOT_YET_OPEN = "NotYetOpen"
    OPEN = "Open"
    CLOSED = "Closed"


class IdentityCheck(str, Enum):
    VALID = "valid"
    BAD_PATTERN = "bad_pattern"
    WRONG_CLASS = "wrong_class"


def validate_identity(username: str, expected_role: Role) -> IdentityCheck:
    """Check a login identity against the pattern its role requires.

    Students use matric numbers (``XX/YY/NNNN``); lecturers and registrars
    use staff ids (``STF/NNNN``). A string matching the *other* class yields
    ``wrong_class``; anything else is ``bad_pattern``.
    """
    is_matric = bool(MATRIC_PATTERN.match(username))
    is_staff = bool(STAFF_PATTERN.match(username))
    wants_matric = expected_role == Role.STUDENT
    if wants_matric:
        if is_matric:
            return IdentityCheck.VALID
        return IdentityCheck.WRONG_CLASS if is_staff else IdentityCheck.BAD_PATTERN
    if is_staff:
        return IdentityCheck.VALID
    return IdentityCheck.WRONG_CLASS if is_matric else IdentityCheck.BAD_PATTERN


@dataclass(frozen=True)
class GradeFragment:
    total: float
    letter: str
    grade_point: float


def compute_grade(ca_score: float, exam_score: float) -> GradeFragment:
    """Combine CA and exam scores into a total, letter grade, and grade point.

    Raises ValueError when a component is outside its band (CA 0..30,
    exam 0..70).
    """
    if not 0.0 <= ca_score <= CA_MAX:
        raise ValueError(f"ca_score {ca_score} outside [0, {CA_MAX}]")
    if not 0.0 <= exam_score <= EXAM_MAX:
        raise ValueError(f"exam_score {exam_score} outside [0, {EXAM_MAX}]")
    total = ca_score + exam_score
    for lower, letter, point in GRADE_SCALE:
        if total >= lower:
            return GradeFragment(total=total, letter=letter, grade_point=point)
    raise AssertionError("grade scale must cover [0, 100]")


def window_state(now: datetime, opens_at: datetime, closes_at: datetime) -> WindowState:
    """Classify ``now`` against an assessment window.

    Both boundaries are inclusive: starting at the opening instant and
    submitting at the closing instant both count as Open.
    """
    if opens_at >= closes_at:
        raise ValueError("opens_at must be strictly before closes_at")
    if now < opens_at:
        return WindowState.NOT_YET_OPEN
    if now > closes_at:
        return WindowState.CLOSED
    return WindowState.OPEN


@dataclass(frozen=True)
class TimetableEntry:
    id: str
    course_code: str
    date: date
    start: time
    end: time
    activity: str  # Lecture | Quiz | Exam | LiveSession
    venue: str

    ACTIVITIES = ("Lecture", "Quiz", "Exam", "LiveSession")

    def validate(self) -> None:
        if self.start >= self.end:
            raise ValueError("timetable entry start must precede end")
        if self.activity not in self.ACTIVITIES:
            raise ValueError(f"unknown activity {self.activity!r}")


def timetable_for_day(entries: Iterable[TimetableEntry], day: date) -> list[TimetableEntry]:
    """Entries scheduled on ``day``, by start time, ties by course code."""
    todays = [e for e in entries if e.date == day]
    todays.sort(key=lambda e: (e.start, e.course_code))
    return todays


# Timestamp plumbing: the store and API speak RFC 3339 UTC strings; domain
# logic uses aware datetimes.

def parse_ts(value: str) -> datetime:
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_ts(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def now_utc() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)
