"""Named deterministic fixtures for demos and acceptance runs.

The "demo" fixture is bit-deterministic: all ids, salts, timestamps, and
question keys derive from a fixed pseudorandom seed and a pinned clock, so
seeding two fresh stores yields identical dumps. Re-seeding an already
seeded store is a no-op (existing ids are skipped).
"""

from __future__ import annotations

import random
from datetime import datetime, timezone

from . import assessment, collaboration, content, registry
from .auth import Principal, hash_password
from .core import AppContext
from .domain import Role
from .errors import CitadelError

FIXTURE_SEED = 20240901
FIXTURE_EPOCH = datetime(2024, 9, 1, 8, 0, 0, tzinfo=timezone.utc)

# well inside the fixture's quiz window; tests pin their clock here
QUIZ_OPENS = "2024-09-10T09:00:00Z"
QUIZ_CLOSES = "2024-09-20T17:00:00Z"
EXAM_OPENS = "2024-12-01T09:00:00Z"
EXAM_CLOSES = "2024-12-10T17:00:00Z"
ASSIGNMENT_DUE = "2024-10-01T23:59:00Z"

FIRST_NAMES = [
    "Ada", "Bayo", "Chidi", "Dupe", "Emeka", "Funke", "Gbenga", "Halima",
    "Ifeoma", "Jide", "Kemi", "Lanre", "Mariam", "Nnamdi", "Obi",
]
LAST_NAMES = [
    "Adeyemi", "Balogun", "Chukwu", "Danladi", "Eze", "Fashola", "Giwa",
    "Hassan", "Ibrahim", "Johnson", "Kalu", "Lawal", "Mohammed", "Nwosu", "Okafor",
]

COURSES = [
    # code, title, department, lecturer index
    ("COS101", "Introduction to Computing", "dep-cs", 0),
    ("COS201", "Data Structures", "dep-cs", 1),
    ("MTH101", "Calculus I", "dep-math", 2),
    ("MTH202", "Linear Algebra", "dep-math", 2),
    ("ACC101", "Principles of Accounting", "dep-acct", 3),
    ("ACC202", "Cost Accounting", "dep-acct", 3),
]

# department -> the three courses its students register
ENROLLMENT_PLAN = {
    "dep-cs": ["COS101", "COS201", "MTH101"],
    "dep-math": ["MTH101", "MTH202", "COS101"],
    "dep-acct": ["ACC101", "ACC202", "COS101"],
}

BOOKS = [
    ("Algorithms Unlocked", "Thomas Cormen", "9780262518802", "Shelf A1", 4),
    ("Introduction to Statistics", "Ronald Walpole", "9780024241405", "Shelf B2", 6),
    ("Principles of Accounting", "Frank Wood", "9780273712121", "Shelf C3", 3),
    ("Calculus Made Easy", "Silvanus Thompson", None, "Shelf B1", 2),
    ("Clean Code", "Robert Martin", "9780132350884", "Shelf A2", 5),
]

FIXTURES = ("demo",)


def student_password(index: int) -> str:
    return f"student-pass-{index:04d}"


def lecturer_password(index: int) -> str:
    return f"lecturer-pass-{index:02d}"


def seed(ctx: AppContext, fixture: str = "demo") -> dict:
    if fixture not in FIXTURES:
        raise CitadelError("unknown_fixture", f"no fixture named {fixture!r}")
    saved_ctx_clock, saved_store_clock = ctx.clock, ctx.store.clock
    ctx.clock = ctx.store.clock = lambda: FIXTURE_EPOCH
    try:
        return _seed_demo(ctx)
    finally:
        ctx.clock, ctx.store.clock = saved_ctx_clock, saved_store_clock


def _exists(ctx: AppContext, kind: str, entity_id: str) -> bool:
    try:
        ctx.store.get(kind, entity_id)
        return True
    except CitadelError:
        return False


def _seed_demo(ctx: AppContext) -> dict:
    rng = random.Random(FIXTURE_SEED)

    def fresh(kind, entity_id):
        return not _exists(ctx, kind, entity_id)

    if fresh("faculty", "fac-science"):
        registry.create_faculty(ctx, "Faculty of Science", id="fac-science")
    if fresh("faculty", "fac-mgmt"):
        registry.create_faculty(ctx, "Faculty of Management Sciences", id="fac-mgmt")
    for dep_id, name, fac in [
        ("dep-cs", "Computer Science", "fac-science"),
        ("dep-math", "Mathematics", "fac-science"),
        ("dep-acct", "Accounting", "fac-mgmt"),
    ]:
        if fresh("department", dep_id):
            registry.create_department(ctx, name, fac, id=dep_id)

    lecturer_ids = []
    for i in range(4):
        uid = f"usr-l{i + 1:02d}"
        lecturer_ids.append(uid)
        name = f"{FIRST_NAMES[rng.randrange(len(FIRST_NAMES))]} {LAST_NAMES[rng.randrange(len(LAST_NAMES))]}"
        if fresh("user", uid):
            registry.create_user(
                ctx, username=f"STF/{1001 + i}", password=lecturer_password(i + 1),
                full_name=name, email=f"lecturer{i + 1}@citadel.example",
                phone=f"+23480{rng.randrange(10**8):08d}", role=Role.LECTURER,
                department_id=["dep-cs", "dep-cs", "dep-math", "dep-acct"][i],
                id=uid, salt=rng.randbytes(16),
            )

    departments = ["dep-cs", "dep-math", "dep-acct"]
    student_ids = []
    for i in range(1, 31):
        uid = f"usr-s{i:03d}"
        student_ids.append(uid)
        dep = departments[(i - 1) // 10]
        name = f"{FIRST_NAMES[rng.randrange(len(FIRST_NAMES))]} {LAST_NAMES[rng.randrange(len(LAST_NAMES))]}"
        if fresh("user", uid):
            registry.create_user(
                ctx, username=f"BU/21/{i:04d}", password=student_password(i),
                full_name=name, email=f"student{i}@citadel.example",
                phone=f"+23470{rng.randrange(10**8):08d}", role=Role.STUDENT,
                department_id=dep, id=uid, salt=rng.randbytes(16),
            )

    for code, title, dep, lecturer_index in COURSES:
        cid = f"crs-{code.lower()}"
        if fresh("course", cid):
            registry.create_course(
                ctx, code=code, title=title, department_id=dep,
                lecturer_id=lecturer_ids[lecturer_index], session="2024/2025",
                syllabus=[f"{title}: topic {n}" for n in range(1, 6)], id=cid,
            )

    for i, sid in enumerate(student_ids, start=1):
        dep = departments[(i - 1) // 10]
        for code in ENROLLMENT_PLAN[dep]:
            eid = f"enr-{sid}-{code.lower()}"
            if fresh("enrollment", eid):
                registry.enroll(ctx, sid, code, id=eid)

    course_lecturer = {code: lecturer_ids[li] for code, _, _, li in COURSES}
    for code, _, _, _ in COURSES:
        owner = Principal(user_id=course_lecturer[code], role=Role.LECTURER)
        for q in (1, 2):
            aid = f"asmt-{code.lower()}-quiz{q}"
            if fresh("assessment", aid):
                assessment.create_assessment(
                    ctx, owner, code, kind="Quiz",
                    title=f"{code} Quiz {q}",
                    opens_at=QUIZ_OPENS, closes_at=QUIZ_CLOSES,
                    duration_limit=30, ca_weight=10.0,
                    questions=_questions(rng, code, 5), id=aid,
                )
        aid = f"asmt-{code.lower()}-exam"
        if fresh("assessment", aid):
            assessment.create_assessment(
                ctx, owner, code, kind="Exam",
                title=f"{code} Examination",
                opens_at=EXAM_OPENS, closes_at=EXAM_CLOSES,
                duration_limit=120,
                questions=_questions(rng, code, 10), id=aid,
            )
        hid = f"hw-{code.lower()}-1"
        if fresh("assignment", hid):
            assessment.create_assignment(
                ctx, owner, code, title=f"{code} Assignment 1",
                brief=f"Solve the exercise sheet for {code}.",
                due_at=ASSIGNMENT_DUE, max_score=20.0, ca_weight=10.0, id=hid,
            )
        for m in (1, 2):
            mid = f"mat-{code.lower()}-{m}"
            if fresh("content_item", mid):
                data = (f"Lecture notes {m} for {code}.\n" * 40).encode()
                content.upload_material(
                    ctx, owner, code, data,
                    filename=f"{code.lower()}-notes-{m}.txt", media_type="text/plain",
                    id=mid,
                )
        nid = f"ntc-{code.lower()}-welcome"
        if fresh("notice", nid):
            collaboration.post_notice(
                ctx, owner, "course", code,
                title=f"Welcome to {code}",
                body=f"Materials and the first quiz for {code} are available.",
                id=nid,
            )
        tid = f"tt-{code.lower()}-lecture"
        slot = [c[0] for c in COURSES].index(code)
        if fresh("timetable_entry", tid):
            content.add_timetable_entry(
                ctx, owner, code, day="2024-09-16",
                start=f"{8 + slot:02d}:00", end=f"{9 + slot:02d}:00",
                activity="Lecture", venue=f"Hall {code[:3]}", id=tid,
            )

    for i, (title, author, isbn, location, copies) in enumerate(BOOKS, start=1):
        bid = f"book-{i:02d}"
        if fresh("library_book", bid):
            content.add_book(ctx, title, author, isbn, location, copies, id=bid)

    return {
        "faculties": 2, "departments": 3, "lecturers": len(lecturer_ids),
        "students": len(student_ids), "courses": len(COURSES),
    }


def _questions(rng: random.Random, code: str, count: int) -> list[dict]:
    questions = []
    for n in range(1, count + 1):
        options = [f"Option {letter}" for letter in "ABCD"]
        questions.append({
            "prompt": f"{code} question {n}: pick the correct option.",
            "options": options,
            "correct_index": rng.randrange(len(options)),
            "points": 1,
        })
    return questions
