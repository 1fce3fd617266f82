"""HTTP/JSON surface: binds auth, registry administration, content,
assessment, collaboration, and reporting to a published route table.

Every non-public endpoint is tied to exactly one capability in the
permission matrix; create_app refuses to build when the route table and the
matrix disagree. Errors are uniform ApiError bodies with stable machine
codes; the login denial is deliberately byte-identical for unknown users
and wrong passwords.
"""

from __future__ import annotations

import uuid
from typing import Optional

from fastapi import Depends, FastAPI, Request, Response, UploadFile, File, Form
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.routing import APIRoute
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import assessment, collaboration, content, registry, reporting
from .auth import PERMISSION_MATRIX, Principal, authorize
from .core import AppContext, courses_of_student
from .domain import Role
from .errors import CitadelError, Forbidden, Unauthenticated
from .registry import public_user

# The published route table: (method, path, capability). A capability of
# None marks a public endpoint. create_app asserts the served routes match
# this table exactly and that every capability exists in the matrix.
ROUTE_TABLE: list[tuple[str, str, Optional[str]]] = [
    ("GET", "/api/health", None),
    ("POST", "/api/login", None),
    ("POST", "/api/logout", "logout"),
    ("POST", "/api/password", "change_password"),
    ("POST", "/api/faculties", "create_faculty"),
    ("POST", "/api/departments", "create_department"),
    ("POST", "/api/users", "create_user"),
    ("POST", "/api/courses", "create_course"),
    ("POST", "/api/enrollments", "create_enrollment"),
    ("GET", "/api/courses", "list_courses"),
    ("GET", "/api/me/courses", "view_my_courses"),
    ("POST", "/api/me/enrollments", "self_enroll"),
    ("GET", "/api/me/timetable", "view_my_timetable"),
    ("GET", "/api/me/results", "view_my_results"),
    ("GET", "/api/me/classmates", "view_classmates"),
    ("GET", "/api/me/lecturers", "view_lecturers"),
    ("POST", "/api/courses/{code}/materials", "upload_material"),
    ("GET", "/api/courses/{code}/materials", "list_materials"),
    ("GET", "/api/content/{content_id}/download", "download_content"),
    ("PUT", "/api/courses/{code}/syllabus", "set_syllabus"),
    ("GET", "/api/courses/{code}/syllabus", "view_syllabus"),
    ("GET", "/api/library/books", "search_library"),
    ("POST", "/api/library/books", "manage_library"),
    ("PUT", "/api/library/books/{book_id}", "manage_library"),
    ("DELETE", "/api/library/books/{book_id}", "manage_library"),
    ("POST", "/api/timetable", "manage_timetable"),
    ("DELETE", "/api/timetable/{entry_id}", "manage_timetable"),
    ("POST", "/api/courses/{code}/assessments", "create_assessment"),
    ("GET", "/api/courses/{code}/assessments", "list_assessments"),
    ("POST", "/api/assessments/{assessment_id}/attempts", "start_attempt"),
    ("PATCH", "/api/attempts/{attempt_id}/answers", "save_answers"),
    ("POST", "/api/attempts/{attempt_id}/submit", "submit_attempt"),
    ("POST", "/api/courses/{code}/assignments", "create_assignment"),
    ("GET", "/api/courses/{code}/assignments", "list_assignments"),
    ("POST", "/api/assignments/{assignment_id}/submissions", "submit_assignment"),
    ("POST", "/api/submissions/{submission_id}/grade", "grade_submission"),
    ("POST", "/api/messages", "send_message"),
    ("GET", "/api/messages", "list_messages"),
    ("POST", "/api/messages/{message_id}/read", "mark_read"),
    ("POST", "/api/notices", "post_notice"),
    ("GET", "/api/notices", "list_notices"),
    ("POST", "/api/chat/{course}/messages", "chat_post"),
    ("GET", "/api/chat/{course}/messages", "chat_fetch"),
    ("GET", "/api/courses/{code}/report.json", "view_report"),
    ("GET", "/api/courses/{code}/report.csv", "view_report"),
]

LOGIN_DENIED_BODY = b'{"status":401,"code":"denied","message":"access denied"}'


def error_body(exc: CitadelError) -> dict:
    body = {
        "status": exc.status,
        "code": exc.code,
        "message": exc.message,
        "request_id": uuid.uuid4().hex,
    }
    if exc.details:
        body["details"] = exc.details
    return body


# -- request models --------------------------------------------------------

class LoginRequest(BaseModel):
    username: str
    password: str


class PasswordRequest(BaseModel):
    old: str
    new: str


class FacultyRequest(BaseModel):
    name: str


class DepartmentRequest(BaseModel):
    name: str
    faculty_id: str


class UserRequest(BaseModel):
    username: str
    password: str
    full_name: str
    email: str = ""
    phone: str = ""
    role: str
    department_id: Optional[str] = None
    is_library: bool = False


class CourseRequest(BaseModel):
    code: str
    title: str
    department_id: str
    lecturer_id: str
    session: str
    syllabus: list[str] = []


class EnrollmentRequest(BaseModel):
    student_id: str
    course_code: str


class SelfEnrollmentRequest(BaseModel):
    course_code: str


class SyllabusRequest(BaseModel):
    topics: list[str]


class BookRequest(BaseModel):
    title: str
    author: str
    isbn: Optional[str] = None
    location: str = ""
    copies_total: int = 1


class BookUpdateRequest(BaseModel):
    title: Optional[str] = None
    author: Optional[str] = None
    isbn: Optional[str] = None
    location: Optional[str] = None
    copies_total: Optional[int] = None


class TimetableRequest(BaseModel):
    course_code: str
    date: str
    start: str
    end: str
    activity: str
    venue: str = ""


class QuestionModel(BaseModel):
    prompt: str
    options: list[str]
    correct_index: int
    points: float = 1


class AssessmentRequest(BaseModel):
    kind: str
    title: str
    opens_at: str
    closes_at: str
    duration_limit: Optional[int] = None
    ca_weight: float = 0.0
    questions: list[QuestionModel]


class AnswersRequest(BaseModel):
    answers: list[Optional[int]]


class SubmitRequest(BaseModel):
    answers: Optional[list[Optional[int]]] = None


class AssignmentRequest(BaseModel):
    title: str
    brief: str
    due_at: str
    max_score: float
    ca_weight: float = 0.0


class SubmissionRequest(BaseModel):
    content: str


class GradeRequest(BaseModel):
    score: float


class MessageRequest(BaseModel):
    to_user: str
    subject: str = ""
    body: str


class NoticeRequest(BaseModel):
    scope: str  # "all" | "department" | "course"
    scope_ref: Optional[str] = None
    title: str
    body: str


class ChatPostRequest(BaseModel):
    body: str


def create_app(ctx: AppContext) -> FastAPI:
    app = FastAPI(title="Citadel", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.ctx = ctx

    def bearer_principal(request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise Unauthenticated()
        return ctx.auth.authenticate(header[7:].strip())

    def require(capability: str):
        def dependency(request: Request) -> Principal:
            principal = bearer_principal(request)
            authorize(principal, capability)
            return principal
        return dependency

    def pagination(page: int = 1, per_page: int = 25) -> tuple[int, int]:
        return max(page, 1), min(max(per_page, 1), 100)

    # -- error handling ----------------------------------------------------

    @app.exception_handler(CitadelError)
    async def citadel_error_handler(request: Request, exc: CitadelError):
        if exc.code == "denied":
            return Response(LOGIN_DENIED_BODY, status_code=401, media_type="application/json")
        return JSONResponse(status_code=exc.status, content=error_body(exc))

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        code = {404: "unknown_route", 405: "bad_request", 401: "unauthenticated"}.get(
            exc.status_code, "bad_request" if exc.status_code < 500 else "internal"
        )
        wrapped = CitadelError(code, str(exc.detail))
        body = error_body(wrapped)
        body["status"] = exc.status_code
        return JSONResponse(status_code=exc.status_code, content=body)

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content=error_body(
            CitadelError("bad_request", "request body failed validation")
        ))

    # -- public ------------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/login")
    def login(body: LoginRequest):
        return ctx.auth.login(body.username, body.password)

    # -- session -----------------------------------------------------------

    @app.post("/api/logout")
    def logout(request: Request, principal: Principal = Depends(require("logout"))):
        ctx.auth.logout(request.headers["authorization"][7:].strip())
        return {"status": "ok"}

    @app.post("/api/password")
    def change_password(body: PasswordRequest, principal: Principal = Depends(require("change_password"))):
        ctx.auth.change_password(principal, body.old, body.new)
        return {"status": "ok"}

    # -- registry ----------------------------------------------------------

    @app.post("/api/faculties", status_code=201)
    def create_faculty(body: FacultyRequest, principal: Principal = Depends(require("create_faculty"))):
        return registry.create_faculty(ctx, body.name)

    @app.post("/api/departments", status_code=201)
    def create_department(body: DepartmentRequest, principal: Principal = Depends(require("create_department"))):
        return registry.create_department(ctx, body.name, body.faculty_id)

    @app.post("/api/users", status_code=201)
    def create_user(body: UserRequest, principal: Principal = Depends(require("create_user"))):
        try:
            role = Role(body.role)
        except ValueError:
            raise CitadelError("invalid", f"unknown role {body.role!r}")
        return registry.create_user(
            ctx, username=body.username, password=body.password,
            full_name=body.full_name, email=body.email, phone=body.phone,
            role=role, department_id=body.department_id, is_library=body.is_library,
        )

    @app.post("/api/courses", status_code=201)
    def create_course(body: CourseRequest, principal: Principal = Depends(require("create_course"))):
        return registry.create_course(
            ctx, code=body.code, title=body.title, department_id=body.department_id,
            lecturer_id=body.lecturer_id, session=body.session, syllabus=body.syllabus,
        )

    @app.post("/api/enrollments", status_code=201)
    def create_enrollment(body: EnrollmentRequest, principal: Principal = Depends(require("create_enrollment"))):
        return registry.enroll(ctx, body.student_id, body.course_code)

    @app.get("/api/courses")
    def list_courses(principal: Principal = Depends(require("list_courses"))):
        return registry.list_courses(ctx.store)

    # -- student self-service ---------------------------------------------

    @app.get("/api/me/courses")
    def my_courses(principal: Principal = Depends(require("view_my_courses"))):
        return courses_of_student(ctx.store, principal.user_id)

    @app.post("/api/me/enrollments", status_code=201)
    def self_enroll(body: SelfEnrollmentRequest, principal: Principal = Depends(require("self_enroll"))):
        if not ctx.config.self_enrollment:
            raise Forbidden("self-registration is disabled; contact the registry")
        return registry.enroll(ctx, principal.user_id, body.course_code)

    @app.get("/api/me/timetable")
    def my_timetable(date: str, principal: Principal = Depends(require("view_my_timetable"))):
        return content.my_timetable(ctx, principal, date)

    @app.get("/api/me/results")
    def my_results(principal: Principal = Depends(require("view_my_results"))):
        return assessment.list_results(ctx, principal)

    @app.get("/api/me/classmates")
    def my_classmates(course: str, principal: Principal = Depends(require("view_classmates"))):
        return reporting.view_classmates(ctx, principal, course)

    @app.get("/api/me/lecturers")
    def my_lecturers(principal: Principal = Depends(require("view_lecturers"))):
        return reporting.view_lecturers(ctx, principal)

    # -- content -----------------------------------------------------------

    @app.post("/api/courses/{code}/materials", status_code=201)
    def upload_material(
        code: str,
        file: UploadFile = File(...),
        kind: str = Form("LectureMaterial"),
        principal: Principal = Depends(require("upload_material")),
    ):
        data = file.file.read()
        return content.upload_material(
            ctx, principal, code, data,
            filename=file.filename or "upload.bin",
            media_type=file.content_type or "application/octet-stream",
            kind=kind,
        )

    @app.get("/api/courses/{code}/materials")
    def list_materials(code: str, principal: Principal = Depends(require("list_materials"))):
        return content.list_materials(ctx, principal, code)

    @app.get("/api/content/{content_id}/download")
    def download(content_id: str, principal: Principal = Depends(require("download_content"))):
        data, item = content.download(ctx, principal, content_id)
        return Response(
            content=data,
            media_type=item["media_type"],
            headers={
                "Content-Length": str(len(data)),
                "X-Content-SHA256": item["sha256"],
                "Content-Disposition": f'attachment; filename="{item["filename"]}"',
            },
        )

    @app.put("/api/courses/{code}/syllabus")
    def set_syllabus(code: str, body: SyllabusRequest, principal: Principal = Depends(require("set_syllabus"))):
        return {"topics": content.set_syllabus(ctx, principal, code, body.topics)}

    @app.get("/api/courses/{code}/syllabus")
    def view_syllabus(code: str, principal: Principal = Depends(require("view_syllabus"))):
        return {"topics": content.view_syllabus(ctx, principal, code)}

    @app.get("/api/library/books")
    def search_books(q: str = "", page: tuple[int, int] = Depends(pagination),
                     principal: Principal = Depends(require("search_library"))):
        return content.search_library(ctx.store, q, page=page)

    @app.post("/api/library/books", status_code=201)
    def add_book(body: BookRequest, principal: Principal = Depends(require("manage_library"))):
        return content.add_book(ctx, body.title, body.author, body.isbn, body.location, body.copies_total)

    @app.put("/api/library/books/{book_id}")
    def update_book(book_id: str, body: BookUpdateRequest,
                    principal: Principal = Depends(require("manage_library"))):
        changes = {k: v for k, v in body.model_dump().items() if v is not None}
        return content.update_book(ctx, book_id, changes)

    @app.delete("/api/library/books/{book_id}")
    def remove_book(book_id: str, principal: Principal = Depends(require("manage_library"))):
        content.remove_book(ctx, book_id)
        return {"status": "ok"}

    @app.post("/api/timetable", status_code=201)
    def add_timetable(body: TimetableRequest, principal: Principal = Depends(require("manage_timetable"))):
        return content.add_timetable_entry(
            ctx, principal, body.course_code, body.date, body.start, body.end,
            body.activity, body.venue,
        )

    @app.delete("/api/timetable/{entry_id}")
    def remove_timetable(entry_id: str, principal: Principal = Depends(require("manage_timetable"))):
        content.remove_timetable_entry(ctx, principal, entry_id)
        return {"status": "ok"}

    # -- assessment --------------------------------------------------------

    @app.post("/api/courses/{code}/assessments", status_code=201)
    def create_assessment(code: str, body: AssessmentRequest,
                          principal: Principal = Depends(require("create_assessment"))):
        return assessment.create_assessment(
            ctx, principal, code, kind=body.kind, title=body.title,
            opens_at=body.opens_at, closes_at=body.closes_at,
            questions=[q.model_dump() for q in body.questions],
            duration_limit=body.duration_limit, ca_weight=body.ca_weight,
        )

    @app.get("/api/courses/{code}/assessments")
    def list_assessments(code: str, principal: Principal = Depends(require("list_assessments"))):
        return assessment.list_assessments(ctx, principal, code)

    @app.post("/api/assessments/{assessment_id}/attempts", status_code=201)
    def start_attempt(assessment_id: str, principal: Principal = Depends(require("start_attempt"))):
        return assessment.start_attempt(ctx, principal, assessment_id)

    @app.patch("/api/attempts/{attempt_id}/answers")
    def save_answers(attempt_id: str, body: AnswersRequest,
                     principal: Principal = Depends(require("save_answers"))):
        return assessment.save_answers(ctx, principal, attempt_id, body.answers)

    @app.post("/api/attempts/{attempt_id}/submit")
    def submit_attempt(attempt_id: str, body: Optional[SubmitRequest] = None,
                       principal: Principal = Depends(require("submit_attempt"))):
        answers = body.answers if body is not None else None
        attempt = assessment.submit_attempt(ctx, principal, attempt_id, answers)
        return attempt

    @app.post("/api/courses/{code}/assignments", status_code=201)
    def create_assignment(code: str, body: AssignmentRequest,
                          principal: Principal = Depends(require("create_assignment"))):
        return assessment.create_assignment(
            ctx, principal, code, title=body.title, brief=body.brief,
            due_at=body.due_at, max_score=body.max_score, ca_weight=body.ca_weight,
        )

    @app.get("/api/courses/{code}/assignments")
    def list_assignments(code: str, principal: Principal = Depends(require("list_assignments"))):
        return assessment.list_assignments(ctx, principal, code)

    @app.post("/api/assignments/{assignment_id}/submissions", status_code=201)
    def submit_assignment(assignment_id: str, body: SubmissionRequest,
                          principal: Principal = Depends(require("submit_assignment"))):
        return assessment.submit_assignment(ctx, principal, assignment_id, body.content)

    @app.post("/api/submissions/{submission_id}/grade")
    def grade_submission(submission_id: str, body: GradeRequest,
                         principal: Principal = Depends(require("grade_submission"))):
        return assessment.grade_submission(ctx, principal, submission_id, body.score)

    # -- collaboration -----------------------------------------------------

    @app.post("/api/messages", status_code=201)
    def send_message(body: MessageRequest, principal: Principal = Depends(require("send_message"))):
        return collaboration.send_message(ctx, principal, body.to_user, body.subject, body.body)

    @app.get("/api/messages")
    def list_messages(page: tuple[int, int] = Depends(pagination),
                      principal: Principal = Depends(require("list_messages"))):
        return collaboration.list_inbox(ctx, principal, page=page)

    @app.post("/api/messages/{message_id}/read")
    def mark_read(message_id: str, principal: Principal = Depends(require("mark_read"))):
        return collaboration.mark_read(ctx, principal, message_id)

    @app.post("/api/notices", status_code=201)
    def post_notice(body: NoticeRequest, principal: Principal = Depends(require("post_notice"))):
        return collaboration.post_notice(ctx, principal, body.scope, body.scope_ref, body.title, body.body)

    @app.get("/api/notices")
    def list_notices(page: tuple[int, int] = Depends(pagination),
                     principal: Principal = Depends(require("list_notices"))):
        return collaboration.list_notices(ctx, principal, page=page)

    @app.post("/api/chat/{course}/messages", status_code=201)
    def chat_post(course: str, body: ChatPostRequest,
                  principal: Principal = Depends(require("chat_post"))):
        return collaboration.chat_post(ctx, principal, course, body.body)

    @app.get("/api/chat/{course}/messages")
    def chat_fetch(course: str, after: int = 0, wait: float = 0.0,
                   principal: Principal = Depends(require("chat_fetch"))):
        wait = min(max(wait, 0.0), float(ctx.config.chat_longpoll_seconds))
        return collaboration.chat_fetch(ctx, principal, course, after_seq=after, wait_seconds=wait)

    # -- reporting ---------------------------------------------------------

    @app.get("/api/courses/{code}/report.json")
    def report_json(code: str, principal: Principal = Depends(require("view_report"))):
        return reporting.generate_report(ctx, principal, code)

    @app.get("/api/courses/{code}/report.csv")
    def report_csv(code: str, principal: Principal = Depends(require("view_report"))):
        report = reporting.generate_report(ctx, principal, code)
        return Response(
            content=reporting.report_to_csv(report),
            media_type="text/csv; charset=utf-8",
        )

    _validate_route_table(app)
    return app


def _validate_route_table(app: FastAPI) -> None:
    """Refuse to boot unless routes, table, and matrix line up one-to-one."""
    served = set()
    for route in app.routes:
        if not isinstance(route, APIRoute):
            continue
        for method in route.methods - {"HEAD", "OPTIONS"}:
            served.add((method, route.path))
    published = {(m, p) for m, p, _ in ROUTE_TABLE}
    if served != published:
        missing = published - served
        extra = served - published
        raise RuntimeError(f"route table drift: missing={missing} extra={extra}")
    for method, path, capability in ROUTE_TABLE:
        if capability is not None and capability not in PERMISSION_MATRIX:
            raise RuntimeError(f"capability {capability!r} for {method} {path} not in permission matrix")
