import csv
import hashlib
import io

import pytest

from citadel import fixtures
from citadel.api import LOGIN_DENIED_BODY, ROUTE_TABLE
from citadel.auth import PERMISSION_MATRIX
from citadel.errors import ERROR_CODES
from conftest import IN_WINDOW, login


class TestRouteTable:
    def test_every_capability_exists_in_matrix(self):
        for method, path, capability in ROUTE_TABLE:
            if capability is not None:
                assert capability in PERMISSION_MATRIX, (method, path)

    def test_health_unauthenticated(self, client):
        response = client.get("/api/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_me_routes_require_token(self, client):
        response = client.get("/api/me/courses")
        assert response.status_code == 401
        assert response.json()["code"] == "unauthenticated"

    def test_student_post_courses_forbidden(self, client, student_headers):
        response = client.post("/api/courses", json={
            "code": "XXX111", "title": "t", "department_id": "dep-cs",
            "lecturer_id": "usr-l01", "session": "2024/2025"}, headers=student_headers)
        assert response.status_code == 403
        assert response.json()["code"] == "forbidden"

    def test_unknown_route_is_api_error(self, client):
        response = client.get("/api/bogus")
        assert response.status_code == 404
        body = response.json()
        assert body["code"] == "unknown_route"
        assert "request_id" in body

    def test_error_codes_are_closed_set(self, client, student_headers):
        probes = [
            client.get("/api/bogus"),
            client.get("/api/me/courses"),
            client.post("/api/courses", json={}, headers=student_headers),
            client.post("/api/login", json={"username": "x", "password": "y"}),
        ]
        for response in probes:
            assert response.json()["code"] in ERROR_CODES


class TestLogin:
    def test_denial_bodies_byte_identical(self, client):
        wrong_password = client.post("/api/login", json={
            "username": "BU/21/0001", "password": "nope"})
        unknown_user = client.post("/api/login", json={
            "username": "BU/99/9999", "password": "nope"})
        assert wrong_password.status_code == unknown_user.status_code == 401
        assert wrong_password.content == unknown_user.content == LOGIN_DENIED_BODY

    def test_logout_revokes_token(self, client, student_headers):
        assert client.post("/api/logout", headers=student_headers).status_code == 200
        assert client.get("/api/me/courses", headers=student_headers).status_code == 401

    def test_password_change_revokes_sessions(self, client):
        headers = login(client, "BU/21/0002", fixtures.student_password(2))
        response = client.post("/api/password", json={
            "old": fixtures.student_password(2), "new": "a-new-password"}, headers=headers)
        assert response.status_code == 200
        assert client.get("/api/me/courses", headers=headers).status_code == 401
        login(client, "BU/21/0002", "a-new-password")


class TestStudentViews:
    def test_my_courses(self, client, student_headers):
        codes = [c["code"] for c in client.get("/api/me/courses", headers=student_headers).json()]
        assert codes == ["COS101", "COS201", "MTH101"]

    def test_classmates_exclude_caller_sorted_by_name(self, client, student_headers):
        rows = client.get("/api/me/classmates?course=COS101", headers=student_headers).json()
        assert len(rows) == 29
        names = [r["full_name"] for r in rows]
        assert names == sorted(names)
        assert all(r["matric"] != "BU/21/0001" for r in rows)
        assert set(rows[0]) == {"full_name", "matric", "email", "phone"}

    def test_classmates_non_enrolled_forbidden(self, client, student_headers):
        response = client.get("/api/me/classmates?course=ACC101", headers=student_headers)
        assert response.status_code == 403

    def test_lecturers_deduped_with_courses(self, client):
        headers = login(client, "BU/21/0011", fixtures.student_password(11))  # math student
        rows = client.get("/api/me/lecturers", headers=headers).json()
        # MTH101+MTH202 share usr-l03; COS101 is usr-l01 -> 2 rows
        assert len(rows) == 2
        by_staff = {r["staff_id"]: r["courses"] for r in rows}
        assert by_staff["STF/1003"] == ["MTH101", "MTH202"]
        assert by_staff["STF/1001"] == ["COS101"]

    def test_my_timetable(self, client, student_headers):
        rows = client.get("/api/me/timetable?date=2024-09-16", headers=student_headers).json()
        assert [r["course_code"] for r in rows] == ["COS101", "COS201", "MTH101"]

    def test_my_results_sorted(self, client, student_headers):
        rows = client.get("/api/me/results", headers=student_headers).json()
        assert [r["course_code"] for r in rows] == ["COS101", "COS201", "MTH101"]
        assert all(r["letter"] == "F" for r in rows)  # nothing taken yet

    def test_self_enrollment_flag(self, client, seeded_ctx, student_headers):
        response = client.post("/api/me/enrollments", json={"course_code": "ACC101"},
                               headers=student_headers)
        assert response.status_code == 201
        seeded_ctx.config.self_enrollment = False
        response = client.post("/api/me/enrollments", json={"course_code": "ACC202"},
                               headers=student_headers)
        assert response.status_code == 403


class TestContentRoutes:
    def test_multipart_upload_and_download(self, client, lecturer_headers, student_headers):
        payload = b"PDF-ish bytes"
        response = client.post(
            "/api/courses/COS101/materials",
            files={"file": ("slides.pdf", payload, "application/pdf")},
            headers=lecturer_headers)
        assert response.status_code == 201, response.text
        item = response.json()
        got = client.get(f"/api/content/{item['id']}/download", headers=student_headers)
        assert got.status_code == 200
        assert got.content == payload
        assert got.headers["x-content-sha256"] == hashlib.sha256(payload).hexdigest()
        assert got.headers["content-length"] == str(len(payload))
        assert got.headers["content-type"].startswith("application/pdf")

    def test_syllabus_round_trip(self, client, lecturer_headers, student_headers):
        response = client.put("/api/courses/COS101/syllabus",
                              json={"topics": ["T1", "T2"]}, headers=lecturer_headers)
        assert response.status_code == 200
        topics = client.get("/api/courses/COS101/syllabus", headers=student_headers).json()
        assert topics == {"topics": ["T1", "T2"]}

    def test_library_search_pagination(self, client, student_headers):
        one = client.get("/api/library/books?per_page=2&page=1", headers=student_headers).json()
        two = client.get("/api/library/books?per_page=2&page=2", headers=student_headers).json()
        assert len(one) == 2 and len(two) == 2
        assert one[0]["title"] < two[0]["title"]

    def test_student_cannot_add_book(self, client, student_headers):
        response = client.post("/api/library/books", json={
            "title": "X", "author": "Y"}, headers=student_headers)
        assert response.status_code == 403


class TestQuizFlow:
    def test_quiz_lifecycle_over_http(self, client, seeded_ctx, clock):
        clock.set(IN_WINDOW)  # before login so the session outlives the jump
        student_headers = login(client, "BU/21/0001", fixtures.student_password(1))
        quizzes = client.get("/api/courses/COS101/assessments", headers=student_headers).json()
        quiz = next(a for a in quizzes if a["id"] == "asmt-cos101-quiz1")
        # answer key must be stripped for students
        assert all("correct_index" not in q for q in quiz["questions"])
        attempt = client.post(f"/api/assessments/{quiz['id']}/attempts",
                              headers=student_headers).json()
        patched = client.patch(f"/api/attempts/{attempt['id']}/answers",
                               json={"answers": [0, 1, None, None, None]},
                               headers=student_headers)
        assert patched.status_code == 200
        submitted = client.post(f"/api/attempts/{attempt['id']}/submit",
                                json={"answers": [0, 1, 2, 3, 0]},
                                headers=student_headers).json()
        key = [q["correct_index"]
               for q in seeded_ctx.store.get("assessment", quiz["id"])["questions"]]
        expected = sum(1.0 for a, k in zip([0, 1, 2, 3, 0], key) if a == k)
        assert submitted["auto_score"] == expected

    def test_assignment_flow_over_http(self, client, clock):
        clock.set(IN_WINDOW)
        student_headers = login(client, "BU/21/0001", fixtures.student_password(1))
        lecturer_headers = login(client, "STF/1001", fixtures.lecturer_password(1))
        submission = client.post("/api/assignments/hw-cos101-1/submissions",
                                 json={"content": "my essay"}, headers=student_headers).json()
        graded = client.post(f"/api/submissions/{submission['id']}/grade",
                             json={"score": 17}, headers=lecturer_headers).json()
        assert graded["score"] == 17


class TestReports:
    def test_empty_course_header_only_csv(self, client, registrar_headers, seeded_ctx):
        from citadel import registry
        registry.create_course(seeded_ctx, "NEW999", "Empty", "dep-cs", "usr-l01", "2024/2025")
        response = client.get("/api/courses/NEW999/report.csv", headers=registrar_headers)
        assert response.status_code == 200
        assert response.text == (
            "matric,name,materials_downloaded,assignments_submitted,assignments_total,"
            "quizzes_taken,quizzes_total,ca,exam,total,letter\n")

    def test_json_and_csv_agree(self, client, registrar_headers):
        data = client.get("/api/courses/COS201/report.json", headers=registrar_headers).json()
        text = client.get("/api/courses/COS201/report.csv", headers=registrar_headers).text
        parsed = list(csv.reader(io.StringIO(text)))
        header, rows = parsed[0], parsed[1:]
        assert len(rows) == len(data["rows"]) == 10
        for csv_row, json_row in zip(rows, data["rows"]):
            assert csv_row[0] == json_row["matric"]
            assert int(csv_row[2]) == json_row["materials_downloaded"]
            assert float(csv_row[9]) == json_row["total"]

    def test_student_forbidden(self, client, student_headers):
        assert client.get("/api/courses/COS101/report.json",
                          headers=student_headers).status_code == 403

    def test_lecturer_only_own_course(self, client, lecturer_headers):
        assert client.get("/api/courses/COS101/report.json",
                          headers=lecturer_headers).status_code == 200
        assert client.get("/api/courses/ACC101/report.json",
                          headers=lecturer_headers).status_code == 403


class TestChatRoutes:
    def test_post_and_fetch(self, client, student_headers):
        posted = client.post("/api/chat/COS101/messages", json={"body": "hello"},
                             headers=student_headers)
        assert posted.status_code == 201
        msgs = client.get("/api/chat/COS101/messages?after=0", headers=student_headers).json()
        assert [m["seq"] for m in msgs] == [1]
        assert msgs[0]["body"] == "hello"

    def test_fetch_nothing_new_after_wait(self, client, student_headers):
        msgs = client.get("/api/chat/COS101/messages?after=0&wait=0.2",
                          headers=student_headers).json()
        assert msgs == []

    def test_non_member_forbidden(self, client):
        headers = login(client, "BU/21/0011", fixtures.student_password(11))
        response = client.post("/api/chat/COS201/messages", json={"body": "x"}, headers=headers)
        assert response.status_code == 403
        assert response.json()["code"] == "forbidden_room"


class TestIdempotentGets:
    def test_repeat_get_byte_identical(self, client, student_headers):
        for path in ("/api/me/courses", "/api/me/results", "/api/courses",
                     "/api/library/books", "/api/notices"):
            first = client.get(path, headers=student_headers)
            second = client.get(path, headers=student_headers)
            assert first.content == second.content, path
