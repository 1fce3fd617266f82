import random
import threading

import pytest

from citadel import assessment, fixtures
from citadel.auth import Principal
from citadel.domain import Role, parse_ts
from citadel.errors import CitadelError, Forbidden
from conftest import IN_WINDOW


def oracle_score(questions, answers):
    """Independent brute-force re-scoring over the answer key."""
    total = 0.0
    for i in range(len(questions)):
        if answers[i] is not None and answers[i] == questions[i]["correct_index"]:
            total += questions[i]["points"]
    return total


@pytest.fixture
def owner():
    return Principal("usr-l01", Role.LECTURER)  # teaches COS101


@pytest.fixture
def student():
    return Principal("usr-s001", Role.STUDENT)  # enrolled in COS101


@pytest.fixture
def in_window(seeded_ctx, clock):
    clock.set(IN_WINDOW)
    return seeded_ctx


class TestCreateAssessment:
    def test_owner_creates_quiz(self, seeded_ctx, owner):
        quiz = assessment.create_assessment(
            seeded_ctx, owner, "COS101", kind="Quiz", title="Extra quiz",
            opens_at="2024-09-25T09:00:00Z", closes_at="2024-09-26T09:00:00Z",
            ca_weight=5.0,
            questions=[{"prompt": "?", "options": ["a", "b"], "correct_index": 0, "points": 1}] * 10,
        )
        assert quiz["points_total"] == 10
        assert quiz["ca_weight"] == 5.0

    def test_ca_budget_exceeded(self, seeded_ctx, owner):
        # demo fixture already has 2 quizzes x 10 points of weight on COS101
        with pytest.raises(CitadelError) as exc:
            assessment.create_assessment(
                seeded_ctx, owner, "COS101", kind="Quiz", title="Too heavy",
                opens_at="2024-09-25T09:00:00Z", closes_at="2024-09-26T09:00:00Z",
                ca_weight=15.0,
                questions=[{"prompt": "?", "options": ["a", "b"], "correct_index": 0}],
            )
        assert exc.value.code == "ca_budget_exceeded"

    def test_non_owner_forbidden(self, seeded_ctx):
        outsider = Principal("usr-l02", Role.LECTURER)
        with pytest.raises(Forbidden):
            assessment.create_assessment(
                seeded_ctx, outsider, "COS101", kind="Quiz", title="Nope",
                opens_at="2024-09-25T09:00:00Z", closes_at="2024-09-26T09:00:00Z",
                questions=[{"prompt": "?", "options": ["a", "b"], "correct_index": 0}],
            )

    @pytest.mark.parametrize("bad_questions", [
        [],
        [{"prompt": "?", "options": ["only"], "correct_index": 0}],
        [{"prompt": "?", "options": ["a", "b"], "correct_index": 2}],
        [{"prompt": "?", "options": ["a", "b"], "correct_index": 0, "points": 0}],
    ])
    def test_invalid_question_specs(self, seeded_ctx, owner, bad_questions):
        with pytest.raises(CitadelError) as exc:
            assessment.create_assessment(
                seeded_ctx, owner, "COS101", kind="Quiz", title="Bad",
                opens_at="2024-09-25T09:00:00Z", closes_at="2024-09-26T09:00:00Z",
                questions=bad_questions,
            )
        assert exc.value.code == "invalid_spec"

    def test_second_exam_rejected(self, seeded_ctx, owner):
        with pytest.raises(CitadelError):
            assessment.create_assessment(
                seeded_ctx, owner, "COS101", kind="Exam", title="Second exam",
                opens_at="2024-12-11T09:00:00Z", closes_at="2024-12-12T09:00:00Z",
                questions=[{"prompt": "?", "options": ["a", "b"], "correct_index": 0}],
            )

    def test_concurrent_creations_respect_budget(self, seeded_ctx):
        # COS201's quizzes already hold 20 of the 30 points; ten concurrent
        # 5-point quizzes may land at most two more
        owner = Principal("usr-l02", Role.LECTURER)
        outcomes = []
        def create(n):
            try:
                assessment.create_assessment(
                    seeded_ctx, owner, "COS201", kind="Quiz", title=f"Race {n}",
                    opens_at="2024-09-25T09:00:00Z", closes_at="2024-09-26T09:00:00Z",
                    ca_weight=5.0,
                    questions=[{"prompt": "?", "options": ["a", "b"], "correct_index": 0}],
                )
                outcomes.append("ok")
            except CitadelError:
                outcomes.append("rejected")
        threads = [threading.Thread(target=create, args=(n,)) for n in range(10)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert outcomes.count("ok") == 2
        total = sum(
            a["ca_weight"] for a in seeded_ctx.store.query(
                "assessment", filter={"course_code": "COS201"})
            if a["kind"] == "Quiz"
        )
        assert total <= 30


class TestAttemptLifecycle:
    QUIZ = "asmt-cos101-quiz1"

    def test_start_inside_window(self, in_window, student):
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        assert attempt["answers"] == [None] * 5
        # 30-minute duration limit wins over the far-away close
        assert attempt["deadline"] == "2024-09-15T10:30:00Z"

    def test_start_after_close(self, seeded_ctx, clock, student):
        clock.set(parse_ts("2024-09-21T00:00:00Z"))
        with pytest.raises(CitadelError) as exc:
            assessment.start_attempt(seeded_ctx, student, self.QUIZ)
        assert exc.value.code == "window_closed"

    def test_start_before_open(self, seeded_ctx, clock, student):
        clock.set(parse_ts("2024-09-05T00:00:00Z"))
        with pytest.raises(CitadelError) as exc:
            assessment.start_attempt(seeded_ctx, student, self.QUIZ)
        assert exc.value.code == "window_not_open"

    def test_second_start_rejected(self, in_window, student):
        assessment.start_attempt(in_window, student, self.QUIZ)
        with pytest.raises(CitadelError) as exc:
            assessment.start_attempt(in_window, student, self.QUIZ)
        assert exc.value.code == "already_attempted"

    def test_not_enrolled(self, in_window):
        stranger = Principal("usr-s021", Role.STUDENT)  # accounting, not in COS101? s021 IS in COS101
        outsider = Principal("usr-s011", Role.STUDENT)  # math dept: COS101 yes...
        # COS201 is CS-only; use a math student against it
        with pytest.raises(CitadelError) as exc:
            assessment.start_attempt(in_window, outsider, "asmt-cos201-quiz1")
        assert exc.value.code == "not_enrolled"

    def test_full_marks_submission(self, in_window, student):
        quiz = in_window.store.get("assessment", self.QUIZ)
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        key = [q["correct_index"] for q in quiz["questions"]]
        done = assessment.submit_attempt(in_window, student, attempt["id"], key)
        assert done["auto_score"] == quiz["points_total"]

    def test_all_null_scores_zero(self, in_window, student):
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        done = assessment.submit_attempt(in_window, student, attempt["id"], [None] * 5)
        assert done["auto_score"] == 0

    def test_random_vectors_match_oracle(self, in_window, student):
        quiz = in_window.store.get("assessment", self.QUIZ)
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        rng = random.Random(7)
        for _ in range(100):
            vector = [
                rng.choice([None, 0, 1, 2, 3]) for _ in quiz["questions"]
            ]
            saved = assessment.save_answers(in_window, student, attempt["id"], vector)
            assert assessment.score_answers(quiz["questions"], saved["answers"]) == \
                oracle_score(quiz["questions"], vector)

    def test_double_submit_rejected(self, in_window, student):
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        assessment.submit_attempt(in_window, student, attempt["id"], [0] * 5)
        with pytest.raises(CitadelError) as exc:
            assessment.submit_attempt(in_window, student, attempt["id"], [0] * 5)
        assert exc.value.code == "already_submitted"

    def test_shape_mismatch(self, in_window, student):
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        with pytest.raises(CitadelError) as exc:
            assessment.submit_attempt(in_window, student, attempt["id"], [0] * 4)
        assert exc.value.code == "answer_shape_mismatch"

    def test_late_submit_scores_autosaved_answers(self, in_window, clock, student):
        quiz = in_window.store.get("assessment", self.QUIZ)
        key = [q["correct_index"] for q in quiz["questions"]]
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        autosaved = key[:3] + [None, None]
        assessment.save_answers(in_window, student, attempt["id"], autosaved)
        clock.advance(minutes=31)  # past the duration limit
        with pytest.raises(CitadelError) as exc:
            assessment.submit_attempt(in_window, student, attempt["id"], key)
        assert exc.value.code == "deadline_passed"
        final = in_window.store.get("attempt", attempt["id"])
        assert final["expired"] is True
        assert final["submitted_at"] is None
        assert final["auto_score"] == oracle_score(quiz["questions"], autosaved)

    def test_submit_at_exact_deadline_accepted(self, in_window, clock, student):
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        clock.set(parse_ts(attempt["deadline"]))
        done = assessment.submit_attempt(in_window, student, attempt["id"], [0] * 5)
        assert done["submitted_at"] == attempt["deadline"]

    def test_foreign_attempt_forbidden(self, in_window, student):
        attempt = assessment.start_attempt(in_window, student, self.QUIZ)
        other = Principal("usr-s002", Role.STUDENT)
        with pytest.raises(Forbidden):
            assessment.submit_attempt(in_window, other, attempt["id"], [0] * 5)


class TestAssignments:
    HW = "hw-cos101-1"

    def test_submit_and_grade(self, in_window, student, owner):
        sub = assessment.submit_assignment(in_window, student, self.HW, "my answer")
        graded = assessment.grade_submission(in_window, owner, sub["id"], 15)
        assert graded["score"] == 15
        assert graded["graded_by"] == "usr-l01"

    def test_resubmission_replaces_before_due(self, in_window, student):
        first = assessment.submit_assignment(in_window, student, self.HW, "v1")
        second = assessment.submit_assignment(in_window, student, self.HW, "v2")
        assert first["id"] == second["id"]
        assert second["content"] == "v2"

    def test_late_submission_rejected(self, seeded_ctx, clock, student):
        clock.set(parse_ts("2024-10-02T00:00:00Z"))
        with pytest.raises(CitadelError) as exc:
            assessment.submit_assignment(seeded_ctx, student, self.HW, "late")
        assert exc.value.code == "deadline_passed"

    def test_overscore_rejected(self, in_window, student, owner):
        sub = assessment.submit_assignment(in_window, student, self.HW, "x")
        with pytest.raises(CitadelError) as exc:
            assessment.grade_submission(in_window, owner, sub["id"], 21)
        assert exc.value.code == "out_of_range"

    def test_regrade_last_write_wins(self, in_window, student, owner):
        sub = assessment.submit_assignment(in_window, student, self.HW, "x")
        assessment.grade_submission(in_window, owner, sub["id"], 12)
        assessment.grade_submission(in_window, owner, sub["id"], 15)
        assert in_window.store.get("submission", sub["id"])["score"] == 15

    def test_non_owner_cannot_grade(self, in_window, student):
        sub = assessment.submit_assignment(in_window, student, self.HW, "x")
        with pytest.raises(Forbidden):
            assessment.grade_submission(in_window, Principal("usr-l02", Role.LECTURER), sub["id"], 5)


class TestComputeResult:
    def test_nothing_taken_is_f(self, seeded_ctx, student):
        result = assessment.compute_result(seeded_ctx, "COS101", "usr-s001")
        assert (result["ca_score"], result["exam_score"], result["letter"]) == (0, 0, "F")

    def test_perfect_quizzes_and_exam(self, seeded_ctx, clock, student):
        clock.set(IN_WINDOW)
        for quiz_id in ("asmt-cos101-quiz1", "asmt-cos101-quiz2"):
            quiz = seeded_ctx.store.get("assessment", quiz_id)
            attempt = assessment.start_attempt(seeded_ctx, student, quiz_id)
            assessment.submit_attempt(
                seeded_ctx, student, attempt["id"],
                [q["correct_index"] for q in quiz["questions"]])
        clock.set(parse_ts("2024-12-05T10:00:00Z"))
        exam = seeded_ctx.store.get("assessment", "asmt-cos101-exam")
        attempt = assessment.start_attempt(seeded_ctx, student, "asmt-cos101-exam")
        assessment.submit_attempt(
            seeded_ctx, student, attempt["id"],
            [q["correct_index"] for q in exam["questions"]])
        result = assessment.compute_result(seeded_ctx, "COS101", "usr-s001")
        # 2 quizzes x weight 10 = 20 CA (assignment ungraded), full exam = 70
        assert result["ca_score"] == 20
        assert result["exam_score"] == 70
        assert result["letter"] == "A"

    def test_mixed_fixture_matches_weighted_oracle(self, seeded_ctx, clock, student, owner):
        clock.set(IN_WINDOW)
        quiz = seeded_ctx.store.get("assessment", "asmt-cos101-quiz1")
        attempt = assessment.start_attempt(seeded_ctx, student, "asmt-cos101-quiz1")
        key = [q["correct_index"] for q in quiz["questions"]]
        vector = key[:3] + [(key[3] + 1) % 4, (key[4] + 1) % 4]  # 3 of 5 right
        assessment.submit_attempt(seeded_ctx, student, attempt["id"], vector)
        sub = assessment.submit_assignment(seeded_ctx, student, "hw-cos101-1", "work")
        assessment.grade_submission(seeded_ctx, owner, sub["id"], 13)
        clock.set(parse_ts("2024-12-05T10:00:00Z"))
        exam = seeded_ctx.store.get("assessment", "asmt-cos101-exam")
        exam_key = [q["correct_index"] for q in exam["questions"]]
        exam_vector = exam_key[:6] + [None] * 4  # 6 of 10 right
        attempt = assessment.start_attempt(seeded_ctx, student, "asmt-cos101-exam")
        assessment.submit_attempt(seeded_ctx, student, attempt["id"], exam_vector)

        # spreadsheet-style recomputation from raw rows
        expected_ca = (3 / 5) * 10 + (13 / 20) * 10
        expected_exam = (6 / 10) * 70
        result = assessment.compute_result(seeded_ctx, "COS101", "usr-s001")
        assert result["ca_score"] == pytest.approx(expected_ca, abs=1e-9)
        assert result["exam_score"] == pytest.approx(expected_exam, abs=1e-9)
        assert result["total"] == pytest.approx(expected_ca + expected_exam, abs=1e-9)

    def test_idempotent_until_rows_change(self, seeded_ctx):
        first = assessment.compute_result(seeded_ctx, "COS101", "usr-s001")
        second = assessment.compute_result(seeded_ctx, "COS101", "usr-s001")
        assert first == second

    def test_not_enrolled(self, seeded_ctx):
        with pytest.raises(CitadelError) as exc:
            assessment.compute_result(seeded_ctx, "COS201", "usr-s011")
        assert exc.value.code == "not_enrolled"


class TestListResults:
    def test_student_sees_own_three_courses(self, seeded_ctx, student):
        results = assessment.list_results(seeded_ctx, student)
        assert [r["course_code"] for r in results] == ["COS101", "COS201", "MTH101"]

    def test_student_cannot_read_others(self, seeded_ctx, student):
        with pytest.raises(Forbidden):
            assessment.list_results(seeded_ctx, student, student_id="usr-s002")

    def test_lecturer_gets_row_per_enrolled_student(self, seeded_ctx, owner):
        results = assessment.list_results(seeded_ctx, owner, course_code="COS101")
        assert len(results) == 30  # every demo student registers COS101

    def test_lecturer_other_course_forbidden(self, seeded_ctx, owner):
        with pytest.raises(Forbidden):
            assessment.list_results(seeded_ctx, owner, course_code="MTH101")

    def test_registrar_sees_any_course(self, seeded_ctx):
        registrar = Principal("usr-registrar", Role.REGISTRAR)
        assert len(assessment.list_results(seeded_ctx, registrar, course_code="COS201")) == 10
