import threading

import pytest

from citadel.errors import CitadelError, ConstraintViolation, NotFound, ReferentialViolation
from citadel.store import Store


@pytest.fixture
def store(tmp_path):
    s = Store(str(tmp_path / "data"))
    yield s
    s.close()


def user_body(username, **extra):
    body = {
        "username": username, "password_digest": "x", "full_name": "Someone",
        "email": "", "phone": "", "role": "Student", "department_id": None,
        "is_library": False, "deleted": False,
    }
    body.update(extra)
    return body


class TestPutGet:
    def test_round_trip(self, store):
        uid = store.put("user", user_body("BU/15/0421"))
        assert store.get("user", uid)["username"] == "BU/15/0421"

    def test_duplicate_username_rejected(self, store):
        store.put("user", user_body("BU/15/0421"))
        with pytest.raises(ConstraintViolation) as exc:
            store.put("user", user_body("BU/15/0421"))
        assert exc.value.details["key_name"] == "username"

    def test_missing_reference_rejected(self, store):
        with pytest.raises(ReferentialViolation) as exc:
            store.put("department", {"name": "CS", "faculty_id": "nope"})
        assert exc.value.details["missing_ref"] == "faculty_id"

    def test_get_unknown_id(self, store):
        with pytest.raises(NotFound):
            store.get("user", "nope")

    def test_version_increments_by_one_per_write(self, store):
        uid = store.put("user", user_body("BU/15/0421"))
        assert store.get_record("user", uid).version == 1
        body = store.get("user", uid)
        body["full_name"] = "Renamed"
        store.put("user", body)
        assert store.get_record("user", uid).version == 2

    def test_undeclared_field_rejected(self, store):
        with pytest.raises(CitadelError) as exc:
            store.put("faculty", {"name": "Science", "bogus": 1})
        assert exc.value.code == "unknown_field"


class TestQuery:
    def test_equality_filter(self, store):
        fid = store.put("faculty", {"name": "Science"})
        store.put("department", {"name": "CS", "faculty_id": fid})
        store.put("department", {"name": "Maths", "faculty_id": fid})
        assert len(store.query("department", filter={"faculty_id": fid})) == 2
        assert store.query("department", filter={"name": "CS"})[0]["name"] == "CS"

    def test_unknown_filter_field(self, store):
        with pytest.raises(CitadelError) as exc:
            store.query("faculty", filter={"nope": 1})
        assert exc.value.code == "unknown_field"

    def test_sort_desc_and_pagination(self, store):
        uid = store.put("user", user_body("BU/15/0421"))
        for i in range(3):
            store.put("message", {
                "from_user": uid, "to_user": uid, "subject": "", "body": str(i),
                "sent_at": f"2024-09-0{i + 1}T00:00:00Z", "read": False,
            })
        newest_two = store.query("message", filter={"to_user": uid},
                                 sort=[("sent_at", True)], page=(1, 2))
        assert [m["body"] for m in newest_two] == ["2", "1"]

    def test_range_predicate(self, store):
        uid = store.put("user", user_body("BU/15/0421"))
        for seq in range(1, 6):
            store.put("chat_message", {"room": "COS101", "seq": seq, "author_id": uid,
                                       "body": "", "posted_at": "2024-09-01T00:00:00Z"})
        above = store.query("chat_message", filter={"room": "COS101"},
                            where=lambda m: m["seq"] > 3, sort=[("seq", False)])
        assert [m["seq"] for m in above] == [4, 5]


class TestTransactions:
    def test_abort_leaves_no_effects(self, store):
        def txn(tx):
            tx.put("faculty", {"name": "Science"})
            raise RuntimeError("boom")
        with pytest.raises(RuntimeError):
            store.atomically(txn)
        assert store.query("faculty") == []

    def test_constraint_failure_aborts_whole_tx(self, store):
        store.put("faculty", {"name": "Science"})
        def txn(tx):
            tx.put("faculty", {"name": "Management"})
            tx.put("faculty", {"name": "Science"})  # duplicate
        with pytest.raises(ConstraintViolation):
            store.atomically(txn)
        assert len(store.query("faculty")) == 1

    def test_empty_tx_commits(self, store):
        assert store.atomically(lambda tx: "ok") == "ok"

    def test_tx_reads_own_writes(self, store):
        def txn(tx):
            fid = tx.put("faculty", {"name": "Science"})
            return tx.get("faculty", fid)["name"]
        assert store.atomically(txn) == "Science"

    def test_concurrent_unique_insert_exactly_one_wins(self, store):
        # race red in spirit: many rounds of two threads fighting for one key
        rounds = 1000
        wins = 0
        for i in range(rounds):
            username = f"BU/15/{i:04d}"
            outcomes = []
            def attempt():
                try:
                    store.put("user", user_body(username))
                    outcomes.append("ok")
                except ConstraintViolation:
                    outcomes.append("dup")
            t1, t2 = threading.Thread(target=attempt), threading.Thread(target=attempt)
            t1.start(); t2.start(); t1.join(); t2.join()
            assert sorted(outcomes) == ["dup", "ok"], outcomes
            wins += 1
        assert wins == rounds


class TestDurability:
    def test_restart_round_trip_bit_identical(self, tmp_path):
        path = str(tmp_path / "data")
        s1 = Store(path)
        fid = s1.put("faculty", {"name": "Science"})
        s1.put("department", {"name": "CS", "faculty_id": fid})
        before = list(s1.dump_lines())
        s1.close()
        s2 = Store(path)
        after = list(s2.dump_lines())
        s2.close()
        assert before == after
        assert len(after) == 2

    def test_soft_delete_survives_restart(self, tmp_path):
        path = str(tmp_path / "data")
        s1 = Store(path)
        uid = s1.put("user", user_body("BU/15/0421"))
        s1.delete("user", uid)
        s1.close()
        s2 = Store(path)
        assert s2.query("user") == []
        assert s2.get("user", uid)["deleted"] is True  # tombstone, not gone
        s2.close()

    def test_hard_delete_survives_restart(self, tmp_path):
        path = str(tmp_path / "data")
        s1 = Store(path)
        bid = s1.put("library_book", {"title": "T", "author": "A", "isbn": None,
                                      "location": "", "copies_total": 1})
        s1.delete("library_book", bid)
        s1.close()
        s2 = Store(path)
        assert s2.query("library_book") == []
        s2.close()


class TestSoftDelete:
    def test_deleted_user_invisible_to_queries_but_referable(self, store):
        uid = store.put("user", user_body("BU/15/0421"))
        store.put("enrollment", {"student_id": uid, "course_code": "COS101",
                                 "session": "2024/2025", "registered_at": "2024-09-01T00:00:00Z"})
        store.delete("user", uid)
        assert store.query("user") == []
        # the enrollment row still resolves; gradebooks never dangle
        assert store.query("enrollment")[0]["student_id"] == uid

    def test_username_of_deleted_user_stays_reserved(self, store):
        uid = store.put("user", user_body("BU/15/0421"))
        store.delete("user", uid)
        # tombstoned rows release their unique keys
        store.put("user", user_body("BU/15/0421"))
