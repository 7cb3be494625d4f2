"""Session service over HTTP: actions, undo/redo, replay, jobs, conflicts."""

import threading
import time

import httpx
import pytest

from relab.records import parse_record, render_record
from relab.certificates import verify_certificate
from relab.problems import parse_problem, problem_hash, render_problem
from relab.service import SessionService, serve
from relab.speedup import re_black

from conftest import BMM_TEXT


@pytest.fixture(scope="module")
def client():
    server = serve(0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    port = server.server_address[1]
    with httpx.Client(base_url=f"http://127.0.0.1:{port}", timeout=30.0) as c:
        yield c
    server.shutdown()


def create(client, text=BMM_TEXT):
    r = client.post("/sessions", content=text)
    assert r.status_code == 201
    fields, body = parse_record(r.text)
    return fields["session"], fields, body


class TestRecords:
    def test_round_trip(self):
        fields = {"kind": "merge", "side": "white"}
        text = render_record(fields, "Y -> X\n")
        back, body = parse_record(text)
        assert back == fields and body == "Y -> X\n"

    def test_headers_only(self):
        fields, body = parse_record("a: 1\nb: two\n")
        assert fields == {"a": "1", "b": "two"} and body == ""


class TestSessions:
    def test_create_returns_canonical_problem(self, client):
        sid, fields, body = create(client)
        assert body == render_problem(parse_problem(BMM_TEXT))
        assert fields["hash"] == problem_hash(parse_problem(BMM_TEXT))

    def test_parse_error(self, client):
        r = client.post("/sessions", content="delta: 1\nwhite:\nA\n")
        assert r.status_code == 422
        fields, _ = parse_record(r.text)
        assert fields["error"] == "parse-error"

    def test_unknown_session(self, client):
        assert client.get("/sessions/99999").status_code == 404

    def test_step_black_matches_direct_api(self, client):
        sid, _, _ = create(client)
        r = client.post(f"/sessions/{sid}/actions", content="kind: re_black\n")
        assert r.status_code == 200
        _, body = parse_record(r.text)
        direct = re_black(parse_problem(BMM_TEXT)).result
        assert body == render_problem(direct)

    def test_merge_undo_redo_restores_hash(self, client):
        sid, _, _ = create(client)
        client.post(f"/sessions/{sid}/actions", content="kind: re_black\n")
        before = parse_record(client.get(f"/sessions/{sid}").text)[0]["hash"]
        r = client.post(
            f"/sessions/{sid}/actions",
            content=render_record({"kind": "merge", "side": "black"}, "M -> MO\n"),
        )
        assert r.status_code == 200
        undone = parse_record(client.post(f"/sessions/{sid}/undo").text)[0]
        assert undone["hash"] == before
        redone = parse_record(client.post(f"/sessions/{sid}/redo").text)[0]
        assert redone["hash"] == parse_record(r.text)[0]["hash"]

    def test_action_after_undo_truncates(self, client):
        sid, _, _ = create(client)
        client.post(f"/sessions/{sid}/actions", content="kind: re_black\n")
        client.post(f"/sessions/{sid}/undo")
        client.post(f"/sessions/{sid}/actions", content="kind: re_white\n")
        r = client.post(f"/sessions/{sid}/redo")
        assert r.status_code == 422

    def test_diagram_endpoint(self, client):
        sid, _, _ = create(client)
        client.post(f"/sessions/{sid}/actions", content="kind: re_black\n")
        r = client.get(f"/sessions/{sid}/diagram?side=white")
        fields, body = parse_record(r.text)
        assert fields["side"] == "white"
        assert "->" in body

    def test_zeroround_endpoint(self, client):
        sid, _, _ = create(client)
        fields, _ = parse_record(client.get(f"/sessions/{sid}/zeroround").text)
        assert fields["white-solvable"] == "false"
        assert fields["black-solvable"] == "false"

    def test_unjustified_merge_rejected(self, client):
        sid, _, _ = create(client)
        r = client.post(
            f"/sessions/{sid}/actions",
            content=render_record({"kind": "merge", "side": "white"}, "O -> P\n"),
        )
        assert r.status_code == 422
        fields, _ = parse_record(r.text)
        assert fields["error"] == "unjustified"

    def test_relax_requires_preceding_step(self, client):
        sid, _, _ = create(client)
        r = client.post(
            f"/sessions/{sid}/actions",
            content=render_record(
                {"kind": "relax_to_targets"}, "targets:\n{M}^3\n"
            ),
        )
        assert r.status_code == 422
        assert parse_record(r.text)[0]["error"] == "no-step"

    def test_replay_history_reproduces_hashes(self, client):
        sid, _, _ = create(client)
        actions = [
            "kind: re_black\n",
            render_record({"kind": "merge", "side": "black"}, "M -> MO\n"),
            "kind: re_white\n",
        ]
        hashes = []
        for action in actions:
            r = client.post(f"/sessions/{sid}/actions", content=action)
            assert r.status_code == 200
            hashes.append(parse_record(r.text)[0]["hash"])
        replay_sid, _, _ = create(client)
        replayed = []
        for action in actions:
            r = client.post(f"/sessions/{replay_sid}/actions", content=action)
            replayed.append(parse_record(r.text)[0]["hash"])
        assert replayed == hashes

    def test_snapshot_restore_reproduces_hashes(self, client):
        sid, _, _ = create(client)
        client.post(f"/sessions/{sid}/actions", content="kind: re_black\n")
        client.post(
            f"/sessions/{sid}/actions",
            content=render_record({"kind": "merge", "side": "black"}, "M -> MO\n"),
        )
        client.post(f"/sessions/{sid}/undo")
        original = parse_record(client.get(f"/sessions/{sid}").text)[0]
        snapshot = client.get(f"/sessions/{sid}/snapshot").text
        r = client.post("/sessions/restore", content=snapshot)
        assert r.status_code == 201
        restored = parse_record(r.text)[0]
        assert restored["hash"] == original["hash"]
        assert restored["revision"] == original["revision"]
        assert restored["history"] == original["history"]

    def test_conflict_on_concurrent_mutation(self):
        service = SessionService()
        session = service.create_session(BMM_TEXT)
        session.lock.acquire()
        try:
            r = httpx  # no HTTP needed; exercise the service object directly
            with pytest.raises(Exception) as err:
                service.apply_action(session.id, {"kind": "re_black"}, "")
            assert getattr(err.value, "code", "") == "conflict"
        finally:
            session.lock.release()


class TestJobs:
    def test_autobound_job_completes(self, client):
        sid, _, _ = create(client)
        r = client.post(
            f"/sessions/{sid}/jobs",
            content="kind: autobound\nmax-labels: 5\nmax-steps: 4\n",
        )
        assert r.status_code == 202
        jid = parse_record(r.text)[0]["job"]
        for _ in range(600):
            fields, body = parse_record(client.get(f"/jobs/{jid}").text)
            if fields["status"] != "running":
                break
            time.sleep(0.2)
        assert fields["status"] == "done"
        report = verify_certificate(body)
        assert report.ok and report.bound == 5

    def test_cancel(self, client):
        sid, _, _ = create(client)
        r = client.post(
            f"/sessions/{sid}/jobs",
            content="kind: autobound\nmax-labels: 6\nmax-steps: 12\n",
        )
        jid = parse_record(r.text)[0]["job"]
        client.post(f"/jobs/{jid}/cancel")
        for _ in range(300):
            fields, _ = parse_record(client.get(f"/jobs/{jid}").text)
            if fields["status"] != "running":
                break
            time.sleep(0.2)
        assert fields["status"] in ("cancelled", "done")
