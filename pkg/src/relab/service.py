"""Local session service: every operation over structured-text HTTP.

Sessions hold a linear history with an undo cursor; applying an action after
an undo truncates the redo tail.  Each session serializes its mutations: a
concurrent mutation is rejected with a conflict status.  Long-running
searches run as jobs with polling and cancellation.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import certificates, family, records, relax, speedup, zeroround
from .errors import (
    BudgetExceededError,
    ProblemFormatError,
    RelabError,
    UnjustifiedRelaxationError,
    UnsoundRelaxationError,
)
from .problems import (
    BLACK,
    WHITE,
    Problem,
    parse_problem,
    problem_hash,
    render_problem,
)

MAX_BODY = 1 << 20


class ServiceError(RelabError):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


@dataclass
class ActionRecord:
    kind: str
    params: dict[str, str]
    body: str
    result_hash: str


@dataclass
class Session:
    id: int
    history: list[tuple[Problem, ActionRecord]]
    cursor: int
    last_step: speedup.RawStepResult | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def current(self) -> Problem:
        return self.history[self.cursor][0]


@dataclass
class Job:
    id: int
    session_id: int
    status: str = "running"  # running | done | cancelled | failed
    progress: dict = field(default_factory=dict)
    result: str = ""
    error: str = ""
    cancel: threading.Event = field(default_factory=threading.Event)


class SessionService:
    """In-memory state behind the HTTP handler; usable directly in tests."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict[int, Session] = {}
        self._jobs: dict[int, Job] = {}
        self._next_session = 1
        self._next_job = 1

    # -- sessions ----------------------------------------------------------

    def create_session(self, problem_text: str) -> Session:
        try:
            problem = parse_problem(problem_text)
        except ProblemFormatError as exc:
            raise ServiceError(422, "parse-error", str(exc)) from None
        record = ActionRecord("load", {}, problem_text, problem_hash(problem))
        with self._lock:
            sid = self._next_session
            self._next_session += 1
            session = Session(sid, [(problem, record)], 0)
            self._sessions[sid] = session
        return session

    def session(self, sid: int) -> Session:
        try:
            return self._sessions[sid]
        except KeyError:
            raise ServiceError(404, "unknown-session", f"no session {sid}") from None

    def _mutate(self, sid: int):
        session = self.session(sid)
        if not session.lock.acquire(blocking=False):
            raise ServiceError(409, "conflict", "session is busy")
        return session

    def snapshot(self, sid: int) -> str:
        """One replayable file per session: the loaded problem plus every action."""
        session = self.session(sid)
        lines = [f"# session snapshot", f"cursor: {session.cursor}"]
        for i, (_, record) in enumerate(session.history):
            lines.append("")
            lines.append(f"[action {i}]")
            lines.append(f"kind: {record.kind}")
            for key, value in sorted(record.params.items()):
                lines.append(f"{key}: {value}")
            if record.body:
                lines.append("")
                lines.append(record.body.rstrip("\n"))
        return "\n".join(lines) + "\n"

    def restore_session(self, snapshot_text: str) -> Session:
        """Rebuild a session by replaying a snapshot; hashes must reproduce."""
        blocks: list[tuple[dict[str, str], str]] = []
        cursor = None
        current: list[str] | None = None
        for raw in snapshot_text.splitlines():
            if raw.startswith("# "):
                continue
            if raw.startswith("cursor:"):
                cursor = int(raw.split(":", 1)[1])
                continue
            if raw.startswith("[action "):
                if current is not None:
                    blocks.append(records.parse_record("\n".join(current) + "\n"))
                current = []
                continue
            if current is not None:
                current.append(raw)
        if current is not None:
            blocks.append(records.parse_record("\n".join(current) + "\n"))
        if not blocks or blocks[0][0].get("kind") != "load" or cursor is None:
            raise ServiceError(422, "bad-request", "malformed snapshot")
        session = self.create_session(blocks[0][1])
        for fields, body in blocks[1:]:
            self.apply_action(session.id, fields, body)
        while session.cursor > cursor:
            self.undo(session.id)
        return session

    def apply_action(self, sid: int, fields: dict[str, str], body: str) -> Session:
        session = self._mutate(sid)
        try:
            kind = fields.get("kind", "")
            problem, step = self._execute(session, kind, fields, body)
            record = ActionRecord(
                kind,
                {k: v for k, v in fields.items() if k != "kind"},
                body,
                problem_hash(problem),
            )
            del session.history[session.cursor + 1 :]
            session.history.append((problem, record))
            session.cursor += 1
            session.last_step = step
            return session
        finally:
            session.lock.release()

    def undo(self, sid: int) -> Session:
        session = self._mutate(sid)
        try:
            if session.cursor == 0:
                raise ServiceError(422, "nothing-to-undo", "already at the first state")
            session.cursor -= 1
            session.last_step = None
            return session
        finally:
            session.lock.release()

    def redo(self, sid: int) -> Session:
        session = self._mutate(sid)
        try:
            if session.cursor + 1 >= len(session.history):
                raise ServiceError(422, "nothing-to-redo", "already at the last state")
            session.cursor += 1
            session.last_step = None
            return session
        finally:
            session.lock.release()

    def _execute(self, session: Session, kind: str, fields, body):
        problem = session.current
        try:
            if kind in ("re_black", "re_white"):
                step = (
                    speedup.re_black(problem)
                    if kind == "re_black"
                    else speedup.re_white(problem)
                )
                return step.result, step
            if kind == "merge":
                side = _side(fields.get("side", ""))
                mapping = _parse_map(body, "->")
                m = relax.relaxation_map(mapping, side)
                return relax.merge_labels(problem, m), None
            if kind == "replace":
                return (
                    relax.replace_everywhere(
                        problem, fields.get("from", ""), fields.get("to", "")
                    ),
                    None,
                )
            if kind == "relax_to_targets":
                if session.last_step is None:
                    raise ServiceError(
                        422,
                        "no-step",
                        "relax_to_targets must follow re_black or re_white",
                    )
                targets, renaming = _parse_targets_body(body)
                return (
                    relax.relax_to_targets(session.last_step, targets, renaming),
                    None,
                )
            if kind == "add_configs":
                side = _side(fields.get("side", ""))
                cfgs = [
                    certificates._parse_config_line(line, i + 1)
                    for i, line in enumerate(body.splitlines())
                    if line.strip()
                ]
                return relax.add_configurations(problem, side, cfgs), None
            if kind == "rename":
                mapping = _parse_map(body, "->")
                from .problems import rename_problem

                return rename_problem(problem, mapping), None
            raise ServiceError(422, "bad-request", f"unknown action kind {kind!r}")
        except ServiceError:
            raise
        except UnsoundRelaxationError as exc:
            witness = " ".join(
                "{" + ",".join(sorted(s)) + "}" for s in (exc.witness or ())
            )
            raise ServiceError(
                422, "unsound-relaxation", f"{exc} (witness: {witness})"
            ) from None
        except UnjustifiedRelaxationError as exc:
            raise ServiceError(422, "unjustified", str(exc)) from None
        except BudgetExceededError as exc:
            raise ServiceError(422, "budget-exceeded", str(exc)) from None
        except (ProblemFormatError, ValueError) as exc:
            raise ServiceError(422, "bad-request", str(exc)) from None

    # -- jobs ---------------------------------------------------------------

    def start_autobound(self, sid: int, max_labels: int, max_steps: int) -> Job:
        session = self.session(sid)
        problem = session.current
        with self._lock:
            jid = self._next_job
            self._next_job += 1
            job = Job(jid, sid)
            self._jobs[jid] = job

        def progress(info):
            job.progress = dict(info)

        def run():
            try:
                strategy = family.SearchStrategy(cancel=job.cancel, progress=progress)
                chain = family.auto_bound(problem, max_labels, max_steps, strategy)
                if job.cancel.is_set():
                    job.status = "cancelled"
                    job.error = "cancelled; best chain so far below"
                if chain.unbounded:
                    job.result = records.render_record(
                        {"bound": "unbounded", "complete": "true"}
                    )
                else:
                    job.result = certificates.render_chain(chain)
                if not job.cancel.is_set():
                    job.status = "done"
            except RelabError as exc:
                job.status = "failed"
                job.error = str(exc)

        threading.Thread(target=run, daemon=True).start()
        return job

    def job(self, jid: int) -> Job:
        try:
            return self._jobs[jid]
        except KeyError:
            raise ServiceError(404, "unknown-job", f"no job {jid}") from None


def _side(value: str) -> str:
    if value not in (WHITE, BLACK):
        raise ServiceError(422, "bad-request", f"side must be white or black, got {value!r}")
    return value


def _parse_map(body: str, arrow: str) -> dict[str, str]:
    mapping = {}
    for line in body.splitlines():
        line = line.strip()
        if not line:
            continue
        if arrow not in line:
            raise ServiceError(422, "bad-request", f"bad map line {line!r}")
        src, dst = (part.strip() for part in line.split(arrow, 1))
        mapping[src] = dst
    return mapping


def _parse_targets_body(body: str):
    targets = []
    renaming = {}
    mode = None
    for i, raw in enumerate(body.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "targets:":
            mode = "targets"
        elif line == "renaming:":
            mode = "renaming"
        elif mode == "targets":
            targets.append(certificates._parse_set_config(line, i))
        elif mode == "renaming":
            name, _, members = line.partition("=")
            renaming[frozenset(members.split())] = name.strip()
        else:
            raise ServiceError(422, "bad-request", f"unexpected line {line!r}")
    if not targets:
        raise ServiceError(422, "bad-request", "no targets given")
    return targets, (renaming or None)


def _session_fields(session: Session) -> dict[str, str]:
    problem, record = session.history[session.cursor]
    fields = {
        "session": str(session.id),
        "revision": str(session.cursor),
        "history": str(len(session.history)),
        "hash": record.result_hash,
    }
    if session.last_step is not None:
        for name in session.last_step.result.alphabet:
            members = session.last_step.provenance.get(name)
            if members:
                fields[f"set-{name}"] = " ".join(sorted(members))
    return fields


# ---------------------------------------------------------------------------
# HTTP layer

_ROUTES = [
    ("POST", re.compile(r"/sessions\Z")),
    ("GET", re.compile(r"/sessions/(\d+)\Z")),
    ("POST", re.compile(r"/sessions/(\d+)/actions\Z")),
    ("GET", re.compile(r"/sessions/(\d+)/actions\Z")),
    ("POST", re.compile(r"/sessions/(\d+)/undo\Z")),
    ("POST", re.compile(r"/sessions/(\d+)/redo\Z")),
    ("GET", re.compile(r"/sessions/(\d+)/diagram\Z")),
    ("GET", re.compile(r"/sessions/(\d+)/zeroround\Z")),
    ("GET", re.compile(r"/sessions/(\d+)/history\Z")),
    ("POST", re.compile(r"/sessions/(\d+)/jobs\Z")),
    ("GET", re.compile(r"/jobs/(\d+)\Z")),
    ("POST", re.compile(r"/jobs/(\d+)/cancel\Z")),
]


class _Handler(BaseHTTPRequestHandler):
    service: SessionService

    def log_message(self, *args):  # quiet
        pass

    def _send(self, status: int, text: str):
        data = text.encode()
        self.send_response(status)
        self.send_header("Content-Type", "text/plain; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _error(self, exc: ServiceError):
        self._send(
            exc.status,
            records.render_record({"error": exc.code, "message": str(exc)}),
        )

    def _body(self) -> str:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY:
            raise ServiceError(413, "too-large", "request body too large")
        return self.rfile.read(length).decode()

    def do_POST(self):
        self._dispatch("POST")

    def do_GET(self):
        self._dispatch("GET")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def _dispatch(self, method: str):
        path, _, query = self.path.partition("?")
        svc = self.service
        try:
            if method == "POST" and path == "/sessions":
                session = svc.create_session(self._body())
                self._send(
                    201,
                    records.render_record(
                        _session_fields(session), render_problem(session.current)
                    ),
                )
                return
            m = re.match(r"/sessions/(\d+)\Z", path)
            if m and method == "GET":
                session = svc.session(int(m.group(1)))
                self._send(
                    200,
                    records.render_record(
                        _session_fields(session), render_problem(session.current)
                    ),
                )
                return
            m = re.match(r"/sessions/(\d+)/actions\Z", path)
            if m and method == "POST":
                fields, body = records.parse_record(self._body())
                session = svc.apply_action(int(m.group(1)), fields, body)
                self._send(
                    200,
                    records.render_record(
                        _session_fields(session), render_problem(session.current)
                    ),
                )
                return
            if m and method == "GET":
                session = svc.session(int(m.group(1)))
                lines = []
                for i, (_, record) in enumerate(session.history):
                    params = json.dumps(record.params, sort_keys=True)
                    lines.append(
                        f"{i} {record.result_hash} {record.kind} {params}"
                    )
                self._send(
                    200,
                    records.render_record(
                        {"cursor": str(session.cursor)}, "\n".join(lines) + "\n"
                    ),
                )
                return
            m = re.match(r"/sessions/(\d+)/snapshot\Z", path)
            if m and method == "GET":
                self._send(200, svc.snapshot(int(m.group(1))))
                return
            if method == "POST" and path == "/sessions/restore":
                session = svc.restore_session(self._body())
                self._send(
                    201,
                    records.render_record(
                        _session_fields(session), render_problem(session.current)
                    ),
                )
                return
            m = re.match(r"/sessions/(\d+)/(undo|redo)\Z", path)
            if m and method == "POST":
                session = (
                    svc.undo(int(m.group(1)))
                    if m.group(2) == "undo"
                    else svc.redo(int(m.group(1)))
                )
                self._send(
                    200,
                    records.render_record(
                        _session_fields(session), render_problem(session.current)
                    ),
                )
                return
            m = re.match(r"/sessions/(\d+)/diagram\Z", path)
            if m and method == "GET":
                side = _side(dict(_parse_query(query)).get("side", WHITE))
                session = svc.session(int(m.group(1)))
                d = relax.diagram(session.current, side)
                self._send(
                    200,
                    records.render_record(
                        {"side": side, "arrows": str(len(d.arrows))},
                        relax.render_diagram(d),
                    ),
                )
                return
            m = re.match(r"/sessions/(\d+)/zeroround\Z", path)
            if m and method == "GET":
                session = svc.session(int(m.group(1)))
                fields = {}
                for side in (WHITE, BLACK):
                    verdict = zeroround.zero_round(session.current, side)
                    fields[f"{side}-solvable"] = str(verdict.solvable).lower()
                    if verdict.witness:
                        cfg, support = verdict.witness
                        fields[f"{side}-witness"] = " ".join(cfg)
                        fields[f"{side}-support"] = " ".join(sorted(support))
                self._send(200, records.render_record(fields))
                return
            m = re.match(r"/sessions/(\d+)/history\Z", path)
            if m and method == "GET":
                session = svc.session(int(m.group(1)))
                lines = [
                    f"{i} {record.result_hash} {record.kind}"
                    for i, (_, record) in enumerate(session.history)
                ]
                self._send(
                    200,
                    records.render_record(
                        {"cursor": str(session.cursor)}, "\n".join(lines) + "\n"
                    ),
                )
                return
            m = re.match(r"/sessions/(\d+)/jobs\Z", path)
            if m and method == "POST":
                fields, _ = records.parse_record(self._body())
                if fields.get("kind") != "autobound":
                    raise ServiceError(422, "bad-request", "kind must be autobound")
                job = svc.start_autobound(
                    int(m.group(1)),
                    int(fields.get("max-labels", "5")),
                    int(fields.get("max-steps", "8")),
                )
                self._send(
                    202, records.render_record({"job": str(job.id), "status": job.status})
                )
                return
            m = re.match(r"/jobs/(\d+)\Z", path)
            if m and method == "GET":
                job = svc.job(int(m.group(1)))
                fields = {"job": str(job.id), "status": job.status}
                fields.update({f"progress-{k}": str(v) for k, v in job.progress.items()})
                if job.error:
                    fields["message"] = job.error
                self._send(200, records.render_record(fields, job.result))
                return
            m = re.match(r"/jobs/(\d+)/cancel\Z", path)
            if m and method == "POST":
                job = svc.job(int(m.group(1)))
                job.cancel.set()
                self._send(200, records.render_record({"job": str(job.id), "status": job.status}))
                return
            raise ServiceError(404, "not-found", f"no route {method} {path}")
        except ServiceError as exc:
            self._error(exc)
        except Exception as exc:  # pragma: no cover - defensive
            self._error(ServiceError(500, "internal", repr(exc)))


def _parse_query(query: str):
    for part in query.split("&"):
        if "=" in part:
            k, v = part.split("=", 1)
            yield k, v


def serve(port: int = 0, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    """Bind the service; returns the server (serve_forever on the caller)."""
    service = SessionService()
    handler = type("Handler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.service = service
    return server
