"""Loopback HTTP service hosting a discovery session for the workbench.

The service owns exactly one session at a time. Reads are open; every
mutating request must carry the session token printed at startup in the
X-Session-Token header. Mutations are single-writer: a second client
mutating concurrently, or mutating against a stale revision (If-Match),
receives 409. Long steps run on a worker thread and report progress
through the session descriptor, so clients poll GET /api/session.
"""

from __future__ import annotations

import io
import json
import secrets
import tempfile
import threading
import traceback
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .casebase import KB
from .concepts import ConceptError, ConceptSyntaxError, parse_concept
from .exports import MissingArtifactError, fcis_text, rules_text, transactions_text
from .properties import PropertySet, project_properties
from .rules import (
    InvalidTransitionError,
    RuleError,
    apply_rule,
    describe_rule,
    render_rule,
)
from .session import (
    STEPS,
    MissingInputError,
    NoSnapshotError,
    Session,
    SessionError,
    StepInterrupted,
    save_session,
)


@dataclass
class ServiceConfig:
    kb: KB
    host: str = "127.0.0.1"
    port: int = 8765
    token: Optional[str] = None
    assets_dir: Optional[Path] = None


class ServiceState:
    """Session plus the coordination needed for single-writer semantics."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.token = config.token or secrets.token_hex(16)
        self.session = Session(config.kb)
        self.write_lock = threading.Lock()
        self.worker: Optional[threading.Thread] = None
        self.worker_error: Optional[str] = None

    def reset_session(self) -> Session:
        self.session = Session(self.config.kb)
        self.worker_error = None
        return self.session

    def start_step(self, step: str, params: Optional[dict], wait: bool) -> dict:
        session = self.session
        if self.worker is not None and self.worker.is_alive():
            raise BusyError("a step is already running")
        self.worker_error = None

        def job():
            try:
                session.run_step(step, params)
            except StepInterrupted:
                pass
            except Exception as exc:
                self.worker_error = f"{type(exc).__name__}: {exc}"

        self.worker = threading.Thread(target=job, daemon=True)
        self.worker.start()
        if wait:
            self.worker.join()
            if self.worker_error:
                raise WorkerError(self.worker_error)
        return {"step": step, "running": self.worker.is_alive()}


class BusyError(Exception):
    pass


class WorkerError(Exception):
    pass


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState = None  # attached by serve()
    protocol_version = "HTTP/1.1"

    # ------------------------------------------------------------ helpers

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _text(self, status: int, text: str, content_type="text/plain; charset=utf-8") -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str) -> None:
        self._json(status, {"error": message})

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except json.JSONDecodeError:
            raise ValueError("request body is not valid JSON")

    def _authorized(self) -> bool:
        return self.headers.get("X-Session-Token") == self.state.token

    def _check_revision(self) -> bool:
        expected = self.headers.get("If-Match")
        if expected is None:
            return True
        return expected == str(self.state.session.revision)

    # ------------------------------------------------------------- routes

    def do_GET(self):
        try:
            self._route_get()
        except BrokenPipeError:
            pass
        except Exception as exc:
            traceback.print_exc()
            self._error(500, f"{type(exc).__name__}: {exc}")

    def do_POST(self):
        try:
            self._route_mutation()
        except BrokenPipeError:
            pass
        except Exception as exc:
            traceback.print_exc()
            self._error(500, f"{type(exc).__name__}: {exc}")

    do_PUT = do_POST

    def _route_get(self):
        state = self.state
        session = state.session
        url = urlparse(self.path)
        path = url.path.rstrip("/") or "/"
        query = {k: v[0] for k, v in parse_qs(url.query).items()}

        if path == "/api/health":
            return self._json(200, {"status": "ok"})
        if path == "/api/session":
            desc = session.describe()
            desc["worker_error"] = state.worker_error
            return self._json(200, desc)
        if path == "/api/params":
            return self._json(200, session.params)
        if path == "/api/fcis":
            try:
                result = session.query_fcis(
                    sort=query.get("sort", "support"),
                    descending=query.get("dir", "desc") != "asc",
                    group=query.get("group") == "pb",
                    page=int(query.get("page", 0)),
                    page_size=int(query.get("page_size", 50)),
                    min_support=float(query["min_support"]) if "min_support" in query else None,
                    contains=query.get("contains"),
                )
            except MissingInputError as exc:
                return self._error(409, str(exc))
            except SessionError as exc:
                return self._error(400, str(exc))
            return self._json(200, result)
        if path.startswith("/api/fcis/"):
            fci_id = path.rsplit("/", 1)[1]
            try:
                view = session.view_by_id(fci_id)
            except SessionError as exc:
                return self._error(404, str(exc))
            return self._json(200, session.describe_view(view))
        if path == "/api/rules":
            return self._json(200, {"rules": [self._rule_payload(r) for r in session.rule_store.rules.values()]})
        if path.startswith("/api/rules/"):
            rule_id = path.rsplit("/", 1)[1]
            try:
                rule = session.rule_store.get(rule_id)
            except RuleError as exc:
                return self._error(404, str(exc))
            return self._json(200, self._rule_payload(rule))
        if path.startswith("/api/export/"):
            kind = path.rsplit("/", 1)[1]
            try:
                if kind == "fcis":
                    return self._text(200, fcis_text(session))
                if kind == "transactions":
                    return self._text(200, transactions_text(session))
                if kind == "rules":
                    return self._text(200, rules_text(session), "application/json")
                if kind == "session":
                    buf = io.BytesIO()
                    tmp = tempfile.NamedTemporaryFile(suffix=".zip", delete=False)
                    tmp.close()
                    try:
                        save_session(session, tmp.name)
                        buf.write(Path(tmp.name).read_bytes())
                    finally:
                        Path(tmp.name).unlink(missing_ok=True)
                    body = buf.getvalue()
                    self.send_response(200)
                    self.send_header("Content-Type", "application/zip")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                    return None
            except MissingArtifactError as exc:
                return self._error(409, str(exc))
            return self._error(404, f"unknown export kind {kind!r}")
        if path == "/" or not path.startswith("/api/"):
            return self._serve_asset(path)
        return self._error(404, f"no such endpoint {path}")

    def _rule_payload(self, rule) -> dict:
        session = self.state.session
        universe = session.artifacts["s4"].universe if "s4" in session.artifacts else None
        payload = {
            "id": rule.id,
            "source_fci_id": rule.source_fci_id,
            "status": rule.status,
            "explanation": rule.explanation,
            "author": rule.author,
            "support_count": rule.support_count,
            "support": rule.support,
            "decision_removals": list(rule.decision_removals),
            "decision_additions": list(rule.decision_additions),
            "warnings": list(rule.warnings),
        }
        if universe is not None:
            payload["description"] = describe_rule(rule, universe)
            payload["conditions"] = {
                "problem_removed": [universe.key_of(o) for o in sorted(rule.pb_minus)],
                "problem_shared": [universe.key_of(o) for o in sorted(rule.pb_equal)],
                "problem_added": [universe.key_of(o) for o in sorted(rule.pb_plus)],
                "solution_removed": [universe.key_of(o) for o in sorted(rule.sol_remove)],
                "solution_kept": [universe.key_of(o) for o in sorted(rule.sol_keep)],
                "solution_added": [universe.key_of(o) for o in sorted(rule.sol_add)],
            }
        return payload

    def _serve_asset(self, path: str):
        assets = self.state.config.assets_dir
        if assets is None:
            return self._error(404, "no workbench assets configured")
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (assets / rel).resolve()
        if not str(target).startswith(str(assets.resolve())) or not target.is_file():
            return self._error(404, f"no asset {rel!r}")
        content_types = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".map": "application/json",
            ".svg": "image/svg+xml",
        }
        ctype = content_types.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _route_mutation(self):
        state = self.state
        session = state.session
        path = urlparse(self.path).path.rstrip("/")
        if not self._authorized():
            return self._error(401, "missing or invalid X-Session-Token")
        if not self._check_revision():
            return self._error(409, "revision mismatch: session changed under you")
        # serialize writers; genuine conflicts (a running step, a stale
        # revision) are reported as 409 by the checks above and below
        if not state.write_lock.acquire(timeout=10):
            return self._error(409, "another client is mutating the session")
        try:
            return self._mutate(path, session)
        finally:
            state.write_lock.release()

    def _mutate(self, path: str, session: Session):
        state = self.state
        if session.status == "running" and not path.endswith("/interrupt"):
            return self._error(409, f"step {session.running_step} is running")
        try:
            body = self._body()
        except ValueError as exc:
            return self._error(400, str(exc))
        try:
            if path == "/api/session":
                fresh = state.reset_session()
                return self._json(201, fresh.describe())
            if path == "/api/params":
                session.set_params(body)
                return self._json(200, session.params)
            if path == "/api/go-back":
                session.go_back(body.get("step", ""))
                return self._json(200, session.describe())
            if path.startswith("/api/steps/") and path.endswith("/run"):
                step = path.split("/")[3]
                if step not in STEPS:
                    return self._error(404, f"unknown step {step!r}")
                idx = STEPS.index(step)
                missing = [s for s in STEPS[:idx] if s not in session.artifacts]
                if missing:
                    return self._error(409, f"step {step} needs {', '.join(missing)} first")
                wait = bool(body.get("wait", False))
                info = state.start_step(step, body.get("params"), wait)
                desc = session.describe()
                desc["job"] = info
                desc["worker_error"] = state.worker_error
                return self._json(202 if info["running"] else 200, desc)
            if path.startswith("/api/steps/") and path.endswith("/interrupt"):
                step = path.split("/")[3]
                hit = session.running_step == step and session.interrupt()
                if state.worker is not None:
                    state.worker.join(timeout=30)
                return self._json(200, {"interrupted": bool(hit), "status": session.status})
            if path == "/api/rules":
                view = session.view_by_id(body.get("fci_id", ""))
                universe = session.artifacts["s4"].universe
                rule = session.rule_store.register(render_rule(view, session.kb, universe))
                session.revision += 1
                return self._json(201, self._rule_payload(rule))
            if path.startswith("/api/rules/") and path.endswith("/validate"):
                rule_id = path.split("/")[3]
                rule = session.rule_store.validate_rule(
                    rule_id,
                    body.get("verdict", ""),
                    body.get("explanation", ""),
                    body.get("author", "analyst"),
                )
                session.revision += 1
                return self._json(200, self._rule_payload(rule))
            if path.startswith("/api/rules/") and path.endswith("/apply"):
                return self._apply_rule(path.split("/")[3], body, session)
            return self._error(404, f"no such endpoint {path}")
        except BusyError as exc:
            return self._error(409, str(exc))
        except (MissingInputError,) as exc:
            return self._error(409, str(exc))
        except NoSnapshotError as exc:
            return self._error(404, str(exc))
        except InvalidTransitionError as exc:
            return self._error(409, str(exc))
        except (RuleError, SessionError, WorkerError) as exc:
            return self._error(400, str(exc))

    def _apply_rule(self, rule_id: str, body: dict, session: Session):
        try:
            rule = session.rule_store.get(rule_id)
        except RuleError as exc:
            return self._error(404, str(exc))
        if "s4" not in session.artifacts:
            return self._error(409, "run the formatting steps before applying rules")
        fcb = session.artifacts["s4"]
        source_id = body.get("source_case_id", "")
        entry = next((e for e in fcb.entries if e.case.id == source_id), None)
        if entry is None:
            return self._error(404, f"unknown source case {source_id!r}")
        target_text = body.get("target_problem", "")
        try:
            target = parse_concept(target_text)
        except ConceptSyntaxError as exc:
            return self._error(400, f"target problem: {exc}")
        try:
            target_set = project_properties(target, session.kb, fcb.universe)
            if fcb.active_ordinals is not None:
                target_set = PropertySet(
                    fcb.universe, target_set.ordinals & fcb.active_ordinals
                )
            result = apply_rule(
                rule,
                entry.problem_set,
                entry.solution_set,
                target_set,
                kb=session.kb,
                source_decisions=entry.case.solution,
            )
        except (RuleError, ConceptError) as exc:
            return self._error(400, str(exc))
        if result is None:
            return self._json(200, {"applicable": False})
        universe = fcb.universe
        return self._json(
            200,
            {
                "applicable": True,
                "solution_properties": [universe.key_of(o) for o in sorted(result.ordinals)],
                "decisions": [
                    universe.key_of(o)
                    for o in sorted(result.ordinals)
                    if universe.key_of(o) in session.kb.decision_names
                ],
            },
        )


class AnalystService:
    """Running HTTP server handle."""

    def __init__(self, config: ServiceConfig):
        self.state = ServiceState(config)
        handler = type("BoundHandler", (_Handler,), {"state": self.state})
        self.httpd = ThreadingHTTPServer((config.host, config.port), handler)
        self.thread: Optional[threading.Thread] = None

    @property
    def address(self) -> tuple[str, int]:
        return self.httpd.server_address[:2]

    @property
    def token(self) -> str:
        return self.state.token

    def start(self) -> None:
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self.thread is not None:
            self.thread.join(timeout=10)

    def serve_forever(self) -> None:
        self.httpd.serve_forever()


def serve(config: ServiceConfig) -> AnalystService:
    """Bind the service; raises OSError if the port is taken."""
    return AnalystService(config)
