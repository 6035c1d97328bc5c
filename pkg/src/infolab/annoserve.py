"""HTTP annotation service: serve sentences, collect scores, measure agreement.

Two protocols are supported.  In ``two_phase`` the annotator first rates
how much the sentence reveals about a hidden word (info1, 1..10), then
the word is revealed and they rate how expected it was (info2, 1..10).
In ``info3`` the word is visible from the start and a single 1..5
informativeness score is given against a fixed five-anchor guideline.

State is an append-only JSONL event log replayed at startup; session
cursors are derived from the recorded scores, so a restart lands every
annotator exactly where they left off.
"""

from __future__ import annotations

import functools
import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .corpus import COARSE_TAGS, SLOT_TOKEN
from .errors import DataError, DuplicateIdError, InfolabError, IntegrityError, ParseError
from .rng import Lcg64, derive_seed
from .stats import spearman, spearman_pvalue

log = logging.getLogger(__name__)

SCHEMES = ("two_phase", "info3")
MEASURES = ("info1", "info2", "info3")
SCHEME_MEASURES = {"two_phase": ("info1", "info2"), "info3": ("info3",)}
SCORE_RANGE = {"info1": (1, 10), "info2": (1, 10), "info3": (1, 5)}

RECORD_FIELDS = ("seq", "annotator", "task_id", "measure", "score", "ts")


@functools.lru_cache(maxsize=1)
def info3_guideline() -> tuple[str, ...]:
    """The five scale anchors served with every info3 task."""
    text = resources.files("infolab").joinpath("data/info3_guideline.txt").read_text("utf-8")
    return tuple(line for line in text.splitlines() if line.strip())


class ProtocolError(InfolabError):
    """Request valid in isolation but out of order for the protocol."""


class ConflictError(InfolabError):
    """Would overwrite an existing record."""


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    tokens: tuple[str, ...]  # original forms, target included
    position: int
    pos: str
    provenance: str = "corpus"  # corpus | definition
    scheme: str | None = None  # annotation scheme the set was built for

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("task has no tokens")
        if not (0 <= self.position < len(self.tokens)):
            raise ValueError("target position out of range")
        if self.pos not in COARSE_TAGS:
            raise ValueError(f"unknown POS tag {self.pos!r}")

    @property
    def target_form(self) -> str:
        return self.tokens[self.position]

    def masked_tokens(self) -> list[str]:
        """Hide the target form wherever it occurs, not only at the slot."""
        lower = self.target_form.lower()
        return [SLOT_TOKEN if t.lower() == lower else t for t in self.tokens]


@dataclass(frozen=True)
class AnnotationRecord:
    seq: int
    annotator: str
    task_id: str
    measure: str
    score: int
    ts: str
    task_set: str  # internal; not part of the export schema

    def export_line(self) -> str:
        # fixed key order keeps export -> import -> export byte-identical
        return json.dumps({f: getattr(self, f) for f in RECORD_FIELDS}) + "\n"


@dataclass
class Session:
    session_id: str
    annotator: str
    scheme: str
    task_set: str
    order: tuple[str, ...]  # task ids in serving order


def load_task_set(stream) -> list[AnnotationTask]:
    """Parse a JSONL task file: task_id, tokens, position, pos per line."""
    tasks = []
    seen = set()
    for line_no, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            task = AnnotationTask(obj["task_id"], tuple(obj["tokens"]),
                                  obj["position"], obj["pos"],
                                  obj.get("provenance", "corpus"),
                                  obj.get("scheme"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad task record: {exc}", line_no) from None
        if task.task_id in seen:
            raise DuplicateIdError(f"duplicate task id {task.task_id!r}")
        seen.add(task.task_id)
        tasks.append(task)
    return tasks


def write_task_set(stream, tasks) -> None:
    for t in tasks:
        stream.write(json.dumps({
            "task_id": t.task_id, "tokens": list(t.tokens),
            "position": t.position, "pos": t.pos,
            "provenance": t.provenance,
        }) + "\n")


def tasks_from_occurrences(occurrences, pos: str, prefix: str,
                           limit: int | None = None) -> list[AnnotationTask]:
    """Turn (sentence, position) pairs into tasks, ids prefix-0001 on."""
    out = []
    for i, (sent, position) in enumerate(occurrences):
        if limit is not None and i >= limit:
            break
        out.append(AnnotationTask(f"{prefix}-{i + 1:04d}", tuple(sent.forms),
                                  position, pos))
    return out


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class AnnotationStore:
    """Sessions, records, and the event log behind the HTTP API.

    All mutation goes through _append + _apply so that replaying the log
    reconstructs the exact same state.  `data_dir=None` keeps everything
    in memory (no persistence).
    """

    def __init__(self, task_sets: dict[str, list[AnnotationTask]],
                 data_dir=None, clock=_utc_now):
        self.task_sets = {}
        self.task_order = {}
        for name, tasks in task_sets.items():
            self.task_sets[name] = {t.task_id: t for t in tasks}
            if len(self.task_sets[name]) != len(tasks):
                raise DuplicateIdError(f"duplicate task ids in set {name!r}")
            self.task_order[name] = tuple(t.task_id for t in tasks)
        self.clock = clock
        self.sessions: dict[str, Session] = {}
        self.records: list[AnnotationRecord] = []
        self._by_key: dict[tuple, AnnotationRecord] = {}
        self._revealed: set[tuple[str, str]] = set()
        self._seq = 0
        self._session_counter = 0
        self._lock = threading.RLock()

        self._log_path = None
        self._log_file = None
        if data_dir is not None:
            self._log_path = Path(data_dir) / "records.log"
            if self._log_path.exists():
                self._replay(self._log_path)
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_file = open(self._log_path, "a", encoding="utf-8")

    # ------------------------------------------------------------ events

    def _replay(self, path: Path) -> None:
        lines = path.read_text("utf-8").splitlines()
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except ValueError:
                if i == len(lines) - 1:
                    # torn final write from a crash; drop it
                    log.warning("dropping torn last log line in %s", path)
                    continue
                raise IntegrityError(f"corrupt event log line {i + 1}") from None
            self._apply(event)

    def _append(self, event: dict) -> None:
        if self._log_file is not None:
            self._log_file.write(json.dumps(event) + "\n")
            self._log_file.flush()
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event.get("event")
        if kind == "session":
            sid = event["session_id"]
            self.sessions[sid] = Session(
                sid, event["annotator"], event["scheme"], event["task_set"],
                tuple(event["order"]))
            num = int(sid.lstrip("s") or 0)
            self._session_counter = max(self._session_counter, num)
        elif kind == "reveal":
            self._revealed.add((event["session_id"], event["task_id"]))
        elif kind == "score":
            rec = AnnotationRecord(event["seq"], event["annotator"],
                                   event["task_id"], event["measure"],
                                   event["score"], event["ts"],
                                   event["task_set"])
            self.records.append(rec)
            self._by_key[(rec.annotator, rec.task_set, rec.task_id,
                          rec.measure)] = rec
            self._seq = max(self._seq, rec.seq)
        else:
            raise IntegrityError(f"unknown event kind {kind!r} in log")

    # ---------------------------------------------------------- sessions

    def create_session(self, annotator: str, scheme: str, task_set: str,
                       seed: int = 0) -> Session:
        if not annotator or not isinstance(annotator, str):
            raise ValueError("annotator must be a non-empty string")
        if scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
        with self._lock:
            if task_set not in self.task_sets:
                raise KeyError(f"unknown task set {task_set!r}")
            order = list(self.task_order[task_set])
            # same set + seed => same order for every annotator
            Lcg64(derive_seed(seed, "order", task_set)).shuffle(order)
            self._session_counter += 1
            sid = f"s{self._session_counter}"
            self._append({"event": "session", "session_id": sid,
                          "annotator": annotator, "scheme": scheme,
                          "task_set": task_set, "seed": seed,
                          "order": order, "ts": self.clock()})
            return self.sessions[sid]

    def _session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise KeyError(f"unknown session {session_id!r}") from None

    def _is_complete(self, session: Session, task_id: str) -> bool:
        return all((session.annotator, session.task_set, task_id, m) in self._by_key
                   for m in SCHEME_MEASURES[session.scheme])

    def _cursor(self, session: Session) -> int:
        for i, task_id in enumerate(session.order):
            if not self._is_complete(session, task_id):
                return i
        return len(session.order)

    def next_task(self, session_id: str) -> dict:
        """Payload for the first incomplete task, or a done marker."""
        with self._lock:
            session = self._session(session_id)
            cursor = self._cursor(session)
            total = len(session.order)
            if cursor >= total:
                return {"done": True, "completed": total, "total": total}
            task = self.task_sets[session.task_set][session.order[cursor]]
            payload = {
                "done": False,
                "task_id": task.task_id,
                "scheme": session.scheme,
                "position": task.position,
                "pos": task.pos,
                "provenance": task.provenance,
                "progress": {"completed": cursor, "total": total},
            }
            if session.scheme == "info3":
                payload["tokens"] = list(task.tokens)
                payload["target"] = task.target_form
                payload["phase"] = "info3"
                payload["guideline"] = list(info3_guideline())
            elif (session_id, task.task_id) in self._revealed:
                payload["tokens"] = list(task.tokens)
                payload["target"] = task.target_form
                payload["phase"] = "info2"
            else:
                has_info1 = (session.annotator, session.task_set,
                             task.task_id, "info1") in self._by_key
                payload["tokens"] = task.masked_tokens()
                payload["phase"] = "reveal" if has_info1 else "info1"
            return payload

    def reveal(self, session_id: str, task_id: str) -> str:
        """Uncover the target after info1; idempotent."""
        with self._lock:
            session = self._session(session_id)
            task = self.task_sets[session.task_set].get(task_id)
            if task is None:
                raise KeyError(f"unknown task {task_id!r}")
            if session.scheme != "two_phase":
                raise ProtocolError("reveal applies to two_phase sessions only")
            if (session.annotator, session.task_set, task_id, "info1") not in self._by_key:
                raise ProtocolError(f"info1 not yet recorded for {task_id}")
            if (session_id, task_id) not in self._revealed:
                self._append({"event": "reveal", "session_id": session_id,
                              "task_id": task_id, "ts": self.clock()})
            return task.target_form

    def submit_score(self, session_id: str, task_id: str, measure: str,
                     score) -> int:
        with self._lock:
            session = self._session(session_id)
            tasks = self.task_sets[session.task_set]
            if task_id not in tasks:
                raise KeyError(f"unknown task {task_id!r}")
            if measure not in SCHEME_MEASURES[session.scheme]:
                raise ValueError(f"measure {measure!r} not valid for "
                                 f"scheme {session.scheme}")
            lo, hi = SCORE_RANGE[measure]
            if isinstance(score, bool) or not isinstance(score, int):
                raise ValueError(f"score must be an integer, got {score!r}")
            if not (lo <= score <= hi):
                raise ValueError(f"{measure} score must be in [{lo}, {hi}]")
            key = (session.annotator, session.task_set, task_id, measure)
            if key in self._by_key:
                raise ConflictError(f"{measure} already recorded for "
                                    f"({session.annotator}, {task_id})")
            cursor = self._cursor(session)
            if cursor >= len(session.order) or session.order[cursor] != task_id:
                raise ProtocolError(f"task {task_id} is not the session's "
                                    f"current task")
            if measure == "info2" and (session_id, task_id) not in self._revealed:
                raise ProtocolError("info2 requires the reveal step first")
            seq = self._seq + 1
            self._append({"event": "score", "seq": seq,
                          "session_id": session_id,
                          "annotator": session.annotator,
                          "task_set": session.task_set, "task_id": task_id,
                          "measure": measure, "score": score,
                          "ts": self.clock()})
            return seq

    # ----------------------------------------------------------- queries

    def _set_records(self, task_set: str) -> list[AnnotationRecord]:
        if task_set not in self.task_sets:
            raise KeyError(f"unknown task set {task_set!r}")
        return [r for r in self.records if r.task_set == task_set]

    def agreement(self, task_set: str, annotator_a: str, annotator_b: str,
                  measure: str) -> dict:
        """Spearman correlation between two annotators on shared tasks."""
        if measure not in MEASURES:
            raise ValueError(f"unknown measure {measure!r}")
        with self._lock:
            tasks = self.task_sets.get(task_set)
            if tasks is None:
                raise KeyError(f"unknown task set {task_set!r}")
            shared = []
            for task_id in sorted(tasks):
                a = self._by_key.get((annotator_a, task_set, task_id, measure))
                b = self._by_key.get((annotator_b, task_set, task_id, measure))
                if a is not None and b is not None:
                    shared.append((task_id, a.score, b.score))
            if len(shared) < 2:
                raise ValueError(f"only {len(shared)} shared {measure} tasks "
                                 f"for {annotator_a} and {annotator_b}, need 2")
            rho, degenerate = spearman([s[1] for s in shared],
                                       [s[2] for s in shared])
            per_pos = {}
            for pos in COARSE_TAGS:
                group = [s for s in shared if tasks[s[0]].pos == pos]
                if len(group) >= 2:
                    r, d = spearman([s[1] for s in group],
                                    [s[2] for s in group])
                    per_pos[pos] = {"rho": r, "degenerate": d, "n": len(group)}
            return {"measure": measure, "n": len(shared), "rho": rho,
                    "degenerate": degenerate, "per_pos": per_pos}

    def export(self, task_set: str) -> str:
        """All of a set's records as JSONL, in seq order."""
        with self._lock:
            return "".join(r.export_line() for r in self._set_records(task_set))


def import_records(store: AnnotationStore, stream, task_set: str) -> int:
    """Load an export stream into `store` under `task_set`.

    Sequence numbers are kept, so importing into a fresh store and
    exporting again reproduces the stream byte for byte.
    """
    n = 0
    with store._lock:
        tasks = store.task_sets.get(task_set)
        if tasks is None:
            raise KeyError(f"unknown task set {task_set!r}")
        for line_no, raw in enumerate(stream, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
                fields = {f: obj[f] for f in RECORD_FIELDS}
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad record: {exc}", line_no) from None
            if fields["task_id"] not in tasks:
                raise DataError(f"line {line_no}: task {fields['task_id']!r} "
                                f"not in set {task_set!r}")
            if fields["seq"] <= store._seq:
                raise IntegrityError(f"line {line_no}: seq {fields['seq']} "
                                     f"not above {store._seq}")
            store._append({"event": "score", "session_id": None,
                           "task_set": task_set, **fields})
            n += 1
    return n


def classifier_annotation_correlation(probs: dict[str, float], records,
                                      measure: str = "info3",
                                      permutations: int = 10000,
                                      seed: int = 0) -> tuple[float, float]:
    """Spearman rho and permutation p between classifier probabilities
    and human scores, over tasks present in both.

    Tasks scored by several annotators contribute their mean score.
    """
    by_task: dict[str, list[int]] = {}
    for rec in records:
        if rec.measure == measure:
            by_task.setdefault(rec.task_id, []).append(rec.score)
    shared = sorted(t for t in by_task if t in probs)
    if len(shared) < 2:
        raise ValueError(f"only {len(shared)} tasks have both a probability "
                         f"and a {measure} score, need 2")
    x = [probs[t] for t in shared]
    y = [sum(by_task[t]) / len(by_task[t]) for t in shared]
    rho, _ = spearman(x, y)
    p = spearman_pvalue(x, y, permutations=permutations, seed=seed)
    return rho, p


# --------------------------------------------------------------- HTTP app


def build_app(store: AnnotationStore):
    """FastAPI wrapper translating store exceptions to HTTP statuses."""
    from fastapi import Body, FastAPI, Query
    from fastapi.responses import JSONResponse, PlainTextResponse

    app = FastAPI(title="sentence annotation service")

    def fail(status: int, kind: str, detail: str):
        return JSONResponse({"error": kind, "detail": detail},
                            status_code=status)

    def run(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except KeyError as exc:
            return fail(404, "not-found", str(exc.args[0]) if exc.args else "missing")
        except ConflictError as exc:
            return fail(409, "conflict", str(exc))
        except ProtocolError as exc:
            return fail(409, "protocol", str(exc))
        except ValueError as exc:
            return fail(400, "validation", str(exc))

    @app.post("/api/sessions")
    def create_session(body: dict = Body(...)):
        missing = [k for k in ("annotator", "scheme", "task_set") if k not in body]
        if missing:
            return fail(400, "validation", f"missing fields: {', '.join(missing)}")
        seed = body.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            return fail(400, "validation", "seed must be an integer")
        result = run(store.create_session, body["annotator"], body["scheme"],
                     body["task_set"], seed)
        if isinstance(result, Session):
            return {"session_id": result.session_id}
        return result

    @app.get("/api/sessions/{session_id}/next")
    def next_task(session_id: str):
        return run(store.next_task, session_id)

    @app.post("/api/sessions/{session_id}/reveal")
    def reveal(session_id: str, body: dict = Body(...)):
        if "task_id" not in body:
            return fail(400, "validation", "missing field: task_id")
        result = run(store.reveal, session_id, body["task_id"])
        if isinstance(result, str):
            return {"target": result}
        return result

    @app.post("/api/sessions/{session_id}/scores")
    def submit(session_id: str, body: dict = Body(...)):
        missing = [k for k in ("task_id", "measure", "score") if k not in body]
        if missing:
            return fail(400, "validation", f"missing fields: {', '.join(missing)}")
        result = run(store.submit_score, session_id, body["task_id"],
                     body["measure"], body["score"])
        if isinstance(result, int):
            return {"seq": result}
        return result

    @app.get("/api/agreement")
    def agreement(a: str, b: str, measure: str,
                  task_set: str = Query(alias="set")):
        return run(store.agreement, task_set, a, b, measure)

    @app.get("/api/export")
    def export(task_set: str = Query(alias="set")):
        result = run(store.export, task_set)
        if isinstance(result, str):
            return PlainTextResponse(result, media_type="application/x-ndjson")
        return result

    return app
