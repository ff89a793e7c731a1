"""HTTP API over the engine: datasets, table operations, plots, questions,
and recommendations.

Datasets live in memory as an immutable base table plus an operation
history; every derived state is reproducible by replaying the history, which
is what undo does.  Raw records are discarded at upload time: every response
is aggregate-only.  Mutations on one dataset serialize behind a per-dataset
lock; reads of immutable tables need none.
"""

from __future__ import annotations

import json
import mimetypes
import os
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from . import freqtable as ft
from .errors import (
    InvalidRequest,
    NoEligibleTherapy,
    NothingToUndo,
    UnknownDataset,
    WatsonError,
)
from .ingest import apply_codebook, infer_schema, load_codebook, parse_csv
from .knn import (
    Cohort,
    cohort_from_json,
    cohort_to_json,
    load_cohort,
    parse_feature_schema,
    patient_from_json,
    recommend,
)
from .plots import PlotOptions, PlotSpec, render_bar1, render_multipanel3, render_panel2
from .questions import generate_questions


def apply_table_op(table: ft.FreqTable, op: dict) -> ft.FreqTable:
    """Apply one history entry; unknown or malformed ops raise InvalidRequest."""
    try:
        kind = op["kind"]
        if kind == "merge":
            return ft.merge_categories(table, op["var"], op["cats"], op["new_label"])
        if kind == "remove":
            return ft.remove_category(table, op["var"], op["cat"])
        if kind == "add":
            return ft.add_category(table, op["var"], op["label"])
        if kind == "marginalize":
            return ft.marginalize(table, op["keep"])
        if kind == "permute":
            return ft.permute_axes(table, op["order"])
    except KeyError as exc:
        raise InvalidRequest(f"op is missing field {exc}") from exc
    raise InvalidRequest(f"unknown op kind {op.get('kind')!r}")


def replay(base: ft.FreqTable, history: list[dict]) -> ft.FreqTable:
    table = base
    for op in history:
        table = apply_table_op(table, op)
    return table


class DatasetEntry:
    def __init__(self, dataset_id: str, base: ft.FreqTable):
        self.id = dataset_id
        self.base = base
        self.history: list[dict] = []
        self.current = base
        self.lock = threading.Lock()

    def summary(self) -> dict:
        variables = []
        for v in self.current.schema.variables:
            entry: dict = {"name": v.name, "categories": list(v.categories)}
            if v.scores is not None:
                entry["scores"] = list(v.scores)
            variables.append(entry)
        return {
            "id": self.id,
            "variables": variables,
            "total": self.current.total,
            "history": list(self.history),
        }


class CohortEntry:
    def __init__(self, cohort_id: str, cohort: Cohort, direction: str):
        self.id = cohort_id
        self.cohort = cohort
        self.direction = direction


class Registry:
    """In-memory dataset/cohort store with optional JSON snapshots."""

    def __init__(self):
        self._lock = threading.Lock()
        self._datasets: dict[str, DatasetEntry] = {}
        self._cohorts: dict[str, CohortEntry] = {}
        self._seq = 0

    def _next_id(self, prefix: str) -> str:
        with self._lock:
            self._seq += 1
            return f"{prefix}{self._seq}"

    # datasets ---------------------------------------------------------------

    def create_dataset(
        self,
        csv_text: str,
        codebook: dict | None = None,
        delimiter: str = ",",
        has_header: bool = True,
    ) -> DatasetEntry:
        rs = parse_csv(csv_text, delimiter=delimiter, has_header=has_header)
        schema = infer_schema(rs)
        if codebook:
            schema = apply_codebook(schema, load_codebook(codebook))
        base = ft.build_table(rs, schema)
        entry = DatasetEntry(self._next_id("ds"), base)
        with self._lock:
            self._datasets[entry.id] = entry
        return entry

    def dataset(self, dataset_id: str) -> DatasetEntry:
        entry = self._datasets.get(dataset_id)
        if entry is None:
            raise UnknownDataset(f"no dataset {dataset_id!r}", id=dataset_id)
        return entry

    def apply_op(self, dataset_id: str, op: dict) -> DatasetEntry:
        entry = self.dataset(dataset_id)
        with entry.lock:
            entry.current = apply_table_op(entry.current, op)
            entry.history.append(op)
        return entry

    def undo(self, dataset_id: str) -> DatasetEntry:
        entry = self.dataset(dataset_id)
        with entry.lock:
            if not entry.history:
                raise NothingToUndo("history is empty", id=dataset_id)
            entry.history.pop()
            entry.current = replay(entry.base, entry.history)
        return entry

    # cohorts ----------------------------------------------------------------

    def create_cohort(self, csv_text: str, schema_obj: dict) -> CohortEntry:
        rs = parse_csv(csv_text)
        schema, direction = parse_feature_schema(schema_obj)
        cohort = load_cohort(rs, schema)
        entry = CohortEntry(self._next_id("co"), cohort, direction)
        with self._lock:
            self._cohorts[entry.id] = entry
        return entry

    def cohort(self, cohort_id: str) -> CohortEntry:
        entry = self._cohorts.get(cohort_id)
        if entry is None:
            raise UnknownDataset(f"no cohort {cohort_id!r}", id=cohort_id)
        return entry

    # snapshots ----------------------------------------------------------------

    def save_snapshots(self, data_dir: str) -> None:
        os.makedirs(data_dir, exist_ok=True)
        for entry in self._datasets.values():
            payload = {
                "type": "dataset",
                "id": entry.id,
                "base": entry.base.to_json(),
                "history": entry.history,
            }
            _atomic_write_json(os.path.join(data_dir, f"{entry.id}.json"), payload)
        for centry in self._cohorts.values():
            payload = {
                "type": "cohort",
                "id": centry.id,
                "cohort": cohort_to_json(centry.cohort, centry.direction),
            }
            _atomic_write_json(os.path.join(data_dir, f"{centry.id}.json"), payload)

    def load_snapshots(self, data_dir: str) -> int:
        if not os.path.isdir(data_dir):
            return 0
        loaded = 0
        for name in sorted(os.listdir(data_dir)):
            if not name.endswith(".json"):
                continue
            with open(os.path.join(data_dir, name), encoding="utf-8") as fh:
                payload = json.load(fh)
            if payload.get("type") == "dataset":
                entry = DatasetEntry(payload["id"], ft.FreqTable.from_json(payload["base"]))
                entry.history = list(payload["history"])
                entry.current = replay(entry.base, entry.history)
                self._datasets[entry.id] = entry
            elif payload.get("type") == "cohort":
                cohort, direction = cohort_from_json(payload["cohort"])
                self._cohorts[payload["id"]] = CohortEntry(payload["id"], cohort, direction)
            else:
                continue
            loaded += 1
            num = re.match(r"(?:ds|co)(\d+)$", payload["id"])
            if num:
                self._seq = max(self._seq, int(num.group(1)))
        return loaded


def _atomic_write_json(path: str, obj: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
    os.replace(tmp, path)


def default_bar_var(table: ft.FreqTable, candidates: list[str]) -> str:
    """The candidate with fewer categories; ties go to table variable order."""
    return min(
        candidates,
        key=lambda name: (table.variable(name).n_categories, table.axis(name)),
    )


_STATUS_BY_CODE = {
    "UnknownDataset": 404,
    "NoEligibleTherapy": 422,
}


class WatsonHandler(BaseHTTPRequestHandler):
    server_version = "watson/0.1"
    protocol_version = "HTTP/1.1"

    # quiet by default; tests and the CLI can flip this
    verbose = False

    def log_message(self, fmt, *args):
        if self.verbose:
            super().log_message(fmt, *args)

    @property
    def registry(self) -> Registry:
        return self.server.registry

    # plumbing ----------------------------------------------------------------

    def _drain_body(self) -> None:
        """Consume the request body exactly once, up front.

        Handlers that ignore their body (e.g. undo) must not leave unread
        bytes on a keep-alive connection, or they would be parsed as the
        next request line.
        """
        length = int(self.headers.get("Content-Length", "0") or "0")
        self._raw_body = self.rfile.read(length) if length else b""

    def _read_body(self) -> bytes:
        return self._raw_body

    def _read_json(self) -> dict:
        body = self._read_body()
        try:
            obj = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InvalidRequest(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise InvalidRequest("request body must be a JSON object")
        return obj

    def _send(self, status: int, payload: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, obj: dict) -> None:
        self._send(
            status,
            json.dumps(obj, separators=(",", ":")).encode("utf-8"),
            "application/json; charset=utf-8",
        )

    def _send_error_obj(self, exc: WatsonError) -> None:
        status = _STATUS_BY_CODE.get(exc.code, 400)
        self._send_json(status, exc.to_json())

    # routing -----------------------------------------------------------------

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def _route(self, method: str) -> None:
        url = urlsplit(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        self._drain_body()
        try:
            handler = self._resolve(method, parts)
            if handler is None:
                raise UnknownDataset(f"no route for {method} {url.path}")
            handler(parts, query)
        except WatsonError as exc:
            self._send_error_obj(exc)
        except (ValueError, TypeError) as exc:  # bad numbers, bad shapes
            self._send_error_obj(InvalidRequest(str(exc)))
        except BrokenPipeError:
            pass
        except Exception as exc:  # keep the server alive; surface the cause
            self._send_json(500, {"code": "InternalError", "message": str(exc)})

    def _resolve(self, method: str, parts: list[str]):
        if method == "POST":
            if parts == ["datasets"]:
                return self._post_dataset
            if len(parts) == 3 and parts[0] == "datasets" and parts[2] == "ops":
                return self._post_op
            if len(parts) == 4 and parts[0] == "datasets" and parts[2:] == ["ops", "undo"]:
                return self._post_undo
            if parts == ["cohorts"]:
                return self._post_cohort
            if len(parts) == 3 and parts[0] == "cohorts" and parts[2] == "recommend":
                return self._post_recommend
        if method == "GET":
            if len(parts) == 3 and parts[0] == "datasets" and parts[2] == "schema":
                return self._get_schema
            if len(parts) == 3 and parts[0] == "datasets" and parts[2] == "plot":
                return self._get_plot
            if len(parts) == 3 and parts[0] == "datasets" and parts[2] == "questions":
                return self._get_questions
            if self.server.ui_dir is not None:
                return self._get_static
        return None

    # dataset endpoints ---------------------------------------------------------

    def _post_dataset(self, parts, query) -> None:
        ctype = (self.headers.get("Content-Type") or "").split(";")[0].strip()
        if ctype == "application/json":
            obj = self._read_json()
            if "csv" not in obj:
                raise InvalidRequest("missing 'csv' field")
            entry = self.registry.create_dataset(
                obj["csv"],
                codebook=obj.get("codebook"),
                delimiter=obj.get("delimiter", ","),
                has_header=bool(obj.get("has_header", True)),
            )
        else:
            entry = self.registry.create_dataset(self._read_body().decode("utf-8", "strict"))
        self._send_json(201, entry.summary())

    def _get_schema(self, parts, query) -> None:
        entry = self.registry.dataset(parts[1])
        self._send_json(200, entry.summary())

    def _post_op(self, parts, query) -> None:
        op = self._read_json()
        entry = self.registry.apply_op(parts[1], op)
        self._send_json(200, entry.summary())

    def _post_undo(self, parts, query) -> None:
        entry = self.registry.undo(parts[1])
        self._send_json(200, entry.summary())

    def _plot_inputs(self, entry: DatasetEntry, query: dict):
        names = [v for v in (query.get("vars") or "").split(",") if v]
        if not (1 <= len(names) <= 3):
            raise InvalidRequest("vars must list 1 to 3 variable names")
        table = entry.current
        sub = ft.marginalize(table, names)
        options = PlotOptions(
            show_scales=query.get("scales", "1") not in ("0", "false"),
            title=query.get("title", ""),
        )
        return names, sub, options

    def _get_plot(self, parts, query) -> None:
        entry = self.registry.dataset(parts[1])
        names, sub, options = self._plot_inputs(entry, query)
        spec = PlotSpec(kind="", variables=tuple(names), options=options)
        if len(names) == 1:
            doc = render_bar1(sub, spec)
        elif len(names) == 2:
            bar = query.get("bar") or default_bar_var(sub, names)
            doc = render_panel2(sub, bar, spec)
        else:
            panel = query.get("panel") or names[2]
            rest = [n for n in names if n != panel]
            bar = query.get("bar") or default_bar_var(sub, rest)
            color = next(n for n in names if n not in (panel, bar))
            doc = render_multipanel3(sub, bar, color, panel, spec)
        self._send(200, doc.xml.encode("utf-8"), "image/svg+xml; charset=utf-8")

    def _get_questions(self, parts, query) -> None:
        entry = self.registry.dataset(parts[1])
        names = [v for v in (query.get("vars") or "").split(",") if v]
        if len(names) != 2:
            raise InvalidRequest("questions need exactly 2 variables")
        sub = ft.marginalize(entry.current, names)
        bar = query.get("bar") or default_bar_var(sub, names)
        max_q = int(query.get("max", "5"))
        qs = generate_questions(sub, bar, max_q=max_q)
        self._send_json(200, {"questions": [q.to_json() for q in qs]})

    # cohort endpoints ---------------------------------------------------------

    def _post_cohort(self, parts, query) -> None:
        obj = self._read_json()
        if "csv" not in obj or "schema" not in obj:
            raise InvalidRequest("cohort upload needs 'csv' and 'schema'")
        entry = self.registry.create_cohort(obj["csv"], obj["schema"])
        self._send_json(
            201,
            {
                "id": entry.id,
                "therapies": list(entry.cohort.therapies),
                "n_patients": len(entry.cohort.patients),
                "direction": entry.direction,
            },
        )

    def _post_recommend(self, parts, query) -> None:
        entry = self.registry.cohort(parts[1])
        obj = self._read_json()
        if "patient" not in obj:
            raise InvalidRequest("missing 'patient' field")
        patient = patient_from_json(obj["patient"], entry.cohort.schema)
        rec = recommend(
            entry.cohort,
            patient,
            k=int(obj.get("k", 30)),
            k_min=int(obj.get("k_min", 5)),
            direction=obj.get("direction", entry.direction),
        )
        self._send_json(200, rec.to_json())

    # static UI ------------------------------------------------------------------

    def _get_static(self, parts, query) -> None:
        root = os.path.realpath(self.server.ui_dir)
        rel = "/".join(parts) or "index.html"
        path = os.path.realpath(os.path.join(root, rel))
        if os.path.isdir(path):
            path = os.path.join(path, "index.html")
        if not path.startswith(root + os.sep) and path != root:
            raise UnknownDataset("not found")
        if not os.path.isfile(path):
            raise UnknownDataset(f"no such file {rel!r}")
        ctype = mimetypes.guess_type(path)[0] or "application/octet-stream"
        with open(path, "rb") as fh:
            self._send(200, fh.read(), ctype)


class WatsonServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], registry: Registry, ui_dir: str | None = None):
        super().__init__(address, WatsonHandler)
        self.registry = registry
        self.ui_dir = ui_dir


def run(
    host: str = "127.0.0.1",
    port: int = 8000,
    ui_dir: str | None = None,
    data_dir: str | None = None,
    verbose: bool = True,
) -> None:
    """Serve until interrupted; snapshots load at startup and save at shutdown."""
    registry = Registry()
    data_dir = data_dir or os.environ.get("WATSON_DATA_DIR")
    if data_dir:
        n = registry.load_snapshots(data_dir)
        if n and verbose:
            print(f"loaded {n} snapshot(s) from {data_dir}", flush=True)
    WatsonHandler.verbose = verbose
    server = WatsonServer((host, port), registry, ui_dir=ui_dir)
    actual_port = server.server_address[1]
    if verbose:
        print(f"listening on http://{host}:{actual_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        if data_dir:
            registry.save_snapshots(data_dir)
