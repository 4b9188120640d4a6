"""Persist result sets to the `.wout` file and read them back bit-stably."""

from __future__ import annotations

from . import fileio
from .fileio import IoError, ParseError, VersionMismatch  # re-exported  # noqa: F401
from .model import ResultRecord, ResultSet, ResultStatus

RESULTS_VERSION = 1


def write_results(rs: ResultSet, path) -> None:
    records = {}
    for ordinal, record in rs.records.items():
        obj: dict = {"status": record.status.value}
        fileio.put_bytes_field(obj, "latex", record.latex)
        if record.files is not None:
            obj["files"] = list(record.files)
        if record.error_message is not None:
            obj["error"] = record.error_message
        if record.conversion_requested:
            obj["conversion_requested"] = True
        records[str(ordinal)] = obj
    fileio.dump_json_atomic(
        {
            "version": RESULTS_VERSION,
            "doc_hash": rs.doc_hash,
            "backend_id": rs.backend_id,
            "records": records,
        },
        path,
    )


def read_results(path) -> ResultSet:
    doc = fileio.load_json_document(path, RESULTS_VERSION)
    try:
        doc_hash = doc["doc_hash"]
        backend_id = doc["backend_id"]
        records_raw = doc["records"]
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc.args[0]!r}") from None
    if (
        not isinstance(doc_hash, str)
        or not isinstance(backend_id, str)
        or not isinstance(records_raw, dict)
    ):
        raise ParseError(f"{path}: malformed results document")
    records: dict[int, ResultRecord] = {}
    for key, obj in records_raw.items():
        try:
            ordinal = int(key)
        except ValueError:
            raise ParseError(f"{path}: record key {key!r} is not an ordinal") from None
        if ordinal < 0 or str(ordinal) != key:
            raise ParseError(f"{path}: record key {key!r} is not an ordinal")
        records[ordinal] = _parse_record(ordinal, obj, path)
    return ResultSet(records, doc_hash, backend_id)


def _parse_record(ordinal: int, obj, path) -> ResultRecord:
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: record {ordinal} must be an object")
    try:
        status = ResultStatus(obj.get("status"))
    except ValueError:
        raise ParseError(
            f"{path}: record {ordinal} has unknown status {obj.get('status')!r}"
        ) from None
    latex = fileio.get_bytes_field(obj, "latex")
    files_raw = obj.get("files")
    files: tuple[str, ...] | None = None
    if files_raw is not None:
        if not isinstance(files_raw, list) or not all(
            isinstance(item, str) for item in files_raw
        ):
            raise ParseError(f"{path}: record {ordinal} files must be strings")
        files = tuple(files_raw)
    error_message = obj.get("error")
    if error_message is not None and not isinstance(error_message, str):
        raise ParseError(f"{path}: record {ordinal} error must be a string")
    conversion = obj.get("conversion_requested", False)
    if not isinstance(conversion, bool):
        raise ParseError(f"{path}: record {ordinal} conversion flag must be a boolean")
    return ResultRecord(
        ordinal=ordinal,
        status=status,
        latex=latex,
        files=files,
        error_message=error_message,
        conversion_requested=conversion,
    )
