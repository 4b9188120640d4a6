"""Run a job plan against a backend in strict document order.

One persistent backend session per run, so later jobs observe state built
by earlier ones.  Failures are contained: a failing job records an Error
and execution continues; a dead backend marks every remaining job as Error
and returns the partial results.  Only a protocol violation aborts the run,
because a lying backend cannot be trusted for anything that follows.
"""

from __future__ import annotations

from .backends import Backend, BackendCrash, BackendRequest, ProtocolViolation
from .model import DirectiveKind, Job, ResultRecord, ResultSet, ResultStatus
from .planner import JobPlan
from .plots import plot_save_path


def execute(
    plan: JobPlan,
    backend: Backend,
    cache: ResultSet | None = None,
    plots_dir: str = "sage-plots",
) -> ResultSet:
    if cache is not None and cache.doc_hash == plan.doc_hash:
        records = {}
        for job in plan.jobs:
            prior = cache.records.get(job.ordinal)
            if prior is None:
                prior = ResultRecord(job.ordinal, ResultStatus.SKIPPED)
            records[job.ordinal] = prior
        return ResultSet(records, plan.doc_hash, cache.backend_id)

    records: dict[int, ResultRecord] = {}
    crash_message: str | None = None
    next_id = 1
    backend.start()
    try:
        for job in plan.jobs:
            if job.paused:
                records[job.ordinal] = ResultRecord(job.ordinal, ResultStatus.SKIPPED)
                continue
            if crash_message is not None:
                records[job.ordinal] = ResultRecord(
                    job.ordinal, ResultStatus.ERROR, error_message=crash_message
                )
                continue
            try:
                record, next_id = _run_job(job, backend, next_id, plots_dir)
            except BackendCrash as exc:
                crash_message = f"backend crashed: {exc.message}"
                record = ResultRecord(
                    job.ordinal, ResultStatus.ERROR, error_message=crash_message
                )
            records[job.ordinal] = record
    finally:
        backend.close()
    return ResultSet(records, plan.doc_hash, backend.backend_id)


def _run_job(
    job: Job, backend: Backend, next_id: int, plots_dir: str
) -> tuple[ResultRecord, int]:
    try:
        code = job.code.decode("utf-8")
    except UnicodeDecodeError:
        record = ResultRecord(
            job.ordinal, ResultStatus.ERROR, error_message="job code is not valid UTF-8"
        )
        return record, next_id

    if job.kind is DirectiveKind.INLINE_EXPR:
        response = backend.request(BackendRequest(next_id, "eval", code))
        next_id += 1
        if not response.ok:
            return _error(job, response.error), next_id
        if response.latex is None:
            raise ProtocolViolation(f"eval response {response.id} lacks 'latex'")
        record = ResultRecord(
            job.ordinal, ResultStatus.OK, latex=response.latex.encode("utf-8")
        )
        return record, next_id

    if job.kind in (DirectiveKind.CODE_BLOCK, DirectiveKind.SILENT_BLOCK):
        response = backend.request(BackendRequest(next_id, "exec", code))
        next_id += 1
        if not response.ok:
            return _error(job, response.error), next_id
        return ResultRecord(job.ordinal, ResultStatus.OK), next_id

    if job.kind is DirectiveKind.PLOT:
        files: list[str] = []
        for fmt in job.plot_format_requests:
            save_path = plot_save_path(plots_dir, job.ordinal, fmt)
            response = backend.request(
                BackendRequest(next_id, "plot", code, format=fmt, save_path=save_path)
            )
            next_id += 1
            if not response.ok:
                return _error(job, response.error), next_id
            if response.files is None:
                raise ProtocolViolation(f"plot response {response.id} lacks 'files'")
            files.extend(response.files)
        record = ResultRecord(
            job.ordinal,
            ResultStatus.OK,
            files=tuple(files),
            conversion_requested=job.convert_to_eps,
        )
        return record, next_id

    raise ValueError(f"job {job.ordinal} has non-executable kind {job.kind!r}")


def _error(job: Job, message: str | None) -> ResultRecord:
    return ResultRecord(
        job.ordinal,
        ResultStatus.ERROR,
        error_message=message or "backend reported failure without a message",
    )
