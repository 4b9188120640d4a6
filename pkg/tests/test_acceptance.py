"""Acceptance suite.

Each test covers one release criterion and reports a PASS/FAIL line in the
terminal summary (see conftest).  These tests intentionally overlap the unit
suite: they are the contract, the unit tests are the diagnosis.
"""

import functools
import random
import time

import acceptance_report
import census_oracle
import program_gen
import pytest

from weavetex import (
    BuiltinBackend,
    DirectiveKind,
    PLOT_STUB_PAYLOAD,
    PlotSpec,
    UnknownFormat,
    cli,
    execute,
    includegraphics_text,
    plan,
    resolve_formats,
    scan_document,
)
from weavetex.minilang import eval_expression, exec_statements, render
from weavetex.model import ResultSet, ResultStatus

CLOCK = (2009, 1, 1)


def criterion(name):
    """Record the named criterion as passed iff the test body completes."""

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            ok = False
            try:
                fn(*args, **kwargs)
                ok = True
            finally:
                acceptance_report.record(name, ok)

        return wrapper

    return decorate


class RecordingBackend(BuiltinBackend):
    def __init__(self, base_dir="."):
        super().__init__(base_dir)
        self.requests = []

    def request(self, req):
        self.requests.append(req)
        return super().request(req)


def kind_counts(scan):
    counts = dict.fromkeys(
        ("InlineExpr", "CodeBlock", "SilentBlock", "Plot", "Pause", "Unpause"), 0
    )
    names = {
        DirectiveKind.INLINE_EXPR: "InlineExpr",
        DirectiveKind.CODE_BLOCK: "CodeBlock",
        DirectiveKind.SILENT_BLOCK: "SilentBlock",
        DirectiveKind.PLOT: "Plot",
        DirectiveKind.PAUSE: "Pause",
        DirectiveKind.UNPAUSE: "Unpause",
    }
    for directive in scan.directives():
        counts[names[directive.kind]] += 1
    return counts


@criterion("corpus census")
def test_corpus_census(demo_bytes, article_bytes):
    start = time.perf_counter()
    demo_counts = kind_counts(scan_document(demo_bytes))
    article_counts = kind_counts(scan_document(article_bytes))
    elapsed = time.perf_counter() - start

    assert demo_counts == {
        "InlineExpr": 16,
        "CodeBlock": 11,
        "SilentBlock": 3,
        "Plot": 10,
        "Pause": 1,
        "Unpause": 1,
    }
    assert article_counts == {
        "InlineExpr": 0,
        "CodeBlock": 1,
        "SilentBlock": 0,
        "Plot": 0,
        "Pause": 0,
        "Unpause": 0,
    }

    # cross-check against the regex-based oracle, which shares no code with
    # the scanner
    assert demo_counts == census_oracle.census(demo_bytes)
    assert article_counts == census_oracle.census(article_bytes)

    # the article's lone directive is an empty code block
    (block,) = scan_document(article_bytes).directives()
    assert block.kind is DirectiveKind.CODE_BLOCK
    assert block.code == b""

    assert elapsed < 1.0


@criterion("lossless scan")
def test_lossless_scan(demo_bytes, article_bytes):
    def reassembles(data):
        assert scan_document(data).reconstruct() == data

    reassembles(demo_bytes)
    reassembles(article_bytes)

    rng = random.Random(0xC0FFEE)
    for _ in range(1000):
        reassembles(rng.randbytes(rng.randrange(0, 400)))


@criterion("pause semantics")
def test_pause_semantics(demo_bytes, tmp_path):
    jp = plan(scan_document(demo_bytes), CLOCK)
    assert len(jp.jobs) == 40

    paused = [j for j in jp.jobs if j.paused]
    assert len(paused) == 3
    by_kind = {j.kind: j for j in paused}
    assert by_kind[DirectiveKind.INLINE_EXPR].code == b"factor(2^325 + 1)"
    assert b"time.sleep(15)" in by_kind[DirectiveKind.CODE_BLOCK].code
    assert by_kind[DirectiveKind.PLOT].code.startswith(b"plot(2*sin(x^2)")

    backend = RecordingBackend(tmp_path)
    execute(jp, backend)
    # plots issue one request per requested file format, everything else one
    expected_requests = sum(
        max(len(j.plot_format_requests), 1)
        for j in jp.jobs
        if not j.paused
    )
    assert len(backend.requests) == expected_requests
    sent = {req.code.encode() for req in backend.requests}
    assert all(j.code not in sent for j in paused)


@criterion("end-to-end arithmetic")
def test_end_to_end_arithmetic(tmp_path, capsys):
    src = (
        b"\\begin{sagesilent}\n"
        b"base = 2\n"
        b"\\end{sagesilent}\n"
        b"$\\sage{2+2}$\n"
        b"year: \\sage{ \\the\\year \\percent 42 }\n"
        b"\\begin{sageblock}\n"
        b"n = base ^ 5\n"
        b"\\end{sageblock}\n"
        b"total: \\sage{n + base}\n"
        b"\\sageplot[scale=.2]{n}\n"
    )
    expected = (
        b"$4$\n"
        b"year: 35\n"
        b"\\begin{verbatim}\n"
        b"n = base ^ 5\n"
        b"\\end{verbatim}\n"
        b"total: 34\n"
        b"\\includegraphics[scale=.2]{sage-plots/plot-5}\n"
    )

    start = time.perf_counter()
    outputs = []
    for name in ("one", "two"):
        workdir = tmp_path / name
        workdir.mkdir()
        doc = workdir / "doc.tex"
        doc.write_bytes(src)
        assert cli.main(["build", str(doc), "--clock", "2009-1-1"]) == 0
        outputs.append(doc.with_suffix(".resolved.tex").read_bytes())
        for ext in ("pdf", "eps"):
            stub = workdir / "sage-plots" / f"plot-5.{ext}"
            assert stub.read_bytes() == PLOT_STUB_PAYLOAD
    elapsed = time.perf_counter() - start
    capsys.readouterr()

    # the date expansion happens at plan time, so the job carries literal text
    jp = plan(scan_document(src), CLOCK)
    assert jp.jobs[2].code == b"2009 % 42"

    assert outputs[0] == outputs[1] == expected
    assert list(scan_document(outputs[0]).directives()) == []
    assert elapsed < 1.0


@criterion("oracle equivalence")
def test_oracle_equivalence(tmp_path):
    for seed in range(200):
        rng = random.Random(31337 + seed)
        events = program_gen.gen_events(rng)
        doc = program_gen.doc_from_events(events, rng)

        env = {}
        expected = []
        for kind, code in events:
            if kind == "exec":
                exec_statements(code, env)
            else:
                expected.append(render(eval_expression(code, env)))

        jp = plan(scan_document(doc), CLOCK)
        rs = execute(jp, BuiltinBackend(tmp_path))
        evals = [
            rs.records[j.ordinal]
            for j in jp.jobs
            if j.kind is DirectiveKind.INLINE_EXPR
        ]
        assert all(r.status is ResultStatus.OK for r in evals), doc
        assert [r.latex.decode() for r in evals] == expected


@criterion("cache behavior")
def test_cache_behavior(tmp_path):
    src = (
        b"\\begin{sagesilent}\nv = 3\n\\end{sagesilent}\n"
        b"\\sage{v*2} \\sage{v+1}\n"
    )
    jp = plan(scan_document(src), CLOCK)
    first = RecordingBackend(tmp_path)
    rs = execute(jp, first)
    assert len(first.requests) == 3

    # unchanged document: everything served from the prior results
    again = RecordingBackend(tmp_path)
    cached = execute(jp, again, cache=rs)
    assert len(again.requests) == 0
    assert cached.records == rs.records

    # one code byte changed: full re-execution
    edited = plan(scan_document(src.replace(b"v*2", b"v*9")), CLOCK)
    third = RecordingBackend(tmp_path)
    fresh = execute(edited, third, cache=rs)
    assert len(third.requests) == 3
    assert fresh.records[1].latex == b"27"


@criterion("plot contract")
def test_plot_contract():
    assert resolve_formats(None).formats == ("pdf", "eps")
    assert resolve_formats(None).convert_to_eps is False
    assert resolve_formats("png").formats == ("png",)
    assert resolve_formats("eps").formats == ("eps",)
    assert resolve_formats("pdf").formats == ("pdf",)
    assert resolve_formats("imagemagick").formats == ("png",)
    assert resolve_formats("imagemagick").convert_to_eps is True
    with pytest.raises(UnknownFormat):
        resolve_formats("webp")

    def text(ordinal, options):
        spec = PlotSpec(
            ordinal=ordinal,
            formats=("pdf", "eps"),
            gfx_options=options,
            out_dir="sage-plots",
        )
        return includegraphics_text(spec)

    assert text(3, b"scale=.2") == b"\\includegraphics[scale=.2]{sage-plots/plot-3}"
    assert text(0, b"") == b"\\includegraphics{sage-plots/plot-0}"
    assert (
        text(5, b"angle=45, width=.5\\textwidth")
        == b"\\includegraphics[angle=45, width=.5\\textwidth]{sage-plots/plot-5}"
    )
