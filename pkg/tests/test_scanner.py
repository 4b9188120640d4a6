"""Scanner behavior: extraction, opacity, losslessness, and error reporting."""

import random

import pytest

import census_oracle
from weavetex.model import Directive, DirectiveKind
from weavetex.scanner import (
    ScanOutput,
    UnbalancedGroup,
    UnterminatedEnvironment,
    UnterminatedVerb,
    read_group,
    scan_document,
    skip_opaque,
)


def kinds(scan: ScanOutput) -> list[DirectiveKind]:
    return [d.kind for d in scan.directives()]


def only_directive(scan: ScanOutput) -> Directive:
    ds = list(scan.directives())
    assert len(ds) == 1
    return ds[0]


class TestInline:
    def test_basic(self):
        scan = scan_document(rb"$2+2=\sage{2+2}$")
        d = only_directive(scan)
        assert d.kind is DirectiveKind.INLINE_EXPR
        assert d.code == b"2+2"
        assert d.ordinal == 0

    def test_spaces_kept_verbatim(self):
        # trimming is the planner's job
        d = only_directive(scan_document(rb"\sage{ f.taylor(x, 0, 10) }"))
        assert d.code == b" f.taylor(x, 0, 10) "

    def test_nested_braces(self):
        d = only_directive(scan_document(rb"\sage{matrix([[1,2],[3,4]])}"))
        assert d.code == b"matrix([[1,2],[3,4]])"

    def test_escaped_brace_inside_group(self):
        d = only_directive(scan_document(rb"\sage{a\}b}"))
        assert d.code == rb"a\}b"

    def test_longer_control_words_do_not_match(self):
        scan = scan_document(rb"\sagetexindent{2em} and \sagestr{x}")
        assert kinds(scan) == []

    def test_control_symbol_backslash_backslash(self):
        # "\\sage{1}" is a \\ control symbol followed by plain text
        scan = scan_document(b"\\\\sage{1}")
        assert kinds(scan) == []

    def test_whitespace_before_brace(self):
        d = only_directive(scan_document(b"\\sage {1+1}"))
        assert d.code == b"1+1"

    def test_missing_brace(self):
        with pytest.raises(UnbalancedGroup):
            scan_document(rb"\sage x")

    def test_unterminated_group_reports_line(self):
        with pytest.raises(UnbalancedGroup) as info:
            scan_document(b"line one\n\\sage{1+(\n")
        assert info.value.line == 2


class TestBlocks:
    def test_block_body_and_span(self):
        src = b"pre\n\\begin{sageblock}\n 1+1\n\\end{sageblock}\npost\n"
        d = only_directive(scan_document(src))
        assert d.kind is DirectiveKind.CODE_BLOCK
        assert d.code == b" 1+1\n"
        # span swallows the newline after \end so removal leaves no blank line
        assert src[d.span.byte_start : d.span.byte_end].endswith(b"\\end{sageblock}\n")

    def test_silent_block(self):
        src = b"\\begin{sagesilent}\nx = 1\n\\end{sagesilent}"
        d = only_directive(scan_document(src))
        assert d.kind is DirectiveKind.SILENT_BLOCK
        assert d.code == b"x = 1\n"

    def test_empty_body(self):
        src = b"\\begin{sageblock}\n\\end{sageblock}\n"
        d = only_directive(scan_document(src))
        assert d.code == b""

    def test_end_marker_line_is_not_body(self):
        # bodies are line-aligned: anything on the \end line is dropped
        d = only_directive(scan_document(b"\\begin{sageblock}\nx=1\\end{sageblock}"))
        assert d.code == b""

    def test_unterminated_environment(self):
        with pytest.raises(UnterminatedEnvironment):
            scan_document(b"\\begin{sageblock}\nnever ends\n")

    def test_other_environments_are_plain_text(self):
        scan = scan_document(b"\\begin{itemize}\\item x\\end{itemize}")
        assert kinds(scan) == []


class TestPlots:
    def test_no_options(self):
        d = only_directive(scan_document(rb"\sageplot{plot(sin(x))}"))
        assert d.kind is DirectiveKind.PLOT
        assert d.code == b"plot(sin(x))"
        assert d.gfx_options is None
        assert d.format is None

    def test_one_option_group(self):
        d = only_directive(scan_document(rb"\sageplot[scale=.2]{p}"))
        assert d.gfx_options == b"scale=.2"
        assert d.format is None

    def test_two_option_groups(self):
        d = only_directive(
            scan_document(rb"\sageplot[angle=45, width=.5\textwidth][png]{G.plot()}")
        )
        assert d.gfx_options == rb"angle=45, width=.5\textwidth"
        assert d.format == b"png"

    def test_empty_first_group_is_present_but_empty(self):
        d = only_directive(scan_document(rb"\sageplot[][png]{p}"))
        assert d.gfx_options == b""
        assert d.format == b"png"

    def test_missing_brace_argument(self):
        with pytest.raises(UnbalancedGroup):
            scan_document(rb"\sageplot[scale=.2] only options")


class TestPauseMarkers:
    def test_pause_and_unpause(self):
        scan = scan_document(rb"\sagetexpause middle \sagetexunpause")
        assert kinds(scan) == [DirectiveKind.PAUSE, DirectiveKind.UNPAUSE]

    def test_unpause_is_not_pause_prefix_match(self):
        scan = scan_document(rb"\sagetexunpause")
        assert kinds(scan) == [DirectiveKind.UNPAUSE]


class TestOpacity:
    def test_comment_hides_directive(self):
        assert kinds(scan_document(b"% \\sage{1}\n\\sage{2}")) == [DirectiveKind.INLINE_EXPR]
        assert only_directive(scan_document(b"% \\sage{1}\n\\sage{2}")).code == b"2"

    def test_escaped_percent_does_not_comment(self):
        scan = scan_document(rb"50\% of \sage{2}")
        assert len(kinds(scan)) == 1

    def test_verb_hides_directive(self):
        assert kinds(scan_document(rb"\verb|\sage{1}|")) == []

    def test_verb_star_and_other_delimiters(self):
        assert kinds(scan_document(rb"\verb*#\sage{1}#")) == []
        assert kinds(scan_document(rb"\verb+\sage{1}+")) == []

    def test_unterminated_verb(self):
        with pytest.raises(UnterminatedVerb):
            scan_document(rb"\verb|never closed")

    def test_verbatim_env_hides_directives(self):
        src = b"\\begin{verbatim}\n\\sage{1}\n\\begin{sageblock}\n\\end{verbatim}\n\\sage{2}"
        scan = scan_document(src)
        assert [d.code for d in scan.directives()] == [b"2"]

    def test_unterminated_verbatim(self):
        with pytest.raises(UnterminatedEnvironment):
            scan_document(b"\\begin{verbatim}\nstill open")

    def test_comment_inside_directive_argument_is_kept(self):
        # group reading is verbatim; percent inside braces is code, not comment
        d = only_directive(scan_document(b"\\sage{a % b}"))
        assert d.code == b"a % b"


class TestHelpers:
    def test_read_group(self):
        code, end = read_group(b"{abc}", 0)
        assert code == b"abc"
        assert end == 5

    def test_read_group_nested(self):
        code, end = read_group(b"{a{b}c}rest", 0)
        assert code == b"a{b}c"
        assert end == 7

    def test_read_group_unbalanced(self):
        with pytest.raises(UnbalancedGroup):
            read_group(b"{abc", 0)

    def test_skip_opaque_comment(self):
        src = b"% hi\nrest"
        assert skip_opaque(src, 0) == 5

    def test_skip_opaque_rejects_plain_text(self):
        with pytest.raises(ValueError):
            skip_opaque(b"plain", 0)


class TestLossless:
    def test_corpus_roundtrip(self, demo_bytes, article_bytes):
        assert scan_document(demo_bytes).reconstruct() == demo_bytes
        assert scan_document(article_bytes).reconstruct() == article_bytes

    def test_empty_input(self):
        scan = scan_document(b"")
        assert scan.reconstruct() == b""
        assert kinds(scan) == []

    def test_texty_random_roundtrip(self):
        # alphabet chosen to exercise comments, verb, braces, and near-miss
        # control words; scans that fail (unterminated constructs) are fine,
        # successful ones must be lossless
        alphabet = (
            b"\\{}%|ab \n" + b"sage" + b"plot" + b"verb" + b"begin{sageblock}end"
        )
        rng = random.Random(99)
        successes = 0
        for _ in range(300):
            blob = bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 200)))
            try:
                scan = scan_document(blob)
            except Exception:
                continue
            successes += 1
            assert scan.reconstruct() == blob
        assert successes > 100

    def test_segments_tile_the_input(self, demo_bytes):
        scan = scan_document(demo_bytes)
        pos = 0
        for seg in scan.segments:
            span = seg.span
            assert span.byte_start == pos
            pos = span.byte_end
        assert pos == len(demo_bytes)


class TestCensus:
    def test_demo_counts_match_oracle(self, demo_bytes):
        oracle = census_oracle.census(demo_bytes)
        scan = scan_document(demo_bytes)
        counts = {kind.value: 0 for kind in DirectiveKind}
        for d in scan.directives():
            counts[d.kind.value] += 1
        assert counts == oracle

    def test_article_counts_match_oracle(self, article_bytes):
        oracle = census_oracle.census(article_bytes)
        scan = scan_document(article_bytes)
        counts = {kind.value: 0 for kind in DirectiveKind}
        for d in scan.directives():
            counts[d.kind.value] += 1
        assert counts == oracle
        ds = list(scan.directives())
        assert len(ds) == 1
        assert ds[0].code == b""

    def test_ordinals_are_document_order(self, demo_bytes):
        ds = list(scan_document(demo_bytes).directives())
        assert [d.ordinal for d in ds] == list(range(len(ds)))
        starts = [d.span.byte_start for d in ds]
        assert starts == sorted(starts)
