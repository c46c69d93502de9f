import random

import pytest
from hypothesis import given, settings, strategies as st

from corredit.markup import (
    ArgMode,
    CommandSpec,
    Kind,
    UnbalancedEnvironment,
    UnbracedArgument,
    UnterminatedGroup,
    default_registry,
    parse_document,
    register_command,
    serialize_markup,
    to_plain_text,
    unknown_commands,
    walk,
)
from helpers import LETTER_FRAGMENT, SAMPLE, random_markup

FRAGMENT = r"Der Hr.~\xperson{lange}{Pastor Lange von Laublingen}"


def shape(stream):
    return [(i.kind, i.text) for i in stream]


def test_fragment_items():
    items = parse_document(FRAGMENT).items
    assert [(i.kind, i.text) for i in items[:5]] == [
        (Kind.WORD, "Der"),
        (Kind.WHITESPACE, " "),
        (Kind.WORD, "Hr"),
        (Kind.PUNCTUATION, "."),
        (Kind.PUNCTUATION, "~"),
    ]
    cmd = items[5]
    assert (cmd.kind, cmd.name, len(items)) == (Kind.COMMAND, "xperson", 6)
    ident, text = cmd.args
    assert (ident.mode, ident.value) == (ArgMode.IDENTIFIER, "lange")
    assert text.mode is ArgMode.PARSED
    # words and the whitespace between them, split independently
    expected = []
    for k, w in enumerate("Pastor Lange von Laublingen".split(" ")):
        if k:
            expected.append((Kind.WHITESPACE, " "))
        expected.append((Kind.WORD, w))
    assert shape(text.value) == expected


def test_empty_input():
    assert parse_document("").items == ()
    assert serialize_markup(parse_document("")) == ""
    assert to_plain_text(parse_document("")) == ""


def test_unbraced_argument_reports_position():
    with pytest.raises(UnbracedArgument) as exc:
        parse_document("ab\n\\xl a", source_name="f.tex")
    # the span points just past "\xl", where the braced argument should start
    assert (exc.value.span.line, exc.value.span.column) == (2, 4)
    assert str(exc.value).startswith("f.tex:2:4:")


@pytest.mark.parametrize(
    "text, error",
    [
        ("\\begin{klist} x", UnbalancedEnvironment),
        ("\\begin{klist} x \\end{quote}", UnbalancedEnvironment),
        ("x }", UnterminatedGroup),
        ("{ x", UnterminatedGroup),
        ("\\emph{x", UnterminatedGroup),
        ("\\begin{verbatim} never closed", UnbalancedEnvironment),
    ],
)
def test_malformed(text, error):
    with pytest.raises(error):
        parse_document(text)


def test_comment_item_round_trip():
    stream = parse_document("% note\n")
    assert serialize_markup(stream) == "% note\n"
    assert stream.items[0].kind is Kind.COMMENT
    assert stream.items[0].text == "% note"


def test_plain_text_of_letter_fragment():
    stream = parse_document(
        "Der Hr.~\\xperson{lange}{Pastor Lange von Laublingen}, hat mir, noch\n"
        " \\xl{brief:lange}{ehe er den Brief von E~Hochedl. empfangen}, berichtet,"
    )
    assert to_plain_text(stream) == (
        "Der Hr. Pastor Lange von Laublingen, hat mir, noch ehe er den Brief von E Hochedl. empfangen, berichtet,"
    )


def test_plain_text_drops_comments():
    assert to_plain_text(parse_document("a % x\nb")) == "a b"


def test_registration_captures_arguments():
    reg = register_command(default_registry(), CommandSpec("note", 2, (ArgMode.IDENTIFIER, ArgMode.PARSED)))
    (item,) = parse_document("\\note{k}{some text}", reg).items
    assert [a.mode for a in item.args] == [ArgMode.IDENTIFIER, ArgMode.PARSED]
    # without registration the braces stay in the stream
    plain = parse_document("\\note{k}{some text}")
    assert plain.items[0].args == () and len(plain.items) > 1


def test_second_registration_wins():
    reg = register_command(default_registry(), CommandSpec("note", 1, (ArgMode.RAW,)))
    reg = register_command(reg, CommandSpec("note", 2, (ArgMode.RAW, ArgMode.RAW)))
    (item,) = parse_document("\\note{a}{b}", reg).items
    assert [a.value for a in item.args] == ["a", "b"]


def sample_sources():
    return sorted(p for p in SAMPLE.rglob("*.tex") if "build" not in p.parts)


@pytest.mark.parametrize("path", sample_sources(), ids=lambda p: p.name)
def test_sample_files_round_trip_and_known_commands(path):
    text = path.read_text(encoding="utf-8")
    stream = parse_document(text)
    assert serialize_markup(stream) == text
    assert unknown_commands(stream, default_registry()) == []


def test_letter_fragment_round_trip():
    assert serialize_markup(parse_document(LETTER_FRAGMENT)) == LETTER_FRAGMENT


def test_spans_utf8_bytes_and_columns():
    text = "Zürich ist\n  schön"
    items = parse_document(text).items
    last = items[-1]
    assert last.text == "schön"
    assert (last.span.line, last.span.column) == (2, 3)
    assert last.span.byte_start == len("Zürich ist\n  ".encode())
    assert last.span.byte_end == len(text.encode())


def check_invariants(text: str):
    stream = parse_document(text)
    assert serialize_markup(stream) == text
    # top-level spans tile the source in byte order
    pos = 0
    for item in stream.items:
        assert item.span.byte_start == pos
        assert item.span.byte_end > item.span.byte_start
        pos = item.span.byte_end
    assert pos == len(text.encode("utf-8"))
    # environments balance by name and depth
    stack = []
    for item, depth in walk(stream.items):
        if item.kind is Kind.BEGIN_ENV:
            stack.append((item.name, depth))
        elif item.kind is Kind.END_ENV:
            assert stack.pop() == (item.name, depth)
    assert stack == []
    again = parse_document(serialize_markup(stream))
    assert to_plain_text(again) == to_plain_text(stream)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_documents_satisfy_invariants(seed):
    check_invariants(random_markup(random.Random(seed)))


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.characters(blacklist_characters="\\{}%", blacklist_categories=("Cs",)), max_size=200))
def test_plain_unicode_text_round_trips(text):
    check_invariants(text)
