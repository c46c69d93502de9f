"""Lossless parser for the LaTeX-notation edition markup.

A document becomes a flat :class:`ItemStream` of typed items.  Environments
are represented by ``BEGIN_ENV``/``END_ENV`` items with the enclosed content
as siblings in between; arguments of registered commands are captured on the
command item, either re-parsed (``PARSED``) or kept verbatim (``RAW`` and
``IDENTIFIER``).  ``serialize_markup(parse_document(s)) == s`` holds for every
accepted input.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from enum import Enum
from itertools import accumulate
from typing import Iterable, Iterator, Union


class Kind(Enum):
    WORD = "word"
    PUNCTUATION = "punctuation"
    WHITESPACE = "whitespace"
    COMMENT = "comment"
    COMMAND = "command"
    BEGIN_ENV = "begin"
    END_ENV = "end"
    OPAQUE = "opaque"


class ArgMode(Enum):
    PARSED = "parsed"
    RAW = "raw"
    IDENTIFIER = "identifier"


@dataclass(frozen=True)
class SourceSpan:
    byte_start: int
    byte_end: int
    line: int
    column: int

    def __post_init__(self):
        if self.byte_start > self.byte_end:
            raise ValueError(f"inverted span {self.byte_start}>{self.byte_end}")

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Arg:
    mode: ArgMode
    value: Union[str, "ItemStream"]
    lead: str = ""  # whitespace between the previous token and "{"

    @property
    def source(self) -> str:
        inner = serialize_markup(self.value) if self.mode is ArgMode.PARSED else self.value
        return f"{self.lead}{{{inner}}}"


@dataclass(frozen=True)
class Item:
    """One token of parsed markup.

    ``text`` is the exact source of the token, except for commands and
    environment openers where it holds only the control sequence (for example
    ``\\xperson`` or ``\\begin{letter}``); their arguments live in ``args``.
    Spans are positional metadata and do not take part in equality.
    """

    kind: Kind
    text: str
    name: str | None = None
    args: tuple[Arg, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def source(self) -> str:
        if self.args:
            return self.text + "".join(a.source for a in self.args)
        return self.text

    def arg(self, index: int) -> Arg:
        return self.args[index]


@dataclass(frozen=True)
class ItemStream:
    items: tuple[Item, ...] = ()
    source_name: str = field(default="", compare=False)

    def __iter__(self) -> Iterator[Item]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, index):
        return self.items[index]


@dataclass(frozen=True)
class CommandSpec:
    name: str
    arg_count: int = 0
    arg_modes: tuple[ArgMode, ...] = ()
    env: bool = False
    # environment content (or the "preamble" pseudo-spec region) stored unparsed
    opaque: bool = False

    def __post_init__(self):
        if not self.name:
            raise ValueError("command spec needs a name")
        if len(self.arg_modes) != self.arg_count:
            raise ValueError(
                f"{self.name}: {self.arg_count} arguments but {len(self.arg_modes)} modes"
            )


class Registry:
    """Commands and environments known to the parser, keyed by (env, name)."""

    def __init__(self, specs: Iterable[CommandSpec] = ()):
        self._specs: dict[tuple[bool, str], CommandSpec] = {}
        for spec in specs:
            self._specs[(spec.env, spec.name)] = spec

    def get(self, name: str, env: bool = False) -> CommandSpec | None:
        return self._specs.get((env, name))

    def register(self, spec: CommandSpec) -> "Registry":
        return Registry([*self._specs.values(), spec])

    def __iter__(self):
        return iter(self._specs.values())

    def __len__(self):
        return len(self._specs)

    def __contains__(self, key) -> bool:
        return key in self._specs


def register_command(registry: Registry, spec: CommandSpec) -> Registry:
    """Return a registry with ``spec`` added; a later spec for a name replaces the earlier one."""
    return registry.register(spec)


P, R, I = ArgMode.PARSED, ArgMode.RAW, ArgMode.IDENTIFIER

DEFAULT_SPECS = (
    CommandSpec("letter", 5, (I, I, I, I, R), env=True),
    CommandSpec("annotation", 1, (I,), env=True),
    CommandSpec("klist", env=True),
    CommandSpec("document", env=True),
    CommandSpec("verbatim", env=True, opaque=True),
    CommandSpec("Verbatim", env=True, opaque=True),
    CommandSpec("preamble", env=True, opaque=True),
    CommandSpec("xperson", 2, (I, P)),
    CommandSpec("xlocation", 2, (I, P)),
    CommandSpec("xl", 2, (I, P)),
    CommandSpec("ksection", 1, (P,)),
    CommandSpec("kitem", 1, (I,)),
    CommandSpec("defperson", 2, (I, R)),
    CommandSpec("deflocation", 2, (I, R)),
    CommandSpec("sameas", 2, (I, R)),
    CommandSpec("extannotation", 4, (I, R, R, P)),
    CommandSpec("emph", 1, (P,)),
    CommandSpec("textit", 1, (P,)),
)


def default_registry() -> Registry:
    return Registry(DEFAULT_SPECS)


class MarkupError(ValueError):
    def __init__(self, message: str, span: SourceSpan | None, source_name: str = ""):
        where = ":".join(str(x) for x in (source_name, span) if x)
        super().__init__(f"{where}: {message}" if where else message)
        self.span = span
        self.source_name = source_name


class UnbalancedEnvironment(MarkupError):
    def __init__(self, name: str, span, source_name: str = ""):
        super().__init__(f"unbalanced environment {name!r}", span, source_name)
        self.name = name


class UnbracedArgument(MarkupError):
    pass


class UnterminatedGroup(MarkupError):
    pass


_LEAD = re.compile(r"[ \t]*(?:\n[ \t]*)?")
_CONTROL_WORD = re.compile(r"[A-Za-z@]+")
_SPACE = re.compile(r"\s+")
_WORD = re.compile(r"(?:[^\W_]|-)+")


class _Parser:
    def __init__(self, source: str, registry: Registry, source_name: str):
        self.src = source
        self.n = len(source)
        self.pos = 0
        self.registry = registry
        self.source_name = source_name
        self._bytes = None if source.isascii() else list(
            accumulate((len(c.encode("utf-8")) for c in source), initial=0)
        )
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", source)]

    def span(self, start: int, end: int) -> SourceSpan:
        line = bisect.bisect_right(self._line_starts, start)
        column = start - self._line_starts[line - 1] + 1
        if self._bytes is None:
            return SourceSpan(start, end, line, column)
        return SourceSpan(self._bytes[start], self._bytes[end], line, column)

    def _leaf(self, kind: Kind, start: int, end: int) -> Item:
        return Item(kind, self.src[start:end], span=self.span(start, end))

    def parse_top(self) -> list[Item]:
        items = []
        preamble = self.registry.get("preamble", env=True)
        if preamble is not None and preamble.opaque:
            cut = self.src.find("\\begin{document}")
            if cut > 0:
                items.append(self._leaf(Kind.OPAQUE, 0, cut))
                self.pos = cut
        items.extend(self.parse_seq(in_arg=False))
        return items

    def parse_seq(self, in_arg: bool) -> list[Item]:
        src, n = self.src, self.n
        items: list[Item] = []
        envs: list[Item] = []
        groups: list[int] = []
        while self.pos < n:
            start = self.pos
            c = src[start]
            if c == "\\":
                self._control(items, envs)
            elif c == "%":
                end = src.find("\n", start)
                end = n if end < 0 else end
                items.append(self._leaf(Kind.COMMENT, start, end))
                self.pos = end
            elif c.isspace():
                end = _SPACE.match(src, start).end()
                items.append(self._leaf(Kind.WHITESPACE, start, end))
                self.pos = end
            elif c == "{":
                groups.append(start)
                items.append(self._leaf(Kind.PUNCTUATION, start, start + 1))
                self.pos += 1
            elif c == "}":
                if not groups:
                    if in_arg:
                        break
                    raise UnterminatedGroup(
                        "closing brace without opening brace",
                        self.span(start, start + 1),
                        self.source_name,
                    )
                groups.pop()
                items.append(self._leaf(Kind.PUNCTUATION, start, start + 1))
                self.pos += 1
            else:
                m = _WORD.match(src, start)
                if m:
                    items.append(self._leaf(Kind.WORD, start, m.end()))
                    self.pos = m.end()
                else:
                    items.append(self._leaf(Kind.PUNCTUATION, start, start + 1))
                    self.pos += 1
        if groups:
            raise UnterminatedGroup(
                "group not closed", self.span(groups[-1], groups[-1] + 1), self.source_name
            )
        if envs:
            raise UnbalancedEnvironment(envs[-1].name, envs[-1].span, self.source_name)
        return items

    def _control(self, items: list[Item], envs: list[Item]) -> None:
        src, start = self.src, self.pos
        if start + 1 >= self.n:
            items.append(self._leaf(Kind.PUNCTUATION, start, start + 1))
            self.pos += 1
            return
        m = _CONTROL_WORD.match(src, start + 1)
        name_end = m.end() if m else start + 2
        name = src[start + 1 : name_end]
        self.pos = name_end
        if name not in ("begin", "end"):
            spec = self.registry.get(name)
            args = self._args(spec, name) if spec else ()
            items.append(
                Item(Kind.COMMAND, src[start:name_end], name, args, self.span(start, self.pos))
            )
            return

        if name_end >= self.n or src[name_end] != "{":
            raise UnbracedArgument(
                f"\\{name} needs a braced environment name",
                self.span(start, name_end),
                self.source_name,
            )
        close = src.find("}", name_end)
        if close < 0:
            raise UnterminatedGroup(
                "environment name not closed", self.span(name_end, name_end + 1), self.source_name
            )
        env_name = src[name_end + 1 : close]
        if not env_name or any(ch in env_name for ch in "{\\%\n"):
            raise UnterminatedGroup(
                f"bad environment name {env_name!r}",
                self.span(name_end, close + 1),
                self.source_name,
            )
        head = src[start : close + 1]
        self.pos = close + 1
        if name == "end":
            item = Item(Kind.END_ENV, head, env_name, (), self.span(start, self.pos))
            if not envs or envs[-1].name != env_name:
                raise UnbalancedEnvironment(env_name, item.span, self.source_name)
            envs.pop()
            items.append(item)
            return

        spec = self.registry.get(env_name, env=True)
        args = self._args(spec, env_name) if spec else ()
        item = Item(Kind.BEGIN_ENV, head, env_name, args, self.span(start, self.pos))
        envs.append(item)
        items.append(item)
        if spec is not None and spec.opaque:
            stop = src.find(f"\\end{{{env_name}}}", self.pos)
            if stop < 0:
                raise UnbalancedEnvironment(env_name, item.span, self.source_name)
            if stop > self.pos:
                items.append(self._leaf(Kind.OPAQUE, self.pos, stop))
            self.pos = stop

    def _args(self, spec: CommandSpec, name: str) -> tuple[Arg, ...]:
        src = self.src
        args = []
        for mode in spec.arg_modes:
            brace = _LEAD.match(src, self.pos).end()
            if brace >= self.n or src[brace] != "{":
                raise UnbracedArgument(
                    f"argument {len(args) + 1} of {name!r} must be enclosed in braces",
                    self.span(self.pos, min(brace + 1, self.n)),
                    self.source_name,
                )
            lead = src[self.pos : brace]
            self.pos = brace + 1
            if mode is ArgMode.PARSED:
                inner = self.parse_seq(in_arg=True)
                if self.pos >= self.n:
                    raise UnterminatedGroup(
                        f"argument of {name!r} not closed",
                        self.span(brace, brace + 1),
                        self.source_name,
                    )
                value = ItemStream(tuple(inner), self.source_name)
            else:
                close = self._match_brace(brace)
                value = src[brace + 1 : close]
                self.pos = close
            self.pos += 1
            args.append(Arg(mode, value, lead))
        return tuple(args)

    def _match_brace(self, open_pos: int) -> int:
        src, depth, i = self.src, 0, open_pos
        while i < self.n:
            c = src[i]
            if c == "\\":
                i += 2
                continue
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    return i
            i += 1
        raise UnterminatedGroup(
            "argument not closed", self.span(open_pos, open_pos + 1), self.source_name
        )


def parse_document(
    source: str, registry: Registry | None = None, source_name: str = ""
) -> ItemStream:
    """Parse ``source`` into an item stream.

    Registered commands capture their arguments according to their
    :class:`CommandSpec`; unregistered commands take none.  Raises
    :class:`UnbracedArgument`, :class:`UnterminatedGroup` or
    :class:`UnbalancedEnvironment` on malformed input.
    """
    if registry is None:
        registry = default_registry()
    parser = _Parser(source, registry, source_name)
    return ItemStream(tuple(parser.parse_top()), source_name)


def serialize_markup(stream: ItemStream) -> str:
    return "".join(item.source for item in stream.items)


_SYMBOL_TEXT = {"\\": " ", " ": " ", ",": " ", "ldots": "…", "dots": "…"}


def _plain_parts(items: Iterable[Item], out: list[str]) -> None:
    for item in items:
        kind = item.kind
        if kind is Kind.WORD:
            out.append(item.text)
        elif kind is Kind.PUNCTUATION:
            if item.text == "~":
                out.append(" ")
            elif item.text not in "{}":
                out.append(item.text)
        elif kind is Kind.WHITESPACE:
            out.append(" ")
        elif kind is Kind.COMMAND:
            display = display_arg(item)
            if display is not None:
                _plain_parts(display.value.items, out)
            elif item.name in _SYMBOL_TEXT:
                out.append(_SYMBOL_TEXT[item.name])
            elif len(item.name) == 1 and not item.name.isalpha():
                out.append(item.name)
        elif kind in (Kind.BEGIN_ENV, Kind.END_ENV):
            out.append(" ")


def display_arg(item: Item) -> Arg | None:
    """The argument whose text stands for a command in running text: its last parsed one."""
    for arg in reversed(item.args):
        if arg.mode is ArgMode.PARSED:
            return arg
    return None


def to_plain_text(stream: ItemStream | Iterable[Item]) -> str:
    items = stream.items if isinstance(stream, ItemStream) else stream
    parts: list[str] = []
    _plain_parts(items, parts)
    return " ".join("".join(parts).split())


def walk(items: Iterable[Item], depth: int = 0) -> Iterator[tuple[Item, int]]:
    """Yield every item with its argument nesting depth, descending into parsed arguments."""
    for item in items:
        yield item, depth
        for arg in item.args:
            if arg.mode is ArgMode.PARSED:
                yield from walk(arg.value.items, depth + 1)


def unknown_commands(stream: ItemStream, registry: Registry) -> list[str]:
    """Control words in ``stream`` that the registry does not know."""
    names = set()
    for item, _ in walk(stream.items):
        if item.kind is Kind.COMMAND and item.name[0].isalpha():
            if registry.get(item.name) is None:
                names.add(item.name)
        elif item.kind is Kind.BEGIN_ENV and registry.get(item.name, env=True) is None:
            names.add(f"{{{item.name}}}")
    return sorted(names)


def make_command(name: str, *args: Arg, span: SourceSpan | None = None) -> Item:
    return Item(Kind.COMMAND, "\\" + name, name, tuple(args), span)


def identifier_arg(value: str) -> Arg:
    return Arg(ArgMode.IDENTIFIER, value)


def parsed_arg(items: Iterable[Item], source_name: str = "") -> Arg:
    return Arg(ArgMode.PARSED, ItemStream(tuple(items), source_name))
