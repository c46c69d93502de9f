"""Assistance documents: declarative hints that steer entity identification.

A document is a sequence of clauses, each optionally followed by ``,`` or ``.``;
``%`` starts a comment running to the end of the line::

    clause     := entity | supplement | register | exclude
    entity     := "entity(" kind "," attrs ["," conditions] ")"
    supplement := "supplement(" kind "," attrs "," attrs ")"
    register   := "register(" kind "," attrs ")"
    exclude    := "exclude(" word-or-list ["," kind-or-list] ")"
    attrs      := "[" [attr {"," attr}] "]"          attr := name "=" value
    conditions := "[" [cond {"," cond}] "]"         cond := "near_word_in=" list | "radius=" int
    value      := quoted | int | "lang(" atom "," quoted ")"
    kind       := "person" | "location"

Quoted strings use single or double quotes; a doubled quote or a backslash
escapes the quote character.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Union

from .factstore.caches import PREFERRED_NAME, VARIANT_NAME, CacheSet
from .factstore.ingest import FactTriple, LocationRecord, parse_birth_year
from .normalize import last_name_key, normalize_name

KINDS = ("person", "location")
YEAR_ATTRIBUTES = {"yearOfBirth", "birth_year", "dateOfBirth"}


class AssistanceSyntaxError(SyntaxError):
    def __init__(self, message: str, line: int, col: int, source_name: str = ""):
        super().__init__(f"{source_name or '<assistance>'}:{line}:{col}: {message}")
        self.msg = message
        self.lineno = line
        self.offset = col
        self.filename = source_name
        self.line = line
        self.col = col

    def __str__(self):
        return f"{self.filename or '<assistance>'}:{self.line}:{self.col}: {self.msg}"


class AssistanceError(ValueError):
    pass


class NoMatch(AssistanceError):
    def __init__(self, spec: "EntitySpecifier"):
        super().__init__(f"no entity matches {spec}")
        self.spec = spec


class Ambiguous(AssistanceError):
    def __init__(self, spec: "EntitySpecifier", matches: Iterable[str]):
        self.matches = tuple(sorted(matches))
        super().__init__(f"{len(self.matches)} entities match {spec}: {', '.join(self.matches)}")
        self.spec = spec


class AssistanceResolutionError(AssistanceError):
    def __init__(self, errors: list[AssistanceError]):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


@dataclass(frozen=True)
class Literal:
    value: str
    lang: str = ""


@dataclass(frozen=True)
class EntitySpecifier:
    kind: str
    constraints: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown entity kind {self.kind!r}")
        if not self.constraints:
            raise ValueError("an entity specifier needs at least one constraint")

    def get(self, attribute: str) -> str | None:
        for a, v in self.constraints:
            if a == attribute:
                return v
        return None

    def __str__(self):
        inner = ", ".join(f"{a}={v!r}" for a, v in self.constraints)
        return f"{self.kind}[{inner}]"


@dataclass(frozen=True)
class ContextCondition:
    near_words: tuple[str, ...] = ()
    radius: int | None = None


@dataclass(frozen=True)
class Bias:
    spec: EntitySpecifier
    condition: ContextCondition
    line: int = 0


@dataclass(frozen=True)
class Supplement:
    spec: EntitySpecifier
    attributes: tuple[tuple[str, Literal], ...]
    line: int = 0


@dataclass(frozen=True)
class Register:
    kind: str
    attributes: tuple[tuple[str, Literal], ...]
    line: int = 0


@dataclass(frozen=True)
class Exclude:
    words: tuple[str, ...]
    kinds: tuple[str, ...] = KINDS
    line: int = 0


AssistanceRule = Union[Bias, Supplement, Register, Exclude]


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""(?P<ws>\s+)|(?P<comment>%[^\n]*)|(?P<atom>[a-z][A-Za-z0-9_]*)|(?P<int>-?\d+)
    |(?P<str>'(?:[^'\\]|\\.|'')*'|"(?:[^"\\]|\\.|"")*")|(?P<punct>[()\[\],=.])""",
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


@dataclass
class _Term:
    kind: str  # atom, int, str, list, compound, pair
    value: object
    line: int
    col: int
    args: list = field(default_factory=list)


def _unquote(text: str) -> str:
    q = text[0]
    body = text[1:-1]
    return re.sub(r"\\(.)|" + q + q, lambda m: m.group(1) if m.group(1) is not None else q, body)


def _lex(text: str, source_name: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise AssistanceSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source_name)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _TermParser:
    def __init__(self, toks: list[_Tok], source_name: str):
        self.toks = toks
        self.i = 0
        self.source_name = source_name

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        return AssistanceSyntaxError(message, tok.line, tok.col, self.source_name)

    def term(self) -> _Term:
        tok = self.peek()
        if tok.kind == "atom":
            self.i += 1
            if self.peek().text == "(":
                self.i += 1
                args = self.sequence(")")
                term = _Term("compound", tok.text, tok.line, tok.col, args)
            else:
                term = _Term("atom", tok.text, tok.line, tok.col)
            if self.peek().text == "=":
                self.i += 1
                value = self.term()
                if term.kind != "atom":
                    raise self.error("left side of '=' must be a name", tok)
                return _Term("pair", tok.text, tok.line, tok.col, [value])
            return term
        if tok.kind == "int":
            self.i += 1
            return _Term("int", int(tok.text), tok.line, tok.col)
        if tok.kind == "str":
            self.i += 1
            return _Term("str", _unquote(tok.text), tok.line, tok.col)
        if tok.text == "[":
            self.i += 1
            return _Term("list", None, tok.line, tok.col, self.sequence("]"))
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise self.error(f"unexpected {found}")

    def sequence(self, close: str) -> list[_Term]:
        items = []
        if self.peek().text == close:
            self.i += 1
            return items
        while True:
            items.append(self.term())
            tok = self.peek()
            if tok.text == ",":
                self.i += 1
                continue
            if tok.text == close:
                self.i += 1
                return items
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected ',' or {close!r}, found {found}")

    def document(self) -> list[_Term]:
        clauses = []
        while self.peek().kind != "eof":
            term = self.term()
            if term.kind != "compound":
                raise self.error("expected a clause such as entity(...)", self.toks[self.i - 1])
            clauses.append(term)
            if self.peek().text in (",", "."):
                self.i += 1
        return clauses


def _string(t: _Term, p: _TermParser) -> str:
    if t.kind == "str":
        return t.value
    if t.kind == "int":
        return str(t.value)
    raise p.error("expected a quoted string", _Tok("", "", t.line, t.col))


def _literal(t: _Term, p: _TermParser) -> Literal:
    if t.kind == "compound" and t.value == "lang":
        if len(t.args) != 2 or t.args[0].kind != "atom":
            raise p.error("lang expects (language, 'text')", _Tok("", "", t.line, t.col))
        return Literal(_string(t.args[1], p), t.args[0].value.lower())
    return Literal(_string(t, p))


def _kind(t: _Term, p: _TermParser) -> str:
    if t.kind != "atom" or t.value not in KINDS:
        raise p.error("kind must be person or location", _Tok("", "", t.line, t.col))
    return t.value


def _pairs(t: _Term, p: _TermParser) -> list[tuple[str, _Term]]:
    if t.kind != "list":
        raise p.error("expected a [name=value, ...] list", _Tok("", "", t.line, t.col))
    out = []
    for item in t.args:
        if item.kind != "pair":
            raise p.error("expected name=value", _Tok("", "", item.line, item.col))
        out.append((item.value, item.args[0]))
    return out


def _words(t: _Term, p: _TermParser) -> tuple[str, ...]:
    items = t.args if t.kind == "list" else [t]
    return tuple(_string(x, p) for x in items)


def _rule(t: _Term, p: _TermParser) -> AssistanceRule:
    where = _Tok("", "", t.line, t.col)
    name, args = t.value, t.args

    def arity(*allowed):
        if len(args) not in allowed:
            raise p.error(f"{name} takes {' or '.join(map(str, allowed))} arguments, got {len(args)}", where)

    def spec_of(kind, term):
        pairs = [(a, _string(v, p)) for a, v in _pairs(term, p)]
        if not pairs:
            raise p.error("entity specifier needs at least one attribute", where)
        return EntitySpecifier(kind, tuple(pairs))

    if name == "entity":
        arity(2, 3)
        kind = _kind(args[0], p)
        near, radius = (), None
        if len(args) == 3:
            for key, value in _pairs(args[2], p):
                if key == "near_word_in":
                    near = _words(value, p)
                    if not near:
                        raise p.error("near_word_in needs at least one word", where)
                elif key == "radius":
                    if value.kind != "int" or value.value <= 0:
                        raise p.error("radius must be a positive integer", where)
                    radius = value.value
                else:
                    raise p.error(f"unknown context condition {key!r}", where)
        return Bias(spec_of(kind, args[1]), ContextCondition(near, radius), t.line)
    if name == "supplement":
        arity(3)
        kind = _kind(args[0], p)
        attrs = tuple((a, _literal(v, p)) for a, v in _pairs(args[2], p))
        if not attrs:
            raise p.error("supplement adds at least one attribute", where)
        return Supplement(spec_of(kind, args[1]), attrs, t.line)
    if name == "register":
        arity(2)
        kind = _kind(args[0], p)
        attrs = tuple((a, _literal(v, p)) for a, v in _pairs(args[1], p))
        if not any(a == "name" for a, _ in attrs):
            raise p.error("register needs a name attribute", where)
        return Register(kind, attrs, t.line)
    if name == "exclude":
        arity(1, 2)
        words = _words(args[0], p)
        if not words:
            raise p.error("exclude needs at least one word", where)
        kinds = KINDS
        if len(args) == 2:
            items = args[1].args if args[1].kind == "list" else [args[1]]
            kinds = tuple(_kind(k, p) for k in items)
        return Exclude(words, kinds, t.line)
    raise p.error(f"unknown clause {name!r}", where)


def parse_assistance_doc(text: str, source_name: str = "") -> list[AssistanceRule]:
    parser = _TermParser(_lex(text, source_name), source_name)
    return [_rule(t, parser) for t in parser.document()]


# ---------------------------------------------------------------- resolution


def _person_matches(group, attribute: str, wanted: str) -> bool:
    if attribute == "name":
        key = normalize_name(wanted)
        names = [v for v, *_ in group.get(PREFERRED_NAME, ())]
        if any(normalize_name(n) == key for n in names):
            return True
        if any(normalize_name(v) == key for v, *_ in group.get(VARIANT_NAME, ())):
            return True
        # a bare last name also matches "Last, First" preferred names
        return "," not in wanted and any(last_name_key(n) == key for n in names)
    if attribute in YEAR_ATTRIBUTES:
        year = parse_birth_year(wanted)
        return year is not None and any(parse_birth_year(v) == year for v, *_ in group.get("dateOfBirth", ()))
    key = normalize_name(wanted)
    return any(normalize_name(v) == key for v, *_ in group.get(attribute, ()))


def _location_matches(loc: LocationRecord, attribute: str, wanted: str) -> bool:
    key = normalize_name(wanted)
    if attribute == "name":
        return any(normalize_name(n) == key for n in (loc.name, *loc.alternate_names))
    if attribute in ("id", "geo_id"):
        return loc.geo_id == wanted
    if attribute == "feature_class":
        return normalize_name(loc.feature_class) == key
    if attribute == "population":
        return str(loc.population) == wanted
    return False


def matching_entities(spec: EntitySpecifier, caches: CacheSet) -> list[str]:
    if spec.kind == "person":
        name = spec.get("name")
        if name is not None and "," not in name:
            pool = (
                caches.persons_by_last_name.get(last_name_key(name), frozenset())
                | caches.persons_by_variant_token.get(last_name_key(name), frozenset())
            )
        else:
            pool = caches.person_by_id.keys()
        return sorted(
            s for s in pool if all(_person_matches(caches.person_by_id[s], a, v) for a, v in spec.constraints)
        )
    return sorted(
        g for g, loc in caches.location_by_id.items() if all(_location_matches(loc, a, v) for a, v in spec.constraints)
    )


def resolve_entity_specifier(spec: EntitySpecifier, caches: CacheSet) -> str:
    found = matching_entities(spec, caches)
    if not found:
        raise NoMatch(spec)
    if len(found) > 1:
        raise Ambiguous(spec, found)
    return found[0]


@dataclass(frozen=True)
class BiasEntry:
    kind: str
    key: str  # normalized surface word the rule applies to
    near_words: frozenset[str]
    radius: int | None
    entity_id: str
    description: str


@dataclass(frozen=True)
class CompiledAssistance:
    caches: CacheSet
    bias: tuple[BiasEntry, ...] = ()
    exclusions: dict[str, frozenset[str]] = field(default_factory=dict)
    registered: tuple[str, ...] = ()
    pristine: CacheSet | None = field(default=None, compare=False, repr=False)


def _slug(name: str) -> str:
    text = unicodedata.normalize("NFKD", name)
    text = "".join(c for c in text if not unicodedata.combining(c)).lower()
    return re.sub(r"[^a-z0-9]+", "-", text).strip("-") or "x"


_LOCATION_FIELDS = {"latitude", "longitude", "feature_class", "population", "alternate_names", "name", "id"}


def _register(rule: Register, taken: set[str]) -> tuple[str, list[FactTriple], list[LocationRecord]]:
    attrs = dict((a, lit) for a, lit in rule.attributes)
    base = attrs["id"].value if "id" in attrs else "reg:" + _slug(attrs["name"].value)
    ident, n = base, 2
    while ident in taken:
        ident, n = f"{base}-{n}", n + 1
    taken.add(ident)
    if rule.kind == "location":
        unknown = set(attrs) - _LOCATION_FIELDS
        if unknown:
            raise AssistanceError(f"line {rule.line}: unknown location attributes {sorted(unknown)}")
        try:
            loc = LocationRecord(
                geo_id=ident,
                name=attrs["name"].value,
                alternate_names=tuple(
                    x.strip() for x in attrs["alternate_names"].value.split(",") if x.strip()
                ) if "alternate_names" in attrs else (),
                latitude=float(attrs["latitude"].value) if "latitude" in attrs else 0.0,
                longitude=float(attrs["longitude"].value) if "longitude" in attrs else 0.0,
                feature_class=attrs["feature_class"].value if "feature_class" in attrs else "",
                population=int(attrs["population"].value) if "population" in attrs else None,
            )  # fmt: skip
        except ValueError as exc:
            raise AssistanceError(f"line {rule.line}: {exc}") from None
        return ident, [], [loc]
    triples = []
    for attr, lit in rule.attributes:
        if attr == "id":
            continue
        pred = PREFERRED_NAME if attr == "name" else attr
        triples.append(FactTriple(ident, pred, lit.value, lit.lang, False))
    return ident, triples, []


def apply_assistance(rules: Iterable[AssistanceRule], caches: CacheSet | CompiledAssistance) -> CompiledAssistance:
    """Compile ``rules`` against pristine caches.

    Passing a previous :class:`CompiledAssistance` re-applies from its
    pristine caches, so earlier rules leave no trace.  Resolution errors are
    collected and raised together as :class:`AssistanceResolutionError`.
    """
    pristine = caches.pristine if isinstance(caches, CompiledAssistance) else caches
    rules = list(rules)
    errors: list[AssistanceError] = []

    # registrations first so that later rules can refer to registered entities
    taken = set(pristine.person_by_id) | set(pristine.location_by_id)
    new_triples, new_locs, registered = [], [], []
    for rule in rules:
        if isinstance(rule, Register):
            try:
                ident, triples, locs = _register(rule, taken)
            except AssistanceError as exc:
                errors.append(exc)
                continue
            registered.append(ident)
            new_triples += triples
            new_locs += locs
    current = pristine.with_added_facts(new_triples, new_locs) if registered else pristine

    added = []
    for rule in rules:
        if isinstance(rule, Supplement):
            if rule.spec.kind != "person":
                errors.append(AssistanceError(f"line {rule.line}: only persons can be supplemented"))
                continue
            try:
                subject = resolve_entity_specifier(rule.spec, current)
            except AssistanceError as exc:
                errors.append(exc)
                continue
            for attr, lit in rule.attributes:
                if attr in ("name", PREFERRED_NAME):
                    errors.append(AssistanceError(f"line {rule.line}: supplement may not change the preferred name"))
                    continue
                added.append(FactTriple(subject, attr, lit.value, lit.lang, False))
    if added:
        current = current.with_added_facts(added)

    bias = []
    exclusions: dict[str, set[str]] = {}
    for rule in rules:
        if isinstance(rule, Bias):
            try:
                entity = resolve_entity_specifier(rule.spec, current)
            except AssistanceError as exc:
                errors.append(exc)
                continue
            name = rule.spec.get("name")
            if name is None:
                if rule.spec.kind == "person":
                    names = current.person_by_id[entity].get(PREFERRED_NAME, ())
                    name = names[0][0] if names else entity
                else:
                    name = current.location_by_id[entity].name
            key = last_name_key(name) if rule.spec.kind == "person" else normalize_name(name)
            bias.append(
                BiasEntry(
                    rule.spec.kind,
                    key,
                    frozenset(normalize_name(w) for w in rule.condition.near_words),
                    rule.condition.radius,
                    entity,
                    f"line {rule.line}: {rule.spec}",
                )
            )
        elif isinstance(rule, Exclude):
            for word in rule.words:
                exclusions.setdefault(normalize_name(word), set()).update(rule.kinds)
    if errors:
        raise AssistanceResolutionError(errors)
    return CompiledAssistance(
        caches=current,
        bias=tuple(bias),
        exclusions={k: frozenset(v) for k, v in sorted(exclusions.items())},
        registered=tuple(registered),
        pristine=pristine,
    )


def validate_assistance(text: str, caches: CacheSet | None = None, source_name: str = "") -> list[str]:
    """Problems found in an assistance document; empty when it parses and every specifier resolves."""
    try:
        rules = parse_assistance_doc(text, source_name)
    except AssistanceSyntaxError as exc:
        return [str(exc)]
    if caches is None:
        return []
    try:
        apply_assistance(rules, caches)
    except AssistanceResolutionError as exc:
        return [f"{source_name or '<assistance>'}: {e}" for e in exc.errors]
    return []


def empty_assistance(caches: CacheSet) -> CompiledAssistance:
    return CompiledAssistance(caches=caches, pristine=caches)


__all__ = [
    "Ambiguous",
    "AssistanceError",
    "AssistanceResolutionError",
    "AssistanceRule",
    "AssistanceSyntaxError",
    "Bias",
    "BiasEntry",
    "CompiledAssistance",
    "ContextCondition",
    "EntitySpecifier",
    "Exclude",
    "Literal",
    "NoMatch",
    "Register",
    "Supplement",
    "apply_assistance",
    "empty_assistance",
    "matching_entities",
    "parse_assistance_doc",
    "resolve_entity_specifier",
    "validate_assistance",
]
