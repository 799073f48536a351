"""Type recognition: give every question token exactly one type tag.

Tags come from four sources applied in a fixed priority order: schema
column names, database cell values (content mode only), number/date
classification, and a gazetteer of named entities. Longer n-gram matches
always win over shorter ones, and a token is never retagged.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .tables import Table, cell_text, normalize_text

NONE = "none"
COLUMN = "column"
INTEGER = "integer"
FLOAT = "float"
DATE = "date"
YEAR = "year"
PERSON = "person"
PLACE = "place"
COUNTRY = "country"
ORGANIZATION = "organization"
SPORT = "sport"
COLUMN_VALUE = "column_value"

BASE_TAGS = (NONE, COLUMN, INTEGER, FLOAT, DATE, YEAR, PERSON, PLACE, COUNTRY, ORGANIZATION, SPORT)
ENTITY_CATEGORIES = (PERSON, PLACE, COUNTRY, ORGANIZATION, SPORT)

# Resolution for keys filed under several categories; the more specific
# geographic category outranks the generic one.
CATEGORY_PRIORITY = (PERSON, COUNTRY, PLACE, ORGANIZATION, SPORT)

MAX_NGRAM = 6

YEAR_RANGE = (1300, 2100)

_TOKEN_RE = re.compile(r"\d+(?:\.\d+)+|\w+(?:-\w+)*|\S")
_INT_RE = re.compile(r"^\d+$")
_FLOAT_RE = re.compile(r"^\d+\.\d+$")
_ISO_DATE_RE = re.compile(r"^(?:\d{4}-\d{1,2}-\d{1,2}|\d{1,2}-\d{1,2}-\d{4})$")

_MONTHS = {
    "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
}


@dataclass(frozen=True)
class TypeTag:
    """One tag; `column` is set only for content-mode cell-value tags."""

    kind: str
    column: int | None = None

    def __post_init__(self):
        if self.kind == COLUMN_VALUE:
            if self.column is None or self.column < 0:
                raise ValueError("column_value tag needs a column index")
        elif self.kind not in BASE_TAGS:
            raise ValueError(f"unknown tag kind {self.kind!r}")
        elif self.column is not None:
            raise ValueError(f"tag {self.kind!r} does not carry a column index")

    def display(self, header: list[str] | None = None) -> str:
        if self.kind == COLUMN_VALUE:
            if header is None:
                return f"value:{self.column}"
            return normalize_text(header[self.column])
        return self.kind


TAG_NONE = TypeTag(NONE)


@dataclass
class TaggedQuestion:
    """Question tokens aligned one-to-one with tags and raw-text offsets."""

    tokens: list[str]
    tags: list[TypeTag]
    char_spans: list[tuple[int, int]]

    def __post_init__(self):
        if not (len(self.tokens) == len(self.tags) == len(self.char_spans) >= 1):
            raise ValueError("tokens, tags and char_spans must be parallel and non-empty")

    def display_tags(self, header: list[str] | None = None) -> list[str]:
        return [t.display(header) for t in self.tags]


class GazetteerError(ValueError):
    pass


class Gazetteer:
    """Lowercase multi-word keys mapped to one of the five entity categories."""

    def __init__(self, entries=None):
        self._entries: dict[str, str] = {}
        for key, category in entries or []:
            self.add(key, category)

    def add(self, key: str, category: str):
        if category not in ENTITY_CATEGORIES:
            raise GazetteerError(f"unknown entity category {category!r}")
        key = normalize_text(key)
        if not key:
            raise GazetteerError("empty gazetteer key")
        current = self._entries.get(key)
        if current is None or CATEGORY_PRIORITY.index(category) < CATEGORY_PRIORITY.index(current):
            self._entries[key] = category

    def lookup(self, key: str) -> str | None:
        return self._entries.get(normalize_text(key))

    def __len__(self):
        return len(self._entries)

    @classmethod
    def from_tsv(cls, path) -> "Gazetteer":
        """Load `key<TAB>category` lines; unknown categories fail with the line number."""
        gaz = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise GazetteerError(f"{path}:{lineno}: expected 'key<TAB>category'")
                key, category = parts
                try:
                    gaz.add(key, category.strip().lower())
                except GazetteerError as exc:
                    raise GazetteerError(f"{path}:{lineno}: {exc}") from None
        return gaz


# ---------------------------------------------------------------------------
# Tokenization and span enumeration
# ---------------------------------------------------------------------------

def tokenize(question: str) -> tuple[list[str], list[tuple[int, int]]]:
    """Lowercase and split; '.' survives inside digits, '-' inside words."""
    if not question or not question.strip():
        raise ValueError("empty question")
    lowered = question.lower()
    tokens, spans = [], []
    for m in _TOKEN_RE.finditer(lowered):
        tokens.append(m.group(0))
        spans.append((m.start(), m.end()))
    if not tokens:
        raise ValueError("empty question")
    return tokens, spans


def extract_ngrams(tokens: list[str]) -> list[tuple[int, int]]:
    """All (start, end) spans of length min(6, T) down to 1, longest first then leftmost."""
    if not tokens:
        raise ValueError("no tokens")
    t = len(tokens)
    spans = []
    for length in range(min(MAX_NGRAM, t), 0, -1):
        for start in range(0, t - length + 1):
            spans.append((start, start + length))
    return spans


def _apply_span_matches(tq: TaggedQuestion, match_fn):
    """Greedy longest-first, leftmost tagging over fully-untagged spans.

    match_fn maps the span's space-joined text to a TypeTag or None.
    """
    for start, end in extract_ngrams(tq.tokens):
        if any(tq.tags[i].kind != NONE for i in range(start, end)):
            continue
        tag = match_fn(" ".join(tq.tokens[start:end]))
        if tag is not None:
            for i in range(start, end):
                tq.tags[i] = tag


# ---------------------------------------------------------------------------
# Tagging passes
# ---------------------------------------------------------------------------

def tag_schema_columns(tq: TaggedQuestion, header: list[str]) -> TaggedQuestion:
    """Tag every span that spells a column name as COLUMN."""
    if not header:
        raise ValueError("schema has no columns")
    names = {normalize_text(name) for name in header}
    _apply_span_matches(tq, lambda text: TypeTag(COLUMN) if text in names else None)
    return tq


def tag_content(tq: TaggedQuestion, table: Table) -> TaggedQuestion:
    """Content mode: tag spans equal to a cell value with that cell's column."""
    values: dict[str, int] = {}
    for row_cells in table.rows:
        for col, cell in enumerate(row_cells):
            text = cell_text(cell)
            if not text:
                continue
            if col < values.get(text, len(table.header)):
                values[text] = col

    def match(text: str):
        col = values.get(text)
        return TypeTag(COLUMN_VALUE, column=col) if col is not None else None

    _apply_span_matches(tq, match)
    return tq


def _date_span_length(tokens: list[str], start: int) -> int:
    """Length of a month-name date span beginning at `start`, or 0."""
    if tokens[start] not in _MONTHS:
        return 0
    rest = tokens[start + 1 :]
    if len(rest) >= 2 and _INT_RE.match(rest[0]) and 1 <= int(rest[0]) <= 31:
        if re.match(r"^\d{4}$", rest[1]):
            return 3
        if len(rest) >= 3 and rest[1] == "," and re.match(r"^\d{4}$", rest[2]):
            return 4
    return 0


def tag_numbers(tq: TaggedQuestion) -> TaggedQuestion:
    """Classify untagged number and date tokens."""
    i = 0
    t = len(tq.tokens)
    while i < t:
        if tq.tags[i].kind != NONE:
            i += 1
            continue
        span = _date_span_length(tq.tokens, i)
        if span and all(tq.tags[j].kind == NONE for j in range(i, i + span)):
            for j in range(i, i + span):
                tq.tags[j] = TypeTag(DATE)
            i += span
            continue
        token = tq.tokens[i]
        if _ISO_DATE_RE.match(token):
            tq.tags[i] = TypeTag(DATE)
        elif _INT_RE.match(token):
            if len(token) == 4 and YEAR_RANGE[0] <= int(token) <= YEAR_RANGE[1]:
                tq.tags[i] = TypeTag(YEAR)
            else:
                tq.tags[i] = TypeTag(INTEGER)
        elif _FLOAT_RE.match(token):
            tq.tags[i] = TypeTag(FLOAT)
        i += 1
    return tq


def tag_entities(tq: TaggedQuestion, gazetteer: Gazetteer) -> TaggedQuestion:
    """Tag untagged spans found in the gazetteer with their entity category."""

    def match(text: str):
        category = gazetteer.lookup(text)
        return TypeTag(category) if category is not None else None

    _apply_span_matches(tq, match)
    return tq


MODES = ("insensitive", "content")


def recognize(question: str, header: list[str], table: Table | None = None,
              mode: str = "insensitive", gazetteer: Gazetteer | None = None) -> TaggedQuestion:
    """Full tagging pipeline: columns, then cell values (content mode), numbers, entities."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "content" and table is None:
        raise ValueError("content mode needs the table rows")
    tokens, spans = tokenize(question)
    tq = TaggedQuestion(tokens=tokens, tags=[TAG_NONE] * len(tokens), char_spans=spans)
    tag_schema_columns(tq, header)
    if mode == "content":
        tag_content(tq, table)
    tag_numbers(tq)
    if gazetteer is not None:
        tag_entities(tq, gazetteer)
    return tq
