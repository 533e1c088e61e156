"""N-Triples ingestion and sort filtering."""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


class NTriplesSyntaxError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, order=True)
class Triple:
    subject: str
    predicate: str
    object: str

    def __post_init__(self):
        if not self.subject or not self.predicate:
            raise ValueError("subject and predicate must be nonempty")


@dataclass(frozen=True)
class Dataset:
    """A finite set of triples with its subject and property sets.

    ``subjects`` and ``properties`` are sorted, so two datasets holding the
    same triples compare (and index) identically regardless of input order.
    """

    triples: frozenset[Triple]
    subjects: tuple[str, ...]
    properties: tuple[str, ...]
    # first line each triple was seen on; diagnostics only
    lines: dict[Triple, int] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_triples(cls, triples: Iterable[Triple], lines: dict[Triple, int] | None = None) -> "Dataset":
        ts = frozenset(triples)
        subjects = tuple(sorted({t.subject for t in ts}))
        properties = tuple(sorted({t.predicate for t in ts}))
        return cls(ts, subjects, properties, dict(lines or {}))

    def __len__(self) -> int:
        return len(self.triples)

    def is_empty(self) -> bool:
        return not self.triples


_IRI = r"<([^<>\"{}|^`\\\s]*)>"
_BNODE = r"(_:[A-Za-z0-9_][A-Za-z0-9_.\-]*)"
_LITERAL = r"(\"(?:[^\"\\\n\r]|\\.)*\"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^<[^<>\s]*>)?)"
_LINE = re.compile(
    rf"^\s*(?:{_IRI}|{_BNODE})\s+{_IRI}\s+(?:{_IRI}|{_BNODE}|{_LITERAL})\s*\.\s*(?:#.*)?$"
)


def _parse_line(text: str, lineno: int) -> Triple:
    m = _LINE.match(text)
    if m is None:
        raise NTriplesSyntaxError(lineno, f"not a triple: {text.strip()[:80]!r}")
    s_iri, s_bnode, pred, o_iri, o_bnode, o_lit = m.groups()
    subject = s_iri if s_iri is not None else s_bnode
    if not subject:
        raise NTriplesSyntaxError(lineno, "empty subject IRI")
    if not pred:
        raise NTriplesSyntaxError(lineno, "empty predicate IRI")
    if o_iri is not None:
        obj = o_iri
    elif o_bnode is not None:
        obj = o_bnode
    else:
        obj = o_lit
    return Triple(subject, pred, obj)


def parse_ntriples(source: Union[bytes, str, IO[bytes], IO[str], Iterable[str]]) -> Dataset:
    """Parse the line-oriented N-Triples subset into a :class:`Dataset`.

    Accepts raw bytes/str, a binary or text stream, or an iterable of lines.
    Duplicate triples collapse; empty input gives an empty dataset.
    """
    if hasattr(source, "read"):
        source = source.read()  # type: ignore[union-attr]
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    lines: Iterable[str] = io.StringIO(source) if isinstance(source, str) else source

    seen: dict[Triple, int] = {}
    for lineno, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        t = _parse_line(stripped, lineno)
        seen.setdefault(t, lineno)
    return Dataset.from_triples(seen, seen)


def filter_by_sort(d: Dataset, sort_iri: str) -> Dataset:
    """Triples whose subject is declared ``rdf:type sort_iri``.

    The type triples themselves are kept.
    """
    typed = {t.subject for t in d.triples if t.predicate == RDF_TYPE and t.object == sort_iri}
    kept = [t for t in d.triples if t.subject in typed]
    return Dataset.from_triples(kept, {t: d.lines[t] for t in kept if t in d.lines})


def to_ntriples(d: Dataset) -> str:
    """Serialize in sorted triple order; literals are written back verbatim."""
    out = []
    for t in sorted(d.triples):
        s = t.subject if t.subject.startswith("_:") else f"<{t.subject}>"
        if t.object.startswith('"') or t.object.startswith("_:"):
            o = t.object
        else:
            o = f"<{t.object}>"
        out.append(f"{s} <{t.predicate}> {o} .\n")
    return "".join(out)
