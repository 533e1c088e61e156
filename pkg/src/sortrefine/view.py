"""Signature-compressed property-structure view of a dataset."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import RDF_TYPE, Dataset

log = logging.getLogger(__name__)

CACHE_MAGIC = "SIGV1"


class EmptyViewError(ValueError):
    pass


class CacheFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    bits: tuple[int, ...]
    count: int
    sample: str

    @property
    def support(self) -> frozenset[int]:
        return frozenset(j for j, b in enumerate(self.bits) if b)

    @property
    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


def canonical_key(sig: Signature) -> tuple:
    return (-sig.count, sig.bits)


@dataclass(frozen=True)
class StructureView:
    """Distinct row patterns of the subject x property matrix, with multiplicities.

    Signatures are kept in canonical order (descending multiplicity, then
    ascending bitstring). Every column is used by some signature and every
    signature uses some column.

    ``members`` optionally maps each subject IRI to its signature index. It is
    needed only to evaluate rules that name specific subjects, and it is not
    part of the value (not compared, not cached).
    """

    properties: tuple[str, ...]
    signatures: tuple[Signature, ...]
    members: dict[str, int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        width = len(self.properties)
        if width == 0 or not self.signatures:
            raise EmptyViewError("view needs at least one property and one signature")
        if len(set(self.properties)) != width:
            raise ValueError("duplicate property column")
        seen = set()
        used = [False] * width
        for sig in self.signatures:
            if len(sig.bits) != width:
                raise ValueError(f"signature width {len(sig.bits)} != {width} columns")
            if any(b not in (0, 1) for b in sig.bits):
                raise ValueError("signature bits must be 0/1")
            if not any(sig.bits):
                raise ValueError("signature with no properties")
            if sig.count < 1:
                raise ValueError("signature multiplicity must be positive")
            if sig.bits in seen:
                raise ValueError(f"duplicate signature {sig.bitstring}")
            seen.add(sig.bits)
            for j, b in enumerate(sig.bits):
                used[j] = used[j] or bool(b)
        if not all(used):
            unused = [p for p, u in zip(self.properties, used) if not u]
            raise ValueError(f"columns not used by any signature: {unused}")
        keys = [canonical_key(s) for s in self.signatures]
        if keys != sorted(keys):
            raise ValueError("signatures are not in canonical order")

    @property
    def total_subjects(self) -> int:
        return sum(s.count for s in self.signatures)

    @property
    def n_props(self) -> int:
        return len(self.properties)

    def __len__(self) -> int:
        return len(self.signatures)

    def column(self, iri: str) -> int:
        return self.properties.index(iri)

    def subjects_of(self, index: int) -> list[str]:
        """Subject IRIs carrying signature ``index``.

        Without a member index, the sample subject is returned first followed
        by synthetic placeholders.
        """
        sig = self.signatures[index]
        if self.members is not None:
            return sorted(s for s, i in self.members.items() if i == index)
        return [sig.sample] + [f"{sig.sample}#{n}" for n in range(2, sig.count + 1)]

    def used_columns(self, chosen: Iterable[int]) -> frozenset[int]:
        cols: set[int] = set()
        for i in chosen:
            cols |= self.signatures[i].support
        return frozenset(cols)

    def subview(self, chosen: Iterable[int]) -> "StructureView":
        """Materialize the view of the subjects carrying the chosen signatures.

        Columns unused by the chosen signatures are dropped. Dropping columns
        that are all-zero on the chosen rows keeps the relative canonical order.
        """
        idx = sorted(set(chosen))
        if not idx:
            raise ValueError("empty signature selection")
        cols = sorted(self.used_columns(idx))
        props = tuple(self.properties[j] for j in cols)
        sigs = tuple(
            Signature(tuple(self.signatures[i].bits[j] for j in cols), self.signatures[i].count, self.signatures[i].sample)
            for i in idx
        )
        members = None
        if self.members is not None:
            remap = {old: new for new, old in enumerate(idx)}
            members = {s: remap[i] for s, i in self.members.items() if i in remap}
        return StructureView(props, sigs, members)


def make_view(properties: Sequence[str], rows: Iterable[tuple[Sequence[int], int, str]]) -> StructureView:
    """Build a canonical view from (bits, count, sample) rows in any order.

    Rows with equal bits are merged; columns nobody uses are dropped.
    """
    merged: dict[tuple[int, ...], list] = {}
    for bits, count, sample in rows:
        key = tuple(int(b) for b in bits)
        if key in merged:
            merged[key][0] += count
            merged[key][1] = min(merged[key][1], sample)
        else:
            merged[key] = [count, sample]
    used = [j for j in range(len(properties)) if any(k[j] for k in merged)]
    props = tuple(properties[j] for j in used)
    sigs = [Signature(tuple(k[j] for j in used), c, s) for k, (c, s) in merged.items()]
    sigs.sort(key=canonical_key)
    return StructureView(props, tuple(sigs))


def build_view(d: Dataset) -> StructureView:
    """Group the subjects of ``d`` by signature, ignoring ``rdf:type``.

    Subjects whose only triples are type triples have an empty signature;
    they are dropped with a warning.
    """
    props = tuple(p for p in d.properties if p != RDF_TYPE)
    col = {p: j for j, p in enumerate(props)}
    has: dict[str, set[int]] = defaultdict(set)
    for t in d.triples:
        if t.predicate == RDF_TYPE:
            has.setdefault(t.subject, set())
        else:
            has[t.subject].add(col[t.predicate])

    empty = sorted(s for s, cols in has.items() if not cols)
    if empty:
        log.warning("dropping %d subject(s) with no property besides rdf:type (e.g. %s)", len(empty), empty[0])
    groups: dict[tuple[int, ...], list[str]] = defaultdict(list)
    for s, cols in has.items():
        if cols:
            groups[tuple(1 if j in cols else 0 for j in range(len(props)))].append(s)
    if not groups:
        raise EmptyViewError("dataset has no subject with a non-type property")

    sigs = sorted((Signature(bits, len(subs), min(subs)) for bits, subs in groups.items()), key=canonical_key)
    index = {s.bits: i for i, s in enumerate(sigs)}
    members = {s: index[bits] for bits, subs in groups.items() for s in subs}
    return StructureView(props, tuple(sigs), members)


def dumps_view(view: StructureView) -> str:
    lines = [f"{CACHE_MAGIC} {view.n_props} {len(view)}", "\t".join(view.properties)]
    lines += [f"{s.bitstring}\t{s.count}\t{s.sample}" for s in view.signatures]
    return "\n".join(lines) + "\n"


def loads_view(text: str) -> StructureView:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CacheFormatError("empty cache file")
    header = lines[0].split(" ")
    if not header[0].startswith("SIGV"):
        raise CacheFormatError("not a signature cache")
    if header[0] != CACHE_MAGIC:
        raise CacheFormatError(f"unsupported cache version {header[0]!r} (expected {CACHE_MAGIC})")
    try:
        n_props, n_sigs = int(header[1]), int(header[2])
    except (IndexError, ValueError):
        raise CacheFormatError("malformed header") from None
    if len(header) != 3:
        raise CacheFormatError("malformed header")
    if len(lines) != 2 + n_sigs:
        raise CacheFormatError(f"expected {n_sigs} signature lines, found {len(lines) - 2}")
    props = tuple(lines[1].split("\t"))
    if len(props) != n_props:
        raise CacheFormatError(f"expected {n_props} properties, found {len(props)}")
    sigs = []
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split("\t")
        if len(parts) != 3 or len(parts[0]) != n_props or set(parts[0]) - {"0", "1"}:
            raise CacheFormatError(f"line {lineno}: malformed signature entry")
        try:
            count = int(parts[1])
        except ValueError:
            raise CacheFormatError(f"line {lineno}: bad multiplicity") from None
        sigs.append(Signature(tuple(int(c) for c in parts[0]), count, parts[2]))
    try:
        return StructureView(props, tuple(sigs))
    except ValueError as e:
        raise CacheFormatError(str(e)) from None


def save_view(view: StructureView, path: str | Path) -> None:
    Path(path).write_text(dumps_view(view), encoding="utf-8")


def load_view(path: str | Path) -> StructureView:
    return loads_view(Path(path).read_text(encoding="utf-8"))
