"""Text formats for constituency trees, dependency graphs, and SRL frames.

Token positions are 1-based everywhere.  All parsed objects are immutable,
so distinct documents may be read concurrently without locking.  Readers
accept both ``\\n`` and ``\\r\\n`` line endings.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

#: Governor sentinel for the dependency root.
ROOT = 0

__all__ = [
    "ROOT",
    "FormatError",
    "Sentence",
    "ConstTree",
    "DepGraph",
    "SrlFrame",
    "parse_ptb",
    "write_ptb",
    "parse_conll_dep",
    "parse_frames",
    "write_frames",
    "bio_to_spans",
    "frame_to_bio",
]


class FormatError(ValueError):
    """Malformed input; locates the problem by byte offset or line number."""

    def __init__(self, message: str, *, offset: int | None = None, line: int | None = None):
        where = []
        if offset is not None:
            where.append(f"byte offset {offset}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.offset = offset
        self.line = line


@dataclass(frozen=True)
class Sentence:
    """An ordered, non-empty sequence of word tokens."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must have at least one token")
        if any(tok == "" for tok in self.tokens):
            raise ValueError("sentence contains an empty token")

    def __len__(self) -> int:
        return len(self.tokens)

    def word(self, position: int) -> str:
        """Token at a 1-based position."""
        if not 1 <= position <= len(self.tokens):
            raise IndexError(f"token position {position} out of range 1..{len(self.tokens)}")
        return self.tokens[position - 1]


@dataclass(frozen=True)
class ConstTree:
    """Node of a rooted, ordered, labeled constituency tree.

    A leaf is a pre-terminal: it carries the surface token and its 1-based
    position.  An internal node has one or more children whose spans are
    contiguous; its own span is their union.
    """

    label: str
    children: tuple["ConstTree", ...] = ()
    index: int | None = None
    token: str | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("node label must be non-empty")
        if self.children:
            if self.index is not None or self.token is not None:
                raise ValueError("internal node cannot carry a terminal token")
            for left, right in zip(self.children, self.children[1:]):
                if right.span[0] != left.span[1] + 1:
                    raise ValueError(
                        f"children spans not contiguous: {left.span} then {right.span}"
                    )
        else:
            if self.index is None or self.token is None:
                raise ValueError("leaf node must carry a token and its position")
            if self.index < 1:
                raise ValueError("token positions are 1-based")
            if self.token == "":
                raise ValueError("leaf token must be non-empty")

    @classmethod
    def leaf(cls, label: str, token: str, index: int) -> "ConstTree":
        return cls(label, (), index, token)

    @classmethod
    def phrase(cls, label: str, children) -> "ConstTree":
        return cls(label, tuple(children))

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @cached_property
    def span(self) -> tuple[int, int]:
        """Covered token positions as an inclusive [first, last] pair."""
        if self.is_leaf:
            return (self.index, self.index)
        return (self.children[0].span[0], self.children[-1].span[1])

    def leaves(self) -> Iterator["ConstTree"]:
        if self.is_leaf:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def nodes(self) -> Iterator["ConstTree"]:
        """All nodes in pre-order."""
        yield self
        for child in self.children:
            yield from child.nodes()

    def depth(self) -> int:
        """Number of node levels; a lone pre-terminal has depth 1."""
        if self.is_leaf:
            return 1
        return 1 + max(child.depth() for child in self.children)

    def sentence(self) -> Sentence:
        return Sentence(tuple(leaf.token for leaf in self.leaves()))

    def __repr__(self) -> str:
        return f"ConstTree<{write_ptb(self)}>"


@dataclass(frozen=True)
class DepGraph:
    """Per-token governor positions and labels forming a single rooted tree."""

    governors: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        n = len(self.governors)
        if n == 0:
            raise ValueError("dependency graph must cover at least one token")
        if len(self.labels) != n:
            raise ValueError("governors and labels must have equal length")
        if any(lab == "" for lab in self.labels):
            raise ValueError("dependency labels must be non-empty")
        roots = [i for i, gov in enumerate(self.governors, start=1) if gov == ROOT]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        for i, gov in enumerate(self.governors, start=1):
            if not 0 <= gov <= n:
                raise ValueError(f"governor {gov} of token {i} out of range")
        # Walk every governor chain; a chain that revisits a node is a cycle.
        done = [False] * (n + 1)
        for start in range(1, n + 1):
            seen = set()
            node = start
            while node != ROOT and not done[node]:
                if node in seen:
                    raise ValueError(f"dependency cycle through token {node}")
                seen.add(node)
                node = self.governors[node - 1]
            for visited in seen:
                done[visited] = True

    def __len__(self) -> int:
        return len(self.governors)

    @property
    def root(self) -> int:
        return self.governors.index(ROOT) + 1

    def governor(self, position: int) -> int:
        return self.governors[position - 1]

    def label(self, position: int) -> str:
        return self.labels[position - 1]

    def dependents(self, position: int) -> tuple[int, ...]:
        """Positions governed by a token, in ascending order."""
        return tuple(
            i for i, gov in enumerate(self.governors, start=1) if gov == position
        )


@dataclass(frozen=True)
class SrlFrame:
    """A predicate position plus its labeled argument spans."""

    predicate: int
    args: frozenset[tuple[str, int, int]]

    def __post_init__(self):
        if self.predicate < 1:
            raise ValueError("predicate position is 1-based")
        spans = sorted((start, end, label) for label, start, end in self.args)
        for start, end, label in spans:
            if not label:
                raise ValueError("argument label must be non-empty")
            if not 1 <= start <= end:
                raise ValueError(f"bad argument span [{start}, {end}]")
            if start <= self.predicate <= end:
                raise ValueError(
                    f"argument span [{start}, {end}] covers the predicate at {self.predicate}"
                )
        for (s1, e1, _), (s2, _, _) in zip(spans, spans[1:]):
            if s2 <= e1:
                raise ValueError("argument spans overlap")


# ---------------------------------------------------------------------------
# Penn-style bracketed trees


_SEXPR_TOKEN = re.compile(r"[()]|[^\s()]+")


class _RawNode:
    __slots__ = ("label", "children", "offset")

    def __init__(self, offset: int):
        self.label: str | None = None
        self.children: list = []  # _RawNode or bare token strings
        self.offset = offset


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _strip_label(label: str) -> str:
    """Drop functional-tag suffixes: ``NP-SBJ`` -> ``NP``, ``NP=2`` -> ``NP``.

    Labels that start with ``-`` (``-NONE-``, ``-LRB-``, ``-RRB-``) are kept
    verbatim.
    """
    if label.startswith("-"):
        return label
    return re.split(r"[-=]", label, maxsplit=1)[0]


def _parse_sexprs(text: str) -> list[_RawNode]:
    stack: list[_RawNode] = []
    roots: list[_RawNode] = []
    for match in _SEXPR_TOKEN.finditer(text):
        tok = match.group()
        if tok == "(":
            stack.append(_RawNode(match.start()))
        elif tok == ")":
            if not stack:
                raise FormatError(
                    "unbalanced ')'", offset=_byte_offset(text, match.start())
                )
            node = stack.pop()
            if node.label is None and not node.children:
                raise FormatError(
                    "empty tree '()'", offset=_byte_offset(text, node.offset)
                )
            if stack:
                stack[-1].children.append(node)
            else:
                roots.append(node)
        else:
            if not stack:
                raise FormatError(
                    f"token {tok!r} outside any tree",
                    offset=_byte_offset(text, match.start()),
                )
            top = stack[-1]
            if top.label is None and not top.children:
                top.label = tok
            else:
                top.children.append(tok)
    if stack:
        raise FormatError(
            "unbalanced '('", offset=_byte_offset(text, stack[0].offset)
        )
    return roots


def _build_tree(raw: _RawNode, text: str, counter: list[int]) -> ConstTree | None:
    """Convert a raw node, dropping ``-NONE-`` subtrees; None when removed."""
    if raw.label is None:
        raise FormatError(
            "unlabeled node", offset=_byte_offset(text, raw.offset)
        )
    if raw.label == "-NONE-":
        return None
    label = _strip_label(raw.label)
    tokens = [c for c in raw.children if isinstance(c, str)]
    subnodes = [c for c in raw.children if isinstance(c, _RawNode)]
    if tokens and subnodes:
        raise FormatError(
            f"node {label!r} mixes terminal tokens and subtrees",
            offset=_byte_offset(text, raw.offset),
        )
    if tokens:
        if len(tokens) > 1:
            raise FormatError(
                f"pre-terminal {label!r} has more than one token",
                offset=_byte_offset(text, raw.offset),
            )
        counter[0] += 1
        return ConstTree.leaf(label, tokens[0], counter[0])
    children = [_build_tree(child, text, counter) for child in subnodes]
    children = [c for c in children if c is not None]
    if not children:
        return None
    return ConstTree.phrase(label, children)


def parse_ptb(text: str) -> list[tuple[Sentence, ConstTree]]:
    """Read bracketed trees from text.

    Functional-tag suffixes are stripped from labels, ``-NONE-`` subtrees are
    removed with token positions re-indexed, and an outer unlabeled wrapper
    around each tree is unwrapped.
    """
    out = []
    for raw in _parse_sexprs(text):
        while raw.label is None:
            if len(raw.children) == 1 and isinstance(raw.children[0], _RawNode):
                raw = raw.children[0]
            else:
                raise FormatError(
                    "unlabeled node", offset=_byte_offset(text, raw.offset)
                )
        counter = [0]
        tree = _build_tree(raw, text, counter)
        if tree is None:
            raise FormatError(
                "tree is empty after trace removal",
                offset=_byte_offset(text, raw.offset),
            )
        out.append((tree.sentence(), tree))
    return out


def write_ptb(tree: ConstTree) -> str:
    """Single-line bracketed form; inverse of :func:`parse_ptb` on its output."""
    if tree.is_leaf:
        return f"({tree.label} {tree.token})"
    return "(" + tree.label + " " + " ".join(write_ptb(c) for c in tree.children) + ")"


# ---------------------------------------------------------------------------
# Dependency graphs (4-column TSV: index, form, governor, label)


def _blocks(text: str) -> Iterator[list[tuple[int, str]]]:
    """Non-empty line groups separated by blank lines, with 1-based line numbers."""
    block: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if line.strip() == "":
            if block:
                yield block
                block = []
        else:
            block.append((lineno, line))
    if block:
        yield block


def _parse_int(value: str, lineno: int, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise FormatError(f"{what} {value!r} is not an integer", line=lineno) from None


def parse_conll_dep(text: str) -> list[tuple[Sentence, DepGraph]]:
    """Read blank-line-separated dependency graphs.

    Each token line has four tab-separated columns: index, form, governor
    index (0 for the root), label.
    """
    out = []
    for block in _blocks(text):
        rows = []
        for lineno, line in block:
            cols = line.split("\t")
            if len(cols) != 4:
                raise FormatError(
                    f"expected 4 tab-separated columns, got {len(cols)}", line=lineno
                )
            idx = _parse_int(cols[0], lineno, "token index")
            gov = _parse_int(cols[2], lineno, "governor index")
            rows.append((lineno, idx, cols[1], gov, cols[3]))
        n = len(rows)
        root_line = None
        for expected, (lineno, idx, form, gov, label) in enumerate(rows, start=1):
            if idx != expected:
                raise FormatError(
                    f"token index {idx} where {expected} expected", line=lineno
                )
            if form == "":
                raise FormatError("empty token", line=lineno)
            if label == "":
                raise FormatError("empty dependency label", line=lineno)
            if not 0 <= gov <= n:
                raise FormatError(f"governor {gov} out of range 0..{n}", line=lineno)
            if gov == ROOT:
                if root_line is not None:
                    raise FormatError("multiple root tokens", line=lineno)
                root_line = lineno
        if root_line is None:
            raise FormatError("no root token in sentence", line=block[-1][0])
        governors = tuple(gov for _, _, _, gov, _ in rows)
        # Follow each governor chain upward; revisiting a node inside one
        # walk means the chain never reaches the root.
        done = [False] * (n + 1)
        for start in range(1, n + 1):
            seen = set()
            node = start
            while node != ROOT and not done[node]:
                if node in seen:
                    raise FormatError(
                        "dependency cycle", line=rows[node - 1][0]
                    )
                seen.add(node)
                node = governors[node - 1]
            for visited in seen:
                done[visited] = True
        sentence = Sentence(tuple(form for _, _, form, _, _ in rows))
        graph = DepGraph(governors, tuple(label for *_, label in rows))
        out.append((sentence, graph))
    return out


# ---------------------------------------------------------------------------
# SRL frames (token, predicate marker, one BIO tag column per predicate)


def bio_to_spans(tags) -> list[tuple[str, int, int]]:
    """Close BIO runs into (label, start, end) spans.

    Raises ValueError (with a ``position`` attribute) when an ``I-X`` tag is
    not preceded by ``B-X`` or ``I-X``, or on an unknown tag shape.
    """
    spans = []
    open_label = None
    open_start = None
    for pos, tag in enumerate(tags, start=1):
        if tag == "O":
            if open_label is not None:
                spans.append((open_label, open_start, pos - 1))
                open_label = None
        elif tag.startswith("B-") and len(tag) > 2:
            if open_label is not None:
                spans.append((open_label, open_start, pos - 1))
            open_label = tag[2:]
            open_start = pos
        elif tag.startswith("I-") and len(tag) > 2:
            if open_label != tag[2:]:
                err = ValueError(
                    f"{tag} at position {pos} not preceded by B-{tag[2:]} or I-{tag[2:]}"
                )
                err.position = pos
                raise err
        else:
            err = ValueError(f"unrecognized tag {tag!r} at position {pos}")
            err.position = pos
            raise err
    if open_label is not None:
        spans.append((open_label, open_start, len(tags)))
    return spans


def frame_to_bio(frame: SrlFrame, n: int) -> tuple[str, ...]:
    """BIO tag sequence of length ``n`` for one frame's argument spans."""
    tags = ["O"] * n
    for label, start, end in frame.args:
        if end > n:
            raise ValueError(f"argument span [{start}, {end}] beyond sentence end {n}")
        tags[start - 1] = f"B-{label}"
        for pos in range(start + 1, end + 1):
            tags[pos - 1] = f"I-{label}"
    return tuple(tags)


def parse_frames(text: str) -> list[tuple[Sentence, list[SrlFrame]]]:
    """Read blank-line-separated sentences of SRL frame annotations.

    Per line: token, predicate marker (``V`` or ``-``), then one column per
    predicate holding that predicate's BIO tag for the token.
    """
    out = []
    for block in _blocks(text):
        start_line = block[0][0]
        width = None
        tokens = []
        markers = []
        columns: list[list[str]] = []
        for lineno, line in block:
            cols = line.split("\t")
            if len(cols) < 2:
                raise FormatError(
                    "expected at least token and predicate-marker columns", line=lineno
                )
            if width is None:
                width = len(cols)
                columns = [[] for _ in range(width - 2)]
            elif len(cols) != width:
                raise FormatError(
                    f"inconsistent column count: {len(cols)} vs {width}", line=lineno
                )
            if cols[0] == "":
                raise FormatError("empty token", line=lineno)
            if cols[1] not in ("V", "-"):
                raise FormatError(
                    f"predicate marker must be 'V' or '-', got {cols[1]!r}", line=lineno
                )
            tokens.append(cols[0])
            markers.append(cols[1])
            for k in range(width - 2):
                columns[k].append(cols[2 + k])
        predicates = [i for i, mark in enumerate(markers, start=1) if mark == "V"]
        if len(predicates) != len(columns):
            raise FormatError(
                f"{len(predicates)} predicates marked but {len(columns)} tag columns",
                line=start_line,
            )
        frames = []
        for pred, column in zip(predicates, columns):
            try:
                spans = bio_to_spans(column)
            except ValueError as err:
                line = start_line + getattr(err, "position", 1) - 1
                raise FormatError(str(err), line=line) from None
            try:
                frames.append(SrlFrame(pred, frozenset(spans)))
            except ValueError as err:
                raise FormatError(str(err), line=start_line) from None
        out.append((Sentence(tuple(tokens)), frames))
    return out


def write_frames(annotated: list[tuple[Sentence, list[SrlFrame]]]) -> str:
    """Inverse of :func:`parse_frames`."""
    blocks = []
    for sentence, frames in annotated:
        n = len(sentence)
        markers = ["-"] * n
        for frame in frames:
            markers[frame.predicate - 1] = "V"
        columns = [frame_to_bio(frame, n) for frame in frames]
        lines = []
        for i in range(n):
            cells = [sentence.tokens[i], markers[i]]
            cells.extend(column[i] for column in columns)
            lines.append("\t".join(cells))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
