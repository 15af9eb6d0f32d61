"""Language-agnostic source tokenization.

A small character-class lexer that never fails: comments, strings,
numbers, identifiers and multi-character operators are recognized from a
LanguageProfile, and anything else falls through as a single-character
punctuation token. Whitespace separates tokens and is never a token
itself, so `render` produces a canonical single-spaced form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator


class TokenKind(Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    NUMBER = "number"
    STRING = "string"
    COMMENT = "comment"
    OPERATOR = "operator"
    PUNCT = "punct"


@dataclass(frozen=True)
class Token:
    """One lexeme with its byte span into the original source."""

    kind: TokenKind
    text: str
    byte_start: int
    byte_end: int


@dataclass(frozen=True)
class StringRule:
    delim: str
    escape: str | None = "\\"


@dataclass(frozen=True)
class LanguageProfile:
    """Per-language lexing rules plus the keyword set used by metrics."""

    name: str
    keywords: frozenset[str] = frozenset()
    line_comments: tuple[str, ...] = ()
    block_comments: tuple[tuple[str, str], ...] = ()
    strings: tuple[StringRule, ...] = ()
    operators: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        # Maximal munch needs longest-first candidates; dedupe keeps the
        # table stable however the profile was written.
        ordered = tuple(sorted(set(self.operators), key=lambda s: (-len(s), s)))
        object.__setattr__(self, "operators", ordered)

    @classmethod
    def from_dict(cls, obj: dict) -> "LanguageProfile":
        strings = tuple(
            StringRule(delim=s["delim"], escape=s.get("escape", "\\"))
            for s in obj.get("strings", ())
        )
        return cls(
            name=obj["name"],
            keywords=frozenset(obj.get("keywords", ())),
            line_comments=tuple(obj.get("line_comments", ())),
            block_comments=tuple(tuple(pair) for pair in obj.get("block_comments", ())),
            strings=strings,
            operators=tuple(obj.get("operators", ())),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "LanguageProfile":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


_C_OPERATORS = (
    "<<<=", ">>>=", ">>>", "<<=", ">>=", "===", "!==", "...", "->", "=>",
    "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/",
    "%", "=", "<", ">", "!", "&", "|", "^", "~", "?", ":", ".", "@",
)

_JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while var record sealed
    permits yield true false null""".split()
)

_GENERIC_KEYWORDS = frozenset(
    """if else for while do break continue return switch case default try
    catch finally throw new delete class struct enum interface extends
    implements import export from function def lambda var let const static
    public private protected void int long float double bool boolean char
    string true false null none nil this self super yield async await
    in is not and or pass raise with as global assert""".split()
)

JAVA = LanguageProfile(
    name="java",
    keywords=_JAVA_KEYWORDS,
    line_comments=("//",),
    block_comments=(("/*", "*/"),),
    strings=(StringRule('"'), StringRule("'")),
    operators=_C_OPERATORS,
)

GENERIC = LanguageProfile(
    name="generic",
    keywords=_GENERIC_KEYWORDS,
    line_comments=("//", "#"),
    block_comments=(("/*", "*/"),),
    strings=(StringRule('"'), StringRule("'")),
    operators=_C_OPERATORS,
)

BUILTIN_PROFILES = {"java": JAVA, "generic": GENERIC}


def profile_for_lang(lang: str | None) -> LanguageProfile:
    """Builtin profile for a language tag; unknown tags get the generic one."""
    if lang is None:
        return GENERIC
    return BUILTIN_PROFILES.get(lang.strip().lower(), GENERIC)


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def tokenize(source: str, profile: LanguageProfile = GENERIC) -> list[Token]:
    """Lex `source` into tokens. Total: any input yields a token list.

    Unterminated strings and block comments run to end of input rather
    than raising; unknown characters become single-char punct tokens.
    """
    n = len(source)
    ascii_only = source.isascii()
    if not ascii_only:
        # Cumulative UTF-8 offsets so byte spans stay exact on non-ASCII input.
        offs = [0] * (n + 1)
        total = 0
        for i, ch in enumerate(source):
            total += len(ch.encode("utf-8"))
            offs[i + 1] = total

    def byte_at(i: int) -> int:
        return i if ascii_only else offs[i]

    tokens: list[Token] = []
    pos = 0
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue

        start = pos
        kind = None

        for marker in profile.line_comments:
            if source.startswith(marker, pos):
                end = source.find("\n", pos)
                pos = n if end == -1 else end
                kind = TokenKind.COMMENT
                break
        if kind is None:
            for opener, closer in profile.block_comments:
                if source.startswith(opener, pos):
                    end = source.find(closer, pos + len(opener))
                    pos = n if end == -1 else end + len(closer)
                    kind = TokenKind.COMMENT
                    break
        if kind is None:
            for rule in profile.strings:
                if source.startswith(rule.delim, pos):
                    pos += len(rule.delim)
                    while pos < n:
                        if rule.escape and source.startswith(rule.escape, pos):
                            pos = min(n, pos + len(rule.escape) + 1)
                        elif source.startswith(rule.delim, pos):
                            pos += len(rule.delim)
                            break
                        else:
                            pos += 1
                    kind = TokenKind.STRING
                    break
        if kind is None and ch.isdigit():
            pos += 1
            while pos < n:
                c = source[pos]
                if c.isalnum() or c in "._":
                    pos += 1
                elif c in "+-" and source[pos - 1] in "eE" and pos + 1 < n and source[pos + 1].isdigit():
                    pos += 1  # exponent sign, as in 1.5e-3
                else:
                    break
            kind = TokenKind.NUMBER
        if kind is None and _is_ident_start(ch):
            pos += 1
            while pos < n and _is_ident_part(source[pos]):
                pos += 1
            text = source[start:pos]
            kind = TokenKind.KEYWORD if text in profile.keywords else TokenKind.IDENTIFIER
        if kind is None:
            for op in profile.operators:
                if source.startswith(op, pos):
                    pos += len(op)
                    kind = TokenKind.OPERATOR
                    break
        if kind is None:
            pos += 1
            kind = TokenKind.PUNCT

        tokens.append(Token(kind, source[start:pos], byte_at(start), byte_at(pos)))
    return tokens


def render(tokens: Iterable[Token | str], drop_comments: bool = False) -> str:
    """Join token texts with single spaces; optionally omit comments.

    Accepts plain strings too so corrupted token streams (which mix
    original texts with sentinel strings) render the same way.
    """
    parts = []
    for tok in tokens:
        if isinstance(tok, Token):
            if drop_comments and tok.kind is TokenKind.COMMENT:
                continue
            parts.append(tok.text)
        else:
            parts.append(tok)
    return " ".join(parts)


def canonical(source: str, profile: LanguageProfile = GENERIC) -> str:
    """Comment-free, single-spaced rendering.

    This is the form used for training targets and evolution states.
    """
    return render(tokenize(source, profile), drop_comments=True)


def token_texts(source: str, profile: LanguageProfile = GENERIC) -> list[str]:
    """Token texts of `source`, comments included."""
    return [t.text for t in tokenize(source, profile)]


def normalize_for_match(source: str, profile: LanguageProfile = GENERIC) -> str:
    """Strip comments, collapse whitespace runs to single spaces, lowercase.

    Operates on the raw text (comment spans blanked via the lexer), so
    original token adjacency like `x=1` is preserved.
    """
    data = source.encode("utf-8")
    out = bytearray()
    prev = 0
    for tok in tokenize(source, profile):
        if tok.kind is TokenKind.COMMENT:
            out += data[prev:tok.byte_start]
            out += b" "
            prev = tok.byte_end
    out += data[prev:]
    return " ".join(out.decode("utf-8").split()).lower()
