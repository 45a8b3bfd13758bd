"""Deterministic recovery of entity values from spoken-style text.

This is the reference extractor: it tokenizes an utterance, resolves
self-corrections and repetitions, assembles digit content from number
words, and recovers ZIP codes, dates of birth, or first names. It is the
oracle the validation module uses, independent of any chat backend.

Correction semantics: on a marker ("no", "wait", "I mean", "no wait") the
spoken run right before it is superseded by the run right after. When the
replacement is at least as long (in digits) as the preceding run, the whole
run is discarded ("seven oh ... no, nine oh two one oh" -> 90210); when it
is shorter, only the trailing digits it re-speaks are dropped
("one two three... no wait, four five" -> 1245). Name corrections always
discard the preceding name run.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from . import lexicon
from .domain import (
    DATE_OF_BIRTH,
    PERSON_NAME,
    ZIP_CODE,
    EntityValue,
    FieldSpec,
    FormatError,
    century_for,
    expand_date_digits,
    format_date,
)


class TokenClass(Enum):
    DIGIT_WORD = "digit_word"
    NUMBER_WORD = "number_word"
    ORDINAL = "ordinal"
    MONTH = "month"
    FILLER = "filler"
    CORRECTION_MARKER = "correction_marker"
    NAME_TOKEN = "name_token"
    OTHER = "other"


@dataclass(frozen=True)
class Token:
    surface: str
    cls: TokenClass
    sep_before: str = " "
    boundary_before: bool = False


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


_WORDISH_RE = re.compile(r"[A-Za-z][A-Za-z'\-]*|\d[\d\-/]*")
_BOUNDARY_RE = re.compile(r"[,;…]|\.\.\.")
_CAMEL_RE = re.compile(r"^[A-Z][a-z]+(?:[A-Z][a-z]+)+$")
_SPELLING_RE = re.compile(r"^(?:[A-Za-z]-){2,}[A-Za-z]$")
_REVERSAL_CUE_RE = re.compile(r"\b(reverse|reversed|backwards|backward)\b", re.I)

_NAME_STOPWORDS = {
    "i", "it", "its", "it's", "is", "that", "that's", "the", "my", "me",
    "a", "an", "yes", "yeah", "yep", "so", "please", "think", "definitely",
    "absolutely", "confirmed", "carefully", "slowly", "right", "correct",
    "sense", "make", "does", "name", "number", "zip", "code", "date",
    "birth", "this", "am", "was", "born", "of", "sure", "not", "sorry",
    "says", "spelled", "repeat", "again", "reverse", "backwards", "hello",
    "hi", "okay", "ok", "and", "mean", "wait",
}

_MARKER_PHRASES = ("no wait", "i mean")
_MARKER_WORDS = {"no", "wait"}
_FILLER_PHRASES = {"you know", "like i said"}


def _classify_word(surface: str) -> TokenClass:
    lower = surface.lower()
    if lower in _MARKER_WORDS:
        return TokenClass.CORRECTION_MARKER
    if lower in lexicon.WORD_TO_DIGIT:
        return TokenClass.DIGIT_WORD
    if lower in lexicon.TWO_DIGIT_WORDS or lower in ("hundred", "double", "triple"):
        return TokenClass.NUMBER_WORD
    if surface[0].isdigit():
        return TokenClass.NUMBER_WORD
    if "-" in surface and all(p in lexicon.WORD_TO_DIGIT for p in lower.split("-")):
        return TokenClass.NUMBER_WORD
    if lower in lexicon.ORDINAL_DAYS:
        return TokenClass.ORDINAL
    if lower in lexicon.MONTHS:
        return TokenClass.MONTH
    if lower in lexicon.FILLER_WORDS or lower in _FILLER_PHRASES or lower == "pause":
        return TokenClass.FILLER
    if len(surface) >= 8 and surface.isalpha() and lexicon.segment_digit_words(lower):
        return TokenClass.NUMBER_WORD
    if _SPELLING_RE.match(surface):
        return TokenClass.OTHER
    base = surface.replace("'", "").replace("-", "")
    if (
        base.isalpha()
        and len(base) >= 2
        and surface[0].isupper()
        and lower not in _NAME_STOPWORDS
        and lower.rstrip(".") not in lexicon.TITLE_WORDS
        and lower.rstrip(".") not in lexicon.SUFFIX_WORDS
    ):
        return TokenClass.NAME_TOKEN
    return TokenClass.OTHER


def tokenize(text: str) -> TokenStream:
    """Total tokenizer: every token gets a class; separators record group
    boundaries (commas, ellipses, the literal word "pause")."""
    tokens: list[Token] = []
    pos = 0
    pending_sep = ""
    raw: list[tuple[str, str]] = []  # (sep_before, surface)
    for m in _WORDISH_RE.finditer(text):
        sep = text[pos : m.start()]
        raw.append((pending_sep + sep, m.group(0)))
        pending_sep = ""
        pos = m.end()

    # Merge two-word phrases (markers, "you know") and split CamelCase.
    merged: list[tuple[str, str]] = []
    i = 0
    while i < len(raw):
        sep, word = raw[i]
        lower = word.lower()
        nxt = raw[i + 1] if i + 1 < len(raw) else None
        if nxt is not None and nxt[0].strip() == "":
            pair = f"{lower} {nxt[1].lower()}"
            if pair in _MARKER_PHRASES or pair in _FILLER_PHRASES:
                merged.append((sep, f"{word} {nxt[1]}"))
                i += 2
                continue
        if _CAMEL_RE.match(word):
            parts = re.findall(r"[A-Z][a-z]+", word)
            merged.append((sep, parts[0]))
            for part in parts[1:]:
                merged.append(("", part))
            i += 1
            continue
        merged.append((sep, word))
        i += 1

    for sep, word in merged:
        lower = word.lower()
        if " " in word:
            cls = TokenClass.CORRECTION_MARKER if lower in _MARKER_PHRASES else TokenClass.FILLER
        else:
            cls = _classify_word(word)
        tokens.append(
            Token(
                surface=word,
                cls=cls,
                sep_before=sep,
                boundary_before=bool(_BOUNDARY_RE.search(sep)),
            )
        )
    return TokenStream(tokens=tuple(tokens))


_DIGITISH = {TokenClass.DIGIT_WORD, TokenClass.NUMBER_WORD}
_VALUE_CLASSES = {
    TokenClass.DIGIT_WORD,
    TokenClass.NUMBER_WORD,
    TokenClass.ORDINAL,
    TokenClass.MONTH,
    TokenClass.NAME_TOKEN,
}


def _digits_of(tokens: list[Token]) -> str:
    """Assemble the digit string spoken by a run of tokens."""
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        lower = tok.surface.lower()
        if tok.cls is TokenClass.DIGIT_WORD:
            out.append(lexicon.WORD_TO_DIGIT[lower])
            i += 1
        elif tok.cls is TokenClass.NUMBER_WORD:
            if lower in ("double", "triple"):
                times = 2 if lower == "double" else 3
                if i + 1 < n and tokens[i + 1].cls is TokenClass.DIGIT_WORD:
                    out.append(lexicon.WORD_TO_DIGIT[tokens[i + 1].surface.lower()] * times)
                    i += 2
                else:
                    i += 1
            elif lower == "hundred":
                # "hundred" multiplies only the immediately preceding word:
                # "three hundred two five" -> 30025.
                out.append("00")
                i += 1
            elif lower in lexicon.TWO_DIGIT_WORDS:
                value = lexicon.TWO_DIGIT_WORDS[lower]
                if (
                    lower in lexicon.TENS_WORDS
                    and i + 1 < n
                    and tokens[i + 1].cls is TokenClass.DIGIT_WORD
                    and tokens[i + 1].surface.lower() in lexicon.UNIT_WORDS
                    and not tokens[i + 1].boundary_before
                ):
                    # "thirty two" spoken as separate words -> 32
                    unit = lexicon.WORD_TO_DIGIT[tokens[i + 1].surface.lower()]
                    out.append(str(int(value) + int(unit)))
                    i += 2
                else:
                    out.append(value)
                    i += 1
            elif tok.surface[0].isdigit():
                out.append(re.sub(r"\D", "", tok.surface))
                i += 1
            elif "-" in tok.surface:
                out.extend(lexicon.WORD_TO_DIGIT[p] for p in lower.split("-"))
                i += 1
            else:
                out.extend(lexicon.WORD_TO_DIGIT[w] for w in lexicon.segment_digit_words(lower))
                i += 1
        else:
            i += 1
    return "".join(out)


def _transparent_in_run(tok: Token) -> bool:
    return (
        tok.cls is TokenClass.FILLER
        or tok.surface.lower().rstrip(".") in lexicon.TITLE_WORDS
    )


def _run_before(tokens: list[Token], idx: int, classes: set[TokenClass]) -> list[int]:
    """Indices of the value-token run immediately before position idx,
    crossing fillers, titles, and pause boundaries."""
    run: list[int] = []
    j = idx - 1
    while j >= 0:
        cls = tokens[j].cls
        if cls in classes:
            run.append(j)
        elif _transparent_in_run(tokens[j]):
            pass
        else:
            break
        j -= 1
    run.reverse()
    return run


def _run_after(tokens: list[Token], idx: int, classes: set[TokenClass]) -> list[int]:
    run: list[int] = []
    j = idx + 1
    while j < len(tokens):
        cls = tokens[j].cls
        if cls in classes:
            run.append(j)
        elif _transparent_in_run(tokens[j]):
            pass
        else:
            break
        j += 1
    return run


def resolve_corrections(stream: TokenStream) -> TokenStream:
    """Apply correction markers and collapse repeated groups. Idempotent."""
    tokens = list(stream.tokens)

    # Corrections, left to right.
    while True:
        marker_idx = next(
            (i for i, t in enumerate(tokens) if t.cls is TokenClass.CORRECTION_MARKER),
            None,
        )
        if marker_idx is None:
            break
        drop: set[int] = {marker_idx}
        before = _run_before(tokens, marker_idx, _DIGITISH)
        after = _run_after(tokens, marker_idx, _DIGITISH)
        if before and after:
            len_before = len(_digits_of([tokens[i] for i in before]))
            len_after = len(_digits_of([tokens[i] for i in after]))
            if len_after >= len_before:
                drop.update(before)
            else:
                need = len_before - len_after
                dropped = 0
                for i in reversed(before):
                    if dropped >= need:
                        break
                    dropped += len(_digits_of([tokens[i]]))
                    drop.add(i)
        else:
            name_before = _run_before(tokens, marker_idx, {TokenClass.NAME_TOKEN})
            name_after = _run_after(tokens, marker_idx, {TokenClass.NAME_TOKEN})
            if name_before and name_after:
                drop.update(name_before)
        tokens = [t for i, t in enumerate(tokens) if i not in drop]

    # Repetition collapse: adjacent boundary-delimited groups speaking the
    # same value content keep one occurrence. Only value-bearing tokens
    # count so lead-in words ("it's ...") do not defeat the comparison.
    changed = True
    while changed:
        changed = False
        groups: list[list[int]] = []
        current: list[int] = []
        for i, tok in enumerate(tokens):
            if tok.boundary_before and current:
                groups.append(current)
                current = []
            current.append(i)
        if current:
            groups.append(current)

        def signature(group: list[int]) -> tuple[str, ...]:
            return tuple(
                tokens[i].surface.lower()
                for i in group
                if tokens[i].cls in _VALUE_CLASSES
            )

        for a, b in zip(groups, groups[1:]):
            sig_a, sig_b = signature(a), signature(b)
            if sig_a and sig_a == sig_b:
                tokens = [t for i, t in enumerate(tokens) if i not in set(a)]
                changed = True
                break
    return TokenStream(tokens=tuple(tokens))


def boundary_value_groups(text: str) -> list[tuple[str, ...]]:
    """Value-token content of each boundary-delimited group, in order.

    Exposed so text producers can check that adjacent groups never repeat
    the same value content (which correction resolution would collapse).
    """
    tokens = tokenize(text).tokens
    groups: list[tuple[str, ...]] = []
    current: list[str] = []
    started = False
    for tok in tokens:
        if tok.boundary_before and started:
            groups.append(tuple(current))
            current = []
        started = True
        if tok.cls in _VALUE_CLASSES:
            current.append(tok.surface.lower())
    if started:
        groups.append(tuple(current))
    return groups


def _digit_runs(stream: TokenStream) -> list[str]:
    """Digit strings of maximal value runs; fillers and pauses are
    transparent, substantive words break a run."""
    runs: list[str] = []
    current: list[Token] = []
    for tok in stream.tokens:
        if tok.cls in _DIGITISH:
            current.append(tok)
        elif tok.cls is TokenClass.FILLER:
            continue
        else:
            if current:
                runs.append(_digits_of(current))
            current = []
    if current:
        runs.append(_digits_of(current))
    return [r for r in runs if r]


def parse_number_words(text: str) -> str:
    """All digits recoverable from the text after correction and repetition
    resolution; empty string when none."""
    if not text:
        return ""
    stream = resolve_corrections(tokenize(text))
    return "".join(_digit_runs(stream))


# ---------------------------------------------------------------------------
# Per-kind extraction


_ZIP_PLUS4_RE = re.compile(r"\b(\d{5})-\d{4}\b")


def _extract_zip(text: str) -> str | None:
    text = _ZIP_PLUS4_RE.sub(r"\1", text)
    stream = resolve_corrections(tokenize(text))
    reverse_cue = bool(_REVERSAL_CUE_RE.search(text))
    for run in _digit_runs(stream):
        if len(run) == 5:
            return run[::-1] if reverse_cue else run
    return None


def _spoken_year(digits: str, ordinal_day: bool) -> tuple[str, str] | None:
    """Split a post-month digit stream into (day, year); day may be empty
    when an ordinal supplied it."""
    if ordinal_day:
        return "", digits
    if len(digits) >= 3:
        day2 = digits[:2]
        if 1 <= int(day2) <= 31 and len(digits) - 2 in (2, 4):
            return day2, digits[2:]
        if len(digits) - 1 in (2, 4):
            return digits[:1], digits[1:]
    return None


def _extract_dob(text: str) -> str | None:
    stream = resolve_corrections(tokenize(text))
    tokens = list(stream.tokens)

    month_idx = next((i for i, t in enumerate(tokens) if t.cls is TokenClass.MONTH), None)
    if month_idx is not None:
        month = lexicon.MONTHS[tokens[month_idx].surface.lower()]
        rest = tokens[month_idx + 1 :]
        ordinal = next((t for t in rest if t.cls is TokenClass.ORDINAL), None)
        digits = _digits_of([t for t in rest if t.cls in _DIGITISH])
        if ordinal is not None:
            day = lexicon.ORDINAL_DAYS[ordinal.surface.lower()]
            year_digits = digits
        else:
            split = _spoken_year(digits, ordinal_day=False)
            if split is None:
                return None
            day_digits, year_digits = split
            day = int(day_digits) if day_digits else 0
        if len(year_digits) == 4:
            year = int(year_digits)
        elif len(year_digits) == 2:
            year = century_for(int(year_digits))
        else:
            return None
        try:
            return format_date(month, day, year)
        except FormatError:
            return None

    runs = _digit_runs(stream)
    candidates = ["".join(runs)] + runs if len(runs) > 1 else runs
    for digits in candidates:
        if len(digits) in (4, 5, 6, 8):
            try:
                return expand_date_digits(digits)
            except FormatError:
                continue
    return None


def _extract_name(text: str) -> str | None:
    stream = resolve_corrections(tokenize(text))
    tokens = list(stream.tokens)
    names = [
        (i, t)
        for i, t in enumerate(tokens)
        if t.cls is TokenClass.NAME_TOKEN
    ]
    if not names:
        # Lenient fallback: all-lowercase transcripts still carry a name.
        for tok in tokens:
            base = tok.surface.replace("'", "").replace("-", "")
            if (
                tok.cls is TokenClass.OTHER
                and base.isalpha()
                and len(base) >= 2
                and tok.surface.lower() not in _NAME_STOPWORDS
                and not _SPELLING_RE.match(tok.surface)
            ):
                names.append((0, tok))
                break
        if not names:
            return None
    candidate = names[0][1].surface
    if len(names) >= 2:
        first_idx, first_tok = names[0]
        second_idx, second_tok = names[1]
        # "Last, First" reversal: exactly a comma between two distinct names.
        if (
            second_idx == first_idx + 1
            and re.fullmatch(r"\s*,\s*", second_tok.sep_before or "")
            and first_tok.surface.lower() != second_tok.surface.lower()
        ):
            candidate = second_tok.surface
    lower = candidate.lower()
    if lower in lexicon.NICKNAMES:
        return lexicon.NICKNAMES[lower]
    cleaned = re.sub(r"[^A-Za-z'\-]", "", candidate)
    return cleaned.title() if len(cleaned.replace("'", "").replace("-", "")) >= 2 else None


def extract(spec: FieldSpec, text: str) -> EntityValue | None:
    """Recover the field's value from a spoken-style transcript, or None.

    Never raises on arbitrary input; a None result means nothing
    recoverable was found (false-negative semantics for scoring).
    """
    if not isinstance(text, str) or not text.strip():
        return None
    try:
        if spec.kind == ZIP_CODE:
            raw = _extract_zip(text)
        elif spec.kind == DATE_OF_BIRTH:
            raw = _extract_dob(text)
        elif spec.kind == PERSON_NAME:
            raw = _extract_name(text)
        else:
            return None
        if raw is None:
            return None
        return EntityValue.from_raw(spec.kind, raw)
    except Exception:
        return None
