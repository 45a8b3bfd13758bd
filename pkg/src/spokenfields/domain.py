"""Core data model: field specs, entity values, transcripts, and the
canonical value formats every other module compares against.

Canonical formats:
    zip_code       exactly 5 ASCII digits ("12345"); a +4 add-on is discarded
    date_of_birth  MM-DD-YYYY, zero-padded, US month-first order
    person_name    the first-name token, title-cased, titles stripped

Equivalence is canonical-form comparison after trimming and case-folding.
Dates additionally accept 4/5/6/8-digit continuous forms ("11524" and
"01152024" both mean 01-15-2024); ZIP codes accept only the exact 5-digit
match.
"""

from __future__ import annotations

import datetime as _dt
import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, TextIO


class FormatError(ValueError):
    """Raised when a raw string cannot be coerced to a kind's canonical format."""

    def __init__(self, kind: str, raw: str, reason: str = ""):
        self.kind = kind
        self.raw = raw
        msg = f"cannot canonicalize {raw!r} as {kind}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class UnknownKindError(KeyError):
    """Raised when an entity kind has not been registered."""


ZIP_CODE = "zip_code"
DATE_OF_BIRTH = "date_of_birth"
PERSON_NAME = "person_name"


@dataclass(frozen=True)
class KindFormat:
    """Canonical format and equivalence coercion for one entity kind."""

    tag: str
    canonicalize: Callable[[str], str]
    # Lenient coercion used only for equivalence checks; defaults to the
    # canonicalizer itself.
    coerce: Callable[[str], str] | None = None


_KINDS: dict[str, KindFormat] = {}


def register_kind(fmt: KindFormat) -> None:
    """Register an entity kind. Extension kinds must supply a canonical
    format before any FieldSpec can reference them."""
    _KINDS[fmt.tag] = fmt


def known_kinds() -> list[str]:
    return sorted(_KINDS)


def _kind_format(kind: str) -> KindFormat:
    try:
        return _KINDS[kind]
    except KeyError:
        raise UnknownKindError(kind) from None


# ---------------------------------------------------------------------------
# ZIP codes

_ZIP_RE = re.compile(r"(\d{5})(?:[-\s]\d{4})?")


def _canonicalize_zip(raw: str) -> str:
    m = _ZIP_RE.fullmatch(raw.strip())
    if m is None:
        raise FormatError(ZIP_CODE, raw, "expected 5 digits (optional +4 add-on)")
    return m.group(1)


# ---------------------------------------------------------------------------
# Dates of birth

_DATE_SEP_RE = re.compile(r"(\d{1,2})[-/](\d{1,2})[-/](\d{4})")
_ISO_RE = re.compile(r"(\d{4})-(\d{2})-(\d{2})")


def century_for(two_digit_year: int, today: _dt.date | None = None) -> int:
    """Expand a 2-digit year assuming it names a past (birth) date: years
    after the current 2-digit year fall in the 1900s, the rest in the 2000s."""
    if today is None:
        today = _dt.date.today()
    if two_digit_year > today.year % 100:
        return 1900 + two_digit_year
    return 2000 + two_digit_year


def _valid_date(month: int, day: int, year: int) -> bool:
    try:
        _dt.date(year, month, day)
    except ValueError:
        return False
    return 1 <= year <= 9999


def format_date(month: int, day: int, year: int) -> str:
    if not _valid_date(month, day, year):
        raise FormatError(DATE_OF_BIRTH, f"{month}-{day}-{year}", "not a calendar date")
    return f"{month:02d}-{day:02d}-{year:04d}"


def expand_date_digits(digits: str, today: _dt.date | None = None) -> str:
    """Expand a continuous digit form to MM-DD-YYYY.

    4 digits read M/D/YY, 5 digits prefer M/DD/YY over MM/D/YY, 6 digits
    read MM/DD/YY, 8 digits read MM/DD/YYYY. Two-digit years expand via
    the past-date century rule.
    """
    if not digits.isdigit():
        raise FormatError(DATE_OF_BIRTH, digits, "expected digits only")
    n = len(digits)
    candidates: list[tuple[int, int, int]] = []
    if n == 4:
        candidates = [(int(digits[0]), int(digits[1]), century_for(int(digits[2:4]), today))]
    elif n == 5:
        candidates = [
            (int(digits[0]), int(digits[1:3]), century_for(int(digits[3:5]), today)),
            (int(digits[0:2]), int(digits[2]), century_for(int(digits[3:5]), today)),
        ]
    elif n == 6:
        candidates = [(int(digits[0:2]), int(digits[2:4]), century_for(int(digits[4:6]), today))]
    elif n == 8:
        candidates = [(int(digits[0:2]), int(digits[2:4]), int(digits[4:8]))]
    else:
        raise FormatError(DATE_OF_BIRTH, digits, "expected 4, 5, 6 or 8 digits")
    for month, day, year in candidates:
        if _valid_date(month, day, year):
            return format_date(month, day, year)
    raise FormatError(DATE_OF_BIRTH, digits, "no valid month-first reading")


def _canonicalize_dob(raw: str) -> str:
    text = raw.strip()
    m = _DATE_SEP_RE.fullmatch(text)
    if m:
        month, day, year = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if not _valid_date(month, day, year):
            raise FormatError(DATE_OF_BIRTH, raw, "not a calendar date")
        return format_date(month, day, year)
    m = _ISO_RE.fullmatch(text)
    if m:
        year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if not _valid_date(month, day, year):
            raise FormatError(DATE_OF_BIRTH, raw, "not a calendar date")
        return format_date(month, day, year)
    if text.isdigit() and len(text) == 8:
        return expand_date_digits(text)
    raise FormatError(DATE_OF_BIRTH, raw, "expected MM-DD-YYYY or 8 digits")


def _coerce_dob(raw: str) -> str:
    """Equivalence-side coercion: additionally accepts 4/5/6-digit forms."""
    text = raw.strip()
    if text.isdigit() and len(text) in (4, 5, 6):
        return expand_date_digits(text)
    return _canonicalize_dob(text)


# ---------------------------------------------------------------------------
# Person names

_TITLES = {"mr", "mrs", "ms", "miss", "dr", "prof", "mx"}
_SUFFIXES = {"jr", "sr", "ii", "iii", "iv"}


def _name_tokens(text: str) -> list[str]:
    out = []
    for tok in re.split(r"[\s]+", text.strip()):
        tok = tok.strip(".,;:!?\"()")
        if tok:
            out.append(tok)
    return out


def _canonicalize_name(raw: str) -> str:
    text = raw.strip()
    # "Last, First" convention: the token after the comma is the first name.
    if "," in text:
        head, _, tail = text.partition(",")
        if head.strip() and tail.strip():
            text = tail.strip()
    tokens = [t for t in _name_tokens(text) if t.lower().rstrip(".") not in _TITLES]
    tokens = [t for t in tokens if t.lower().rstrip(".") not in _SUFFIXES]
    for tok in tokens:
        cleaned = re.sub(r"[^A-Za-z'\-]", "", tok)
        if len(cleaned.replace("'", "").replace("-", "")) >= 2:
            return cleaned.title()
    raise FormatError(PERSON_NAME, raw, "no first-name token found")


register_kind(KindFormat(ZIP_CODE, _canonicalize_zip))
register_kind(KindFormat(DATE_OF_BIRTH, _canonicalize_dob, _coerce_dob))
register_kind(KindFormat(PERSON_NAME, _canonicalize_name))


def canonicalize(kind: str, raw: str) -> str:
    """Coerce a raw value to the kind's canonical format.

    Raises FormatError when the value cannot be coerced, UnknownKindError
    for unregistered kinds.
    """
    if not raw or not raw.strip():
        raise FormatError(kind, raw, "empty value")
    return _kind_format(kind).canonicalize(raw)


def values_equivalent(kind: str, a: str, b: str) -> bool:
    """True iff both values canonicalize to the same thing.

    Dates accept continuous 4/5/6/8-digit forms on either side; ZIP codes
    accept only the exact 5-digit match. Symmetric by construction.
    """
    fmt = _kind_format(kind)
    coerce = fmt.coerce or fmt.canonicalize
    return coerce(a).strip().casefold() == coerce(b).strip().casefold()


# ---------------------------------------------------------------------------
# Records


@dataclass(frozen=True)
class FieldSpec:
    """A structured field description: what is being asked and in what format."""

    field_name: str
    kind: str
    output_type: str
    question: str
    description: str

    def __post_init__(self):
        if not self.field_name:
            raise ValueError("field_name must be non-empty")
        if not self.question:
            raise ValueError("question must be non-empty")
        if not self.description:
            raise ValueError("description must be non-empty")
        _kind_format(self.kind)


@dataclass(frozen=True)
class EntityValue:
    """A value of one entity kind, in canonical and as-produced form."""

    kind: str
    canonical: str
    raw: str

    @classmethod
    def from_raw(cls, kind: str, raw: str) -> "EntityValue":
        return cls(kind=kind, canonical=canonicalize(kind, raw), raw=raw)


class Provenance(str, Enum):
    LLM_GENERATED = "llm_generated"
    RULE_RENDERED = "rule_rendered"
    REAL = "real"


class Split(str, Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True)
class Transcript:
    """One spoken-style utterance with its ground-truth value and tags."""

    text: str
    value: EntityValue
    variation_tags: frozenset[str]
    provenance: Provenance = Provenance.RULE_RENDERED

    def __post_init__(self):
        if not self.text:
            raise ValueError("transcript text must be non-empty")
        if self.provenance is not Provenance.REAL and not self.variation_tags:
            raise ValueError("synthetic transcripts need at least one variation tag")


@dataclass(frozen=True)
class LabeledSample:
    """A transcript plus its validation and split status."""

    transcript: Transcript
    validated: bool = False
    split: Split = Split.UNASSIGNED

    def to_json_obj(self) -> dict:
        # Field order is fixed so serialized datasets are byte-stable.
        return {
            "text": self.transcript.text,
            "value": {
                "kind": self.transcript.value.kind,
                "canonical": self.transcript.value.canonical,
                "raw": self.transcript.value.raw,
            },
            "variation_tags": sorted(self.transcript.variation_tags),
            "validated": self.validated,
            "split": self.split.value,
            "provenance": self.transcript.provenance.value,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LabeledSample":
        value = EntityValue(
            kind=obj["value"]["kind"],
            canonical=obj["value"]["canonical"],
            raw=obj["value"].get("raw", obj["value"]["canonical"]),
        )
        transcript = Transcript(
            text=obj["text"],
            value=value,
            variation_tags=frozenset(obj["variation_tags"]),
            provenance=Provenance(obj.get("provenance", "llm_generated")),
        )
        return cls(
            transcript=transcript,
            validated=bool(obj.get("validated", False)),
            split=Split(obj.get("split", "unassigned")),
        )


def dump_jsonl(samples: Iterable[LabeledSample], fp: TextIO) -> None:
    for sample in samples:
        fp.write(json.dumps(sample.to_json_obj(), ensure_ascii=False))
        fp.write("\n")


def load_jsonl(fp: TextIO) -> Iterator[LabeledSample]:
    for line in fp:
        line = line.strip()
        if line:
            yield LabeledSample.from_json_obj(json.loads(line))
