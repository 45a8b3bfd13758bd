"""Registry of linguistic variation types and transcript classification.

The built-in registry covers four categories: 17 general types, 18 ZIP-code
types, 12 date-of-birth types, and 12 name types, each with its instruction
and canonical example. Five ZIP-specific entries share their tabulated name
with a general entry (formal, casual, polite, confident, uncertain); those
ids carry a ``zip_`` prefix so the registry stays keyed by unique id.

Rule-mode classification matches deterministic per-type signatures authored
from the canonical examples, so the whole pipeline can run offline. Provider
mode asks a chat backend to tag the transcript against the registry; that
prompt is this package's own reconstruction, not a published one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from . import lexicon
from .domain import DATE_OF_BIRTH, PERSON_NAME, ZIP_CODE, UnknownKindError, expand_date_digits

if TYPE_CHECKING:  # pragma: no cover
    from .providers import ChatProvider

NOT_LISTED = "not_listed"


class Category(str, Enum):
    GENERAL = "general"
    ZIP_SPECIFIC = "zip_specific"
    DOB_SPECIFIC = "dob_specific"
    NAME_SPECIFIC = "name_specific"


_KIND_CATEGORY = {
    ZIP_CODE: Category.ZIP_SPECIFIC,
    DATE_OF_BIRTH: Category.DOB_SPECIFIC,
    PERSON_NAME: Category.NAME_SPECIFIC,
}


@dataclass(frozen=True)
class VariationType:
    """One linguistic variation: how a value gets verbalized."""

    id: str
    category: Category
    instruction: str
    example: str

    def __post_init__(self):
        if not self.instruction or not self.example:
            raise ValueError(f"variation {self.id!r} needs instruction and example")

    @property
    def example_input(self) -> str:
        """The spoken side of the example (tables write "input → value")."""
        return self.example.split("→")[0].strip()


_GENERAL_ROWS = [
    ("filler_words", "Include filler words like \"um\", \"uh\", \"you know\".", "um, it's one two three four five"),
    ("hesitation", "Include hesitations and pauses.", "it's... one... two... three..."),
    ("correction", "Include self-corrections.", "one two three... no wait, four five"),
    ("repetition", "Repeat parts for emphasis.", "one two three, one two three, four five"),
    ("pause", "Insert natural pauses.", "one two, pause, three four five"),
    ("formal", "Use formal, precise language.", "the number is one two three four five"),
    ("casual", "Use relaxed language.", "it's one two three four five"),
    ("polite", "Use polite language.", "please, it's one two three four five"),
    ("confident", "Sound confident.", "definitely one two three four five"),
    ("uncertain", "Sound unsure.", "I think it's one two three four five"),
    ("rushed", "Speak quickly.", "onetwothreefourfive"),
    ("careful", "Speak slowly and carefully.", "carefully, one two three four five"),
    ("confirmation", "Ask for confirmation.", "one two three four five, is that right?"),
    ("clarification", "Clarify the answer.", "one two three four five, does that make sense?"),
    ("direct_and_simple", "Be direct and simple.", "one two three four five"),
    ("brief_confirmation", "Use brief confirmation.", "yes, one two three four five"),
    ("concise_confirmation", "Use concise confirmation.", "confirmed, one two three four five"),
]

_ZIP_ROWS = [
    ("digit_by_digit", "Say each digit separately.", "one two three four five"),
    ("grouped_two", "Group digits in twos.", "twelve thirty-four five"),
    ("grouped_three", "Group digits in threes.", "one twenty-three forty-five"),
    ("hundred", "Use \"hundred\".", "three hundred two five"),
    ("mixed_grouping", "Use mixed digit groupings.", "twelve three four five"),
    ("spoken_number_split", "Split number words into digits.", "thirty two five eight"),
    ("reversed", "Say digits in reverse.", "five four three two one"),
    ("with_pause", "Add pauses.", "one two... three four... five"),
    ("with_repetition", "Repeat groups.", "one two, one two, three four five"),
    ("with_correction", "Self-correct.", "one two three... no wait, four five"),
    ("with_hesitation", "Add hesitation.", "one... two... three... four... five"),
    ("with_filler", "Use filler words.", "um, one two three, you know, four five"),
    ("zip_formal", "Formal phrasing.", "the digits are one two three four five"),
    ("zip_casual", "Casual phrasing.", "yeah, it's one two three four five"),
    ("zip_polite", "Polite phrasing.", "please, it's one two three four five"),
    ("zip_confident", "Confident tone.", "definitely one two three four five"),
    ("zip_uncertain", "Uncertain tone.", "I think it's one two three four five"),
    ("spelled_out", "Spell digits with hyphens.", "one-two-three-four-five"),
]

_DOB_ROWS = [
    ("date_as_4_digits", "4-digit format.", "1267 → 01-02-1967"),
    ("spoken_date_4_digits", "Spoken version of 4-digit.", "one two six seven → 01-02-1967"),
    ("date_as_5_digits", "5-digit format.", "32584 → 03-25-1984"),
    ("spoken_date_5_digits", "Spoken version of 5-digit.", "five one seven eight two → 05-17-1982"),
    ("date_as_6_digits", "6-digit format MMDDYY.", "120285 → 12-02-1985"),
    ("spoken_date_6_digits", "Spoken 6-digit format.", "one two zero two eight five → 12-02-1985"),
    ("date_as_8_digits", "Full 8-digit date.", "12021947 → 12-02-1947"),
    ("spoken_date_8_digits", "Spoken 8-digit format.", "one two zero two one nine four seven → 12-02-1947"),
    ("spoken_month_day_year", "Natural spoken format.", "January second, nineteen ninety"),
    ("mixed_spoken_and_digits", "Mixed formats.", "January zero two, nineteen ninety"),
    ("filler_or_correction", "Includes filler or correction.", "uh, zero one zero two one nine nine zero"),
    ("casual_or_polite_digits", "Casual/polite phrasing.", "please, one five, eighty five"),
]

_NAME_ROWS = [
    ("name_with_last", "Full name.", "John Smith → John"),
    ("name_with_prefix", "Prefix + name.", "My name is John Smith → John"),
    ("name_reverse_order", "Last name first.", "Smith, John → John"),
    ("name_with_title", "Name with title.", "Mr. John Smith → John"),
    ("name_with_middle", "Name with middle.", "John Michael Smith → John"),
    ("name_with_suffix", "Name with suffix.", "John Smith Jr. → John"),
    ("name_with_initials", "Initials format.", "J. M. Smith → John"),
    ("name_with_correction", "Correction.", "James—no, I mean John Smith → John"),
    ("name_partial_spelling", "Partial spelling.", "John, that's J-O-H-N Smith → John"),
    ("name_with_apostrophe", "Apostrophe in last name.", "O'Connor, John → John"),
    ("name_hyphenated", "Hyphenated last name.", "John Smith-Jones → John"),
    ("nickname", "Nickname.", "Johnny → John"),
]

_SENTINEL = VariationType(
    id=NOT_LISTED,
    category=Category.GENERAL,
    instruction="Fallback tag for transcripts matching no listed variation type.",
    example="(any transcript with no matching signature)",
)


class VariationRegistry:
    """Immutable id -> VariationType table with per-kind views."""

    def __init__(self, entries: Iterable[VariationType]):
        self._entries: dict[str, VariationType] = {}
        for entry in entries:
            if entry.id in self._entries:
                raise ValueError(f"duplicate variation id {entry.id!r}")
            self._entries[entry.id] = entry
        if NOT_LISTED not in self._entries:
            self._entries[NOT_LISTED] = _SENTINEL

    def __contains__(self, vid: str) -> bool:
        return vid in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, vid: str) -> VariationType:
        return self._entries[vid]

    def ids(self) -> list[str]:
        return list(self._entries)

    def entries(self) -> list[VariationType]:
        return list(self._entries.values())

    def for_kind(self, kind: str) -> list[VariationType]:
        """General entries first (table order), then the kind's own, without
        the not_listed sentinel."""
        try:
            specific = _KIND_CATEGORY[kind]
        except KeyError:
            raise UnknownKindError(kind) from None
        general = [e for e in self._entries.values() if e.category is Category.GENERAL and e.id != NOT_LISTED]
        own = [e for e in self._entries.values() if e.category is specific]
        return general + own

    def ids_for_kind(self, kind: str) -> list[str]:
        return [e.id for e in self.for_kind(kind)]

    @classmethod
    def builtin(cls) -> "VariationRegistry":
        entries = []
        for rows, category in (
            (_GENERAL_ROWS, Category.GENERAL),
            (_ZIP_ROWS, Category.ZIP_SPECIFIC),
            (_DOB_ROWS, Category.DOB_SPECIFIC),
            (_NAME_ROWS, Category.NAME_SPECIFIC),
        ):
            for vid, instruction, example in rows:
                entries.append(VariationType(vid, category, instruction, example))
        return cls(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "VariationRegistry":
        """Load a registry from TOML or JSON: a list of {id, category,
        instruction, example} records under the key "variations"."""
        path = Path(path)
        if path.suffix == ".toml":
            try:
                import tomllib  # type: ignore[import-not-found]
            except ModuleNotFoundError:
                import tomli as tomllib
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
        records = data["variations"] if isinstance(data, dict) else data
        entries = [
            VariationType(
                id=rec["id"],
                category=Category(rec["category"]),
                instruction=rec["instruction"],
                example=rec["example"],
            )
            for rec in records
        ]
        return cls(entries)


_DEFAULT_REGISTRY: VariationRegistry | None = None


def default_registry() -> VariationRegistry:
    global _DEFAULT_REGISTRY
    if _DEFAULT_REGISTRY is None:
        _DEFAULT_REGISTRY = VariationRegistry.builtin()
    return _DEFAULT_REGISTRY


def registry_for(kind: str, registry: VariationRegistry | None = None) -> list[VariationType]:
    """All variation types applicable to one entity kind."""
    return (registry or default_registry()).for_kind(kind)


# ---------------------------------------------------------------------------
# Rule-mode classification


_WORD_RE = re.compile(r"[A-Za-z][A-Za-z'\-]*|\d[\d\-]*")
_ELLIPSIS_RE = re.compile(r"\.\.\.|…")
_INITIAL_RE = re.compile(r"\b[A-Z]\.(?=\s|$)")
_SPELLING_RE = re.compile(r"\b(?:[A-Za-z]-){2,}[A-Za-z]\b")
_HYPHEN_NAME_RE = re.compile(r"\b[A-Z][a-z]+-[A-Z][a-z]+\b")
_APOSTROPHE_NAME_RE = re.compile(r"\b[A-Z]'[A-Z][a-z]+|\b[A-Z][a-z]?'[A-Z][a-z]+")
_TRANSPARENT = lexicon.FILLER_WORDS | {"pause", "you", "know", "and", "then"}
_FILLERISH = lexicon.FILLER_WORDS | {"you", "know"}

_STYLE_STOPWORDS = {
    "i", "it", "it's", "its", "is", "that", "the", "my", "me", "a", "an",
    "yes", "no", "yeah", "yep", "wait", "mean", "so", "please", "think",
    "definitely", "confirmed", "carefully", "right", "correct", "sense",
    "make", "does", "name", "number", "zip", "code", "date", "birth",
    "this", "am", "was", "born", "of", "sure", "not", "sorry", "um", "uh",
    "pause", "reverse", "backwards", "says", "spelled", "let", "repeat",
}


class _Features:
    """Cheap text features shared by all rule signatures."""

    def __init__(self, text: str):
        self.text = text
        self.lower = text.lower()
        self.ellipses = len(_ELLIPSIS_RE.findall(text))
        self.words = _WORD_RE.findall(text)
        self.lower_words = [w.lower() for w in self.words]
        self.numerals = [w for w in self.words if w.isdigit()]

        # Digit-word runs, with filler/pause words transparent.
        self.digit_runs: list[list[str]] = []
        self.fillers_inside_run = False
        run: list[str] = []
        pending_filler = False
        for w in self.lower_words:
            if w in lexicon.WORD_TO_DIGIT and w != "oh":
                if run and pending_filler:
                    self.fillers_inside_run = True
                run.append(w)
                pending_filler = False
            elif w in _TRANSPARENT:
                if run and w in _FILLERISH:
                    pending_filler = True
                continue
            else:
                if run:
                    self.digit_runs.append(run)
                run = []
                pending_filler = False
        if run:
            self.digit_runs.append(run)
        self.max_digit_run = max((len(r) for r in self.digit_runs), default=0)
        self.digit_word_count = sum(len(r) for r in self.digit_runs)

        self.two_digit_words = [w for w in self.lower_words if w in lexicon.TWO_DIGIT_WORDS]

        # Comma/ellipsis-delimited content groups (for repetition detection).
        self.groups: list[tuple[str, ...]] = []
        for chunk in re.split(r"[,…;]|\.\.\.", self.lower):
            toks = tuple(
                w for w in _WORD_RE.findall(chunk) if w not in _TRANSPARENT
            )
            if toks:
                self.groups.append(toks)

    def has(self, *phrases: str) -> bool:
        return any(re.search(rf"\b{re.escape(p)}\b", self.lower) for p in phrases)

    def starts(self, *phrases: str) -> bool:
        return any(re.match(rf"{re.escape(p)}\b", self.lower) for p in phrases)

    def adjacent(self, first: set[str], second: set[str]) -> bool:
        for a, b in zip(self.lower_words, self.lower_words[1:]):
            if a in first and b in second:
                return True
        return False

    def repeated_groups(self) -> bool:
        return any(a == b for a, b in zip(self.groups, self.groups[1:]))

    def descending_digit_run(self, length: int = 4) -> bool:
        for run in self.digit_runs:
            digits = [int(lexicon.WORD_TO_DIGIT[w]) for w in run]
            streak = 1
            for a, b in zip(digits, digits[1:]):
                streak = streak + 1 if b == a - 1 else 1
                if streak >= length:
                    return True
        return False

    def concatenated_token(self) -> bool:
        for w in self.words:
            if len(w) >= 8 and w.isalpha():
                if len(segment_digit_words(w.lower())) >= 3:
                    return True
                if w[0].isupper() and sum(1 for c in w[1:] if c.isupper()) >= 1:
                    return True
        return False

    def name_tokens(self) -> list[str]:
        out = []
        for w in self.words:
            base = w.replace("'", "").replace("-", "")
            if not base.isalpha() or len(base) < 2:
                continue
            if w[0].isupper() and w.lower() not in _STYLE_STOPWORDS and w.lower() not in lexicon.MONTHS:
                out.append(w)
        return out

    def consecutive_caps(self, count: int) -> bool:
        streak = 0
        for w in self.words:
            base = w.replace("'", "").replace("-", "")
            is_name = (
                base.isalpha()
                and len(base) >= 2
                and w[0].isupper()
                and w.lower() not in _STYLE_STOPWORDS
                and w.lower() not in lexicon.MONTHS
            )
            streak = streak + 1 if is_name else 0
            if streak >= count:
                return True
        return False

    def month_present(self) -> bool:
        return any(w in lexicon.MONTHS for w in self.lower_words)

    def ordinal_present(self) -> bool:
        return any(w in lexicon.ORDINAL_DAYS for w in self.lower_words)

    def valid_date_numeral(self, length: int) -> bool:
        for numeral in self.numerals:
            if len(numeral) == length:
                try:
                    expand_date_digits(numeral)
                except Exception:
                    continue
                return True
        return False

    def spoken_digit_count_is(self, count: int) -> bool:
        if self.numerals:
            return False
        return self.digit_word_count == count

    def value_tokens_only(self) -> bool:
        """True when every word is value content (digits, number words,
        months, ordinals, or name-like tokens) with no style markers."""
        if not self.words:
            return False
        for w in self.words:
            lw = w.lower()
            if lw in lexicon.WORD_TO_DIGIT or lw in lexicon.TWO_DIGIT_WORDS:
                continue
            if lw in lexicon.MONTHS or lw in lexicon.ORDINAL_DAYS or lw == "hundred":
                continue
            if w.isdigit():
                continue
            base = w.replace("'", "").replace("-", "")
            if base.isalpha() and len(base) >= 2 and w[0].isupper() and lw not in _STYLE_STOPWORDS:
                continue
            return False
        return True


segment_digit_words = lexicon.segment_digit_words

_CORRECTION_SIG = ("no wait", "i mean", "no", "wait")


def _sig_correction(f: _Features) -> bool:
    return f.has(*_CORRECTION_SIG)


def _sig_filler(f: _Features) -> bool:
    return f.has(*lexicon.FILLER_WORDS) or f.has(*lexicon.FILLER_PHRASES)


_SIGNATURES = {
    # general
    "filler_words": _sig_filler,
    "hesitation": lambda f: f.ellipses >= 2,
    "correction": _sig_correction,
    "repetition": lambda f: f.repeated_groups(),
    "pause": lambda f: f.has("pause"),
    "formal": lambda f: bool(re.search(r"\bthe \w+ (is|are)\b", f.lower)) or f.has("i would like to state"),
    "casual": lambda f: f.starts("it's", "its", "yeah", "yep", "so it's", "oh it's"),
    "polite": lambda f: f.has("please", "thank you", "kindly"),
    "confident": lambda f: f.has("definitely", "absolutely", "certainly", "for sure"),
    "uncertain": lambda f: f.has("i think", "maybe", "i guess", "probably", "not sure", "i believe"),
    "rushed": lambda f: f.concatenated_token(),
    "careful": lambda f: f.has("carefully", "slowly"),
    "confirmation": lambda f: f.has("is that right", "is that correct", "did you get that"),
    "clarification": lambda f: f.has("does that make sense", "to clarify", "let me clarify", "just to be clear"),
    "direct_and_simple": lambda f: f.value_tokens_only(),
    "brief_confirmation": lambda f: f.starts("yes"),
    "concise_confirmation": lambda f: f.starts("confirmed", "correct,", "affirmative"),
    # zip-specific
    "digit_by_digit": lambda f: f.max_digit_run >= 4,
    "grouped_two": lambda f: bool(f.two_digit_words),
    "grouped_three": lambda f: f.adjacent(lexicon.UNIT_WORDS | {"zero"}, set(lexicon.TWO_DIGIT_WORDS)),
    "hundred": lambda f: f.has("hundred"),
    "mixed_grouping": lambda f: bool(f.two_digit_words) and f.max_digit_run >= 2,
    "spoken_number_split": lambda f: f.adjacent(lexicon.TENS_WORDS, lexicon.UNIT_WORDS),
    "reversed": lambda f: f.descending_digit_run() or f.has("reverse", "reversed", "backwards", "backward"),
    "with_pause": lambda f: f.ellipses >= 1 and f.digit_word_count >= 2,
    "with_repetition": lambda f: f.repeated_groups() and f.digit_word_count >= 2,
    "with_correction": lambda f: _sig_correction(f) and f.digit_word_count >= 1,
    "with_hesitation": lambda f: f.ellipses >= 2,
    "with_filler": lambda f: f.fillers_inside_run,
    "zip_formal": lambda f: bool(re.search(r"\bthe digits? (is|are)\b", f.lower)),
    "zip_casual": lambda f: f.starts("yeah", "yep", "nah", "it's"),
    "zip_polite": lambda f: f.has("please"),
    "zip_confident": lambda f: f.has("definitely", "absolutely"),
    "zip_uncertain": lambda f: f.has("i think", "maybe", "i guess"),
    "spelled_out": lambda f: any(
        w.count("-") >= 2 and all(p in lexicon.WORD_TO_DIGIT for p in w.split("-"))
        for w in f.lower_words
    ),
    # dob-specific
    "date_as_4_digits": lambda f: f.valid_date_numeral(4),
    "spoken_date_4_digits": lambda f: f.spoken_digit_count_is(4),
    "date_as_5_digits": lambda f: f.valid_date_numeral(5),
    "spoken_date_5_digits": lambda f: f.spoken_digit_count_is(5),
    "date_as_6_digits": lambda f: f.valid_date_numeral(6),
    "spoken_date_6_digits": lambda f: f.spoken_digit_count_is(6),
    "date_as_8_digits": lambda f: f.valid_date_numeral(8),
    "spoken_date_8_digits": lambda f: f.spoken_digit_count_is(8),
    "spoken_month_day_year": lambda f: f.month_present() and f.ordinal_present(),
    "mixed_spoken_and_digits": lambda f: f.month_present() and (f.digit_word_count >= 2 or bool(f.numerals)),
    "filler_or_correction": lambda f: _sig_filler(f) or _sig_correction(f),
    "casual_or_polite_digits": lambda f: (f.has("please") or f.starts("yeah", "it's")) and (f.digit_word_count >= 2 or bool(f.two_digit_words)),
    # name-specific
    "name_with_last": lambda f: f.consecutive_caps(2),
    "name_with_prefix": lambda f: f.has("my name is", "this is", "i am", "i'm") and bool(f.name_tokens()),
    "name_reverse_order": lambda f: bool(re.search(r"\b[A-Z][A-Za-z'\-]+,\s+[A-Z][a-z]+\b", f.text)),
    "name_with_title": lambda f: bool(re.search(r"\b(mr|mrs|ms|miss|dr|prof|mx)\.?\s", f.lower)),
    "name_with_middle": lambda f: f.consecutive_caps(3),
    "name_with_suffix": lambda f: bool(re.search(r"\b(jr|sr|ii|iii|iv)\b\.?", f.lower)),
    "name_with_initials": lambda f: len(_INITIAL_RE.findall(f.text)) >= 2,
    "name_with_correction": lambda f: _sig_correction(f) and bool(f.name_tokens()),
    "name_partial_spelling": lambda f: bool(_SPELLING_RE.search(f.text)),
    "name_with_apostrophe": lambda f: bool(_APOSTROPHE_NAME_RE.search(f.text)),
    "name_hyphenated": lambda f: bool(_HYPHEN_NAME_RE.search(f.text)),
    "nickname": lambda f: any(w in lexicon.NICKNAMES for w in f.lower_words),
}


def classify_rule(
    text: str,
    kind: str,
    registry: VariationRegistry | None = None,
) -> set[str]:
    """Deterministic signature-based tagging; {not_listed} when nothing fires."""
    if not text.strip():
        raise ValueError("transcript must be non-empty")
    reg = registry or default_registry()
    features = _Features(text)
    tags = set()
    for entry in reg.for_kind(kind):
        sig = _SIGNATURES.get(entry.id)
        if sig is not None and sig(features):
            tags.add(entry.id)
    return tags or {NOT_LISTED}


def classify_provider(
    text: str,
    kind: str,
    provider: "ChatProvider",
    registry: VariationRegistry | None = None,
) -> set[str]:
    """Ask a chat backend to tag the transcript; unknown tags map to not_listed."""
    from .providers import ChatRequest, Shape

    reg = registry or default_registry()
    entries = reg.for_kind(kind)
    listing = "\n".join(f"- {e.id}: {e.instruction} Example: {e.example_input}" for e in entries)
    request = ChatRequest(
        system_text=(
            "You tag phone-call transcripts with the linguistic variation "
            "types they exhibit. Answer with a JSON array of type ids only."
        ),
        user_text=(
            f"Variation types:\n{listing}\n\n"
            f"Transcript: {text}\n\n"
            f"Return a JSON array of matching type ids. Use [\"{NOT_LISTED}\"] "
            "if none match. Return only valid JSON - no markdown, no extra text."
        ),
        expected_shape=Shape.TAG_ARRAY,
    )
    raw_tags = provider.chat(request)
    known = {t for t in raw_tags if t in reg}
    if len(known) < len(raw_tags):
        known.add(NOT_LISTED)
    return known or {NOT_LISTED}


def classify(
    text: str,
    kind: str,
    mode: str = "rule",
    provider: "ChatProvider | None" = None,
    registry: VariationRegistry | None = None,
) -> set[str]:
    """Classify a transcript into variation ids (rule or provider mode)."""
    if mode == "rule":
        return classify_rule(text, kind, registry)
    if mode == "provider":
        if provider is None:
            raise ValueError("provider mode needs a chat provider")
        return classify_provider(text, kind, provider, registry)
    raise ValueError(f"unknown classification mode {mode!r}")
