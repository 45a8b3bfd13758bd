"""Deterministic rendering of canonical entity values into spoken-style
transcripts realizing requested linguistic variations.

Each variation id maps to a small template family; the request seed picks
the template variant, surname, and insertion points, so identical requests
produce byte-identical text. The renderer is the mock provider's transcript
generator and the source of the round-trip oracle corpus: for corpus
renders, whatever it emits must be recoverable by the spoken-form parser.

One deliberate exception: the table form of ``reversed`` ("five four three
two one") destroys the digit order without a cue, so only its cue-bearing
template variants (seed % 3 != 0) are recoverable. The generation pipeline
relies on validation to weed out the bare form and re-prompt.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import lexicon
from .domain import (
    DATE_OF_BIRTH,
    PERSON_NAME,
    ZIP_CODE,
    EntityValue,
    Provenance,
    Transcript,
)
from .seeding import derive_seed
from .taxonomy import VariationRegistry, default_registry

MAX_VARIATIONS_PER_RENDER = 3


class UnsupportedCombinationError(ValueError):
    """Two requested variation ids cannot be realized on one transcript."""

    def __init__(self, first: str, second: str):
        self.pair = (first, second)
        super().__init__(f"variations {first!r} and {second!r} are mutually exclusive")


@dataclass(frozen=True)
class RenderRequest:
    value: EntityValue
    variation_ids: tuple[str, ...]
    seed: int = 0

    def __post_init__(self):
        if not self.variation_ids:
            raise ValueError("at least one variation id is required")


# ---------------------------------------------------------------------------
# Spoken digit groups


def _words(digits: str) -> list[str]:
    return [lexicon.DIGIT_WORDS[d] for d in digits]


def _group_words(group: str) -> list[str]:
    """One digit group as spoken words; zero-led groups fall back to digit
    words so no digit is lost."""
    if len(group) == 1:
        return [lexicon.DIGIT_WORDS[group]]
    if group[0] == "0":
        return _words(group)
    if len(group) == 2:
        return [lexicon.two_digit_to_words(int(group))]
    # three digits: leading digit word + two-digit tail
    tail = group[1:]
    if tail[0] == "0":
        return _words(group)
    return [lexicon.DIGIT_WORDS[group[0]], lexicon.two_digit_to_words(int(tail))]


def _apply_merge_guard(groups: list[list[str]]) -> list[list[str]]:
    """A bare tens word followed by a unit word would merge on parse
    ("thirty" "five" -> 35); re-render the offending group digit by digit."""
    out = [list(g) for g in groups]
    for i in range(len(out) - 1):
        if out[i] and out[i][-1] in lexicon.TENS_WORDS and out[i + 1]:
            nxt = out[i + 1][0]
            if nxt in lexicon.UNIT_WORDS:
                digits = "".join(
                    lexicon.TWO_DIGIT_WORDS.get(w, lexicon.WORD_TO_DIGIT.get(w, ""))
                    for w in out[i]
                )
                out[i] = _words(digits)
    return out


def _chunk(digits: str, size: int) -> list[str]:
    return [digits[i : i + size] for i in range(0, len(digits), size)]


def number_to_spoken(digits: str, grouping: str) -> str:
    """Digits as spoken words under a grouping rule.

    grouping is one of "single", "pairs", "triples", "mixed". Zeros render
    as "zero", never "oh".
    """
    if not digits.isdigit():
        raise ValueError(f"expected digits, got {digits!r}")
    if grouping == "single":
        return " ".join(_words(digits))
    if grouping == "pairs":
        groups = [_group_words(g) for g in _chunk(digits, 2)]
    elif grouping == "triples":
        groups = [_group_words(g) for g in _chunk(digits, 3)]
    elif grouping == "mixed":
        if len(digits) < 3:
            return " ".join(_words(digits))
        if digits[0] != "0":
            groups = [_group_words(digits[:2])] + [[w] for w in _words(digits[2:])]
        else:
            # a zero-led leading pair degrades to digit words; group the
            # tail pair instead so the output stays visibly mixed
            groups = [[w] for w in _words(digits[:-2])] + [_group_words(digits[-2:])]
    else:
        raise ValueError(f"unknown grouping {grouping!r}")
    groups = _apply_merge_guard(groups)
    return " ".join(w for g in groups for w in g)


def _hundred_form(digits: str) -> list[tuple[str, str]] | None:
    """Render a d00 run as "<d> hundred"; None when no such pattern. The
    pair stays one atom so later insertions cannot separate it."""
    for i in range(len(digits) - 2):
        if digits[i] != "0" and digits[i + 1 : i + 3] == "00":
            return (
                [(w, lexicon.WORD_TO_DIGIT[w]) for w in _words(digits[:i])]
                + [(f"{lexicon.DIGIT_WORDS[digits[i]]} hundred", digits[i] + "00")]
                + [(w, lexicon.WORD_TO_DIGIT[w]) for w in _words(digits[i + 3 :])]
            )
    return None


def _split_form(digits: str) -> list[tuple[str, str]] | None:
    """Render one digit pair as spaced tens + unit ("thirty two"), kept as
    one atom so the adjacency that makes it parse as 32 survives."""
    for i in range(len(digits) - 1):
        if digits[i] >= "2" and digits[i + 1] >= "1":
            pair = f"{lexicon.TENS[int(digits[i]) * 10]} {lexicon.DIGIT_WORDS[digits[i + 1]]}"
            return (
                [(w, lexicon.WORD_TO_DIGIT[w]) for w in _words(digits[:i])]
                + [(pair, digits[i : i + 2])]
                + [(w, lexicon.WORD_TO_DIGIT[w]) for w in _words(digits[i + 2 :])]
            )
    return None


# ---------------------------------------------------------------------------
# Run representation: atoms of (text, digits) so corrections and insertions
# can do digit arithmetic on any structural form.


@dataclass
class _Run:
    atoms: list[tuple[str, str]]  # (spoken text, digit content)

    @classmethod
    def from_words(cls, words: list[str]) -> "_Run":
        return cls(
            [(w, lexicon.TWO_DIGIT_WORDS.get(w, lexicon.WORD_TO_DIGIT.get(w, ""))) for w in words]
        )

    def digits(self) -> str:
        return "".join(d for _, d in self.atoms)

    def text(self) -> str:
        return " ".join(t for t, _ in self.atoms)


def _year_pair_words(year: int) -> list[str]:
    century, rest = divmod(year, 100)
    head = lexicon.two_digit_to_words(century) if century >= 10 else lexicon.DIGIT_WORDS[str(century)]
    if rest >= 10:
        return [head, lexicon.two_digit_to_words(rest)]
    return [head, "zero", lexicon.DIGIT_WORDS[str(rest)]]


def _dob_parts(canonical: str) -> tuple[int, int, int]:
    mm, dd, yyyy = canonical.split("-")
    return int(mm), int(dd), int(yyyy)


def _dob_digit_string(canonical: str, length: int) -> str | None:
    m, d, y = _dob_parts(canonical)
    yy = y % 100
    if length == 8:
        return f"{m:02d}{d:02d}{y:04d}"
    if length == 6:
        return f"{m:02d}{d:02d}{yy:02d}"
    if length == 4:
        return f"{m}{d}{yy:02d}" if m < 10 and d < 10 else None
    if length == 5:
        candidate = None
        if m < 10 and d >= 10:
            candidate = f"{m}{d}{yy:02d}"
        elif m >= 10 and d < 10:
            candidate = f"{m:02d}{d}{yy:02d}"
        if candidate is None:
            return None
        # month-first decoding must read the same date back (MM-D-YY forms
        # like 10243 lose to the M-DD-YY reading and are not emitted)
        from .domain import expand_date_digits

        try:
            if expand_date_digits(candidate) != canonical:
                return None
        except Exception:
            return None
        return candidate
    raise ValueError(length)


# ---------------------------------------------------------------------------
# Structural templates (at most one per render)


def _zip_structural(vid: str | None, digits: str, rng: random.Random, seed: int) -> _Run:
    if vid is None or vid == "digit_by_digit":
        return _Run.from_words(_words(digits))
    if vid == "grouped_two":
        return _Run.from_words(number_to_spoken(digits, "pairs").split())
    if vid == "grouped_three":
        return _Run.from_words(number_to_spoken(digits, "triples").split())
    if vid == "mixed_grouping":
        return _Run.from_words(number_to_spoken(digits, "mixed").split())
    if vid == "hundred":
        form = _hundred_form(digits)
        if form:
            return _Run(form)
        # no d00 run in this value; fall back to a paired reading so the
        # text at least differs from plain digit-by-digit
        return _Run.from_words(number_to_spoken(digits, "pairs").split())
    if vid == "spoken_number_split":
        form = _split_form(digits)
        return _Run(form) if form else _Run.from_words(_words(digits))
    if vid == "spelled_out":
        return _Run(atoms=[("-".join(_words(digits)), digits)])
    if vid == "rushed":
        return _Run(atoms=[("".join(_words(digits)), digits)])
    if vid == "reversed":
        rev = " ".join(_words(digits[::-1]))
        variants = [
            rev,
            f"{rev}, that's in reverse",
            f"reading it backwards, {rev}",
        ]
        return _Run(atoms=[(variants[seed % len(variants)], digits)])
    raise ValueError(f"no structural template for {vid!r}")


def _dob_structural(vid: str | None, canonical: str, rng: random.Random, seed: int) -> _Run:
    m, d, y = _dob_parts(canonical)
    if vid is None or vid == "spoken_date_8_digits":
        return _Run.from_words(_words(_dob_digit_string(canonical, 8)))
    if vid in ("spoken_date_4_digits", "spoken_date_5_digits", "spoken_date_6_digits"):
        length = int(vid.split("_")[2])
        s = _dob_digit_string(canonical, length) or _dob_digit_string(canonical, 8)
        return _Run.from_words(_words(s))
    if vid in ("date_as_4_digits", "date_as_5_digits", "date_as_6_digits", "date_as_8_digits"):
        length = int(vid.split("_")[2])
        s = _dob_digit_string(canonical, length) or _dob_digit_string(canonical, 8)
        return _Run(atoms=[(s, s)])
    if vid == "rushed":
        s = _dob_digit_string(canonical, 8)
        return _Run(atoms=[("".join(_words(s)), s)])
    if vid == "spoken_month_day_year":
        words = [lexicon.MONTH_NAMES[m], lexicon.DAY_ORDINALS[d] + ","] + _year_pair_words(y)
        return _Run(atoms=[(w, "") for w in words])
    if vid == "mixed_spoken_and_digits":
        words = [lexicon.MONTH_NAMES[m]] + _words(f"{d:02d}")
        words[-1] += ","
        words += _year_pair_words(y)
        return _Run(atoms=[(w, "") for w in words])
    if vid == "casual_or_polite_digits":
        # "please, one five, eighty five" style: month/day digits then the
        # two-digit year word, continuous-form decodable (MDYY/MMDDYY).
        day_month = _words(str(m)) + _words(str(d)) if m < 10 and d < 10 else _words(f"{m:02d}{d:02d}")
        yy = y % 100
        year_words = [lexicon.two_digit_to_words(yy)] if yy >= 10 else ["zero", lexicon.DIGIT_WORDS[str(yy)]]
        words = ["please,"] + day_month
        words[-1] += ","
        words += year_words
        return _Run(atoms=[(w, "") for w in words])
    raise ValueError(f"no structural template for {vid!r}")


def _pick_surname(rng: random.Random, first: str, min_total: int = 0) -> str:
    pool = [s for s in lexicon.SURNAMES if len(first) + len(s) >= min_total]
    return rng.choice(pool or lexicon.SURNAMES)


def _name_structural(
    vid: str | None, first: str, rng: random.Random, seed: int, avoid_reversal: bool = False
) -> _Run:
    surname = _pick_surname(rng, first)
    if vid is None or vid == "name_with_last":
        return _Run(atoms=[(first, ""), (surname, "")])
    if vid == "name_reverse_order":
        return _Run(atoms=[(f"{surname},", ""), (first, "")])
    if vid == "name_with_title":
        title = ["Mr.", "Ms.", "Mrs.", "Dr."][seed % 4]
        return _Run(atoms=[(title, ""), (first, ""), (surname, "")])
    if vid == "name_with_middle":
        middle = lexicon.MIDDLE_NAMES[seed % len(lexicon.MIDDLE_NAMES)]
        return _Run(atoms=[(first, ""), (middle, ""), (surname, "")])
    if vid == "name_with_suffix":
        suffix = ["Jr.", "Sr.", "III"][seed % 3]
        return _Run(atoms=[(first, ""), (surname, ""), (suffix, "")])
    if vid == "name_with_initials":
        middle = lexicon.MIDDLE_NAMES[seed % len(lexicon.MIDDLE_NAMES)]
        return _Run(
            atoms=[(f"{first},", ""), (f"{first[0]}.", ""), (f"{middle[0]}.", ""), (surname, "")]
        )
    if vid == "name_with_correction":
        wrong = rng.choice([n for n in lexicon.FIRST_NAMES if n != first])
        return _Run(atoms=[(f"{wrong}—no, I mean", ""), (first, ""), (surname, "")])
    if vid == "name_partial_spelling":
        spelled = "-".join(first.upper())
        return _Run(atoms=[(f"{first},", ""), ("that's", ""), (spelled, ""), (surname, "")])
    if vid == "name_with_apostrophe":
        apo = lexicon.APOSTROPHE_SURNAMES[seed % len(lexicon.APOSTROPHE_SURNAMES)]
        if seed % 2 == 0 and not avoid_reversal:
            return _Run(atoms=[(f"{apo},", ""), (first, "")])
        return _Run(atoms=[(first, ""), (apo, "")])
    if vid == "name_hyphenated":
        second = rng.choice([s for s in lexicon.SURNAMES if s != surname])
        return _Run(atoms=[(first, ""), (f"{surname}-{second}", "")])
    if vid == "nickname":
        nick = lexicon.PREFERRED_NICKNAME.get(first, first)
        return _Run(atoms=[(nick, ""), (surname, "")])
    if vid == "rushed":
        surname = _pick_surname(rng, first, min_total=8)
        return _Run(atoms=[(f"{first}{surname}", "")])
    raise ValueError(f"no structural template for {vid!r}")


# ---------------------------------------------------------------------------
# Run transforms


def _norm_atom(text: str) -> str:
    return text.lower().strip(",.")


def _split_points(run: _Run) -> list[int]:
    return list(range(1, len(run.atoms)))


def _append_to_atom(atoms: list[tuple[str, str]], i: int, suffix: str) -> None:
    text, digits = atoms[i]
    atoms[i] = (text.rstrip(",") + suffix, digits)


def _insert_pause_word(run: _Run, rng: random.Random) -> _Run:
    reference = _folded_value_words(list(run.atoms))
    points = _split_points(run)
    rng.shuffle(points)
    for k in points:
        trial = list(run.atoms)
        _append_to_atom(trial, k - 1, ", pause,")
        if _folded_value_words(trial) == reference:
            return _Run(trial)
    atoms = list(run.atoms)
    _append_to_atom(atoms, len(atoms) - 1, ", pause,")
    return _Run(atoms)


def _fold_groups(groups: list[tuple[str, ...]]) -> list[tuple[str, ...]]:
    """Mirror of the parser's repetition collapse at group level."""
    gs = list(groups)
    changed = True
    while changed:
        changed = False
        for i in range(len(gs) - 1):
            if gs[i] and gs[i] == gs[i + 1]:
                del gs[i]
                changed = True
                break
    return gs


def _folded_value_words(atoms: list[tuple[str, str]]) -> list[str]:
    """Value words surviving repetition collapse of the rendered text; a
    transform is safe iff it leaves this sequence unchanged."""
    from .parse import boundary_value_groups

    groups = boundary_value_groups(" ".join(t for t, _ in atoms))
    return [w for g in _fold_groups(groups) for w in g]


def _insert_ellipses(run: _Run, rng: random.Random, count: int = 2) -> _Run:
    """Ellipsis pauses at points that survive repetition collapse; falls
    back to a trailing ellipsis when no interior point is safe."""
    reference = _folded_value_words(list(run.atoms))
    candidates = _split_points(run)
    rng.shuffle(candidates)
    atoms = list(run.atoms)
    inserted = 0
    for k in candidates:
        if inserted == count:
            break
        trial = list(atoms)
        _append_to_atom(trial, k - 1, "...")
        if _folded_value_words(trial) == reference:
            atoms = trial
            inserted += 1
    if inserted == 0:
        _append_to_atom(atoms, len(atoms) - 1, "...")
    return _Run(atoms)


def _ellipsify(run: _Run) -> _Run:
    """Ellipsis after every atom whose successor differs; degenerate runs
    (all-identical words) get wrapped instead so no groups collapse."""
    atoms = list(run.atoms)
    out: list[tuple[str, str]] = []
    inserted = 0
    for i, (t, d) in enumerate(atoms):
        if i + 1 < len(atoms) and _norm_atom(atoms[i + 1][0]) != _norm_atom(t):
            out.append((t.rstrip(",") + "...", d))
            inserted += 1
        else:
            out.append((t, d))
    if inserted < 1:
        return _Run([("it's...", "")] + atoms + [("...", "")])
    _append_to_atom(out, len(out) - 1, "...")
    return _Run(out)


def _insert_filler(run: _Run, rng: random.Random) -> _Run:
    reference = _folded_value_words(list(run.atoms))
    points = _split_points(run)
    rng.shuffle(points)
    filler = rng.choice(["you know,", "um,", "uh,"])
    for k in points:
        atoms = list(run.atoms)
        _append_to_atom(atoms, k - 1, ",")
        trial = atoms[:k] + [(filler, "")] + atoms[k:]
        if _folded_value_words(trial) == reference:
            return _Run(trial)
    return _Run([("um,", "")] + run.atoms)


def _apply_correction(run: _Run, rng: random.Random, marker: str) -> _Run:
    """A short wrong attempt, a marker, then the full (re-stated) run; the
    replacement is never shorter than the attempt, so resolution discards
    the attempt entirely."""
    digits = run.digits()
    if digits:
        k = 1 + rng.randrange(min(2, len(digits) - 1))
        wrong = str((int(digits[k - 1]) + 1 + rng.randrange(9)) % 10)
        wrong_digits = digits[: k - 1] + wrong
        atoms = [(lexicon.DIGIT_WORDS[d], d) for d in wrong_digits]
        _append_to_atom(atoms, len(atoms) - 1, f"... {marker},")
        return _Run(atoms + run.atoms)
    first = run.atoms[0][0].strip(",")
    pool = [n for n in lexicon.FIRST_NAMES if n.lower() != first.lower()]
    wrong = rng.choice(pool)
    return _Run([(f"{wrong}... {marker},", "")] + run.atoms)


def _apply_repetition(run: _Run, rng: random.Random) -> _Run:
    """Speak a lead group twice, then the remainder, choosing a split whose
    collapse folds back to exactly the original value words."""
    points = _split_points(run)
    rng.shuffle(points)
    if not run.digits():
        # Name runs restate the full name ("Michael, Michael, Michael
        # Green"): the echo collapses on parse, and the surviving pair of
        # equal leading names never reads as a Last, First reversal.
        k = points[0] if points else 1
        lead = [(t.rstrip(","), "") for t, _ in run.atoms[:k]]
        lead_c = list(lead)
        _append_to_atom(lead_c, len(lead_c) - 1, ",")
        return _Run(lead_c + list(lead_c) + lead + list(run.atoms[k:]))
    reference = _folded_value_words(list(run.atoms))
    for k in points:
        lead = [(t.rstrip(","), d) for t, d in run.atoms[:k]]
        spoken = list(lead)
        _append_to_atom(spoken, len(spoken) - 1, ",")
        echo = [(t, "") for t, _ in spoken]
        candidate = _Run(spoken + echo + list(run.atoms[k:]))
        if _folded_value_words(list(candidate.atoms)) == reference:
            return candidate
    return run


_CORRECTION_MARKERS = ["no wait", "no", "I mean"]


def _apply_run_transform(vid: str, run: _Run, rng: random.Random, seed: int) -> _Run:
    if vid in ("correction", "with_correction"):
        return _apply_correction(run, rng, _CORRECTION_MARKERS[seed % len(_CORRECTION_MARKERS)])
    if vid == "filler_or_correction":
        if seed % 2 == 0:
            return _Run([("uh,", "")] + run.atoms)
        return _apply_correction(run, rng, "no")
    if vid in ("repetition", "with_repetition"):
        return _apply_repetition(run, rng)
    if vid == "pause":
        return _insert_pause_word(run, rng)
    if vid == "with_pause":
        return _insert_ellipses(run, rng, count=2)
    if vid in ("hesitation", "with_hesitation"):
        return _ellipsify(run)
    if vid == "with_filler":
        return _insert_filler(run, rng)
    raise ValueError(f"no run transform for {vid!r}")


# ---------------------------------------------------------------------------
# Wrappers


_SUFFIX_WRAPPERS = {
    "confirmation": [", is that right?", ", is that correct?"],
    "clarification": [", does that make sense?", ", to clarify"],
}

_PREFIX_WRAPPERS = {
    "formal": ["the number is ", "the answer is "],
    "zip_formal": ["the digits are "],
    "polite": ["please, it's ", "please, "],
    "zip_polite": ["please, "],
    "confident": ["definitely ", "absolutely "],
    "zip_confident": ["definitely "],
    "uncertain": ["I think it's ", "I think "],
    "zip_uncertain": ["I think it's ", "maybe "],
    "careful": ["carefully, ", "slowly, "],
    "filler_words": ["um, it's ", "uh, "],
    "name_with_prefix": ["My name is ", "This is "],
}

_ANCHORED_WRAPPERS = {
    "casual": ["it's ", "so it's "],
    "zip_casual": ["yeah, it's ", "yep, "],
    "brief_confirmation": ["yes, "],
    "concise_confirmation": ["confirmed, "],
}

_NAME_FORMAL = {"formal": ["the name is "], "zip_formal": ["the name is "]}
_DOB_FORMAL = {"formal": ["the date is "]}


def _wrapper_variants(vid: str, kind: str) -> list[str] | None:
    if kind == PERSON_NAME and vid in _NAME_FORMAL:
        return _NAME_FORMAL[vid]
    if kind == DATE_OF_BIRTH and vid in _DOB_FORMAL:
        return _DOB_FORMAL[vid]
    for table in (_PREFIX_WRAPPERS, _ANCHORED_WRAPPERS):
        if vid in table:
            return table[vid]
    return None


# ---------------------------------------------------------------------------
# Conflict table

_STRUCTURAL = {
    ZIP_CODE: {
        "digit_by_digit", "grouped_two", "grouped_three", "hundred",
        "mixed_grouping", "spoken_number_split", "reversed", "spelled_out",
        "rushed",
    },
    DATE_OF_BIRTH: {
        "date_as_4_digits", "spoken_date_4_digits", "date_as_5_digits",
        "spoken_date_5_digits", "date_as_6_digits", "spoken_date_6_digits",
        "date_as_8_digits", "spoken_date_8_digits", "spoken_month_day_year",
        "mixed_spoken_and_digits", "casual_or_polite_digits", "rushed",
    },
    PERSON_NAME: {
        "name_with_last", "name_reverse_order", "name_with_title",
        "name_with_middle", "name_with_suffix", "name_with_initials",
        "name_with_correction", "name_partial_spelling",
        "name_with_apostrophe", "name_hyphenated", "nickname", "rushed",
    },
}

_CORRECTION_CLASS = {
    "correction", "with_correction", "repetition", "with_repetition",
    "filler_or_correction",
}
_INSERTION_CLASS = {"pause", "with_pause", "hesitation", "with_hesitation", "with_filler"}
_ANCHORED_CLASS = set(_ANCHORED_WRAPPERS) | {"name_with_prefix"}

# forms whose run atoms carry no per-atom digit content
_MONTH_FORMS = {"spoken_month_day_year", "mixed_spoken_and_digits", "casual_or_polite_digits"}
_OPAQUE_FORMS = {"rushed", "spelled_out", "reversed"}


def conflicting_pair(kind: str, a: str, b: str) -> bool:
    """True when two variation ids cannot coexist on one render."""
    if a == b:
        return False
    pair = {a, b}
    structural = _STRUCTURAL[kind]
    if pair <= structural:
        return True
    if pair <= _CORRECTION_CLASS or pair <= _INSERTION_CLASS or pair <= _ANCHORED_CLASS:
        return True
    if (pair & _OPAQUE_FORMS) and (pair & (_CORRECTION_CLASS | _INSERTION_CLASS)):
        return True
    if (pair & _MONTH_FORMS) and (pair & _CORRECTION_CLASS):
        return True
    # the hesitation rewrite re-groups the whole run and cannot preserve
    # correction or repetition structure
    if (pair & {"hesitation", "with_hesitation"}) and (pair & _CORRECTION_CLASS):
        return True
    if "direct_and_simple" in pair:
        other = (pair - {"direct_and_simple"}).pop()
        allowed = (structural - _OPAQUE_FORMS - {
            "name_with_title", "name_with_suffix", "name_with_initials",
            "name_with_correction", "name_partial_spelling", "casual_or_polite_digits",
        })
        return other not in allowed
    if "name_with_correction" in pair and (pair & _CORRECTION_CLASS):
        return True
    if "name_with_initials" in pair and "name_reverse_order" in pair:
        return True
    # pauses, fillers, or echoes around "Last, First" make the reversal
    # unreadable
    if "name_reverse_order" in pair and (
        pair & (_INSERTION_CLASS | {"repetition", "with_repetition"})
    ):
        return True
    return False


def check_combination(kind: str, ids: tuple[str, ...]) -> None:
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            if conflicting_pair(kind, a, b):
                raise UnsupportedCombinationError(a, b)


# ---------------------------------------------------------------------------
# render


def render(request: RenderRequest, registry: VariationRegistry | None = None) -> Transcript:
    """Realize every requested variation on one transcript of the value.

    Raises UnsupportedCombinationError for mutually exclusive pairs; raises
    ValueError for unknown ids or more than MAX_VARIATIONS_PER_RENDER ids.
    """
    reg = registry or default_registry()
    value = request.value
    ids = tuple(request.variation_ids)
    if len(ids) > MAX_VARIATIONS_PER_RENDER:
        raise ValueError(f"at most {MAX_VARIATIONS_PER_RENDER} variations per render")
    applicable = set(reg.ids_for_kind(value.kind))
    for vid in ids:
        if vid not in applicable:
            raise ValueError(f"variation {vid!r} not applicable to kind {value.kind!r}")
    check_combination(value.kind, ids)

    rng = random.Random(derive_seed(request.seed, "render", value.kind, value.canonical, *ids))
    structural = [v for v in ids if v in _STRUCTURAL[value.kind]]
    transforms = [v for v in ids if v in _CORRECTION_CLASS or v in _INSERTION_CLASS]
    wrappers = [v for v in ids if v not in structural and v not in transforms]

    base_id = structural[0] if structural else None
    if value.kind == ZIP_CODE:
        run = _zip_structural(base_id, value.canonical, rng, request.seed)
    elif value.kind == DATE_OF_BIRTH:
        run = _dob_structural(base_id, value.canonical, rng, request.seed)
    elif value.kind == PERSON_NAME:
        avoid_reversal = bool(set(ids) & (_INSERTION_CLASS | {"repetition", "with_repetition"}))
        run = _name_structural(base_id, value.canonical, rng, request.seed, avoid_reversal)
    else:
        raise ValueError(f"no renderer for kind {value.kind!r}")

    # corrections and repetitions restructure the clean run first, then
    # insertions add pauses/fillers at collapse-safe points
    for vid in sorted(transforms, key=lambda v: v in _INSERTION_CLASS):
        run = _apply_run_transform(vid, run, rng, request.seed)

    text = run.text()
    anchored = [v for v in wrappers if v in _ANCHORED_CLASS]
    plain = [v for v in wrappers if v not in _ANCHORED_CLASS]
    for vid in plain:
        if vid in _SUFFIX_WRAPPERS:
            variants = _SUFFIX_WRAPPERS[vid]
            text = text + variants[request.seed % len(variants)]
        elif vid == "direct_and_simple":
            continue
        else:
            variants = _wrapper_variants(vid, value.kind)
            if variants is None:
                raise ValueError(f"no template for {vid!r}")
            text = variants[request.seed % len(variants)] + text
    for vid in anchored:
        variants = _wrapper_variants(vid, value.kind)
        text = variants[request.seed % len(variants)] + text

    return Transcript(
        text=text,
        value=value,
        variation_tags=frozenset(ids),
        provenance=Provenance.RULE_RENDERED,
    )


# ---------------------------------------------------------------------------
# Seeded value samplers and the oracle corpus


def _sample_zip(rng: random.Random, vid: str | None) -> str:
    if vid == "hundred":
        pos = rng.randrange(3)
        digits = [str(rng.randrange(10)) for _ in range(5)]
        digits[pos] = str(rng.randrange(1, 10))
        digits[pos + 1] = "0"
        digits[pos + 2] = "0"
        return "".join(digits)
    if vid == "spoken_number_split":
        return (
            str(rng.randrange(2, 10))
            + str(rng.randrange(1, 10))
            + "".join(str(rng.randrange(10)) for _ in range(3))
        )
    if vid in ("grouped_two", "grouped_three", "mixed_grouping"):
        return (
            str(rng.randrange(1, 10))
            + str(rng.randrange(1, 10))
            + "".join(str(rng.randrange(10)) for _ in range(3))
        )
    return "".join(str(rng.randrange(10)) for _ in range(5))


def _sample_dob(rng: random.Random, vid: str | None) -> str:
    while True:
        year = rng.randrange(1930, 2009)
        month = rng.randrange(1, 13)
        day = rng.randrange(1, 29)
        if vid in ("date_as_4_digits", "spoken_date_4_digits"):
            if month >= 10 or day >= 10:
                continue
        if vid in ("date_as_5_digits", "spoken_date_5_digits"):
            if not (month < 10 and day >= 10):
                continue
        return f"{month:02d}-{day:02d}-{year:04d}"


def _sample_name(rng: random.Random, vid: str | None) -> str:
    return rng.choice(lexicon.FIRST_NAMES)


def sample_value(kind: str, vid: str | None, rng: random.Random) -> EntityValue:
    """A seeded canonical value on which the variation is realizable."""
    if kind == ZIP_CODE:
        raw = _sample_zip(rng, vid)
    elif kind == DATE_OF_BIRTH:
        raw = _sample_dob(rng, vid)
    elif kind == PERSON_NAME:
        raw = _sample_name(rng, vid)
    else:
        raise ValueError(f"no sampler for kind {kind!r}")
    return EntityValue.from_raw(kind, raw)


def recoverable_seed(vid: str, index: int) -> int:
    """A render seed whose template variant round-trips; only the bare
    table form of ``reversed`` (seed % 3 == 0) is unrecoverable."""
    if vid == "reversed":
        return 3 * index + 1
    return index


def corpus(
    kind: str,
    per_variation: int = 20,
    seed: int = 0,
    registry: VariationRegistry | None = None,
) -> list[Transcript]:
    """The round-trip oracle corpus: every applicable variation rendered on
    per_variation seeded values."""
    reg = registry or default_registry()
    out: list[Transcript] = []
    for vid in reg.ids_for_kind(kind):
        rng = random.Random(derive_seed(seed, "corpus", kind, vid))
        for index in range(per_variation):
            value = sample_value(kind, vid, rng)
            request = RenderRequest(
                value=value,
                variation_ids=(vid,),
                seed=recoverable_seed(vid, derive_seed(seed, "corpus-render", kind, vid, index) % 1000),
            )
            out.append(render(request, reg))
    return out
