"""Word tables for spoken-form numbers, dates, and names.

The renderer draws from the emit-side tables only (it never says "oh");
the parser additionally accepts the listening-side variants ("oh",
"double", ordinal days, etc.).
"""

from __future__ import annotations

DIGIT_WORDS = {
    "0": "zero",
    "1": "one",
    "2": "two",
    "3": "three",
    "4": "four",
    "5": "five",
    "6": "six",
    "7": "seven",
    "8": "eight",
    "9": "nine",
}

WORD_TO_DIGIT = {w: d for d, w in DIGIT_WORDS.items()}
WORD_TO_DIGIT["oh"] = "0"  # parser-side only

TEENS = {
    10: "ten",
    11: "eleven",
    12: "twelve",
    13: "thirteen",
    14: "fourteen",
    15: "fifteen",
    16: "sixteen",
    17: "seventeen",
    18: "eighteen",
    19: "nineteen",
}

TENS = {
    20: "twenty",
    30: "thirty",
    40: "forty",
    50: "fifty",
    60: "sixty",
    70: "seventy",
    80: "eighty",
    90: "ninety",
}

# word -> two-digit string, for every 10..99
TWO_DIGIT_WORDS: dict[str, str] = {}
for _n, _w in TEENS.items():
    TWO_DIGIT_WORDS[_w] = str(_n)
for _t, _tw in TENS.items():
    TWO_DIGIT_WORDS[_tw] = str(_t)
    for _u in range(1, 10):
        TWO_DIGIT_WORDS[f"{_tw}-{DIGIT_WORDS[str(_u)]}"] = str(_t + _u)

TENS_WORDS = set(TENS.values())
UNIT_WORDS = {DIGIT_WORDS[str(u)] for u in range(1, 10)}


def two_digit_to_words(n: int) -> str:
    """10..99 as one spoken token ("twelve", "thirty-four")."""
    if n in TEENS:
        return TEENS[n]
    tens, unit = divmod(n, 10)
    if unit == 0:
        return TENS[tens * 10]
    return f"{TENS[tens * 10]}-{DIGIT_WORDS[str(unit)]}"


MONTHS = {
    "january": 1,
    "february": 2,
    "march": 3,
    "april": 4,
    "may": 5,
    "june": 6,
    "july": 7,
    "august": 8,
    "september": 9,
    "october": 10,
    "november": 11,
    "december": 12,
}

MONTH_NAMES = {n: name.capitalize() for name, n in MONTHS.items()}

ORDINAL_DAYS = {
    "first": 1,
    "second": 2,
    "third": 3,
    "fourth": 4,
    "fifth": 5,
    "sixth": 6,
    "seventh": 7,
    "eighth": 8,
    "ninth": 9,
    "tenth": 10,
    "eleventh": 11,
    "twelfth": 12,
    "thirteenth": 13,
    "fourteenth": 14,
    "fifteenth": 15,
    "sixteenth": 16,
    "seventeenth": 17,
    "eighteenth": 18,
    "nineteenth": 19,
    "twentieth": 20,
    "twenty-first": 21,
    "twenty-second": 22,
    "twenty-third": 23,
    "twenty-fourth": 24,
    "twenty-fifth": 25,
    "twenty-sixth": 26,
    "twenty-seventh": 27,
    "twenty-eighth": 28,
    "twenty-ninth": 29,
    "thirtieth": 30,
    "thirty-first": 31,
}

DAY_ORDINALS = {n: w for w, n in ORDINAL_DAYS.items()}

FILLER_WORDS = {"um", "uh", "er", "hmm", "well"}
FILLER_PHRASES = ("you know", "like i said")

CORRECTION_PHRASES = ("no wait", "i mean", "no", "wait")

# Spoken lead-ins that never carry value content.
PREFIX_PHRASES = (
    "my name is",
    "my zip is",
    "my zip code is",
    "my date of birth is",
    "the number is",
    "the digits are",
    "the name is",
    "the date is",
    "this is",
    "it is",
    "it's",
    "i am",
    "i'm",
)

# nickname -> canonical first name (parser direction)
NICKNAMES = {
    "johnny": "John",
    "jack": "John",
    "bobby": "Robert",
    "bob": "Robert",
    "rob": "Robert",
    "billy": "William",
    "bill": "William",
    "will": "William",
    "jimmy": "James",
    "jim": "James",
    "mike": "Michael",
    "mikey": "Michael",
    "lizzy": "Elizabeth",
    "liz": "Elizabeth",
    "beth": "Elizabeth",
    "jenny": "Jennifer",
    "jen": "Jennifer",
    "katie": "Katherine",
    "kate": "Katherine",
    "kathy": "Katherine",
    "maggie": "Margaret",
    "meg": "Margaret",
    "tommy": "Thomas",
    "tom": "Thomas",
    "ricky": "Richard",
    "rick": "Richard",
    "charlie": "Charles",
    "chuck": "Charles",
    "chris": "Christopher",
    "danny": "Daniel",
    "dan": "Daniel",
    "matt": "Matthew",
    "tony": "Anthony",
    "steve": "Steven",
    "andy": "Andrew",
    "drew": "Andrew",
    "josh": "Joshua",
    "nick": "Nicholas",
    "jon": "Jonathan",
    "sam": "Samuel",
    "ben": "Benjamin",
    "alex": "Alexander",
    "pat": "Patricia",
    "patty": "Patricia",
    "sue": "Susan",
    "debbie": "Deborah",
    "barb": "Barbara",
    "jessie": "Jessica",
    "mandy": "Amanda",
    "steph": "Stephanie",
    "becky": "Rebecca",
    "vicky": "Victoria",
    "tim": "Timothy",
    "greg": "Gregory",
    "eddie": "Edward",
    "ed": "Edward",
    "joey": "Joseph",
    "joe": "Joseph",
    "dave": "David",
    "ken": "Kenneth",
    "ron": "Ronald",
    "don": "Donald",
}

# canonical first name -> preferred nickname (renderer direction)
PREFERRED_NICKNAME: dict[str, str] = {}
for _nick, _full in NICKNAMES.items():
    PREFERRED_NICKNAME.setdefault(_full, _nick.capitalize())

FIRST_NAMES = sorted(PREFERRED_NICKNAME)

MIDDLE_NAMES = [
    "Michael",
    "Marie",
    "Lee",
    "Ann",
    "James",
    "Lynn",
    "Rose",
    "Grace",
    "Alan",
    "Jean",
]

# 50-entry surname pool used for "add a realistic last name".
SURNAMES = [
    "Smith",
    "Johnson",
    "Williams",
    "Brown",
    "Jones",
    "Garcia",
    "Miller",
    "Davis",
    "Rodriguez",
    "Martinez",
    "Hernandez",
    "Lopez",
    "Gonzalez",
    "Wilson",
    "Anderson",
    "Taylor",
    "Moore",
    "Jackson",
    "Martin",
    "Lee",
    "Perez",
    "Thompson",
    "White",
    "Harris",
    "Sanchez",
    "Clark",
    "Ramirez",
    "Lewis",
    "Robinson",
    "Walker",
    "Young",
    "Allen",
    "King",
    "Wright",
    "Scott",
    "Torres",
    "Nguyen",
    "Hill",
    "Flores",
    "Green",
    "Adams",
    "Nelson",
    "Baker",
    "Hall",
    "Rivera",
    "Campbell",
    "Mitchell",
    "Carter",
    "Roberts",
    "Turner",
]

APOSTROPHE_SURNAMES = ["O'Connor", "O'Brien", "O'Neill", "D'Angelo"]

TITLE_WORDS = {"mr", "mrs", "ms", "miss", "dr", "prof", "mx"}
SUFFIX_WORDS = {"jr", "sr", "ii", "iii", "iv"}

_SEGMENT_VOCAB = tuple(sorted((w for w in WORD_TO_DIGIT if w != "oh"), key=len, reverse=True))


def segment_digit_words(token: str) -> list[str]:
    """Split a concatenated run like "onetwothree" into digit words.

    Returns [] when the token is not exactly a concatenation of digit words.
    No digit word is a prefix of another, so greedy matching is exact.
    """
    out: list[str] = []
    pos = 0
    n = len(token)
    while pos < n:
        for w in _SEGMENT_VOCAB:
            if token.startswith(w, pos):
                out.append(w)
                pos += len(w)
                break
        else:
            return []
    return out
