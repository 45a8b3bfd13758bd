"""spokenfields: synthesize, validate, balance, and score spoken-style
transcripts of structured field values (ZIP codes, dates of birth, names)."""

__version__ = "0.1.0"

from .domain import (
    DATE_OF_BIRTH,
    PERSON_NAME,
    ZIP_CODE,
    EntityValue,
    FieldSpec,
    FormatError,
    LabeledSample,
    Provenance,
    Split,
    Transcript,
    canonicalize,
    values_equivalent,
)
from .taxonomy import VariationRegistry, VariationType, classify, default_registry, registry_for

__all__ = [
    "DATE_OF_BIRTH",
    "PERSON_NAME",
    "ZIP_CODE",
    "EntityValue",
    "FieldSpec",
    "FormatError",
    "LabeledSample",
    "Provenance",
    "Split",
    "Transcript",
    "VariationRegistry",
    "VariationType",
    "canonicalize",
    "classify",
    "default_registry",
    "registry_for",
    "values_equivalent",
    "__version__",
]
