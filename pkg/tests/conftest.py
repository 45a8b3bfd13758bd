import pytest

from spokenfields.domain import FieldSpec


@pytest.fixture
def zip_spec():
    return FieldSpec(
        field_name="zip_code",
        kind="zip_code",
        output_type="integer",
        question="What is your zip code?",
        description="Zip code is a 5 digit number, with optional 4 digit add on code",
    )


@pytest.fixture
def dob_spec():
    return FieldSpec(
        field_name="date_of_birth",
        kind="date_of_birth",
        output_type="date",
        question="What is your date of birth?",
        description="Date of birth in MM-DD-YYYY format",
    )


@pytest.fixture
def name_spec():
    return FieldSpec(
        field_name="person_name",
        kind="person_name",
        output_type="string",
        question="Could you tell me your name please?",
        description="The caller's first name",
    )
