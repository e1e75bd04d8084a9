"""Shared fixtures: GF(8) and the full index of Sz(8) are built once per session."""

import pytest

from suzuki_lab.field import Field, field_new
from suzuki_lab.suzuki import GroupIndex, enumerate_group


@pytest.fixture(scope="session")
def gf8() -> Field:
    return field_new(3)


@pytest.fixture(scope="session")
def gf32() -> Field:
    return field_new(5)


@pytest.fixture(scope="session")
def sz8_index(gf8: Field) -> GroupIndex:
    return enumerate_group(gf8)
