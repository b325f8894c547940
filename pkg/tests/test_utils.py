#!/usr/bin/env python3
"""
Tests for the utility functions in utils.py.
"""

import json
import pytest
from fractions import Fraction
from pydantic import BaseModel
from typing import Optional

import numpy as np

from smallball.models.concentration import Method
from smallball.utils import (
    as_point,
    derive_seed,
    dump_json,
    format_csv_fields,
    format_real,
    lcm_many,
    load_model,
    parse_rational,
    parse_real,
    strict_floor,
    to_jsonable,
    validate_response,
)

class TestUtils:
    """Tests for utility functions."""

    # Define model for testing validation functions
    class ValidationModel(BaseModel):
        """Model for validation function tests."""
        name: str
        value: int
        optional: Optional[str] = None

    def test_parse_rational(self):
        """Test parse_rational function."""
        assert parse_rational(3) == Fraction(3)
        assert parse_rational("1/3") == Fraction(1, 3)
        assert parse_rational(" -2/4 ") == Fraction(-1, 2)
        # Floats go through their decimal form
        assert parse_rational(0.1) == Fraction(1, 10)
        with pytest.raises(ValueError):
            parse_rational("one third")
        with pytest.raises(ValueError):
            parse_rational(True)
        with pytest.raises(ValueError):
            parse_rational(float("nan"))

    def test_parse_real(self):
        """Test parse_real function."""
        assert parse_real(2) == Fraction(2)
        assert isinstance(parse_real(0.5), float)
        assert parse_real("3/4") == Fraction(3, 4)
        with pytest.raises(ValueError):
            parse_real(float("inf"))

    def test_strict_floor(self):
        """Test strict_floor function."""
        assert strict_floor(2) == 1
        assert strict_floor(Fraction(5, 2)) == 2
        assert strict_floor(0.5) == 0
        assert strict_floor(0) == -1

    def test_derive_seed(self):
        """Test derive_seed function."""
        assert derive_seed(42, 0) == derive_seed(42, 0)
        assert derive_seed(42, 0) != derive_seed(42, 1)
        assert derive_seed(42, 0) != derive_seed(43, 0)
        assert 0 <= derive_seed(2 ** 64 - 1, 10 ** 6) < 2 ** 64

    def test_lcm_many(self):
        """Test lcm_many function."""
        assert lcm_many([]) == 1
        assert lcm_many(range(1, 7)) == 60
        assert lcm_many([4, 6, 10]) == 60

    def test_as_point(self):
        """Test as_point function."""
        assert as_point(3) == (3,)
        assert as_point([1, 2]) == (1, 2)

    def test_format_csv_fields(self):
        """Test format_csv_fields function."""
        assert format_csv_fields(Fraction(6435, 32768)) == ["6435/32768"]
        assert format_csv_fields(0.1) == ["0.10000000000000001"]
        assert format_csv_fields(None, True, 3) == ["", "true", "3"]
        assert format_csv_fields({"b": 1, "a": Fraction(1, 2)}) == ['{"a": "1/2", "b": 1}']

    def test_format_real(self):
        """Test format_real function."""
        assert format_real(Fraction(1, 3)) == "1/3"
        assert format_real(0.25) == 0.25

    def test_to_jsonable(self):
        """Test to_jsonable function."""
        data = {"q": Fraction(1, 4), "method": Method.EXACT, "center": (Fraction(1, 2),), "n": np.int64(5)}
        assert to_jsonable(data) == {"q": "1/4", "method": "exact", "center": ["1/2"], "n": 5}

    def test_dump_json(self):
        """Test dump_json function."""
        text = dump_json({"b": Fraction(1, 2), "a": [1, 2]})
        assert text.endswith("}\n")
        assert json.loads(text) == {"a": [1, 2], "b": "1/2"}
        assert text.index('"a"') < text.index('"b"')

    def test_validate_response(self):
        """Test validate_response function."""
        # Test with dict
        data = {"name": "test", "value": 123}
        result = validate_response(data, self.ValidationModel)
        assert isinstance(result, self.ValidationModel)
        assert result.name == "test"
        assert result.value == 123

        # Test with model instance
        model = self.ValidationModel(name="test", value=123)
        assert validate_response(model, self.ValidationModel) is model

    def test_load_model(self, tmp_path):
        """Test load_model function."""
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"name": "file", "value": 7}))
        assert load_model(path, self.ValidationModel).value == 7
