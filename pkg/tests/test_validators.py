import dataclasses
import typing

import numpy as np
import pytest

from nonlocal_dephasing import validators as v
from nonlocal_dephasing.validators import ValidatorMixin
from .common import Base, serialize_exception


@dataclasses.dataclass
class Sample(ValidatorMixin):
    b: float = v.min(0.0)
    k: float = 0.0 >> v.range(-1.0, 1.0)
    n: int = 1 >> v.min(1) >> v.max(10)


class TestScalarConstraints(Base):

    @pytest.mark.parametrize("args", (
            (0.5, -0.3, 3),
            (0, 1, 10),
            (0.0, -1.0, 1),
    ))
    def test_valid(self, args):
        Sample(*args)

    def test_defaults(self):
        sample = Sample(2.0)
        assert sample.k == 0.0
        assert sample.n == 1

    @pytest.mark.parametrize("args", (
            (-1.0, 0.0, 1),
            (1.0, 2.0, 1),
            (1.0, 0.0, 11),
            (-1.0, 2.0, 0),
            ("a", 0.0, 1),
            (True, 0.0, 1),
    ))
    def test_constraints_fail(self, args):
        with pytest.raises(Exception) as exc_info:
            Sample(*args)
        self.data_regression.check(serialize_exception(exc_info.value))


@dataclasses.dataclass
class Arrays(ValidatorMixin):
    matrix: np.ndarray = v.shape(2, 2) >> v.finite() >> v.hermitian(1e-10) >> v.unit_trace(1e-10) >> v.psd(-1e-9)
    axis: np.ndarray = v.shape(None) >> v.min_length(2) >> v.strictly_increasing()
    counts: tuple[int, ...] = v.all_min(0)
    label: str = "HV" >> v.values("HV", "DD")
    z: complex = 0j >> v.max_modulus(1.0)


VALID_MATRIX = np.array([[0.5, 0.25j], [-0.25j, 0.5]])


class TestArrayConstraints:

    def test_valid(self):
        Arrays(VALID_MATRIX, np.array([0.0, 1.0, 2.0]), (0, 3))

    @pytest.mark.parametrize("kwargs,message", (
            (dict(matrix=np.eye(3) / 3), "Expect shape (2, 2)"),
            (dict(matrix=np.array([[0.5, 0.25], [0.0, 0.5]])), "Expect hermitian matrix within 1e-10"),
            (dict(matrix=np.eye(2)), "Expect unit trace within 1e-10"),
            (dict(matrix=np.array([[0.5, 0.8], [0.8, 0.5]])), "Expect positive semidefinite matrix"),
            (dict(axis=np.array([0.0])), "Expect min length 2"),
            (dict(axis=np.array([0.0, 2.0, 1.0])), "Expect strictly increasing values"),
            (dict(axis=np.arange(4.0).reshape(2, 2)), "Expect shape (*)"),
            (dict(counts=(1, -1)), "Expect every element not less than 0"),
            (dict(label="RL"), "Expect values ('HV', 'DD')"),
            (dict(z=0.8 + 0.8j), "Expect modulus at most 1.0"),
    ))
    def test_fail(self, kwargs, message):
        args = dict(matrix=VALID_MATRIX, axis=np.array([0.0, 1.0]), counts=(0, ))
        args.update(kwargs)
        with pytest.raises(ValueError) as exc_info:
            Arrays(**args)
        assert str(exc_info.value).startswith(message)
        assert f"field {next(iter(kwargs))}" in exc_info.value.__notes__

    def test_several_fields_fail(self):
        with pytest.raises(ExceptionGroup) as exc_info:
            Arrays(np.eye(2), np.array([1.0, 0.0]), (-1, ))
        assert exc_info.value.message == "Invalid Arrays"
        assert len(exc_info.value.exceptions) == 3


@dataclasses.dataclass
class CrossField(ValidatorMixin):
    low: float = v.min(0.0)
    high: float = v.min(0.0)
    calls: typing.ClassVar[list] = []

    def validate(self):
        self.calls.append(self.low)
        if self.low > self.high:
            raise ValueError("Expect low <= high")


@dataclasses.dataclass
class Sized(ValidatorMixin):
    value: typing.Any = v.min_length(2)


class TestValidationFlow:

    def test_custom_validator(self):
        with pytest.raises(ValueError, match="Expect low <= high"):
            CrossField(2.0, 1.0)

    def test_custom_validator_skipped_on_field_errors(self):
        CrossField.calls.clear()
        with pytest.raises(ValueError, match="Expect min value 0.0"):
            CrossField(-1.0, 1.0)
        assert CrossField.calls == []

    def test_validator_raising_is_collected(self):
        with pytest.raises(TypeError) as exc_info:
            Sized(5)
        assert exc_info.value.__notes__ == ["validator validate min length 2", "field value"]

    def test_chain_keeps_default_and_order(self):
        field = 3 >> v.min(1) >> v.max(5)
        assert field.default == 3
        assert [str(i) for i in field.metadata[v.VALIDATORS_ATTRS]] == ["validate min value 1", "validate max value 5"]

    def test_field_with_metadata(self):
        field = dataclasses.field(default=None, metadata={"key": "value"}) >> v.min(0)
        assert field.default is None
        assert field.metadata["key"] == "value"
        assert len(field.metadata[v.VALIDATORS_ATTRS]) == 1
