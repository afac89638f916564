"""
Field constraints for the physical value types.

Constraints are attached to dataclass fields with `>>` and checked by `ValidatorMixin.full_validate`,
which every value type runs from `__post_init__`:

    @dataclasses.dataclass(frozen=True)
    class Spectrum(ValidatorMixin):
        b: float = v.min(0.0)
        k: float = 0.0 >> v.range(-1.0, 1.0)
"""
import abc
import dataclasses
import functools
import logging
import typing

import numpy as np

from .utils.exceptions import add_exception_notes, ExceptionCollector
from .utils.repr import value_repr, log_value_repr
from .utils.type_validation import validate_type

logger = logging.getLogger(__name__)


VALIDATORS_ATTRS = "_nonlocal_dephasing_validators"


class Validator(abc.ABC):

    def update_validator_list(self, validator_list: list["Validator"]) -> list["Validator"]:
        return validator_list + [self]

    @abc.abstractmethod
    def check_value(self, value, instance) -> Exception | None:
        ...


@dataclasses.dataclass
class SimpleValidator(Validator):
    __slots__ = ("operator", "message", "skip_none")
    operator: typing.Callable[[typing.Any], bool]
    message: str
    skip_none: bool

    def __str__(self):
        return f"validate {self.message}"

    def __repr__(self):
        return f"<validator:{self.message}>"

    def check_value(self, value, instance):
        if value is None and self.skip_none:
            return None
        if self.operator(value):
            return None
        return add_exception_notes(ValueError(f"Expect {self.message}"), f"value {value_repr(value)}")


class FieldWithValidator(dataclasses.Field):
    __slots__ = ("validator", )

    validator: Validator

    def __init__(self, validator: Validator):
        metadata = {VALIDATORS_ATTRS: [validator]}
        # noinspection PyTypeChecker
        super().__init__(
            default=dataclasses.MISSING, default_factory=dataclasses.MISSING,
            init=True, repr=True, hash=None, compare=True, metadata=metadata, kw_only=dataclasses.MISSING
        )
        self.validator = validator

    def __rrshift__(self, other) -> dataclasses.Field:

        if not isinstance(other, dataclasses.Field):
            # a plain value on the left is the default value of the field
            assert self.default is dataclasses.MISSING, "Validator is used as a field with a default value"
            self.default = other
            return self

        assert not isinstance(other, FieldWithValidator), "Standard rshift must be applied"
        assert self.metadata == {VALIDATORS_ATTRS: [self.validator]}, "Validator metadata was affected"
        metadata = {
            **other.metadata,
            VALIDATORS_ATTRS: self.validator.update_validator_list(other.metadata.get(VALIDATORS_ATTRS, []))
        }

        return dataclasses.Field(
            default=other.default, default_factory=other.default_factory,
            init=other.init, repr=other.repr, hash=other.hash, compare=other.compare,
            metadata=metadata, kw_only=other.kw_only
        )

    def __rshift__(self, other: dataclasses.Field) -> dataclasses.Field:
        if not isinstance(other, FieldWithValidator):
            return NotImplemented

        assert self.metadata == {VALIDATORS_ATTRS: [self.validator]}, "Validator metadata was affected"
        assert other.metadata == {VALIDATORS_ATTRS: [other.validator]}, "Validator metadata was affected"

        metadata = {
            VALIDATORS_ATTRS: other.validator.update_validator_list([self.validator])
        }

        return dataclasses.Field(
            default=self.default, default_factory=self.default_factory,
            init=self.init, repr=self.repr, hash=self.hash, compare=self.compare,
            metadata=metadata, kw_only=self.kw_only
        )


@functools.cache
def _field_types(cls: type) -> dict[str, typing.Any]:
    return typing.get_type_hints(cls)


class ValidatorMixin:
    """
    Mixin that runs field constraints of a dataclass when an instance is created
    """

    def __post_init__(self):
        self.full_validate()

    def validate(self):
        """
        Cross-field rules of a concrete class.
        """
        pass

    @typing.final
    def full_validate(self):
        """Run type checks, field validators and the `validate` hook"""

        logger.debug("Validate %s", log_value_repr(self, logging.DEBUG, logger))
        assert dataclasses.is_dataclass(self), f"{value_repr(self)} if not a dataclass"

        exc_collector = ExceptionCollector()

        for item in dataclasses.fields(self):   # noqa
            exc_collector.add(self._validate_field(item), f"field {item.name}")

        if not exc_collector.exc_list:
            # cross-field rules assume that every field is already sane
            with exc_collector():
                logger.debug("Run custom validator of %s", type(self).__qualname__)
                self.validate()

        logger.debug("Validation of %s finished with %s exceptions",
                     type(self).__qualname__, len(exc_collector.exc_list))

        exc = exc_collector.single_or_group_exception(f"Invalid {type(self).__qualname__}")
        if exc is not None:
            raise exc

    @typing.final
    def _validate_field(self, field: dataclasses.Field) -> Exception | None:
        field_value = getattr(self, field.name)
        logger.debug("Validate field %s", field.name)

        validator_metadata = typing.cast(list[Validator], field.metadata.get(VALIDATORS_ATTRS, []))

        exc_collector = ExceptionCollector()

        exc_collector.add(validate_type(field_value, _field_types(type(self)).get(field.name, typing.Any)))

        if exc_collector.exc_list:
            logger.debug("Type validation of %s failed, skip constraints", field.name)
            return exc_collector.single_or_group_exception("Field type errors")

        for validator in validator_metadata:
            logger.debug("Validate %s with %s", field.name, validator)
            with exc_collector(f"validator {validator}"):
                exc_collector.add(validator.check_value(field_value, self))

        return exc_collector.single_or_group_exception("Field validation errors")


def _simple(operator: typing.Callable[[typing.Any], bool], message: str) -> FieldWithValidator:
    return FieldWithValidator(SimpleValidator(operator, message, True))


def min(value) -> FieldWithValidator:  # noqa
    """
    Check if value is not less than minimum
    """
    return _simple(lambda v: v >= value, f"min value {value}")


def max(value) -> FieldWithValidator:  # noqa
    """
    Check if value is not greater than maximum
    """
    return _simple(lambda v: v <= value, f"max value {value}")


def gt(value) -> FieldWithValidator:
    """
    Check if value is strictly greater than the bound
    """
    return _simple(lambda v: v > value, f"value greater than {value}")


def range(min_value, max_value) -> FieldWithValidator:  # noqa
    """
    Check if value in in the closed range
    """
    return _simple(lambda v: min_value <= v <= max_value, f"value in [{min_value}, {max_value}]")


def values(*expected_values) -> FieldWithValidator:
    """
    Check if value is in the provided list
    """
    return _simple(lambda v: v in expected_values, f"values {expected_values}")


def min_length(value) -> FieldWithValidator:
    """
    Check if sequence length is not less than minimum length
    """
    return _simple(lambda v: len(v) >= value, f"min length {value}")


def shape(*dims: int | None) -> FieldWithValidator:
    """
    Check array shape, `None` matches any extent
    """
    def check(v: np.ndarray) -> bool:
        return v.ndim == len(dims) and all(d is None or d == s for d, s in zip(dims, v.shape))

    descr = ", ".join("*" if d is None else str(d) for d in dims)
    return _simple(check, f"shape ({descr})")


def finite() -> FieldWithValidator:
    """
    Check that every array element is finite
    """
    return _simple(lambda v: bool(np.all(np.isfinite(v))), "finite values")


def strictly_increasing() -> FieldWithValidator:
    """
    Check that a 1-D array is strictly increasing
    """
    return _simple(lambda v: bool(np.all(np.diff(v) > 0)), "strictly increasing values")


def hermitian(tol: float) -> FieldWithValidator:
    """
    Check that a square matrix equals its conjugate transpose
    """
    return _simple(lambda v: bool(np.allclose(v, v.conj().T, rtol=0.0, atol=tol)), f"hermitian matrix within {tol}")


def unit_trace(tol: float) -> FieldWithValidator:
    """
    Check that the trace of a square matrix is one
    """
    return _simple(lambda v: abs(np.trace(v) - 1.0) <= tol, f"unit trace within {tol}")


def psd(floor: float) -> FieldWithValidator:
    """
    Check that the smallest eigenvalue of a hermitian matrix is not below the floor
    """
    def check(v: np.ndarray) -> bool:
        hermitian_part = (v + v.conj().T) / 2
        return float(np.linalg.eigvalsh(hermitian_part)[0]) >= floor

    return _simple(check, f"positive semidefinite matrix (eigenvalues >= {floor})")


def max_modulus(bound: float) -> FieldWithValidator:
    """
    Check that the modulus of a complex value does not exceed the bound
    """
    return _simple(lambda v: abs(v) <= bound, f"modulus at most {bound}")


def all_min(value) -> FieldWithValidator:
    """
    Check that no element of a sequence is less than minimum
    """
    return _simple(lambda v: all(i >= value for i in v), f"every element not less than {value}")
