"""Unit tests for the noise regularizer schema."""
import numpy as np
import pytest
from pydantic import ValidationError

from app.schemas.regularizer import RegularizerSpec


def test_default_spec():
    """Test the default is an unmasked l1 penalty."""
    spec = RegularizerSpec()
    assert spec.kind == "l1"
    assert spec.lambda2 == 1.0
    assert spec.mask is None


def test_masked_spec_weights():
    """Test weights are c observed and 1/c unobserved."""
    spec = RegularizerSpec.masked(np.array([True, False, True]), 4.0)
    np.testing.assert_allclose(spec.weights(), [4.0, 0.25, 4.0])


def test_mask_coerced_from_integers():
    """Test a 0/1 mask is accepted as booleans."""
    spec = RegularizerSpec(kind="masked_l1", mask=[1, 0], mask_weight_c=2.0)
    assert spec.mask.dtype == bool


def test_masked_requires_mask():
    """Test masked_l1 without a mask is rejected."""
    with pytest.raises(ValidationError):
        RegularizerSpec(kind="masked_l1", mask_weight_c=2.0)


def test_masked_requires_positive_c():
    """Test masked_l1 needs c > 0."""
    with pytest.raises(ValidationError):
        RegularizerSpec(kind="masked_l1", mask=[True], mask_weight_c=0.0)


def test_mask_only_for_masked_kind():
    """Test l1 with a mask is rejected."""
    with pytest.raises(ValidationError):
        RegularizerSpec(kind="l1", mask=[True, False])


def test_invalid_mask_entries():
    """Test non-boolean mask entries are rejected."""
    with pytest.raises(ValidationError):
        RegularizerSpec(kind="masked_l1", mask=[0.5, 1.0], mask_weight_c=2.0)


def test_negative_lambda2():
    """Test a negative weight is rejected."""
    with pytest.raises(ValidationError):
        RegularizerSpec(kind="l2", lambda2=-0.1)


def test_weights_only_for_masked():
    """Test weights are undefined for l1."""
    with pytest.raises(ValueError):
        RegularizerSpec().weights()
