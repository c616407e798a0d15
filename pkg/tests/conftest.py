import pytest

from schmidtgames.precision import DEFAULT_PRECISION_BITS, set_precision


@pytest.fixture(autouse=True)
def _default_precision():
    """Pin the working precision so tests are immune to ambient overrides."""
    set_precision(DEFAULT_PRECISION_BITS)
    yield
    set_precision(DEFAULT_PRECISION_BITS)
