import warnings

import pytest

from quadcool.params import WeakDriveWarning


@pytest.fixture(autouse=True)
def _quiet_weak_drive():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakDriveWarning)
        yield
