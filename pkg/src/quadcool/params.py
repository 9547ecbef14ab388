"""Physical parameters, all frequencies in units of the mechanical frequency."""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

from .errors import StabilityError

#: Omega/kappa above which second-order-in-drive rate theory is doubtful
WEAK_DRIVE_LIMIT = 0.5


class WeakDriveWarning(UserWarning):
    pass


def unstable_photon_numbers(g: float, omega_m: float, n_photon_states: int) -> list[int]:
    """Photon numbers s < n_photon_states with omega_m + 4 s g <= 0."""
    return [s for s in range(n_photon_states) if omega_m + 4.0 * s * g <= 0]


def check_stability(g: float, omega_m: float = 1.0, n_photon_states: int = 2) -> None:
    bad = unstable_photon_numbers(g, omega_m, n_photon_states)
    if bad:
        raise StabilityError(
            f"omega_m + 4 s g <= 0 for photon numbers s = {bad} (g = {g:g}, omega_m = {omega_m:g})",
            bad)


@dataclass(frozen=True)
class SystemParams:
    """Single-photon quadratic optomechanics parameters.

    ``delta`` is the laser detuning omega_L - omega_R, ``omega_drive`` the
    drive strength Omega.  ``omega_m`` is the frequency unit and stays 1.
    Stability is checked for one cavity photon here; the master-equation
    code re-checks it for every photon number it keeps.
    """

    g: float
    kappa: float
    delta: float = 0.0
    omega_drive: float = 0.0
    gamma_m: float = 0.0
    n_th: float = 0.0
    omega_m: float = 1.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{f.name} must be a finite number, got {v!r}")
        if self.omega_m <= 0:
            raise ValueError(f"omega_m must be positive, got {self.omega_m}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.omega_drive < 0:
            raise ValueError(f"omega_drive must be >= 0, got {self.omega_drive}")
        if self.gamma_m < 0:
            raise ValueError(f"gamma_m must be >= 0, got {self.gamma_m}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")
        check_stability(self.g, self.omega_m, 2)
        if self.omega_drive / self.kappa > WEAK_DRIVE_LIMIT:
            warnings.warn(
                f"Omega/kappa = {self.omega_drive / self.kappa:.3g} > {WEAK_DRIVE_LIMIT}; "
                "rates are only second order in the drive",
                WeakDriveWarning, stacklevel=3)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)
