"""Physical constants used by the field solvers."""

from scipy import constants as _const

C0 = _const.c
"""Speed of light in vacuum, m/s."""

ETA0 = _const.physical_constants["characteristic impedance of vacuum"][0]
"""Free-space intrinsic impedance, ohm (~376.73)."""

EPS0 = _const.epsilon_0
"""Vacuum permittivity, F/m."""

MU0 = _const.mu_0
"""Vacuum permeability, H/m."""
