"""tvcap: emulate arbitrary one-port networks with a time-varying capacitor.

Modulating a single capacitor's value in time can reproduce the
voltage-current relation of any causal one-port, including non-Foster
(negative) capacitances, inductances and resistances. This package
synthesizes the required modulation profiles, verifies them by transient
circuit simulation against phasor references, proves stability with a
circle-criterion test, and validates the invisible-sensor metasurface
application with a zero-thickness sheet model and a 1-D FDTD model.
"""

from .backend import backend_name
from .circuitsim import (CircuitSpec, EquivalentBranch, SimulationTrace,
                         SteadyState, TimeVaryingCapBranch, compare_emulation,
                         equivalent_steady_state, simulate_tvc,
                         steady_state_charge)
from .kernels import (AdmittanceKernel, VolterraKernel2, convolve_first_order,
                      convolve_second_order)
from .modsynth import (Capacitance, GeneralLTI, LossyInductance,
                       ModulationProfile, NonlinearElement, Resistance,
                       select_constant_for_positivity, synth_capacitance,
                       synth_general, synth_inductance, synth_nonlinear,
                       synth_resistance)
from .sheetsim import (FieldProbeRecord, PlaneWaveSource, PowerReport,
                       SensorModulation, SheetSpec, compare_variants,
                       invisibility_residual, power_balance,
                       reflection_magnitude, simulate_fdtd, simulate_sheet,
                       static_sheet_coefficients, synth_sensor_modulation)
from .signals import (HarmonicSignal, Phasor, Waveform, cumulative_integral,
                      derivative, lowpass, sample, steady_state_phasor,
                      waveform_from_csv, waveform_to_csv)
from .stability import (StabilityReport, TransientLaw, analyze_profile,
                        circle_criterion, ideal_nonfoster_transient,
                        modulation_bounds, parallel_resistance)

__version__ = "0.1.0"

__all__ = [
    "AdmittanceKernel", "Capacitance", "CircuitSpec", "EquivalentBranch",
    "FieldProbeRecord", "GeneralLTI", "HarmonicSignal", "LossyInductance",
    "ModulationProfile", "NonlinearElement", "Phasor", "PlaneWaveSource",
    "PowerReport", "Resistance", "SensorModulation", "SheetSpec",
    "SimulationTrace", "StabilityReport", "SteadyState", "TimeVaryingCapBranch",
    "TransientLaw", "VolterraKernel2", "Waveform", "analyze_profile",
    "backend_name", "circle_criterion", "compare_emulation",
    "compare_variants", "convolve_first_order", "convolve_second_order",
    "cumulative_integral", "derivative", "equivalent_steady_state",
    "ideal_nonfoster_transient", "invisibility_residual", "lowpass",
    "modulation_bounds", "parallel_resistance", "power_balance",
    "reflection_magnitude", "sample", "select_constant_for_positivity",
    "simulate_fdtd", "simulate_sheet", "simulate_tvc", "static_sheet_coefficients",
    "steady_state_charge", "steady_state_phasor", "synth_capacitance",
    "synth_general", "synth_inductance", "synth_nonlinear", "synth_resistance",
    "synth_sensor_modulation", "waveform_from_csv", "waveform_to_csv",
]
