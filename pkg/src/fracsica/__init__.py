"""Fractional-order SICA HIV/AIDS model with general incidence.

Modules:
    frackit  - Caputo PECE solver and Mittag-Leffler function
    sica     - model, R0, equilibria, Jacobian, Matignon stability, hypotheses
    focp     - fractional optimal control by forward-backward sweeps
    metrics  - efficacy, averted cases, total cost, ACER, effectiveness
    config   - scenario files
    cli      - ``fracsica`` command
"""

from .frackit import TimeGrid, Trajectory, caputo_pece_solve, mittag_leffler
from .sica import (
    Bilinear,
    HattafYousfi,
    Saturated,
    SicaParams,
    SicaState,
    basic_reproduction_number,
    disease_free_equilibrium,
    endemic_equilibrium,
    simulate,
)
from .focp import (
    ControlBounds,
    CostWeights,
    SweepConfig,
    forward_backward_sweep,
)

__version__ = "0.1.0"
