"""Stochastic approximate universal-NOT channels and their error sensitivity.

The package builds the N-axis stochastic flip channels, injects operational
errors (generator jitter or waveplate-rotation jitter), reconstructs states
and processes by tomography, and runs seeded Monte Carlo sweeps verifying
that the fidelity-deviation sensitivity falls off as 1/sqrt(N).
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .channels import (
    AxisSet,
    Channel,
    GeneratorErrorDraw,
    WaveplateSetting,
    ancilla_realization,
    axis_set,
    chi_of_channel,
    decompose_qwp_hwp_qwp,
    error_unitary,
    make_unot,
    perturb_generator,
    perturb_waveplates,
    pi_rotation_plate_angles,
    sample_generator_errors,
    uniform_delta_r,
    waveplate_unitary,
)
from .experiments import (
    GENERATOR,
    PRESETS,
    WAVEPLATE,
    RatioEntry,
    SlopeFit,
    SweepConfig,
    SweepResult,
    fit_sensitivity,
    preset,
    ratio_check,
    run_sweep,
)
from .fidanal import (
    ALPHA,
    FidelityReport,
    QuadratureSpec,
    SensitivityModel,
    chi_ideal,
    delta3_closed,
    delta4_closed,
    deviation_closed_form,
    fidelity_closed_form,
    fidelity_quadrature,
    first_order_delta_chi,
    mean_fidelity_prediction,
    predicted_delta_chi_first_order,
    predicted_mean_deviation,
)
from .pauli import (
    PAULIS,
    PureStateAngles,
    RngStream,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ValidationError,
    bloch_of,
    conjugate_by,
    density_of,
    orthogonal_state,
    pauli_dot,
    pure_state,
    trace_distance,
)
from .tomography import (
    MeasurementRecord,
    QptResult,
    QstResult,
    qst_linear_inversion,
    run_qpt,
    run_qst,
    simulate_measurement,
)
