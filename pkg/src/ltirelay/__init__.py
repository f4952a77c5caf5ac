"""Joint FIR source and relay filter design for LTI Gaussian relay channels."""

from .errors import (
    DegenerateChannel,
    InfeasibleBand,
    NonFiniteIntegrand,
    NumericalRankLoss,
    SingularForm,
)
from .flatfading import (
    FlatChannel,
    LpfSolution,
    af_optimal,
    equalizing_rate,
    lpf_classify,
    lpf_design,
    one_tap_delayed_rate,
    water_fill,
)
from .harness import ExperimentSpec, SweepRow, generate_channels, run_sweep, trace_instance
from .objective import DesignPoint, RateReport, cost, cost_gradient, finite_diff_gradient, rate
from .optimizer import OptimizerConfig, OptimizerTrace, af_baseline, design
from .projections import (
    RelayEllipsoid,
    project_ball,
    project_ellipsoid,
    project_two_step,
    project_xi,
    relay_form,
)
from .spectra import (
    ChannelTriple,
    FirFilter,
    PowerBudget,
    QuadratureGrid,
    cnr_density,
    freq_response,
    integrate,
)
from .toeplitz_oracle import convergence_report, finite_n_rate

__all__ = [name for name in dir() if not name.startswith("_")]
