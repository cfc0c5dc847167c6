"""Strong approximation of jump-diffusion SDEs on optimal sampling meshes."""

from .errors import ContractError, DensityError, NumericalError
from .model import (IntensityModel, MertonParams, SdeModel, check_commutativity, check_derivatives,
                    l1_apply, lm1_apply, local_y, merton, merton_exact)
from .pathkit import GridPath, JumpTimes, RngStream, simulate_path
from .scheme import ApproxTrajectory, Mesh, build_trajectory, evaluate, milstein_step, run_milstein
from .meshdesign import (Density, PilotEstimate, equidistant_mesh, merton_expected_y,
                         merton_optimal_mesh, mesh_from_density, optimal_density, pilot_expected_y)
from .errorlab import (ConvergenceReport, ErrorEstimate, asymptotic_constant, convergence_study,
                       cost_of, emit_report, holder_ratio, l2_error_mc)

__version__ = "0.1.0"
