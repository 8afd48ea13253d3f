"""Depth-based bootstrap inference for functional parameters.

Submodules
----------
funcspace   grids, curves, samples, covariance eigendecomposition, Gram-Schmidt
depth       kernel, regularized halfspace, integrated and infimal depths
inference   bootstrap depth p-values and scalar competitors
twosample   two-sample mean tests
fofr        mean-response tests in function-on-function regression
simgen      simulation scenarios
power       Monte Carlo size/power harness
io, svg     CSV/JSON input-output and plots
cli         the ``depthstat`` command
"""

from .depth import DepthSpec, DepthValue, evaluate_depths, ifd_depth, itd_depth, kd_depth, rhd_depth
from .errors import DepthStatError
from .fofr import FoFRData, fofr_test, fofr_tests, fpcr_fit
from .funcspace import Curve, FunctionalSample, Grid, covariance_eig, gram_schmidt, make_grid
from .inference import BootstrapEnsemble, TestReport, depth_distribution, depth_pvalue, scalar_pvalue
from .simgen import make_fofr_scenario, two_sample_scenario
from .twosample import TwoSampleData, two_sample_test, two_sample_tests

__version__ = "0.1.0"

__all__ = [
    "BootstrapEnsemble",
    "Curve",
    "DepthSpec",
    "DepthStatError",
    "DepthValue",
    "FoFRData",
    "FunctionalSample",
    "Grid",
    "TestReport",
    "TwoSampleData",
    "covariance_eig",
    "depth_distribution",
    "depth_pvalue",
    "evaluate_depths",
    "fofr_test",
    "fofr_tests",
    "fpcr_fit",
    "gram_schmidt",
    "ifd_depth",
    "itd_depth",
    "kd_depth",
    "make_fofr_scenario",
    "make_grid",
    "rhd_depth",
    "scalar_pvalue",
    "two_sample_scenario",
    "two_sample_test",
    "two_sample_tests",
]
