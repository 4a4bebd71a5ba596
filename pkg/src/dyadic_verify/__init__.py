"""
Dyadic Verify

Numerical verification of weighted estimates for multilinear dyadic maximal
functions, sparse operators and sparse forms on finite dyadic grids.
"""

__version__ = "1.0.0"
__author__ = "Dyadic Verify Developers"
__email__ = "dyadic-verify@example.com"
__description__ = "Check weighted norm inequalities for dyadic maximal and sparse operators on finite grids"

from .grid import ROOT, CubeId, CubeSeq, Grid, LeafFn
from .operators import ExponentProfile, fractional_maximal_wrt, multilinear_maximal, seq_maximal
from .characteristics import (CharExponents, carleson_norm, fujii_wilson, lebesgue_norm, lorentz_norm,
                              muckenhoupt)
from .sparse import (SparseAllocation, SparseFamily, carleson_to_sparse, sparse_form_B, sparse_operator_A,
                     sparse_to_carleson)
from .stopping import StoppingFamily, build_stopping, strong_stopping, verify_stopping
from .checkers import IneqParams, IneqReport, Instance, dependent_complete, evaluate_inequality
from .search import WeightFamily, gen_weight, maximize_ratio, slope_fit

__all__ = [
    'ROOT', 'CubeId', 'CubeSeq', 'Grid', 'LeafFn',
    'ExponentProfile', 'fractional_maximal_wrt', 'multilinear_maximal', 'seq_maximal',
    'CharExponents', 'carleson_norm', 'fujii_wilson', 'lebesgue_norm', 'lorentz_norm', 'muckenhoupt',
    'SparseAllocation', 'SparseFamily', 'carleson_to_sparse', 'sparse_form_B', 'sparse_operator_A',
    'sparse_to_carleson',
    'StoppingFamily', 'build_stopping', 'strong_stopping', 'verify_stopping',
    'IneqParams', 'IneqReport', 'Instance', 'dependent_complete', 'evaluate_inequality',
    'WeightFamily', 'gen_weight', 'maximize_ratio', 'slope_fit',
]
