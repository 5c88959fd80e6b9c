"""Second-order pooling with element-wise and spectral power normalization."""

from .aggregate import (
    AugmentedBatch,
    CoocMatrix,
    FeatureBatch,
    augment,
    center_columns,
    cooc_matrix,
    rectify_center,
    trace_normalize,
)
from .elementwise import (
    KINDS,
    PNConfig,
    PoolGradient,
    apply_variants,
    asinhe_fwd,
    dM_dPhi_contract,
    gamma_fwd,
    maxexp_fwd,
    pn_bwd,
    pn_fwd,
    sigme_fwd,
)
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    NumericError,
    RankDeficiencyError,
    SopoolError,
    TensorFileError,
    ValidationError,
)
from .gradcheck import GradReport, central_diff_grad, central_diff_grad_sym, compare
from .kernelmap import (
    PivotGrid,
    SpatialEncoding,
    encode_grid,
    encode_spatial,
    feature_map,
    make_pivots,
)
from .linalg import EigenPair, mat_fun, mat_int_pow, sym, sym_eig
from .probmodel import (
    BernoulliPool,
    binom_at_least_one,
    multinom_at_least_one,
    simulate_cooc,
)
from .spectral import (
    SPECTRAL_KINDS,
    SpectralPlan,
    closed_form_fwd,
    maxexp_spectral_bwd_closed,
    spectral_bwd_eigen,
    spectral_dM,
    spectral_fwd,
    spectral_pool,
    sqrt_bwd_sylvester,
)
from .tensorfile import read_tensor, write_tensor

__version__ = "0.1.0"
