"""Correlation estimation for left-censored series via Tobit regression."""
from censcorr.truncnorm import (
    TruncParams,
    inverse_mills_ratio,
    std_normal_cdf,
    std_normal_pdf,
    truncated_density,
    upper_truncated_mean,
    upper_truncated_second_moment,
    upper_truncated_variance,
)
from censcorr.nnls import NnlsError, NnlsIterationLimit, NnlsProblem, NnlsSolution, kkt_violation, solve_nnls
from censcorr.tobit import (
    ASYMMETRIC,
    SYMMETRIC,
    EMConfig,
    EMFailure,
    EMTrace,
    FittedTobit,
    PriorSpec,
    RegressionData,
    TobitError,
    TobitModel,
    build_lambda_vectors,
    build_mstep_system,
    e_step,
    fit_em,
    fit_tobit,
    impute,
    log_prior,
    m_step_beta,
    m_step_w,
    regularized_loglik,
    tobit_loglik,
)
from censcorr.correlation import (
    CorrelationConfig,
    CorrelationEstimate,
    InsufficientDataError,
    PairedCensoredData,
    UndefinedCorrelationError,
    naive_pcc,
    pcc,
    preprocess_signs,
    tobit_pcc,
)

__version__ = "0.1.0"
