CONFIG_FILE_PATH = None

# Numeric tolerances shared across modules.
HERMITIAN_INPUT_ATOL = 1e-10
NORM_ATOL = 1e-12
RESIDUAL_RTOL = 1e-10
DEGENERACY_GAP = 1e-9
MATCH_ATOL = 1e-10
QUOTED_VALUE_ATOL = 1e-5
POSITIVITY_CLAMP = 1e-9
TRACE_ATOL = 1e-12
SOFT_POSITIVITY = 1e-6

CSV_DIGITS = 12
