# Size bounds for exhaustive algebra work
BOUNDS = {
    'all_congruences_max_size': 6,
    'product_max_size': 4096,
    'free_algebra_max_size': 4096,
    'filter_max_size': 12,
    'isomorphism_max_size': 8,
    'enumeration_max_size': 40,
    'enumeration_max_raw': 200000,
    'equivalent_pair_max_reps': 2000,
}

# Formula pools used by bounded verification and cross-checks
POOL_DEFAULTS = {
    'depth': 2,
    'variables': 2,
    'premises_max': 2,
    'max_formulas': 24,
}

# Context pool for the Suszko condition
SUSZKO_POOL = {
    'depth': 2,
    'variables': 1,
    'max_contexts': 40,
}

# Theta membership
THETA_CONFIG = {
    'method': 'closure',          # 'closure' or 'bounded'
    'chain_bound': 40,
    'state_budget': 50000,
    'size_slack': 2,              # search size cap multiplier over the query's largest term
}

# Hilbert calculus saturation
HILBERT_BUDGET = {
    'max_depth': 6,
    'max_vars': 3,
    'max_derived': 4000,
    'max_iterations': 12,
}

# Decision procedure
DECIDE_CONFIG = {
    'exhaustive_ri': False,
    'cross_check_depth': 2,
    'cross_check_max_formulas': 60,
    'periodicity_search_limit': 8,
}

LOGGING_CONFIG = {
    'level': 'INFO',
    'file': 'logic_decider.log',
    'format': '%(asctime)s - %(levelname)s - %(message)s',
}

DATABASE_PATH = 'logic_reports.db'
EXPORT_DIR = 'exports'

# Exit code contract of the command line
EXIT_CODES = {
    'yes': 0,
    'no': 1,
    'inconclusive': 2,
    'input_error': 3,
}
