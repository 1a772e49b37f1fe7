import os

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass


def safe_int(x, default: int) -> int:
    try:
        return int(x)
    except (TypeError, ValueError):
        return default


# Largest algebra any construction may materialize (unfolding powers, subobjects).
ELEMENT_BUDGET = safe_int(os.environ.get("RETROLIFT_BUDGET"), 1024)

# Bound on input algebras for quartic refinement scans and congruence enumeration.
INPUT_LIMIT = safe_int(os.environ.get("RETROLIFT_INPUT_LIMIT"), 64)

THREADS = max(1, safe_int(os.environ.get("RETROLIFT_THREADS"), 1))

MAX_DEPTH = 4
PARTITION_FILTER_LIMIT = 7

# Exhaustive uniqueness / universal-property checks run against targets up to these sizes.
UNIQUENESS_BOUND = 4
LATTICE_TARGET_BOUND = 5
UNIVERSAL_CHECK_SOURCE_LIMIT = 16
