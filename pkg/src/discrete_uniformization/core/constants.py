"""Numerical constants for discrete uniformization."""

# Relative slack for strict triangle inequalities: a + b - c >= slack * max(a, b, c)
TRIANGLE_SLACK = 1e-12

# Relative residual accepted from a direct linear solve
RESIDUAL_TOL = 1e-10

# Mean-zero tolerance on user-supplied right-hand sides (relative to |y|inf)
MEAN_ZERO_TOL = 1e-10

# Largest graph enumerated by the brute-force isoperimetric oracle
MAX_BRUTE_FORCE_VERTICES = 22

# Subsets evaluated per vectorized batch during enumeration
SUBSET_BATCH = 1 << 16

# Genus-2 octagon: regular, interior angles pi/4
OCTAGON_SIDES = 8

# Edges of the genus-2 mesh must be shorter than this at the working level
GENUS2_MAX_EDGE = 0.1

# Smallest subdivision level with every genus-2 edge shorter than GENUS2_MAX_EDGE
K0 = 4

# Geodesic pairs per worker batch; fixed so results do not depend on thread count
GEODESIC_BATCH = 2048

# Default seed for randomized verification suites and oracle draws
DEFAULT_SEED = 20240607

# Study table columns
STUDY_COLUMNS = ["resolution", "h", "error", "residual", "runtime_ms"]
