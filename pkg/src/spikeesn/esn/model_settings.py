"""Definition of constants and default parameters"""

# forecasting modes
MODES = ["spike", "esn"]

# synthetic series kinds
SYNTHETIC_KINDS = ["mackey_glass", "narma10", "sine_mix"]

# default parameters of the spike input layer
DEFAULT_ENCODER = dict(n_sam=100, psi=5000.0)
# default reservoir parameters
DEFAULT_RESERVOIR = dict(n_res=100, rho=0.9, eta=0.1, input_scale=0.8)
# default ridge regularization coefficient
DEFAULT_MU = 1e-8
# default experiment layout
DEFAULT_PIPELINE = dict(washout=200, steps=[1, 10, 20], mode="spike", train_fraction=0.8)
# default psi adaptation band
DEFAULT_ADAPTATION = dict(state_low=0.1, state_high=0.9, psi_step=2.0, max_rounds=16)

# largest prediction step accepted by the configuration
MAX_STEP = 20
# minimum number of regression points left after washout and step shift
MIN_TRAIN_POINTS = 10

# MAPE near-zero target guard
MAPE_EPS = 1e-8

# spectral radius solver
RADIUS_TOL = 1e-9
RADIUS_MAX_ITER = 10_000
# matrices up to this size are solved densely
DENSE_RADIUS_LIMIT = 1000
# leading eigenvalues requested from the iterative solver
RADIUS_ARNOLDI_K = 6
# tolerance below which a random internal matrix is treated as all-zero
DEGENERATE_RADIUS = 1e-12
# redraws of a degenerate internal matrix before giving up
MAX_WEIGHT_RETRIES = 8

# relative tolerance for the ridge normal-equation residual
RIDGE_RESIDUAL_TOL = 1e-8

# Mackey-Glass recursion
MACKEY_GLASS = dict(a=0.2, b=0.1, power=10, delay=17, history=1.2, jitter=0.1, transient=300)
# NARMA10 recursion
NARMA10 = dict(order=10, alpha=0.3, beta=0.05, gamma=1.5, delta=0.1, warm_start=0.1, input_high=0.5, bound=10.0)
# sum of two incommensurate sinusoids
SINE_MIX = dict(period=25.0, ratio=2**0.5, second_amplitude=0.5, noise=0.05)

# version tag of the model container
MODEL_FORMAT_VERSION = 1
