"""Post-processing chain for Gaussian-modulated CV-QKD with homodyne detection."""

# Errors
from .errors import (
	CodeParseError,
	ConfigError,
	CvqkdError,
	DegenerateRegressorError,
	DomainError,
	EstimationFailure,
	FrameFormatError,
	InsufficientDataError,
	NoFeasibleCodeError,
	RateAdaptationError,
	SingularElementError,
	UnphysicalStateError,
)

# Physical model
from .model import (
	CovarianceMatrix,
	DeviceUncertainty,
	ProtocolParams,
	beamsplitter,
	db_to_transmittance,
	g_function,
	homodyne_condition,
	is_physical,
	km_to_db,
	snr,
	symplectic_eigenvalues,
)

# Simulation
from .frames import PulseFrame, load_bits, load_frames, save_bits, save_frames
from .simulator import (
	Fractions,
	ModulationGrid,
	SiftResult,
	channel_and_detect,
	generate_modulation,
	sift_and_partition,
)

# Estimation and key rates
from .estimation import (
	ChannelEstimate,
	WorstCaseBounds,
	device_corners,
	estimate_channel,
	estimate_shot_noise,
	expected_estimate,
	normalize,
	sample_estimate,
	worst_case_bounds,
)
from .keyrate import (
	CodeDescriptor,
	FiniteSizeParams,
	delta_n,
	holevo_bound,
	mutual_information,
	optimal_va,
	rate_asymptotic,
	rate_finite,
	select_code_and_va,
	xi_max_positive,
)

# Reconciliation and privacy amplification
from .mdr import MdrBlock, Octonion, mdr_encode, mdr_llrs, octonion_inverse, octonion_mul
from .privamp import ToeplitzSeed, compute_final_length, toeplitz_hash, toeplitz_multiply, write_key

# Orchestration
from .config import SessionConfig
from .pipeline import SessionReport, noise_sweep, rate_sweep, run_session
from .reports import read_csv, write_csv

__all__ = [
	# Errors
	"CvqkdError",
	"DomainError",
	"UnphysicalStateError",
	"SingularElementError",
	"InsufficientDataError",
	"DegenerateRegressorError",
	"EstimationFailure",
	"NoFeasibleCodeError",
	"RateAdaptationError",
	"CodeParseError",
	"FrameFormatError",
	"ConfigError",
	# Physical model
	"ProtocolParams",
	"DeviceUncertainty",
	"CovarianceMatrix",
	"beamsplitter",
	"km_to_db",
	"db_to_transmittance",
	"snr",
	"g_function",
	"symplectic_eigenvalues",
	"homodyne_condition",
	"is_physical",
	# Simulation
	"PulseFrame",
	"save_frames",
	"load_frames",
	"save_bits",
	"load_bits",
	"ModulationGrid",
	"Fractions",
	"SiftResult",
	"generate_modulation",
	"channel_and_detect",
	"sift_and_partition",
	# Estimation and key rates
	"ChannelEstimate",
	"WorstCaseBounds",
	"estimate_shot_noise",
	"normalize",
	"estimate_channel",
	"expected_estimate",
	"sample_estimate",
	"worst_case_bounds",
	"device_corners",
	"FiniteSizeParams",
	"CodeDescriptor",
	"mutual_information",
	"holevo_bound",
	"rate_asymptotic",
	"rate_finite",
	"delta_n",
	"optimal_va",
	"xi_max_positive",
	"select_code_and_va",
	# Reconciliation and privacy amplification
	"Octonion",
	"octonion_mul",
	"octonion_inverse",
	"mdr_encode",
	"mdr_llrs",
	"MdrBlock",
	"ToeplitzSeed",
	"compute_final_length",
	"toeplitz_hash",
	"toeplitz_multiply",
	"write_key",
	# Orchestration
	"SessionConfig",
	"SessionReport",
	"run_session",
	"rate_sweep",
	"noise_sweep",
	"write_csv",
	"read_csv",
]
