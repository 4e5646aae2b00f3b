"""temcodec: spike-train codec for periodic shift-invariant signal spaces.

Encode signals into firing times with crossing or integrate-and-fire time
encoders, reconstruct them exactly with direct or iterative frame
decoders, and study robustness to timing quantization.
"""

from .errors import (
    BadPartitionError,
    DecodeFailedError,
    DegenerateFrameError,
    EmptyTrainError,
    NoSpikesError,
    NonConvergentError,
    NonConvergentTailError,
    NotContractiveError,
    NotDenseEnoughError,
    OutOfTableError,
    PeriodTooSmallError,
    RankDeficientError,
    SingularGramError,
    SpaceMismatchError,
    SpikeBudgetExceededError,
    TemcodecError,
    UnboundedDerivativeProfileError,
    UnsupportedGeneratorError,
    UnsupportedOrderError,
)
from .generators import (
    DensityBound,
    FrameBounds,
    GeneratorSpec,
    SpectralProfile,
    density_bound,
    eval_generator,
    frame_bounds,
    generator_fourier,
    spectral_profile,
)
from .spaces import (
    DualGenerator,
    GramMatrix,
    PeriodicSignal,
    PeriodicSpace,
    SignalNorms,
    dual_generator,
    eval_signal,
    gram_circulant,
    inner_product,
    kernel_eval,
    norms,
    project_piecewise_constant,
)
from .encoders import (
    ConstantTest,
    CosineTest,
    EncoderConfig,
    RampTest,
    SpikeTrain,
    density_report,
    encode_crossing,
    encode_if,
    sample_amplitudes,
    thin_to_density,
    voronoi,
)
from .decoders import (
    DecodeResult,
    LinearSystem,
    build_system,
    decode_frame_iterative,
    decode_if,
    decode_pinv,
    decode_pv_iterative,
    operator_norm_estimate,
)
from .noiselab import (
    ExperimentSummary,
    NoiseExperimentConfig,
    TrialRecord,
    quantize_train,
    run_experiment,
    run_trial,
)

__version__ = "0.1.0"
