"""Joint network and source coding toolkit over GF(2) and GF(2^m)."""

from .bitmatrix import BitMatrix, pack_rows, unpack_rows
from .errors import (
    FieldTooSmallError,
    InfeasibleRateError,
    JnscError,
    NetworkFormatError,
    RankDeficientError,
    SingularMatrixError,
    TooLargeError,
    ValidationError,
)
from .gf import (
    MIN_IRREDUCIBLE,
    GfField,
    GfMatrix,
    binary_expand,
    bits_to_symbols,
    is_irreducible,
    symbols_to_bits,
)
from .harness import (
    ExperimentConfig,
    compare_runs,
    load_config,
    parse_config,
    read_csv,
    run,
    write_csv,
)
from .matio import load_matrix, matrix_from_text, matrix_to_text, save_matrix
from .netcode import (
    BroadcastCode,
    NetworkSpec,
    build_broadcast_code,
    butterfly,
    load_network,
    maxflow,
    network_from_text,
    network_to_text,
    random_dag,
    received_bits_via_network,
    save_network,
    transfer_bits,
)
from .rdcodec import (
    EncodeResult,
    LinearCode,
    nearest_codeword_exhaustive,
    rd_encode,
    rd_encode_multi,
)
from .sparsify import (
    RatePoint,
    SparsifyResult,
    binary_entropy,
    density_achievable,
    distortion_rate,
    gauss_baseline,
    independent_column_transform,
    min_unsatisfy_randomized,
    sparsify,
    sparsify_exhaustive,
)
from .syndrome import (
    BerResult,
    BscModel,
    JointCodeDesign,
    TerminalDesign,
    bp_decode,
    count_four_cycles,
    design_joint_code,
    entry_zero_prob,
    network_syndrome,
    sample_sparse_H,
    structured_ldpc,
    syndrome_encode,
    wyner_pipeline,
)

__version__ = "0.1.0"
