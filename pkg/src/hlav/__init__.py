"""Prime pair correlations, Hardy-Littlewood constants and averaged checks."""
from .averages import (
    ShiftSet,
    StatementId,
    Thresholds,
    VerificationReport,
    conjecture2_scan,
    lemma1_margin,
    lemma2_margin,
    verify_ktuple_weighted,
    verify_long_average,
    verify_stride,
    verify_unweighted_short,
    verify_weighted_short,
    verify_window_average,
)
from .correlation import (
    ArithmeticFunction,
    CorrelationSums,
    PairCountTable,
    TupleSpec,
    correlation_sums,
    pair_counts,
    stride_pair_counts,
    tuple_count,
)
from .sieve import PrimeBitmap, SieveConfig, build_sieve, is_prime, prime_count_range
from .singular import (
    SingularValue,
    gallagher_average,
    ktuple_gallagher_average,
    nu,
    pair_constant,
    tuple_constant,
    twin_half_constant,
    weighted_singular_average,
)
from .store import load_bitmap, save_bitmap

__version__ = "0.1.0"
