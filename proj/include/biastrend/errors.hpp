#pragma once

#include <stdexcept>
#include <string>

namespace biastrend {

// Base classes map onto CLI exit codes: UsageError -> 1, DataError -> 2,
// anything else -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

#define BIASTREND_DATA_ERROR(Name)        \
    struct Name : DataError {             \
        using DataError::DataError;       \
    }

// corpus pipeline
BIASTREND_DATA_ERROR(NoSessionMarkers);
BIASTREND_DATA_ERROR(EmptySlice);
BIASTREND_DATA_ERROR(IoError);
BIASTREND_DATA_ERROR(ManifestError);

// co-occurrence / graphs
BIASTREND_DATA_ERROR(EmptyVocabulary);
BIASTREND_DATA_ERROR(DegenerateCounts);

// embeddings
BIASTREND_DATA_ERROR(FormatError);
BIASTREND_DATA_ERROR(DuplicateTerm);
BIASTREND_DATA_ERROR(ZeroVector);
BIASTREND_DATA_ERROR(OovTerm);

// bias specifications
BIASTREND_DATA_ERROR(SpecFormatError);
BIASTREND_DATA_ERROR(EmptySetError);
BIASTREND_DATA_ERROR(EmptyAfterResolution);
BIASTREND_DATA_ERROR(InsufficientCoverage);

// measures
BIASTREND_DATA_ERROR(DegenerateDistribution);
BIASTREND_DATA_ERROR(ConflictingLabel);
BIASTREND_DATA_ERROR(SolverDivergence);
BIASTREND_DATA_ERROR(SingularSystem);
BIASTREND_DATA_ERROR(TooFewTargets);
BIASTREND_DATA_ERROR(ZeroPooledVariance);

// statistics
BIASTREND_DATA_ERROR(LengthMismatch);
BIASTREND_DATA_ERROR(ConstantSequence);
BIASTREND_DATA_ERROR(TooFewValues);

#undef BIASTREND_DATA_ERROR

} // namespace biastrend
