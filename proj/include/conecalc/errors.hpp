#pragma once

#include <stdexcept>
#include <string>

namespace conecalc {

/// Base class for all conecalc errors. The `kind` groups errors the way the
/// CLI maps them to exit codes: bad input (1), violated numerical
/// precondition (2), failed convergence (3).
class Error : public std::runtime_error {
public:
    enum class Kind { Input = 1, Precondition = 2, Convergence = 3 };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

#define CONECALC_DEFINE_ERROR(Name, KindValue)                                         \
    class Name : public Error {                                                        \
    public:                                                                            \
        explicit Name(const std::string& what) : Error(Error::Kind::KindValue, what) {} \
    }

// Input-shaped problems.
CONECALC_DEFINE_ERROR(InvalidArgument, Input);
CONECALC_DEFINE_ERROR(GridMismatch, Input);
CONECALC_DEFINE_ERROR(BaseMismatch, Input);
CONECALC_DEFINE_ERROR(StripMismatch, Input);
CONECALC_DEFINE_ERROR(DepthExceedsTaylor, Input);
CONECALC_DEFINE_ERROR(NotPolynomialInSecondVariable, Input);
CONECALC_DEFINE_ERROR(ParseError, Input);
CONECALC_DEFINE_ERROR(SchemaError, Input);

// Numerical preconditions.
CONECALC_DEFINE_ERROR(WindowTruncation, Precondition);
CONECALC_DEFINE_ERROR(PoleOnWeightLine, Precondition);
CONECALC_DEFINE_ERROR(EvalAtPole, Precondition);
CONECALC_DEFINE_ERROR(ContaminatedDisk, Precondition);
CONECALC_DEFINE_ERROR(NotElliptic, Precondition);
CONECALC_DEFINE_ERROR(PoleOnStripBoundary, Precondition);
CONECALC_DEFINE_ERROR(NotInvertibleOnLine, Precondition);
CONECALC_DEFINE_ERROR(ConormalNotBijective, Precondition);
CONECALC_DEFINE_ERROR(InadmissibleWeight, Precondition);
CONECALC_DEFINE_ERROR(PoleTooCloseToTargetLine, Precondition);
CONECALC_DEFINE_ERROR(IntermediateLineHitsRoot, Precondition);

// Convergence failures.
CONECALC_DEFINE_ERROR(ContourThroughZero, Convergence);
CONECALC_DEFINE_ERROR(ResidualTooLarge, Convergence);
CONECALC_DEFINE_ERROR(NoConvergence, Convergence);

#undef CONECALC_DEFINE_ERROR

} // namespace conecalc
