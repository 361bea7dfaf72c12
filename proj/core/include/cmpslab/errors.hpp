#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cmpslab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// matrix kernel
struct ShapeMismatch : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };
struct NoNullVector : Error { using Error::Error; };
struct DegenerateNullSpace : Error { using Error::Error; };

// cMPS states
struct InvalidAnsatz : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct NonPositiveSteadyState : Error { using Error::Error; };
struct NegativeObservable : Error { using Error::Error; };

// variational engine
struct LayoutMismatch : Error { using Error::Error; };
struct InfeasiblePoint : Error { using Error::Error; };
struct AllRestartsInfeasible : Error { using Error::Error; };

// luttinger extraction
struct OutOfHull : Error { using Error::Error; };
struct NegativeCompressibility : Error { using Error::Error; };
struct UnequalFilling : Error { using Error::Error; };
struct InvalidSurface : Error { using Error::Error; };

class SweepPointFailed : public Error {
public:
    SweepPointFailed(const std::string& what, std::vector<double> failed)
        : Error(what), failed_(std::move(failed)) {}
    const std::vector<double>& failed_points() const noexcept { return failed_; }

private:
    std::vector<double> failed_;
};

// bethe oracle
struct NoConvergence : Error { using Error::Error; };

// runner
struct ConfigError : Error { using Error::Error; };
struct CsvError : Error { using Error::Error; };
struct RunError : Error { using Error::Error; };

}  // namespace cmpslab
