#pragma once

#include <stdexcept>
#include <string>

namespace dde {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A time or offset fell outside the domain of a history or trajectory.
struct OutOfDomain : Error {
    explicit OutOfDomain(const std::string& msg) : Error(msg) {}
};

/// Two segments were combined that do not share span and grid.
struct SpanMismatch : Error {
    explicit SpanMismatch(const std::string& msg) : Error(msg) {}
};

/// A prolongation was anchored at the wrong base time.
struct AnchorMismatch : Error {
    explicit AnchorMismatch(const std::string& msg) : Error(msg) {}
};

/// The functional left its domain while integrating; `where` is the first bad node time.
struct DomainExit : Error {
    double where;
    explicit DomainExit(double u, const std::string& msg) : Error(msg), where(u) {}
};

/// A delay functional produced a lag outside the past interval.
struct DelayExceedsInterval : Error {
    explicit DelayExceedsInterval(const std::string& msg) : Error(msg) {}
};

/// A functional builder was used with an incompatible past interval.
struct IntervalMismatch : Error {
    explicit IntervalMismatch(const std::string& msg) : Error(msg) {}
};

/// Every sampled pair was filtered out of an estimate.
struct NoValidPairs : Error {
    explicit NoValidPairs(const std::string& msg) : Error(msg) {}
};

/// Requested oracle method does not apply to the model kind.
struct MethodInapplicable : Error {
    explicit MethodInapplicable(const std::string& msg) : Error(msg) {}
};

} // namespace dde
