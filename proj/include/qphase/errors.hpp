#pragma once

#include <stdexcept>
#include <string>

namespace qphase {

enum class ErrorKind { config, domain, numeric, consistency };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};

struct ConsistencyError : Error {
    explicit ConsistencyError(const std::string& w) : Error(ErrorKind::consistency, w) {}
};

// Quadrature that could not reach its tolerance; carries the best estimate.
struct QuadratureError : NumericError {
    QuadratureError(const std::string& w, double best, double err)
        : NumericError(w), best_estimate(best), error_estimate(err) {}
    double best_estimate;
    double error_estimate;
};

struct BracketError : DomainError {
    explicit BracketError(const std::string& w) : DomainError(w) {}
};

struct StiffnessError : NumericError {
    explicit StiffnessError(const std::string& w) : NumericError(w) {}
};

struct BoundaryContamination : NumericError {
    BoundaryContamination(const std::string& w, double absorbed)
        : NumericError(w), absorbed_probability(absorbed) {}
    double absorbed_probability;
};

struct InfeasibleError : DomainError {
    explicit InfeasibleError(const std::string& w) : DomainError(w) {}
};

struct AdiabaticityError : ConsistencyError {
    AdiabaticityError(const std::string& w, double r) : ConsistencyError(w), r_final(r) {}
    double r_final;
};

} // namespace qphase
