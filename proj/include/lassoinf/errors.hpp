#pragma once

#include <stdexcept>
#include <string>

namespace lassoinf {

// Argument outside the operation's domain (bad index, empty sample, q outside (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Caller violated a structural precondition, e.g. non-unit-norm design columns.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, long deficient_columns)
        : std::runtime_error(what), deficient_columns_(deficient_columns) {}

    long deficient_columns() const noexcept { return deficient_columns_; }

private:
    long deficient_columns_;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double kkt_gap)
        : std::runtime_error(what), kkt_gap_(kkt_gap) {}

    double kkt_gap() const noexcept { return kkt_gap_; }

private:
    double kkt_gap_;
};

// Monte Carlo estimate could not be formed (e.g. no accepted draws).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lassoinf
