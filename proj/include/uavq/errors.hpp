#pragma once

#include <stdexcept>
#include <string>

namespace uavq {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical routine could not reach the requested accuracy.
/// Carries the best estimate obtained so far.
class AccuracyError : public std::runtime_error {
public:
  AccuracyError(const std::string &what, double best_estimate, double error_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double best_estimate_;
  double error_estimate_;
};

/// Queue is outside its stability region (offered load >= 1).
/// `deficit` is how far the service rate falls short of the arrival rate
/// (packets/second); `node` names the node when known.
class StabilityError : public std::runtime_error {
public:
  StabilityError(const std::string &what, double deficit, std::string node = {})
      : std::runtime_error(what), deficit_(deficit), node_(std::move(node)) {}

  double deficit() const noexcept { return deficit_; }
  const std::string &node() const noexcept { return node_; }

private:
  double deficit_;
  std::string node_;
};

/// Scenario or configuration failed validation.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(const std::string &field, const std::string &constraint)
      : std::invalid_argument(field + ": " + constraint), field_(field) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

} // namespace uavq
