// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cad {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad or inconsistent user-facing parameters.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Loss of positive definiteness, vanishing denominators and similar.
// The experiment layer treats this as a trial abort.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cad
