#ifndef EPQP_COMMON_HPP
#define EPQP_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace epqp {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Violated precondition or ill-formed input (CLI exit code 2).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical-quality failure: tail mass, lost positivity, non-convergence (CLI exit code 3).
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

// Thread budget for internal parallelism; reads EPQP_THREADS once, defaults to 1.
int thread_budget();

}  // namespace epqp

#endif
