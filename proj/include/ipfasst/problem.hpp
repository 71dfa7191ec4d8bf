#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "ipfasst/heat.hpp"
#include "ipfasst/multigrid.hpp"

namespace ipfasst {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Linear right-hand side f(y) = A y together with the implicit sub-step
/// solver for (I - shift*A) x = rhs. Sweeps only talk to this interface.
class ImplicitProblem {
 public:
  virtual ~ImplicitProblem() = default;

  virtual std::size_t size() const = 0;
  virtual void apply(std::span<const double> u, std::span<double> out) const = 0;

  /// `x` holds the warm start on entry and the approximate solution on exit.
  virtual SolveResult solve_shifted(double shift, std::span<const double> rhs,
                                    std::span<double> x) = 0;

  /// Nonzeros of A, for direct reference solves.
  virtual Triplets triplets() const = 0;

  virtual std::unique_ptr<ImplicitProblem> clone() const = 0;

  long vcycles() const { return vcycles_; }
  void reset_vcycles() { vcycles_ = 0; }

 protected:
  long vcycles_ = 0;
};

/// Heat operator with multigrid sub-step solves under a fixed policy.
class HeatProblem final : public ImplicitProblem {
 public:
  HeatProblem(const HeatOperator& op, const MgConfig& cfg, const SolvePolicy& policy);

  const HeatOperator& op() const { return op_; }
  const Grid& grid() const { return op_.grid(); }
  const SolvePolicy& policy() const { return policy_; }

  std::size_t size() const override { return op_.grid().size(); }
  void apply(std::span<const double> u, std::span<double> out) const override {
    op_.apply(u, out);
  }
  SolveResult solve_shifted(double shift, std::span<const double> rhs,
                            std::span<double> x) override;
  Triplets triplets() const override;
  std::unique_ptr<ImplicitProblem> clone() const override;

 private:
  HeatOperator op_;
  MgConfig cfg_;
  SolvePolicy policy_;
  Multigrid mg_;
};

/// Scalar test equation y' = lambda y with exact sub-step solves.
class ScalarProblem final : public ImplicitProblem {
 public:
  explicit ScalarProblem(double lambda) : lambda_(lambda) {}

  double lambda() const { return lambda_; }
  std::size_t size() const override { return 1; }
  void apply(std::span<const double> u, std::span<double> out) const override {
    out[0] = lambda_ * u[0];
  }
  SolveResult solve_shifted(double shift, std::span<const double> rhs,
                            std::span<double> x) override;
  Triplets triplets() const override { return {{0, 0, lambda_}}; }
  std::unique_ptr<ImplicitProblem> clone() const override {
    return std::make_unique<ScalarProblem>(*this);
  }

 private:
  double lambda_;
};

Triplets heat_triplets(const HeatOperator& op);

}  // namespace ipfasst
