#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "contourlab/geometry.hpp"

namespace contourlab {

// Networks operate on column batches: an observation batch is (obs_dim x B),
// an action batch is (1 x B).

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  Linear() = default;
  Linear(std::size_t in, std::size_t out);

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  void init_uniform(std::mt19937_64& rng);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  template <class F>
  void visit(F&& f) {
    f(weight.data(), static_cast<std::size_t>(weight.size()));
    f(bias.data(), static_cast<std::size_t>(bias.size()));
  }
  template <class F>
  void visit(F&& f) const {
    f(static_cast<const double*>(weight.data()), static_cast<std::size_t>(weight.size()));
    f(static_cast<const double*>(bias.data()), static_cast<std::size_t>(bias.size()));
  }
};

/// obs -> hidden (ReLU) -> 1 (tanh), scaled to [-pi/4, pi/4].
class PolicyNet {
 public:
  static constexpr double kActionScale = kPi / 4.0;

  struct Cache {
    Eigen::MatrixXd pre_hidden;  // hidden x B
    Eigen::MatrixXd hidden;
    Eigen::RowVectorXd squashed;  // tanh(pre_out)
  };

  PolicyNet() = default;
  PolicyNet(std::size_t obs_dim, std::size_t hidden);

  void init_uniform(std::mt19937_64& rng);
  std::size_t obs_dim() const { return static_cast<std::size_t>(hidden_.weight.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(hidden_.weight.rows()); }

  Eigen::RowVectorXd forward(const Eigen::MatrixXd& obs) const;
  Eigen::RowVectorXd forward(const Eigen::MatrixXd& obs, Cache& cache) const;
  /// Parameter gradient given dL/da for every column of the batch.
  PolicyNet backward(const Eigen::MatrixXd& obs, const Cache& cache, const Eigen::RowVectorXd& d_action) const;

  template <class F>
  void visit(F&& f) {
    hidden_.visit(f);
    output_.visit(f);
  }
  template <class F>
  void visit(F&& f) const {
    hidden_.visit(f);
    output_.visit(f);
  }

  Linear& hidden_layer() { return hidden_; }
  Linear& output_layer() { return output_; }
  const Linear& hidden_layer() const { return hidden_; }
  const Linear& output_layer() const { return output_; }

 private:
  Linear hidden_;
  Linear output_;
};

/// Q(o, a): obs -> hidden (ReLU) and a -> hidden (ReLU), concatenated,
/// -> hidden (ReLU) -> 1 (linear).
class ValueNet {
 public:
  struct Cache {
    Eigen::MatrixXd pre_obs, obs_h;   // hidden x B
    Eigen::MatrixXd pre_act, act_h;   // hidden x B
    Eigen::MatrixXd joint;            // 2 hidden x B
    Eigen::MatrixXd pre_merge, merge_h;
  };

  ValueNet() = default;
  ValueNet(std::size_t obs_dim, std::size_t hidden);

  void init_uniform(std::mt19937_64& rng);
  std::size_t obs_dim() const { return static_cast<std::size_t>(obs_branch_.weight.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(obs_branch_.weight.rows()); }

  Eigen::RowVectorXd forward(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& action) const;
  Eigen::RowVectorXd forward(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& action, Cache& cache) const;

  /// Backpropagates dL/dQ. Fills the parameter gradient when `grad` is non-null
  /// and returns dL/da per column.
  Eigen::RowVectorXd backward(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& action, const Cache& cache,
                              const Eigen::RowVectorXd& d_q, ValueNet* grad) const;

  template <class F>
  void visit(F&& f) {
    obs_branch_.visit(f);
    act_branch_.visit(f);
    merge_.visit(f);
    output_.visit(f);
  }
  template <class F>
  void visit(F&& f) const {
    obs_branch_.visit(f);
    act_branch_.visit(f);
    merge_.visit(f);
    output_.visit(f);
  }

  Linear& obs_branch() { return obs_branch_; }
  Linear& action_branch() { return act_branch_; }
  Linear& merge_layer() { return merge_; }
  Linear& output_layer() { return output_; }

 private:
  Linear obs_branch_;
  Linear act_branch_;
  Linear merge_;
  Linear output_;
};

[[noreturn]] void throw_shape_mismatch();

template <class T>
concept ParameterSet = requires(T& t, const T& ct) {
  t.visit([](double*, std::size_t) {});
  ct.visit([](const double*, std::size_t) {});
};

template <ParameterSet Net>
std::size_t parameter_count(const Net& net) {
  std::size_t n = 0;
  net.visit([&](const double*, std::size_t size) { n += size; });
  return n;
}

template <ParameterSet Net>
std::vector<double> flatten_parameters(const Net& net) {
  std::vector<double> out;
  out.reserve(parameter_count(net));
  net.visit([&](const double* p, std::size_t size) { out.insert(out.end(), p, p + size); });
  return out;
}

template <ParameterSet Net>
void assign_parameters(Net& net, const std::vector<double>& flat);

/// Copy of `net` with every parameter set to zero.
template <ParameterSet Net>
Net zeros_like(const Net& net) {
  Net out = net;
  out.visit([](double* p, std::size_t size) { std::fill(p, p + size, 0.0); });
  return out;
}

/// Visits matching parameter blocks of two networks of identical shape.
/// Throws InvalidArgument on a shape mismatch.
template <ParameterSet Net, class F>
void zip_parameters(Net& a, const Net& b, F&& f) {
  std::vector<std::pair<const double*, std::size_t>> src;
  std::vector<std::pair<double*, std::size_t>> dst;
  b.visit([&](const double* p, std::size_t size) { src.emplace_back(p, size); });
  a.visit([&](double* p, std::size_t size) { dst.emplace_back(p, size); });
  if (src.size() != dst.size()) throw_shape_mismatch();
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (src[k].second != dst[k].second) throw_shape_mismatch();
  }
  for (std::size_t k = 0; k < src.size(); ++k) f(dst[k].first, src[k].first, dst[k].second);
}

/// target <- tau * online + (1 - tau) * target, elementwise. Requires 0 < tau <= 1.
template <ParameterSet Net>
void soft_update(Net& target, const Net& online, double tau);

/// Heavy-ball gradient descent: velocity <- momentum * velocity + grad;
/// params <- params - lr * velocity.
template <ParameterSet Net>
class Momentum {
 public:
  Momentum() = default;
  explicit Momentum(const Net& like, double momentum = 0.9) : velocity_(zeros_like(like)), momentum_(momentum) {}

  void descend(Net& params, const Net& grad, double lr);
  const Net& velocity() const { return velocity_; }
  Net& velocity() { return velocity_; }
  double momentum() const { return momentum_; }

 private:
  Net velocity_;
  double momentum_ = 0.9;
};

extern template void soft_update<PolicyNet>(PolicyNet&, const PolicyNet&, double);
extern template void soft_update<ValueNet>(ValueNet&, const ValueNet&, double);
extern template void assign_parameters<PolicyNet>(PolicyNet&, const std::vector<double>&);
extern template void assign_parameters<ValueNet>(ValueNet&, const std::vector<double>&);
extern template class Momentum<PolicyNet>;
extern template class Momentum<ValueNet>;

}  // namespace contourlab
