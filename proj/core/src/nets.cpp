#include "contourlab/nets.hpp"

#include <cmath>

#include <fmt/format.h>

#include "contourlab/errors.hpp"

namespace contourlab {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& z) { return (z.array() > 0.0).cast<double>().matrix(); }

void check_batch(const Eigen::MatrixXd& obs, std::size_t obs_dim, const char* who) {
  if (static_cast<std::size_t>(obs.rows()) != obs_dim) {
    throw InvalidArgument(fmt::format("{}: observation has {} rows, network expects {}", who, obs.rows(), obs_dim));
  }
}

}  // namespace

void throw_shape_mismatch() { throw InvalidArgument("network parameter shapes do not match"); }

Linear::Linear(std::size_t in, std::size_t out)
    : weight(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))),
      bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))) {}

void Linear::init_uniform(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(weight.cols()));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < weight.size(); ++i) weight.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < bias.size(); ++i) bias[i] = u(rng);
}

Eigen::MatrixXd Linear::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = weight * x;
  z.colwise() += bias;
  return z;
}

// ---------------------------------------------------------------------------

PolicyNet::PolicyNet(std::size_t obs_dim, std::size_t hidden) : hidden_(obs_dim, hidden), output_(hidden, 1) {}

void PolicyNet::init_uniform(std::mt19937_64& rng) {
  hidden_.init_uniform(rng);
  output_.init_uniform(rng);
}

Eigen::RowVectorXd PolicyNet::forward(const Eigen::MatrixXd& obs) const {
  Cache cache;
  return forward(obs, cache);
}

Eigen::RowVectorXd PolicyNet::forward(const Eigen::MatrixXd& obs, Cache& cache) const {
  check_batch(obs, obs_dim(), "policy");
  cache.pre_hidden = hidden_.forward(obs);
  cache.hidden = relu(cache.pre_hidden);
  cache.squashed = output_.forward(cache.hidden).row(0).array().tanh().matrix();
  return kActionScale * cache.squashed;
}

PolicyNet PolicyNet::backward(const Eigen::MatrixXd& obs, const Cache& cache,
                              const Eigen::RowVectorXd& d_action) const {
  PolicyNet grad(obs_dim(), hidden_dim());
  // a = k tanh(u)  =>  da/du = k (1 - tanh^2)
  const Eigen::RowVectorXd d_pre_out =
      (d_action.array() * kActionScale * (1.0 - cache.squashed.array().square())).matrix();
  grad.output_.weight = d_pre_out * cache.hidden.transpose();
  grad.output_.bias(0) = d_pre_out.sum();
  const Eigen::MatrixXd d_hidden = output_.weight.transpose() * d_pre_out;
  const Eigen::MatrixXd d_pre_hidden = d_hidden.cwiseProduct(relu_mask(cache.pre_hidden));
  grad.hidden_.weight = d_pre_hidden * obs.transpose();
  grad.hidden_.bias = d_pre_hidden.rowwise().sum();
  return grad;
}

// ---------------------------------------------------------------------------

ValueNet::ValueNet(std::size_t obs_dim, std::size_t hidden)
    : obs_branch_(obs_dim, hidden), act_branch_(1, hidden), merge_(2 * hidden, hidden), output_(hidden, 1) {}

void ValueNet::init_uniform(std::mt19937_64& rng) {
  obs_branch_.init_uniform(rng);
  act_branch_.init_uniform(rng);
  merge_.init_uniform(rng);
  output_.init_uniform(rng);
}

Eigen::RowVectorXd ValueNet::forward(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& action) const {
  Cache cache;
  return forward(obs, action, cache);
}

Eigen::RowVectorXd ValueNet::forward(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& action,
                                     Cache& cache) const {
  check_batch(obs, obs_dim(), "value");
  if (action.cols() != obs.cols()) throw InvalidArgument("value: action and observation batch sizes differ");
  const Eigen::Index h = static_cast<Eigen::Index>(hidden_dim());
  cache.pre_obs = obs_branch_.forward(obs);
  cache.obs_h = relu(cache.pre_obs);
  cache.pre_act = act_branch_.forward(action);
  cache.act_h = relu(cache.pre_act);
  cache.joint.resize(2 * h, obs.cols());
  cache.joint.topRows(h) = cache.obs_h;
  cache.joint.bottomRows(h) = cache.act_h;
  cache.pre_merge = merge_.forward(cache.joint);
  cache.merge_h = relu(cache.pre_merge);
  return output_.forward(cache.merge_h).row(0);
}

Eigen::RowVectorXd ValueNet::backward(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& action,
                                      const Cache& cache, const Eigen::RowVectorXd& d_q, ValueNet* grad) const {
  const Eigen::Index h = static_cast<Eigen::Index>(hidden_dim());
  const Eigen::MatrixXd d_merge_h = output_.weight.transpose() * d_q;
  const Eigen::MatrixXd d_pre_merge = d_merge_h.cwiseProduct(relu_mask(cache.pre_merge));
  const Eigen::MatrixXd d_joint = merge_.weight.transpose() * d_pre_merge;
  const Eigen::MatrixXd d_pre_act = d_joint.bottomRows(h).cwiseProduct(relu_mask(cache.pre_act));

  if (grad != nullptr) {
    *grad = ValueNet(obs_dim(), hidden_dim());
    grad->output_.weight = d_q * cache.merge_h.transpose();
    grad->output_.bias(0) = d_q.sum();
    grad->merge_.weight = d_pre_merge * cache.joint.transpose();
    grad->merge_.bias = d_pre_merge.rowwise().sum();
    const Eigen::MatrixXd d_pre_obs = d_joint.topRows(h).cwiseProduct(relu_mask(cache.pre_obs));
    grad->obs_branch_.weight = d_pre_obs * obs.transpose();
    grad->obs_branch_.bias = d_pre_obs.rowwise().sum();
    grad->act_branch_.weight = d_pre_act * action.transpose();
    grad->act_branch_.bias = d_pre_act.rowwise().sum();
  }
  return act_branch_.weight.transpose() * d_pre_act;
}

// ---------------------------------------------------------------------------

template <ParameterSet Net>
void assign_parameters(Net& net, const std::vector<double>& flat) {
  if (flat.size() != parameter_count(net)) throw_shape_mismatch();
  std::size_t offset = 0;
  net.visit([&](double* p, std::size_t size) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + size), p);
    offset += size;
  });
}

template <ParameterSet Net>
void soft_update(Net& target, const Net& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument(fmt::format("soft update needs 0 < tau <= 1 (got {})", tau));
  zip_parameters(target, online, [tau](double* t, const double* o, std::size_t n) {
    if (tau == 1.0) {
      std::copy(o, o + n, t);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) t[i] = tau * o[i] + (1.0 - tau) * t[i];
  });
}

template <ParameterSet Net>
void Momentum<Net>::descend(Net& params, const Net& grad, double lr) {
  zip_parameters(velocity_, grad, [this](double* v, const double* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] = momentum_ * v[i] + g[i];
  });
  zip_parameters(params, velocity_, [lr](double* p, const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] -= lr * v[i];
  });
}

template void soft_update<PolicyNet>(PolicyNet&, const PolicyNet&, double);
template void soft_update<ValueNet>(ValueNet&, const ValueNet&, double);
template void assign_parameters<PolicyNet>(PolicyNet&, const std::vector<double>&);
template void assign_parameters<ValueNet>(ValueNet&, const std::vector<double>&);
template class Momentum<PolicyNet>;
template class Momentum<ValueNet>;

}  // namespace contourlab
