#include "contourlab/agent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "contourlab/checkpoint.hpp"
#include "contourlab/errors.hpp"

namespace contourlab {

void DdpgConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("agent config: " + m); };
  if (hidden == 0) fail("hidden width must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(actor_lr >= 0.0 && critic_lr >= 0.0)) fail("learning rates must be non-negative");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau must lie in (0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (!(noise_sigma >= 0.0 && noise_decay >= 0.0 && noise_decay <= 1.0)) fail("bad exploration noise settings");
  if (batch_size == 0 || buffer_capacity < batch_size) fail("need 0 < batch_size <= buffer_capacity");
}

#define CONTOURLAB_DDPG_FIELDS(X)                                                                   \
  X(hidden) X(gamma) X(actor_lr) X(critic_lr) X(tau) X(momentum) X(noise_sigma) X(noise_decay)     \
  X(batch_size) X(buffer_capacity)

void to_json(nlohmann::json& j, const DdpgConfig& c) {
  j = nlohmann::json::object();
#define X(name) j[#name] = c.name;
  CONTOURLAB_DDPG_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, DdpgConfig& c) {
  if (!j.is_object()) throw FormatError("agent config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
#define X(name)                                                                  \
  if (key == #name) {                                                            \
    try {                                                                        \
      value.get_to(c.name);                                                      \
    } catch (const nlohmann::json::exception& e) {                               \
      throw FormatError(fmt::format("agent key '{}': {}", key, e.what()));       \
    }                                                                            \
    known = true;                                                                \
  }
    CONTOURLAB_DDPG_FIELDS(X)
#undef X
    if (!known) throw FormatError(fmt::format("unknown agent key '{}'", key));
  }
}

Eigen::VectorXd encode_observation(const Observation& obs, const ScenarioConfig& config) {
  const auto expected = static_cast<Eigen::Index>(2 + config.observed_rows());
  if (obs.rows.rows() != expected) {
    throw InvalidArgument(fmt::format("observation has {} rows, scenario expects {}", obs.rows.rows(), expected));
  }
  const double half_w = 0.5 * config.arena_width;
  const double half_l = 0.5 * config.arena_length;
  const double range = config.sense_range;
  const double speed = config.uav_speed;
  const double px = obs.rows(0, 0);
  const double py = obs.rows(0, 1);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(expected * 4);
  const Vec2 own(obs.rows(0, 2), obs.rows(0, 3));
  // Relative quantities are expressed in the UAV's heading frame.
  const double heading = std::atan2(own.y(), own.x());
  const double c = std::cos(heading), s = std::sin(heading);
  auto put = [&](Eigen::Index at, double x, double y, double scale) {
    f[at] = (c * x + s * y) / scale;
    f[at + 1] = (-s * x + c * y) / scale;
  };

  f[0] = (px - half_w) / half_w;
  f[1] = (py - half_l) / half_l;
  f[2] = own.x() / speed;
  f[3] = own.y() / speed;
  put(4, obs.rows(1, 0) - px, obs.rows(1, 1) - py, range);
  put(6, obs.rows(1, 2), obs.rows(1, 3), speed);
  for (std::size_t k = 0; k < obs.mask.size(); ++k) {
    if (!obs.mask[k]) continue;
    const auto r = static_cast<Eigen::Index>(2 + k);
    // Direction times closeness, so a row fades to zero (the masked value) at
    // the edge of the sensor range.
    const Vec2 rel(obs.rows(r, 0) - px, obs.rows(r, 1) - py);
    const double dist = rel.norm();
    const double close = std::max(0.0, 1.0 - dist / range);
    const Vec2 dir = dist > 0.0 ? Vec2(rel / dist) : Vec2(0.0, 0.0);
    put(4 * r, close * dir.x(), close * dir.y(), 1.0);
    put(4 * r + 2, close * (obs.rows(r, 2) - own.x()), close * (obs.rows(r, 3) - own.y()), speed);
  }
  return f;
}

Action act(const PolicyNet& policy, const Eigen::VectorXd& obs, double noise_scale, std::mt19937_64& rng) {
  if (!obs.allFinite()) throw NumericError("policy input is not finite");
  double a = policy.forward(obs)(0);
  if (noise_scale > 0.0) a += std::normal_distribution<double>(0.0, noise_scale)(rng);
  return Action{std::clamp(a, -PolicyNet::kActionScale, PolicyNet::kActionScale)};
}

Eigen::RowVectorXd td_targets(const Batch& batch, const PolicyNet& target_policy, const ValueNet& target_value,
                              double gamma) {
  const Eigen::RowVectorXd next_a = target_policy.forward(batch.next_obs);
  const Eigen::RowVectorXd next_q = target_value.forward(batch.next_obs, next_a);
  return batch.rewards.array() + gamma * (1.0 - batch.done.array()) * next_q.array();
}

ValueLoss value_loss_gradient(const ValueNet& value, const Batch& batch, const Eigen::RowVectorXd& targets) {
  if (targets.size() != batch.actions.size()) throw InvalidArgument("TD targets and batch are misaligned");
  ValueNet::Cache cache;
  const Eigen::RowVectorXd q = value.forward(batch.obs, batch.actions, cache);
  const Eigen::RowVectorXd diff = q - targets;
  const double n = static_cast<double>(diff.size());
  ValueLoss out;
  out.loss = diff.squaredNorm() / n;
  const Eigen::RowVectorXd d_q = (2.0 / n) * diff;
  value.backward(batch.obs, batch.actions, cache, d_q, &out.grad);
  return out;
}

double update_value(ValueNet& value, Momentum<ValueNet>& optimizer, const Batch& batch,
                    const Eigen::RowVectorXd& targets, double lr) {
  ValueLoss l = value_loss_gradient(value, batch, targets);
  if (!std::isfinite(l.loss)) throw NumericError("critic loss diverged");
  optimizer.descend(value, l.grad, lr);
  return l.loss;
}

PolicyObjective policy_objective_gradient(const PolicyNet& policy, const ValueNet& value, const Eigen::MatrixXd& obs) {
  PolicyNet::Cache pc;
  ValueNet::Cache vc;
  const Eigen::RowVectorXd a = policy.forward(obs, pc);
  const Eigen::RowVectorXd q = value.forward(obs, a, vc);
  const double n = static_cast<double>(q.size());
  PolicyObjective out;
  out.objective = q.sum() / n;
  const Eigen::RowVectorXd d_q = Eigen::RowVectorXd::Constant(q.size(), 1.0 / n);
  const Eigen::RowVectorXd d_a = value.backward(obs, a, vc, d_q, nullptr);
  out.grad = policy.backward(obs, pc, d_a);
  return out;
}

double update_policy(PolicyNet& policy, Momentum<PolicyNet>& optimizer, const ValueNet& value, const Batch& batch,
                     double lr) {
  if (batch.size() == 0) throw InvalidArgument("policy update needs a non-empty batch");
  PolicyObjective o = policy_objective_gradient(policy, value, batch.obs);
  if (!std::isfinite(o.objective)) throw NumericError("actor objective diverged");
  // Ascent on the objective is descent on its negation.
  o.grad.visit([](double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = -p[i];
  });
  optimizer.descend(policy, o.grad, lr);
  return o.objective;
}

// ---------------------------------------------------------------------------

DdpgAgent::DdpgAgent(std::size_t obs_dim, const DdpgConfig& config, std::uint64_t seed)
    : config_(config),
      actor_(obs_dim, config.hidden),
      critic_(obs_dim, config.hidden),
      replay_(obs_dim, config.buffer_capacity),
      rng_(seed),
      noise_scale_(config.noise_sigma) {
  config_.validate();
  actor_.init_uniform(rng_);
  critic_.init_uniform(rng_);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = Momentum<PolicyNet>(actor_, config_.momentum);
  critic_opt_ = Momentum<ValueNet>(critic_, config_.momentum);
}

Action DdpgAgent::act(const Eigen::VectorXd& obs, bool explore) {
  return contourlab::act(actor_, obs, explore ? noise_scale_ : 0.0, rng_);
}

double DdpgAgent::q_value(const Eigen::VectorXd& obs, double action) const {
  Eigen::RowVectorXd a(1);
  a(0) = action;
  return critic_.forward(obs, a)(0);
}

void DdpgAgent::remember(const Eigen::VectorXd& obs, double action, double reward, const Eigen::VectorXd& next_obs,
                         bool done) {
  replay_.push(obs, action, reward, next_obs, done);
}

LearnStats DdpgAgent::learn() {
  LearnStats s;
  if (replay_.size() < config_.batch_size) return s;
  const Batch batch = replay_.sample(config_.batch_size, rng_);
  const Eigen::RowVectorXd y = td_targets(batch, target_actor_, target_critic_, config_.gamma);
  s.critic_loss = update_value(critic_, critic_opt_, batch, y, config_.critic_lr);
  s.actor_objective = update_policy(actor_, actor_opt_, critic_, batch, config_.actor_lr);
  soft_update(target_actor_, actor_, config_.tau);
  soft_update(target_critic_, critic_, config_.tau);
  return s;
}

namespace {

template <ParameterSet Net>
void write_net(BinaryWriter& out, const Net& net) {
  out.u64(parameter_count(net));
  net.visit([&](const double* p, std::size_t n) { out.doubles(p, n); });
}

template <ParameterSet Net>
void read_net(BinaryReader& in, Net& net) {
  const std::uint64_t n = in.u64();
  if (n != parameter_count(net)) {
    throw FormatError(fmt::format("checkpoint network has {} parameters, expected {}", n, parameter_count(net)));
  }
  net.visit([&](double* p, std::size_t size) { in.doubles(p, size); });
}

template <ParameterSet Net>
bool same_bits(const Net& a, const Net& b) {
  const auto fa = flatten_parameters(a);
  const auto fb = flatten_parameters(b);
  return fa.size() == fb.size() && std::memcmp(fa.data(), fb.data(), fa.size() * sizeof(double)) == 0;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

}  // namespace

void DdpgAgent::save(BinaryWriter& out) const {
  out.tag("AGNT");
  out.u64(actor_.obs_dim());
  out.u64(config_.hidden);
  out.f64(config_.gamma);
  out.f64(config_.actor_lr);
  out.f64(config_.critic_lr);
  out.f64(config_.tau);
  out.f64(config_.momentum);
  out.f64(config_.noise_sigma);
  out.f64(config_.noise_decay);
  out.u64(config_.batch_size);
  out.u64(config_.buffer_capacity);
  out.f64(noise_scale_);
  out.rng(rng_);
  write_net(out, actor_);
  write_net(out, target_actor_);
  write_net(out, critic_);
  write_net(out, target_critic_);
  write_net(out, actor_opt_.velocity());
  write_net(out, critic_opt_.velocity());

  out.tag("RPLY");
  const auto used = static_cast<Eigen::Index>(replay_.size());
  const ReplayBuffer& r = replay_;
  out.u64(replay_.size());
  out.u64(replay_.cursor());
  out.matrix(r.obs_storage().leftCols(used));
  out.matrix(r.next_obs_storage().leftCols(used));
  out.row(r.action_storage().leftCols(used));
  out.row(r.reward_storage().leftCols(used));
  out.row(r.done_storage().leftCols(used));
}

DdpgAgent DdpgAgent::load(BinaryReader& in) {
  in.tag("AGNT");
  DdpgAgent a;
  const auto obs_dim = static_cast<std::size_t>(in.u64());
  a.config_.hidden = in.u64();
  a.config_.gamma = in.f64();
  a.config_.actor_lr = in.f64();
  a.config_.critic_lr = in.f64();
  a.config_.tau = in.f64();
  a.config_.momentum = in.f64();
  a.config_.noise_sigma = in.f64();
  a.config_.noise_decay = in.f64();
  a.config_.batch_size = in.u64();
  a.config_.buffer_capacity = in.u64();
  a.config_.validate();
  a.noise_scale_ = in.f64();
  in.rng(a.rng_);
  a.actor_ = PolicyNet(obs_dim, a.config_.hidden);
  a.target_actor_ = a.actor_;
  a.critic_ = ValueNet(obs_dim, a.config_.hidden);
  a.target_critic_ = a.critic_;
  read_net(in, a.actor_);
  read_net(in, a.target_actor_);
  read_net(in, a.critic_);
  read_net(in, a.target_critic_);
  a.actor_opt_ = Momentum<PolicyNet>(a.actor_, a.config_.momentum);
  a.critic_opt_ = Momentum<ValueNet>(a.critic_, a.config_.momentum);
  read_net(in, a.actor_opt_.velocity());
  read_net(in, a.critic_opt_.velocity());

  in.tag("RPLY");
  a.replay_ = ReplayBuffer(obs_dim, a.config_.buffer_capacity);
  const auto size = static_cast<std::size_t>(in.u64());
  const auto cursor = static_cast<std::size_t>(in.u64());
  a.replay_.restore_cursor(size, cursor);
  const auto used = static_cast<Eigen::Index>(size);
  const Eigen::MatrixXd obs = in.matrix();
  const Eigen::MatrixXd next = in.matrix();
  const Eigen::RowVectorXd act = in.row();
  const Eigen::RowVectorXd rew = in.row();
  const Eigen::RowVectorXd done = in.row();
  if (obs.rows() != static_cast<Eigen::Index>(obs_dim) || obs.cols() != used || next.cols() != used ||
      act.size() != used || rew.size() != used || done.size() != used) {
    throw FormatError("checkpoint replay section has inconsistent sizes");
  }
  a.replay_.obs_storage().leftCols(used) = obs;
  a.replay_.next_obs_storage().leftCols(used) = next;
  a.replay_.action_storage().leftCols(used) = act;
  a.replay_.reward_storage().leftCols(used) = rew;
  a.replay_.done_storage().leftCols(used) = done;
  return a;
}

bool DdpgAgent::identical(const DdpgAgent& o) const {
  const ReplayBuffer& r1 = replay_;
  const ReplayBuffer& r2 = o.replay_;
  return same_bits(actor_, o.actor_) && same_bits(target_actor_, o.target_actor_) && same_bits(critic_, o.critic_) &&
         same_bits(target_critic_, o.target_critic_) && same_bits(actor_opt_.velocity(), o.actor_opt_.velocity()) &&
         same_bits(critic_opt_.velocity(), o.critic_opt_.velocity()) && rng_ == o.rng_ &&
         std::bit_cast<std::uint64_t>(noise_scale_) == std::bit_cast<std::uint64_t>(o.noise_scale_) &&
         replay_.size() == o.replay_.size() && replay_.cursor() == o.replay_.cursor() &&
         same_bits(r1.obs_storage(), r2.obs_storage()) && same_bits(r1.next_obs_storage(), r2.next_obs_storage()) &&
         same_bits(r1.action_storage(), r2.action_storage()) && same_bits(r1.reward_storage(), r2.reward_storage()) &&
         same_bits(r1.done_storage(), r2.done_storage());
}

}  // namespace contourlab
