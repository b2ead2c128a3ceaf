#pragma once

// Aerial platform deployment as a learning problem. The environment wraps
// bcd_solve: a step displaces the platform inside the service area, channels
// are re-synthesized at the new placement under the episode's realization
// seed, and the reward is the change of the certified robust secrecy rate.
// The agent is a plain DDPG pair of dense networks with hand-written
// forward/backward passes and Adam, so every gradient used in training can
// be checked against finite differences. A grid search over the area with a
// shared channel seed serves as the deployment baseline.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "arisjam/channel.hpp"
#include "arisjam/eval.hpp"
#include "arisjam/inner.hpp"
#include "arisjam/rng.hpp"
#include "arisjam/scenario.hpp"

namespace arisjam {

// rng streams for the trainer; scenario streams stop at kStreamEval
enum : std::uint64_t {
  kStreamNetInit = 16,
  kStreamEpisodeStart = 17,
  kStreamExplore = 18,
  kStreamBatch = 19,
  kStreamEpisodeChannels = 20,
};

// ---------------------------------------------------------------------------
// dense networks

// fully connected net with tanh hidden layers; the output stage is linear for
// the critic and out_scale * tanh for the actor, so action bounds hold by
// construction rather than by clipping
struct Mlp {
  std::vector<Eigen::MatrixXd> w;  // w[l] maps layer l to layer l+1
  std::vector<Eigen::VectorXd> b;
  bool saturate_out = false;
  double out_scale = 1.0;

  int in_dim() const { return w.empty() ? 0 : static_cast<int>(w.front().cols()); }
  int out_dim() const { return w.empty() ? 0 : static_cast<int>(w.back().rows()); }
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

// layer activations kept from a forward pass, one column per sample;
// acts[0] is the input and acts[w.size()] the output
struct MlpTrace {
  std::vector<Eigen::MatrixXd> acts;
};

inline Mlp make_mlp(const std::vector<int>& dims, bool saturate_out, double out_scale,
                    std::mt19937_64& rng) {
  if (dims.size() < 2) throw std::invalid_argument("mlp needs at least an input and an output");
  Mlp net;
  net.saturate_out = saturate_out;
  net.out_scale = out_scale;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    // fan-balanced uniform init keeps tanh preactivations in the linear range
    double lim = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
    std::uniform_real_distribution<double> u(-lim, lim);
    Eigen::MatrixXd wl(dims[l + 1], dims[l]);
    for (Eigen::Index j = 0; j < wl.cols(); ++j)
      for (Eigen::Index i = 0; i < wl.rows(); ++i) wl(i, j) = u(rng);
    net.w.push_back(std::move(wl));
    net.b.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
  }
  return net;
}

inline Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                                   MlpTrace* trace = nullptr) {
  if (x.rows() != net.in_dim()) throw std::invalid_argument("mlp input dimension mismatch");
  Eigen::MatrixXd a = x;
  if (trace) {
    trace->acts.clear();
    trace->acts.push_back(a);
  }
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    Eigen::MatrixXd z = (net.w[l] * a).colwise() + net.b[l];
    if (l + 1 < net.w.size()) {
      a = z.array().tanh();
    } else if (net.saturate_out) {
      a = net.out_scale * z.array().tanh();
    } else {
      a = std::move(z);
    }
    if (trace) trace->acts.push_back(a);
  }
  return a;
}

// backpropagates d(loss)/d(output) into parameter gradients; grad_in, when
// requested, receives d(loss)/d(input) so the critic's action sensitivity can
// be chained into the actor
inline MlpGrads mlp_backward(const Mlp& net, const MlpTrace& trace,
                             const Eigen::MatrixXd& grad_out, Eigen::MatrixXd* grad_in = nullptr) {
  const std::size_t nl = net.w.size();
  MlpGrads g;
  g.w.resize(nl);
  g.b.resize(nl);

  Eigen::MatrixXd dz;
  const Eigen::MatrixXd& y = trace.acts[nl];
  if (net.saturate_out) {
    // y = s tanh(z), so dy/dz = s - y^2 / s
    dz = grad_out.array() * (net.out_scale - y.array().square() / net.out_scale);
  } else {
    dz = grad_out;
  }

  for (std::size_t l = nl; l-- > 0;) {
    g.w[l] = dz * trace.acts[l].transpose();
    g.b[l] = dz.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd da = net.w[l].transpose() * dz;
      dz = da.array() * (1.0 - trace.acts[l].array().square());
    } else if (grad_in) {
      *grad_in = net.w[0].transpose() * dz;
    }
  }
  return g;
}

inline int param_count(const Mlp& net) {
  int n = 0;
  for (std::size_t l = 0; l < net.w.size(); ++l)
    n += static_cast<int>(net.w[l].size() + net.b[l].size());
  return n;
}

inline Eigen::VectorXd flatten_params(const Mlp& net) {
  Eigen::VectorXd out(param_count(net));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    out.segment(at, net.w[l].size()) = Eigen::Map<const Eigen::VectorXd>(net.w[l].data(), net.w[l].size());
    at += net.w[l].size();
    out.segment(at, net.b[l].size()) = net.b[l];
    at += net.b[l].size();
  }
  return out;
}

inline Eigen::VectorXd flatten_grads(const MlpGrads& g) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < g.w.size(); ++l) n += g.w[l].size() + g.b[l].size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < g.w.size(); ++l) {
    out.segment(at, g.w[l].size()) = Eigen::Map<const Eigen::VectorXd>(g.w[l].data(), g.w[l].size());
    at += g.w[l].size();
    out.segment(at, g.b[l].size()) = g.b[l];
    at += g.b[l].size();
  }
  return out;
}

inline void assign_params(Mlp& net, const Eigen::VectorXd& flat) {
  if (flat.size() != param_count(net)) throw std::invalid_argument("parameter vector size mismatch");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    Eigen::Map<Eigen::VectorXd>(net.w[l].data(), net.w[l].size()) = flat.segment(at, net.w[l].size());
    at += net.w[l].size();
    net.b[l] = flat.segment(at, net.b[l].size());
    at += net.b[l].size();
  }
}

struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m, v;
  long steps = 0;
};

inline Adam make_adam(int n, double lr) {
  Adam a;
  a.lr = lr;
  a.m = Eigen::VectorXd::Zero(n);
  a.v = Eigen::VectorXd::Zero(n);
  return a;
}

// one descent step on the flattened parameters; callers that want ascent
// negate the gradient first
inline void adam_step(Adam& opt, Mlp& net, const MlpGrads& grads) {
  Eigen::VectorXd g = flatten_grads(grads);
  if (g.size() != opt.m.size()) throw std::invalid_argument("optimizer state does not match net");
  ++opt.steps;
  opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * g;
  opt.v = opt.beta2 * opt.v.array() + (1.0 - opt.beta2) * g.array().square();
  double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.steps));
  double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.steps));
  Eigen::VectorXd theta = flatten_params(net);
  theta.array() -= opt.lr * (opt.m.array() / c1) / ((opt.v.array() / c2).sqrt() + opt.eps);
  assign_params(net, theta);
}

inline void soft_update(Mlp& target, const Mlp& eval, double rho) {
  if (target.w.size() != eval.w.size()) throw std::invalid_argument("soft update shape mismatch");
  for (std::size_t l = 0; l < target.w.size(); ++l) {
    if (target.w[l].rows() != eval.w[l].rows() || target.w[l].cols() != eval.w[l].cols())
      throw std::invalid_argument("soft update shape mismatch");
    target.w[l] = rho * eval.w[l] + (1.0 - rho) * target.w[l];
    target.b[l] = rho * eval.b[l] + (1.0 - rho) * target.b[l];
  }
}

// ---------------------------------------------------------------------------
// replay buffer

struct Transition {
  Eigen::VectorXd s;
  Eigen::Vector2d a;
  double r = 0.0;
  Eigen::VectorXd s2;
};

// ring buffer; once full the oldest transition is overwritten
struct ReplayBuffer {
  std::size_t capacity = 20000;
  std::vector<Transition> data;
  std::size_t next = 0;
};

inline void push(ReplayBuffer& buf, Transition t) {
  if (buf.data.size() < buf.capacity) {
    buf.data.push_back(std::move(t));
  } else {
    buf.data[buf.next] = std::move(t);
    buf.next = (buf.next + 1) % buf.capacity;
  }
}

// uniform without replacement within one batch
inline std::vector<int> sample_indices(const ReplayBuffer& buf, int batch, std::mt19937_64& rng) {
  int n = static_cast<int>(buf.data.size());
  if (batch > n) throw std::invalid_argument("batch larger than buffer");
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  // partial Fisher-Yates: the first `batch` slots end up a uniform subset
  for (int i = 0; i < batch; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(batch);
  return all;
}

// ---------------------------------------------------------------------------
// state features

// channels enter the state raw up to two fixed per-scenario scales (source
// side and jammer side), frozen from a probe synthesis at the area center so
// the features stay O(1) without hiding placement-dependent gain variation
struct FeatureScale {
  double sig = 1.0;
  double jam = 1.0;
};

inline FeatureScale probe_feature_scale(const Scenario& s) {
  Placement center{0.5 * (s.area_xmin + s.area_xmax), 0.5 * (s.area_ymin + s.area_ymax)};
  ChannelSet probe = make_channels(s, center, s.rng_seed);
  detail::ScaledContext cx = detail::make_scaled(s, probe);
  return {cx.sig_scale, cx.jam_scale};
}

inline int state_dim(const Scenario& s) {
  int per_link = s.num_aris_elements + s.num_ris_elements + s.num_jammer_antennas +
                 s.num_ris_elements * s.num_jammer_antennas;
  return 2 + 2 * per_link + s.num_eves * (2 * per_link + 4);
}

struct MdpState {
  Placement placement;
  Eigen::VectorXd features;  // fixed length per scenario; includes the placement
};

namespace detail {

inline void put_complex(Eigen::VectorXd& out, Eigen::Index& at, const Eigen::MatrixXcd& m,
                        double scale) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out[at++] = m(i, j).real() / scale;
      out[at++] = m(i, j).imag() / scale;
    }
}

}  // namespace detail

inline MdpState make_state(const Scenario& s, const Placement& p, const ChannelSet& c,
                           const FeatureScale& fs) {
  MdpState st;
  st.placement = p;
  st.features.resize(state_dim(s));
  Eigen::Index at = 0;
  // placement mapped to [-1, 1] over the service area
  st.features[at++] = 2.0 * (p.x - s.area_xmin) / (s.area_xmax - s.area_xmin) - 1.0;
  st.features[at++] = 2.0 * (p.y - s.area_ymin) / (s.area_ymax - s.area_ymin) - 1.0;
  detail::put_complex(st.features, at, c.h_sad, fs.sig);
  detail::put_complex(st.features, at, c.h_srd, fs.sig);
  detail::put_complex(st.features, at, c.h_jd, fs.jam);
  detail::put_complex(st.features, at, c.h_jrd, fs.jam);
  for (const auto& e : c.eves) {
    detail::put_complex(st.features, at, e.h_sak.est, fs.sig);
    detail::put_complex(st.features, at, e.h_srk.est, fs.sig);
    detail::put_complex(st.features, at, e.h_jk.est, fs.jam);
    detail::put_complex(st.features, at, e.h_jrk.est, fs.jam);
    st.features[at++] = e.h_sak.radius / fs.sig;
    st.features[at++] = e.h_srk.radius / fs.sig;
    st.features[at++] = e.h_jk.radius / fs.jam;
    st.features[at++] = e.h_jrk.radius / fs.jam;
  }
  if (at != st.features.size()) throw std::logic_error("state layout mismatch");
  if (!st.features.allFinite()) throw std::runtime_error("non-finite state feature");
  return st;
}

// ---------------------------------------------------------------------------
// deployment environment

// reduced inner budget for per-step rewards: warm starts keep the strategy
// near-optimal while the platform moves a few meters, so a few sweeps with
// loose solver gaps suffice; the tangent refreshes only need an ascent
// direction, not a polished certificate. reported rates at the end of a run
// use the full budget instead
inline InnerOptions training_inner_defaults() {
  InnerOptions o;
  o.max_outer = 1;
  o.outer_tol = 1e-3;
  o.max_block_iters = 1;
  o.t_tol = 1e-3;
  o.phase_tol = 1e-3;
  o.slack_tol = 1e-3;
  o.max_restarts = 1;
  o.jam_quiet_start = false;
  o.conic.gap_abs = 1e-6;
  o.conic.gap_rel = 1e-4;
  o.conic.gap_accept = 1e-3;
  o.conic.max_newton_per_center = 120;
  o.conic.max_total_newton = 4000;
  return o;
}

// budget for standalone rate evaluations at a fresh placement, as in the
// grid-search baseline: cold starts get more sweeps, more tangent refreshes
// and the second jamming start back
inline InnerOptions deploy_eval_defaults() {
  InnerOptions o = training_inner_defaults();
  o.max_outer = 4;
  o.max_block_iters = 3;
  o.jam_quiet_start = true;
  return o;
}

struct EnvOptions {
  double a_max = 10.0;  // displacement bound per epoch, meters
  InnerOptions inner = training_inner_defaults();
};

struct DeployEnv {
  Scenario scen;
  EnvOptions opt;
  FeatureScale scale;
  std::uint64_t episode_seed = 0;
  Placement pos;
  ChannelSet chan;
  Strategy strat;  // carried across steps as the warm start
  double rate_bits = 0.0;
  MdpState state;
  int solver_failures = 0;
};

inline DeployEnv make_env(const Scenario& s, const EnvOptions& opt = {}) {
  DeployEnv env;
  env.scen = s;
  env.opt = opt;
  env.scale = probe_feature_scale(s);
  return env;
}

namespace detail {

inline double clamp_to(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// the jammer rides on the platform, so a move rotates the destination-null
// subspace the carried covariance was blasting into; left alone the stale
// blast drowns the destination and the block is stuck on that plateau.
// projecting the covariance onto the new null space keeps it in the quiet
// basin at full power and makes a single warm ascent enough
inline void realign_jam_cov(const ChannelSet& c, Strategy& st) {
  Eigen::Index m = st.z.rows();
  if (m < 2) return;
  double tr = st.z.trace().real();
  if (!(tr > 0.0)) return;
  Eigen::VectorXcd w = c.h_jd + c.h_jrd.adjoint() * st.theta_r;
  double wn = w.squaredNorm();
  if (!(wn > 0.0)) return;
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(m, m) - (w * w.adjoint()) / wn;
  Eigen::MatrixXcd z = proj * st.z * proj;
  z = 0.5 * (z + z.adjoint());
  double ztr = z.trace().real();
  if (ztr > 1e-12 * tr) {
    st.z = (tr / ztr) * z + 1e-9 * tr * Eigen::MatrixXcd::Identity(m, m);
  } else {
    // covariance was entirely inside the blasted direction; restart tiny
    st.z = (1e-6 * tr / static_cast<double>(m)) * Eigen::MatrixXcd::Identity(m, m);
  }
}

inline void solve_at(DeployEnv& env, const Strategy* warm) {
  env.chan = make_channels(env.scen, env.pos, env.episode_seed);
  InnerOptions io = env.opt.inner;
  Strategy seeded;
  if (warm) {
    seeded = *warm;
    realign_jam_cov(env.chan, seeded);
    warm = &seeded;
  } else {
    // a cold start must be able to leave the drowned full-power plateau even
    // when the per-step budget skips the second jamming start
    io.jam_quiet_start = true;
  }
  InnerResult r = bcd_solve(env.scen, env.chan, io, warm);
  // block failures inside bcd_solve still yield the best feasible iterate;
  // they only count against the metrics
  if (!r.note.empty()) ++env.solver_failures;
  env.strat = r.strategy;
  env.rate_bits = r.robust_rate_bits;
  env.state = make_state(env.scen, env.pos, env.chan, env.scale);
}

}  // namespace detail

inline void env_reset(DeployEnv& env, const Placement& start, std::uint64_t episode_seed) {
  env.episode_seed = episode_seed;
  env.pos.x = detail::clamp_to(start.x, env.scen.area_xmin, env.scen.area_xmax);
  env.pos.y = detail::clamp_to(start.y, env.scen.area_ymin, env.scen.area_ymax);
  detail::solve_at(env, nullptr);
}

// applies the clipped displacement, re-synthesizes channels at the moved
// placement under the episode seed and returns the rate change as the reward
inline double env_step(DeployEnv& env, const Eigen::Vector2d& action) {
  double ax = detail::clamp_to(action.x(), -env.opt.a_max, env.opt.a_max);
  double ay = detail::clamp_to(action.y(), -env.opt.a_max, env.opt.a_max);
  env.pos.x = detail::clamp_to(env.pos.x + ax, env.scen.area_xmin, env.scen.area_xmax);
  env.pos.y = detail::clamp_to(env.pos.y + ay, env.scen.area_ymin, env.scen.area_ymax);
  double before = env.rate_bits;
  Strategy warm = env.strat;
  detail::solve_at(env, &warm);
  return env.rate_bits - before;
}

// ---------------------------------------------------------------------------
// agent

struct DdpgConfig {
  int hidden = 128;       // two hidden layers of this width in both nets
  double lr = 1e-4;       // both optimizers
  double discount = 0.95;
  double soft_rho = 0.005;
  int buffer_capacity = 20000;
  int batch = 256;
  int warm_up = 5000;        // transitions before updates start; shortened for small runs
  double a_max = 10.0;       // meters per epoch
  double sigma_start = 0.3;  // exploration stddev as a fraction of a_max
  double sigma_end = 0.02;   // linear decay across episodes
};

struct DdpgAgent {
  DdpgConfig cfg;
  int state_dim = 0;
  FeatureScale scale;
  Mlp actor, critic;
  Mlp actor_t, critic_t;  // targets, softly tracking the eval nets
  Adam actor_opt, critic_opt;
};

inline DdpgAgent make_agent(const Scenario& s, const DdpgConfig& cfg, std::uint64_t seed) {
  DdpgAgent ag;
  ag.cfg = cfg;
  ag.state_dim = state_dim(s);
  ag.scale = probe_feature_scale(s);
  auto rng = make_rng(seed, kStreamNetInit);
  std::vector<int> adims{ag.state_dim, cfg.hidden, cfg.hidden, 2};
  std::vector<int> qdims{ag.state_dim + 2, cfg.hidden, cfg.hidden, 1};
  ag.actor = make_mlp(adims, true, cfg.a_max, rng);
  ag.critic = make_mlp(qdims, false, 1.0, rng);
  ag.actor_t = ag.actor;
  ag.critic_t = ag.critic;
  ag.actor_opt = make_adam(param_count(ag.actor), cfg.lr);
  ag.critic_opt = make_adam(param_count(ag.critic), cfg.lr);
  return ag;
}

inline Eigen::Vector2d act_greedy(const DdpgAgent& ag, const Eigen::VectorXd& features) {
  return mlp_forward(ag.actor, features).col(0);
}

struct Batch {
  Eigen::MatrixXd s;   // state_dim x D
  Eigen::MatrixXd a;   // 2 x D
  Eigen::VectorXd r;   // D
  Eigen::MatrixXd s2;  // state_dim x D
};

inline Batch gather_batch(const ReplayBuffer& buf, const std::vector<int>& idx) {
  Batch b;
  int d = static_cast<int>(idx.size());
  int sd = static_cast<int>(buf.data[idx[0]].s.size());
  b.s.resize(sd, d);
  b.a.resize(2, d);
  b.r.resize(d);
  b.s2.resize(sd, d);
  for (int i = 0; i < d; ++i) {
    const Transition& t = buf.data[idx[i]];
    b.s.col(i) = t.s;
    b.a.col(i) = t.a;
    b.r[i] = t.r;
    b.s2.col(i) = t.s2;
  }
  return b;
}

namespace detail {

inline Eigen::MatrixXd stack_sa(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd sa(s.rows() + a.rows(), s.cols());
  sa.topRows(s.rows()) = s;
  sa.bottomRows(a.rows()) = a;
  return sa;
}

}  // namespace detail

// bootstrapped targets r + discount * Q'(s', mu'(s')), held constant during
// the critic step
inline Eigen::VectorXd critic_targets(const DdpgAgent& ag, const Batch& b) {
  Eigen::MatrixXd a2 = mlp_forward(ag.actor_t, b.s2);
  Eigen::MatrixXd q2 = mlp_forward(ag.critic_t, detail::stack_sa(b.s2, a2));
  return b.r + ag.cfg.discount * q2.row(0).transpose();
}

inline double critic_loss(const DdpgAgent& ag, const Batch& b) {
  Eigen::VectorXd zeta = critic_targets(ag, b);
  Eigen::MatrixXd q = mlp_forward(ag.critic, detail::stack_sa(b.s, b.a));
  return (zeta - q.row(0).transpose()).squaredNorm() / static_cast<double>(b.r.size());
}

// gradient of critic_loss in the critic parameters
inline MlpGrads critic_gradient(const DdpgAgent& ag, const Batch& b) {
  double d = static_cast<double>(b.r.size());
  Eigen::VectorXd zeta = critic_targets(ag, b);
  MlpTrace trace;
  Eigen::MatrixXd q = mlp_forward(ag.critic, detail::stack_sa(b.s, b.a), &trace);
  Eigen::MatrixXd gout = (2.0 / d) * (q.row(0).transpose() - zeta).transpose();
  return mlp_backward(ag.critic, trace, gout);
}

// gradient of the batch objective (1/D) sum Q(s, mu(s)) in the actor
// parameters: the critic's action sensitivity chained through the actor
inline MlpGrads actor_gradient(const DdpgAgent& ag, const Batch& b) {
  double d = static_cast<double>(b.s.cols());
  MlpTrace atrace;
  Eigen::MatrixXd act = mlp_forward(ag.actor, b.s, &atrace);
  MlpTrace qtrace;
  mlp_forward(ag.critic, detail::stack_sa(b.s, act), &qtrace);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(1, b.s.cols(), 1.0 / d);
  Eigen::MatrixXd dq_din;
  mlp_backward(ag.critic, qtrace, ones, &dq_din);
  Eigen::MatrixXd dq_da = dq_din.bottomRows(2);
  return mlp_backward(ag.actor, atrace, dq_da);
}

// one critic descent step, one actor ascent step, then soft target updates
inline void ddpg_update(DdpgAgent& ag, const Batch& b) {
  adam_step(ag.critic_opt, ag.critic, critic_gradient(ag, b));
  MlpGrads ga = actor_gradient(ag, b);
  for (auto& gw : ga.w) gw = -gw;
  for (auto& gb : ga.b) gb = -gb;
  adam_step(ag.actor_opt, ag.actor, ga);
  soft_update(ag.actor_t, ag.actor, ag.cfg.soft_rho);
  soft_update(ag.critic_t, ag.critic, ag.cfg.soft_rho);
}

// ---------------------------------------------------------------------------
// training loop

struct EpisodeLog {
  double ret = 0.0;  // summed rewards, bits
  double final_rate_bits = 0.0;
  Placement final_pos;
  double sigma = 0.0;  // exploration stddev used, meters
  int solver_failures = 0;
};

struct TrainOptions {
  int episodes = 150;
  int epochs_per_episode = 50;
  DdpgConfig agent;
  EnvOptions env;
  std::uint64_t seed = 1;
  std::function<void(int, const EpisodeLog&)> on_episode;  // optional progress hook
};

struct TrainResult {
  DdpgAgent agent;
  std::vector<EpisodeLog> episodes;
  int updates = 0;
  int solver_failures = 0;
  bool diverged = false;
  std::string note;
};

inline TrainResult train_deploy(const Scenario& s, const TrainOptions& opt = {}) {
  TrainResult out;
  DdpgConfig cfg = opt.agent;
  // short runs would otherwise never leave warm-up; a fifth of the run is
  // still enough seeding for the first updates to see varied transitions
  long total = static_cast<long>(opt.episodes) * opt.epochs_per_episode;
  cfg.warm_up = static_cast<int>(std::min<long>(cfg.warm_up, std::max<long>(cfg.batch, total / 5)));

  out.agent = make_agent(s, cfg, opt.seed);
  EnvOptions env_opt = opt.env;
  env_opt.a_max = cfg.a_max;
  DeployEnv env = make_env(s, env_opt);

  ReplayBuffer buf;
  buf.capacity = static_cast<std::size_t>(cfg.buffer_capacity);
  auto start_rng = make_rng(opt.seed, kStreamEpisodeStart);
  auto noise_rng = make_rng(opt.seed, kStreamExplore);
  auto batch_rng = make_rng(opt.seed, kStreamBatch);
  std::uint64_t chan_base = derive_seed(opt.seed, kStreamEpisodeChannels);
  std::uniform_real_distribution<double> ux(s.area_xmin, s.area_xmax);
  std::uniform_real_distribution<double> uy(s.area_ymin, s.area_ymax);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int ep = 0; ep < opt.episodes; ++ep) {
    double frac = opt.episodes > 1 ? static_cast<double>(ep) / (opt.episodes - 1) : 0.0;
    double sigma = (cfg.sigma_start + (cfg.sigma_end - cfg.sigma_start) * frac) * cfg.a_max;

    Placement start{ux(start_rng), uy(start_rng)};
    int fail_before = env.solver_failures;
    env_reset(env, start, derive_seed(chan_base, static_cast<std::uint64_t>(ep)));

    EpisodeLog log;
    log.sigma = sigma;
    for (int epoch = 0; epoch < opt.epochs_per_episode; ++epoch) {
      Eigen::VectorXd s0 = env.state.features;
      Eigen::Vector2d a = act_greedy(out.agent, s0);
      a.x() = detail::clamp_to(a.x() + sigma * gauss(noise_rng), -cfg.a_max, cfg.a_max);
      a.y() = detail::clamp_to(a.y() + sigma * gauss(noise_rng), -cfg.a_max, cfg.a_max);
      double r = env_step(env, a);
      log.ret += r;
      push(buf, Transition{std::move(s0), a, r, env.state.features});
      if (static_cast<long>(buf.data.size()) >= cfg.warm_up &&
          static_cast<int>(buf.data.size()) >= cfg.batch) {
        Batch batch = gather_batch(buf, sample_indices(buf, cfg.batch, batch_rng));
        ddpg_update(out.agent, batch);
        ++out.updates;
      }
    }
    log.final_rate_bits = env.rate_bits;
    log.final_pos = env.pos;
    log.solver_failures = env.solver_failures - fail_before;
    out.episodes.push_back(log);
    if (opt.on_episode) opt.on_episode(ep, log);
    if (!std::isfinite(log.ret) || !std::isfinite(log.final_rate_bits)) {
      out.diverged = true;
      out.note = "non-finite episode statistics, training aborted";
      break;
    }
  }
  out.solver_failures = env.solver_failures;
  return out;
}

// deterministic rollout of the trained policy; stops early once the policy
// pins itself to a point
struct RolloutResult {
  Placement pos;
  double rate_bits = 0.0;  // under the environment's inner budget
  int steps = 0;
};

inline RolloutResult greedy_rollout(const DdpgAgent& ag, const Scenario& s,
                                    const Placement& start, int max_steps,
                                    std::uint64_t episode_seed, const EnvOptions& env_opt = {}) {
  EnvOptions eo = env_opt;
  eo.a_max = ag.cfg.a_max;
  DeployEnv env = make_env(s, eo);
  env_reset(env, start, episode_seed);
  RolloutResult out;
  for (int i = 0; i < max_steps; ++i) {
    Eigen::Vector2d a = act_greedy(ag, env.state.features);
    Placement before = env.pos;
    env_step(env, a);
    ++out.steps;
    if (std::hypot(env.pos.x - before.x, env.pos.y - before.y) < 1e-3) break;
  }
  out.pos = env.pos;
  out.rate_bits = env.rate_bits;
  return out;
}

// ---------------------------------------------------------------------------
// grid-search baseline

struct GridCell {
  Placement pos;
  double rate_bits = 0.0;
};

struct GridSearchResult {
  Placement best;
  double rate_bits = 0.0;
  std::vector<GridCell> cells;  // x fastest, then y, for heatmap dumps
};

// evaluates the robust rate over a uniform grid under one shared channel
// seed and returns the argmax; refining the step keeps earlier grid points,
// so the returned rate never drops when the finer step divides the coarser
inline GridSearchResult grid_search_deploy(const Scenario& s, double grid_step,
                                           std::uint64_t seed, const InnerOptions& inner = {},
                                           int workers = 1) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> xs, ys;
  for (double x = s.area_xmin; x <= s.area_xmax + 1e-9; x += grid_step) xs.push_back(x);
  for (double y = s.area_ymin; y <= s.area_ymax + 1e-9; y += grid_step) ys.push_back(y);

  GridSearchResult out;
  out.cells.resize(xs.size() * ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j)
    for (std::size_t i = 0; i < xs.size(); ++i)
      out.cells[j * xs.size() + i].pos = Placement{xs[i], ys[j]};

  auto eval_cell = [&](GridCell& cell) {
    ChannelSet c = make_channels(s, cell.pos, seed);
    cell.rate_bits = bcd_solve(s, c, inner).robust_rate_bits;
  };

  int nw = std::max(1, workers);
  if (nw == 1) {
    for (auto& cell : out.cells) eval_cell(cell);
  } else {
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
      for (std::size_t i = cursor.fetch_add(1); i < out.cells.size(); i = cursor.fetch_add(1))
        eval_cell(out.cells[i]);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // ties resolve to the lowest index so the result is scheduling-independent
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.cells.size(); ++i)
    if (out.cells[i].rate_bits > out.cells[best].rate_bits) best = i;
  out.best = out.cells[best].pos;
  out.rate_bits = out.cells[best].rate_bits;
  return out;
}

// ---------------------------------------------------------------------------
// checkpoints
//
// flat little-endian binary. layout:
//   bytes 0..7   magic "arisddpg"
//   u64          format version (1)
//   u64          tensor count
//   per tensor:  u64 rows, u64 cols, rows*cols f64 column-major
// tensor order: one meta column vector
//   [a_max, hidden, discount, soft_rho, sigma_start, sigma_end,
//    feature sig scale, feature jam scale, state dim]
// followed by weight/bias pairs per layer for actor, critic, target actor,
// target critic. optimizer state is not stored; a loaded agent starts Adam
// fresh if training resumes.

namespace detail {

inline void write_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

inline std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline void write_tensor(std::ostream& os, const Eigen::MatrixXd& m) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  write_u64(os, static_cast<std::uint64_t>(m.rows()));
  write_u64(os, static_cast<std::uint64_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double)) * m.size());
}

inline Eigen::MatrixXd read_tensor(std::istream& is) {
  std::uint64_t rows = read_u64(is);
  std::uint64_t cols = read_u64(is);
  if (!is || rows > (1u << 20) || cols > (1u << 20)) throw std::runtime_error("corrupt checkpoint tensor header");
  Eigen::MatrixXd m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double)) * m.size());
  if (!is) throw std::runtime_error("truncated checkpoint tensor");
  return m;
}

inline void write_net(std::ostream& os, const Mlp& net) {
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    write_tensor(os, net.w[l]);
    write_tensor(os, net.b[l]);
  }
}

inline Mlp read_net(std::istream& is, std::size_t layers, bool saturate, double out_scale) {
  Mlp net;
  net.saturate_out = saturate;
  net.out_scale = out_scale;
  for (std::size_t l = 0; l < layers; ++l) {
    net.w.push_back(read_tensor(is));
    net.b.push_back(read_tensor(is).col(0));
  }
  return net;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const DdpgAgent& ag) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  os.write("arisddpg", 8);
  detail::write_u64(os, 1);
  std::uint64_t layers = ag.actor.w.size();
  detail::write_u64(os, 1 + 8 * layers);
  Eigen::MatrixXd meta(9, 1);
  meta << ag.cfg.a_max, static_cast<double>(ag.cfg.hidden), ag.cfg.discount, ag.cfg.soft_rho,
      ag.cfg.sigma_start, ag.cfg.sigma_end, ag.scale.sig, ag.scale.jam,
      static_cast<double>(ag.state_dim);
  detail::write_tensor(os, meta);
  detail::write_net(os, ag.actor);
  detail::write_net(os, ag.critic);
  detail::write_net(os, ag.actor_t);
  detail::write_net(os, ag.critic_t);
  if (!os) throw std::runtime_error("short write on checkpoint: " + path);
}

inline DdpgAgent load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "arisddpg", 8) != 0)
    throw std::runtime_error("not a deployment checkpoint: " + path);
  std::uint64_t version = detail::read_u64(is);
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");
  std::uint64_t tensors = detail::read_u64(is);
  if (tensors < 9 || (tensors - 1) % 8 != 0) throw std::runtime_error("corrupt checkpoint layout");
  std::uint64_t layers = (tensors - 1) / 8;

  Eigen::MatrixXd meta = detail::read_tensor(is);
  if (meta.rows() != 9 || meta.cols() != 1) throw std::runtime_error("corrupt checkpoint meta");
  DdpgAgent ag;
  ag.cfg.a_max = meta(0, 0);
  ag.cfg.hidden = static_cast<int>(meta(1, 0));
  ag.cfg.discount = meta(2, 0);
  ag.cfg.soft_rho = meta(3, 0);
  ag.cfg.sigma_start = meta(4, 0);
  ag.cfg.sigma_end = meta(5, 0);
  ag.scale.sig = meta(6, 0);
  ag.scale.jam = meta(7, 0);
  ag.state_dim = static_cast<int>(meta(8, 0));

  ag.actor = detail::read_net(is, layers, true, ag.cfg.a_max);
  ag.critic = detail::read_net(is, layers, false, 1.0);
  ag.actor_t = detail::read_net(is, layers, true, ag.cfg.a_max);
  ag.critic_t = detail::read_net(is, layers, false, 1.0);
  ag.actor_opt = make_adam(param_count(ag.actor), ag.cfg.lr);
  ag.critic_opt = make_adam(param_count(ag.critic), ag.cfg.lr);
  return ag;
}

}  // namespace arisjam
