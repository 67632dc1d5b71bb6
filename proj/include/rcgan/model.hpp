#pragma once

// RC-GAN: a tabular GAN whose generator loss adds a Q-Error term over a
// range-count workload.
//
//   L(G) = mean log(1 - D(G(z)))  +  λ_q · mean_i smax(1, a_i, 1/a_i)
//   a_i  = (sel_i + eps) / (ŝel_i + eps)
//
// ŝel_i is a differentiable soft count over the current generated batch
// (product of sigmoids with temperature τ), and smax is a log-sum-exp
// smooth maximum shifted so that smax(1, 1, 1) = 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcgan/data.hpp"
#include "rcgan/error.hpp"
#include "rcgan/nn.hpp"
#include "rcgan/rng.hpp"
#include "rcgan/text.hpp"
#include "rcgan/workload.hpp"

namespace rcgan {

struct Architecture {
  std::size_t z_dim = 32;
  std::vector<std::size_t> generator_hidden = {64, 64};
  std::vector<std::size_t> discriminator_hidden = {64, 64};
  bool operator==(const Architecture&) const = default;
};

enum class AdversarialLoss {
  minimax,         // mean log(1 - D(G(z))), as written in the RC-GAN objective
  non_saturating,  // -mean log D(G(z))
};

// Training-time q-error floor: one row of a 256-row batch. With the
// evaluation floor (1e-6) the many empty training queries dominate the loss.
inline constexpr double kTrainQErrorEps = 1.0 / 256.0;

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 256;
  std::size_t queries_per_step = 64;
  double lambda_q = 1.0;
  double tau = 0.02;        // soft-count temperature, normalized units
  double tau_final = 0.02;  // linear decay target; equal to tau disables decay
  double eps = kTrainQErrorEps;
  double sharpness = 20.0;  // smooth-max sharpness
  bool hard_max = false;
  AdversarialLoss adversarial = AdversarialLoss::minimax;
  // Discriminator regularizers; 0 disables. Without them D separates exact
  // one-hot real rows from soft generated ones almost immediately.
  double real_smoothing = 0.3;  // noise mixed into real one-hot blocks shown to D
  double instance_noise = 0.2;  // std-dev of Gaussian noise on every D input
  std::uint64_t seed = 0;
  nn::AdamConfig generator_opt;
  nn::AdamConfig discriminator_opt;
  Architecture arch;

  bool operator==(const TrainConfig&) const = default;

  void validate() const {
    if (batch_size == 0) throw Error(Errc::usage, "batch size must be positive");
    if (queries_per_step == 0) throw Error(Errc::usage, "queries per step must be positive");
    if (!(lambda_q >= 0.0)) throw Error(Errc::usage, "lambda_q must be non-negative");
    if (!(tau > 0.0) || !(tau_final > 0.0)) throw Error(Errc::usage, "tau must be positive");
    if (!(eps > 0.0)) throw Error(Errc::usage, "eps must be positive");
    if (!(sharpness > 0.0)) throw Error(Errc::usage, "smooth-max sharpness must be positive");
    if (!(real_smoothing >= 0.0 && real_smoothing <= 1.0)) throw Error(Errc::usage, "real smoothing must be in [0,1]");
    if (!(instance_noise >= 0.0)) throw Error(Errc::usage, "instance noise must be non-negative");
    if (arch.z_dim == 0) throw Error(Errc::usage, "z_dim must be positive");
  }

  // Per-component seeds derived from the one global seed.
  std::uint64_t init_seed() const { return derive_seed(seed, 1); }
  std::uint64_t train_seed() const { return derive_seed(seed, 2); }
};

struct Generator {
  nn::Network net;
  std::size_t z_dim = 0;
  Schema schema;

  // Sigmoid on numeric slots, softmax per categorical block.
  static Generator make(const Schema& schema, const Architecture& arch, Rng& rng) {
    std::vector<nn::LayerSpec> specs;
    for (auto h : arch.generator_hidden) specs.push_back({h, nn::Activation::relu});
    specs.push_back({schema.encoded_width(), nn::Activation::block_softmax, nn::softmax_blocks(schema)});
    return {nn::Network(arch.z_dim, specs, rng), arch.z_dim, schema};
  }

  Matrix noise(std::size_t n, Rng& rng) const {
    Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(z_dim));
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    return z;
  }

  bool operator==(const Generator&) const = default;
};

struct Discriminator {
  nn::Network net;

  static Discriminator make(const Schema& schema, const Architecture& arch, Rng& rng) {
    std::vector<nn::LayerSpec> specs;
    for (auto h : arch.discriminator_hidden) specs.push_back({h, nn::Activation::relu});
    specs.push_back({1, nn::Activation::sigmoid});
    return {nn::Network(schema.encoded_width(), specs, rng)};
  }

  bool operator==(const Discriminator&) const = default;
};

// ---------------------------------------------------------------------------
// Soft counting

// Σ_rows Π_predicates σ((x - lo)/τ) σ((hi - x)/τ) over an encoded batch,
// with `q` already in normalized units. When `grad` is given,
// scale · ∂count/∂batch is accumulated into it.
inline double soft_count(const EncodedMatrix& batch, const Schema& schema, const RangeQuery& q, double tau,
                         Matrix* grad = nullptr, double scale = 1.0) {
  const std::size_t m = q.predicates.size();
  std::vector<Eigen::Index> slot(m);
  for (std::size_t j = 0; j < m; ++j) slot[j] = static_cast<Eigen::Index>(schema.offset(q.predicates[j].column));

  std::vector<double> dlog(m);
  double total = 0.0;
  for (Eigen::Index r = 0; r < batch.rows(); ++r) {
    double w = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& p = q.predicates[j];
      const double x = batch(r, slot[j]);
      const double s_lo = nn::sigmoid((x - p.lo) / tau);
      const double s_hi = nn::sigmoid((p.hi - x) / tau);
      w *= s_lo * s_hi;
      // d/dx log(σ_lo σ_hi)
      dlog[j] = ((1.0 - s_lo) - (1.0 - s_hi)) / tau;
    }
    total += w;
    if (grad && w != 0.0) {
      for (std::size_t j = 0; j < m; ++j) (*grad)(r, slot[j]) += scale * w * dlog[j];
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Smooth maximum of (1, a, b)

struct SmoothMax {
  double value = 1.0;
  double da = 0.0;
  double db = 0.0;
};

// (1/k) log((e^k + e^{ka} + e^{kb}) / 3); equals 1 at a = b = 1 and is
// bounded below by max(1, a, b) - log(3)/k. With hard = true, plain max
// with a subgradient.
inline SmoothMax smooth_max(double a, double b, double k, bool hard = false) {
  if (hard) {
    if (a >= b && a > 1.0) return {a, 1.0, 0.0};
    if (b > a && b > 1.0) return {b, 0.0, 1.0};
    return {1.0, 0.0, 0.0};
  }
  const double m = std::max({1.0, a, b});
  const double e1 = std::exp(k * (1.0 - m));
  const double ea = std::exp(k * (a - m));
  const double eb = std::exp(k * (b - m));
  const double s = e1 + ea + eb;
  return {m + std::log(s / 3.0) / k, ea / s, eb / s};
}

struct QErrorTerm {
  double value = 0.0;  // mean smooth q-error (not yet multiplied by λ_q)
  double mean_sel_gen = 0.0;
};

// Mean smooth Q-Error of a generated batch over `queries` (normalized
// bounds). Accumulates scale · ∂term/∂batch into `grad` when given.
inline QErrorTerm qerror_term(const EncodedMatrix& batch, const Schema& schema,
                              const std::vector<const RangeQuery*>& queries, const std::vector<double>& sel_true,
                              double tau, double eps, double sharpness, bool hard, Matrix* grad = nullptr,
                              double scale = 1.0) {
  QErrorTerm out;
  const double n = static_cast<double>(batch.rows());
  const double nq = static_cast<double>(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double sel_gen = soft_count(batch, schema, *queries[i], tau) / n;
    const double t = sel_true[i] + eps;
    const double g = sel_gen + eps;
    const auto sm = smooth_max(t / g, g / t, sharpness, hard);
    out.value += sm.value / nq;
    out.mean_sel_gen += sel_gen / nq;
    if (grad) {
      // ∂smax/∂ŝel, then through ŝel = soft_count / n.
      const double dsel = sm.da * (-t / (g * g)) + sm.db * (1.0 / t);
      const double coeff = scale * dsel / (nq * n);
      if (coeff != 0.0) soft_count(batch, schema, *queries[i], tau, grad, coeff);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Losses

inline constexpr double kProbClamp = 1e-7;

struct GeneratorLoss {
  double total = 0.0;
  double adversarial = 0.0;
  double qerror = 0.0;  // λ_q-weighted
  nn::Gradients grad;
};

// Full generator objective for one noise batch and query sample; gradients
// are taken w.r.t. the generator parameters only.
inline GeneratorLoss generator_loss(const Generator& g, const Discriminator& d, const Matrix& noise,
                                    const std::vector<const RangeQuery*>& queries, const std::vector<double>& sel_true,
                                    const TrainConfig& cfg, double tau, const Matrix* d_noise = nullptr) {
  if (queries.empty() && cfg.lambda_q > 0.0) throw Error(Errc::usage, "generator loss needs at least one query");
  nn::ForwardCache gcache, dcache;
  const Matrix fake = nn::forward(g.net, noise, &gcache);
  const Matrix p = nn::forward(d.net, d_noise ? Matrix(fake + *d_noise) : fake, &dcache);
  const double n = static_cast<double>(noise.rows());

  GeneratorLoss out;
  Matrix dp(p.rows(), 1);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double y = p(r, 0);
    const double yc = std::clamp(y, kProbClamp, 1.0 - kProbClamp);
    const bool clamped = yc != y;
    if (cfg.adversarial == AdversarialLoss::minimax) {
      out.adversarial += std::log(1.0 - yc) / n;
      dp(r, 0) = clamped ? 0.0 : -1.0 / ((1.0 - yc) * n);
    } else {
      out.adversarial -= std::log(yc) / n;
      dp(r, 0) = clamped ? 0.0 : -1.0 / (yc * n);
    }
  }
  Matrix dfake = nn::backward(d.net, dcache, dp).input;

  if (cfg.lambda_q > 0.0 && !queries.empty()) {
    const auto term = qerror_term(fake, g.schema, queries, sel_true, tau, cfg.eps, cfg.sharpness, cfg.hard_max,
                                  &dfake, cfg.lambda_q);
    out.qerror = cfg.lambda_q * term.value;
  }
  out.total = out.adversarial + out.qerror;
  if (!std::isfinite(out.total)) throw Error(Errc::training, "generator loss is not finite");
  out.grad = nn::backward(g.net, gcache, dfake).params;
  return out;
}

struct DiscriminatorLoss {
  double value = 0.0;
  nn::Gradients grad;
};

// Binary cross-entropy: -mean log D(real) - mean log(1 - D(fake)), with D
// clamped to [1e-7, 1 - 1e-7].
inline DiscriminatorLoss discriminator_loss(const Discriminator& d, const Matrix& real, const Matrix& fake) {
  if (real.rows() == 0 || fake.rows() == 0) throw Error(Errc::usage, "discriminator loss needs non-empty batches");
  DiscriminatorLoss out;
  const auto side = [&](const Matrix& batch, bool is_real) {
    nn::ForwardCache cache;
    const Matrix p = nn::forward(d.net, batch, &cache);
    const double n = static_cast<double>(batch.rows());
    Matrix dp(p.rows(), 1);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double y = p(r, 0);
      const double yc = std::clamp(y, kProbClamp, 1.0 - kProbClamp);
      const bool clamped = yc != y;
      if (is_real) {
        out.value -= std::log(yc) / n;
        dp(r, 0) = clamped ? 0.0 : -1.0 / (yc * n);
      } else {
        out.value -= std::log(1.0 - yc) / n;
        dp(r, 0) = clamped ? 0.0 : 1.0 / ((1.0 - yc) * n);
      }
    }
    return nn::backward(d.net, cache, dp).params;
  };
  out.grad = side(real, true);
  out.grad += side(fake, false);
  if (!std::isfinite(out.value)) throw Error(Errc::training, "discriminator loss is not finite");
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct EpochRecord {
  std::size_t epoch = 0;
  double discriminator_loss = 0.0;
  double adversarial_loss = 0.0;
  double qerror_loss = 0.0;
  double tau = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  Generator generator;
  Discriminator discriminator;
  TrainHistory history;
  std::optional<std::string> failure;  // set when training aborted
};

// Called after each completed epoch; useful for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

inline TrainResult initial_model(const Schema& schema, const TrainConfig& cfg) {
  Rng init(cfg.init_seed());
  TrainResult res;
  res.generator = Generator::make(schema, cfg.arch, init);
  res.discriminator = Discriminator::make(schema, cfg.arch, init);
  return res;
}

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double sigma, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sigma * rng.normal();
  return m;
}

// Mixes uniform noise of weight up to `amount` into every one-hot block and
// renormalizes, so real categorical blocks are not trivially separable from
// softmax outputs.
inline void smooth_one_hot(Matrix& batch, const Schema& schema, double amount, Rng& rng) {
  for (const auto& b : nn::softmax_blocks(schema)) {
    auto block = batch.middleCols(static_cast<Eigen::Index>(b.begin), static_cast<Eigen::Index>(b.width));
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < block.cols(); ++k) {
        block(r, k) += amount * rng.uniform();
        sum += block(r, k);
      }
      block.row(r) /= sum;
    }
  }
}

// Per step: one discriminator update (real minibatch against fresh fakes),
// then one generator update on a fresh noise batch with queries_per_step
// queries drawn uniformly from the workload. An epoch is one pass over the
// shuffled real rows (trailing partial batch dropped).
inline TrainResult train(const Table& table, const Workload& workload, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  const auto& schema = table.schema();
  if (table.rows() < cfg.batch_size) {
    throw Error(Errc::usage, "table has " + std::to_string(table.rows()) + " rows, fewer than the batch size " +
                                 std::to_string(cfg.batch_size));
  }
  if (workload.queries.empty() && cfg.lambda_q > 0.0) throw Error(Errc::usage, "training needs a non-empty workload");

  TrainResult res = initial_model(schema, cfg);
  if (cfg.epochs == 0) return res;

  const EncodedMatrix real = encode(table);
  std::vector<RangeQuery> queries;
  std::vector<double> sel;
  queries.reserve(workload.size());
  for (const auto& q : workload.queries) {
    sel.push_back(selectivity(q, table));
    queries.push_back(normalize_query(q, schema));
  }

  auto& g = res.generator;
  auto& d = res.discriminator;
  nn::OptimizerState g_opt(g.net, cfg.generator_opt);
  nn::OptimizerState d_opt(d.net, cfg.discriminator_opt);
  Rng rng(cfg.train_seed());

  std::vector<std::size_t> order(table.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t steps = table.rows() / cfg.batch_size;
  const std::size_t total_steps = steps * cfg.epochs;
  const auto bs = static_cast<Eigen::Index>(cfg.batch_size);

  Matrix real_batch(bs, real.cols());
  std::vector<const RangeQuery*> sampled(cfg.queries_per_step);
  std::vector<double> sampled_sel(cfg.queries_per_step);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order.begin(), order.end());
    EpochRecord rec;
    rec.epoch = epoch + 1;
    try {
      for (std::size_t s = 0; s < steps; ++s) {
        const double progress =
            total_steps > 1 ? static_cast<double>(epoch * steps + s) / static_cast<double>(total_steps - 1) : 0.0;
        const double tau = cfg.tau + (cfg.tau_final - cfg.tau) * progress;
        rec.tau = tau;

        for (Eigen::Index r = 0; r < bs; ++r) {
          real_batch.row(r) = real.row(static_cast<Eigen::Index>(order[s * cfg.batch_size + static_cast<std::size_t>(r)]));
        }
        if (cfg.real_smoothing > 0.0) smooth_one_hot(real_batch, schema, cfg.real_smoothing, rng);
        Matrix fake = nn::forward(g.net, g.noise(cfg.batch_size, rng));
        if (cfg.instance_noise > 0.0) {
          real_batch += gaussian(real_batch.rows(), real_batch.cols(), cfg.instance_noise, rng);
          fake += gaussian(fake.rows(), fake.cols(), cfg.instance_noise, rng);
        }
        const auto dl = discriminator_loss(d, real_batch, fake);
        nn::adam_step(d.net, dl.grad, d_opt, "discriminator");

        const Matrix z = g.noise(cfg.batch_size, rng);
        for (std::size_t k = 0; k < cfg.queries_per_step; ++k) {
          const auto pick = workload.queries.empty() ? 0 : rng.below(queries.size());
          sampled[k] = queries.empty() ? nullptr : &queries[pick];
          sampled_sel[k] = queries.empty() ? 0.0 : sel[pick];
        }
        std::optional<Matrix> d_noise;
        if (cfg.instance_noise > 0.0) d_noise = gaussian(bs, real.cols(), cfg.instance_noise, rng);
        const auto gl = generator_loss(g, d, z, queries.empty() ? std::vector<const RangeQuery*>{} : sampled,
                                       sampled_sel, cfg, tau, d_noise ? &*d_noise : nullptr);
        nn::adam_step(g.net, gl.grad, g_opt, "generator");

        rec.discriminator_loss += dl.value / static_cast<double>(steps);
        rec.adversarial_loss += gl.adversarial / static_cast<double>(steps);
        rec.qerror_loss += gl.qerror / static_cast<double>(steps);
      }
    } catch (const Error& e) {
      res.failure = "epoch " + std::to_string(epoch + 1) + ": " + e.what();
      return res;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return res;
}

// n noise vectors -> G -> decode.
inline Table sample(const Generator& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::usage, "sample size must be at least 1");
  Rng rng(seed);
  Table out(g.schema);
  constexpr std::size_t chunk = 4096;
  for (std::size_t done = 0; done < n; done += chunk) {
    const std::size_t k = std::min(chunk, n - done);
    out.concat(decode(nn::forward(g.net, g.noise(k, rng)), g.schema));
  }
  return out;
}

// Encoded generator output for n fresh noise vectors.
inline EncodedMatrix sample_encoded(const Generator& g, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return nn::forward(g.net, g.noise(n, rng));
}

// ---------------------------------------------------------------------------
// History log: one key=value record per epoch on a single line.

inline std::string epoch_record_line(const EpochRecord& e) {
  return "epoch=" + std::to_string(e.epoch) + " d_loss=" + text::format_double(e.discriminator_loss) +
         " g_adv=" + text::format_double(e.adversarial_loss) + " g_qerror=" + text::format_double(e.qerror_loss) +
         " tau=" + text::format_double(e.tau) + " seconds=" + text::format_double(e.seconds);
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::string_view kCheckpointFormat = "rcgan-checkpoint/1";

inline const char* adversarial_name(AdversarialLoss a) {
  return a == AdversarialLoss::minimax ? "minimax" : "non_saturating";
}

inline void write_config(text::KvWriter& w, const TrainConfig& c) {
  const auto sizes = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
  };
  w.put("epochs", static_cast<std::uint64_t>(c.epochs));
  w.put("batch_size", static_cast<std::uint64_t>(c.batch_size));
  w.put("queries_per_step", static_cast<std::uint64_t>(c.queries_per_step));
  w.put("lambda_q", c.lambda_q);
  w.put("tau", c.tau);
  w.put("tau_final", c.tau_final);
  w.put("eps", c.eps);
  w.put("sharpness", c.sharpness);
  w.put("hard_max", c.hard_max ? "true" : "false");
  w.put("adversarial", adversarial_name(c.adversarial));
  w.put("real_smoothing", c.real_smoothing);
  w.put("instance_noise", c.instance_noise);
  w.put("seed", c.seed);
  for (const auto& [prefix, o] : {std::pair{"g", c.generator_opt}, std::pair{"d", c.discriminator_opt}}) {
    w.put(std::string(prefix) + ".lr", o.lr);
    w.put(std::string(prefix) + ".beta1", o.beta1);
    w.put(std::string(prefix) + ".beta2", o.beta2);
    w.put(std::string(prefix) + ".eps", o.eps);
  }
  w.put("z_dim", static_cast<std::uint64_t>(c.arch.z_dim));
  w.put("generator_hidden", sizes(c.arch.generator_hidden));
  w.put("discriminator_hidden", sizes(c.arch.discriminator_hidden));
}

inline TrainConfig read_config(text::KvReader& r) {
  const auto sizes = [&](std::string_view key) {
    std::vector<std::size_t> out;
    const std::string& v = r.next(key);
    std::string_view rest = v;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      auto n = text::parse_uint(rest.substr(0, sp));
      if (!n) throw Error(Errc::corrupt_file, r.what() + ": bad layer size in '" + std::string(key) + "'");
      out.push_back(*n);
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
    return out;
  };
  TrainConfig c;
  c.epochs = r.next_uint("epochs");
  c.batch_size = r.next_uint("batch_size");
  c.queries_per_step = r.next_uint("queries_per_step");
  c.lambda_q = r.next_double("lambda_q");
  c.tau = r.next_double("tau");
  c.tau_final = r.next_double("tau_final");
  c.eps = r.next_double("eps");
  c.sharpness = r.next_double("sharpness");
  c.hard_max = r.next("hard_max") == "true";
  const auto& adv = r.next("adversarial");
  if (adv == "minimax") {
    c.adversarial = AdversarialLoss::minimax;
  } else if (adv == "non_saturating") {
    c.adversarial = AdversarialLoss::non_saturating;
  } else {
    throw Error(Errc::corrupt_file, r.what() + ": unknown adversarial loss '" + adv + "'");
  }
  c.real_smoothing = r.next_double("real_smoothing");
  c.instance_noise = r.next_double("instance_noise");
  c.seed = r.next_uint("seed");
  for (auto* o : {&c.generator_opt, &c.discriminator_opt}) {
    const std::string prefix = o == &c.generator_opt ? "g" : "d";
    o->lr = r.next_double(prefix + ".lr");
    o->beta1 = r.next_double(prefix + ".beta1");
    o->beta2 = r.next_double(prefix + ".beta2");
    o->eps = r.next_double(prefix + ".eps");
  }
  c.arch.z_dim = r.next_uint("z_dim");
  c.arch.generator_hidden = sizes("generator_hidden");
  c.arch.discriminator_hidden = sizes("discriminator_hidden");
  return c;
}

inline std::uint64_t config_digest(const TrainConfig& c) {
  text::KvWriter w;
  write_config(w, c);
  return text::fnv1a(w.str());
}

struct Checkpoint {
  Generator generator;
  Discriminator discriminator;
  TrainConfig config;
};

inline std::string checkpoint_to_text(const Generator& g, const Discriminator& d, const TrainConfig& cfg) {
  text::KvWriter w;
  w.put("format", kCheckpointFormat);
  w.put("schema_digest", text::hex64(g.schema.digest()));
  w.put("config_digest", text::hex64(config_digest(cfg)));
  write_config(w, cfg);
  g.schema.write(w);
  w.put("section", "generator");
  nn::write_network(w, g.net);
  w.put("section", "discriminator");
  nn::write_network(w, d.net);
  w.put("end", "rcgan-checkpoint");
  return w.str();
}

inline Checkpoint checkpoint_from_text(std::string_view contents) {
  text::KvReader r(contents, "checkpoint");
  if (r.done()) throw Error(Errc::corrupt_file, "checkpoint: empty file");
  const auto& fmt = r.next("format");
  if (fmt != kCheckpointFormat) {
    throw Error(Errc::version_mismatch, "checkpoint format '" + fmt + "' is not supported (expected " +
                                            std::string(kCheckpointFormat) + ")");
  }
  const std::string schema_digest = r.next("schema_digest");
  const std::string cfg_digest = r.next("config_digest");
  Checkpoint ck;
  ck.config = read_config(r);
  Schema schema = Schema::read(r);
  if (text::hex64(schema.digest()) != schema_digest) throw Error(Errc::corrupt_file, "checkpoint: schema digest mismatch");
  if (text::hex64(config_digest(ck.config)) != cfg_digest) {
    throw Error(Errc::corrupt_file, "checkpoint: config digest mismatch");
  }
  if (r.next("section") != "generator") throw Error(Errc::corrupt_file, "checkpoint: expected generator section");
  ck.generator.net = nn::read_network(r);
  ck.generator.z_dim = ck.generator.net.input_width();
  ck.generator.schema = schema;
  if (r.next("section") != "discriminator") {
    throw Error(Errc::corrupt_file, "checkpoint: expected discriminator section");
  }
  ck.discriminator.net = nn::read_network(r);
  if (r.next("end") != "rcgan-checkpoint" || !r.done()) throw Error(Errc::corrupt_file, "checkpoint: bad trailer");
  if (ck.generator.net.output_width() != schema.encoded_width() ||
      ck.discriminator.net.input_width() != schema.encoded_width() || ck.discriminator.net.output_width() != 1) {
    throw Error(Errc::corrupt_file, "checkpoint: network shapes do not match the schema");
  }
  return ck;
}

inline void save_checkpoint(const Generator& g, const Discriminator& d, const TrainConfig& cfg,
                            const std::string& path) {
  text::write_file(path, checkpoint_to_text(g, d, cfg));
}

inline Checkpoint load_checkpoint(const std::string& path) { return checkpoint_from_text(text::read_file(path)); }

}  // namespace rcgan
