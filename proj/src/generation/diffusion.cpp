#include "vinci/generation/diffusion.hpp"

#include <cmath>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"

namespace vinci::generation {

double DiffusionSchedule::alpha_bar(int t) const {
  if (t == 0) return 1.0;
  if (t < 0 || t > steps()) fail(ErrorCode::InvalidRange, "diffusion step " + std::to_string(t) + " out of range");
  return alpha_bars[static_cast<std::size_t>(t - 1)];
}

DiffusionSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) fail(ErrorCode::InvalidRange, "steps must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    fail(ErrorCode::InvalidRange, "need 0 < beta_start <= beta_end < 1");
  }
  DiffusionSchedule s;
  s.betas.resize(static_cast<std::size_t>(steps));
  s.alpha_bars.resize(static_cast<std::size_t>(steps));
  double running = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    const double beta = beta_start + (beta_end - beta_start) * frac;
    running *= 1.0 - beta;
    s.betas[static_cast<std::size_t>(i)] = beta;
    s.alpha_bars[static_cast<std::size_t>(i)] = running;
  }
  return s;
}

Tensor4 corrupt(const Tensor4& z0, int t, const Tensor4& eps, const DiffusionSchedule& schedule) {
  check_same_shape(z0, eps, "corrupt: noise shape");
  require(t >= 1 && t <= schedule.steps(), "corrupt: step out of range");
  const double abar = schedule.alpha_bar(t);
  const double a = std::sqrt(abar);
  const double b = std::sqrt(1.0 - abar);
  Tensor4 out = z0;
  auto o = out.data();
  auto e = eps.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a * o[i] + b * e[i];
  return out;
}

Tensor4 predict_x0(const Tensor4& z_t, const Tensor4& eps_hat, int t, const DiffusionSchedule& schedule) {
  check_same_shape(z_t, eps_hat, "predict_x0: noise shape");
  const double abar = schedule.alpha_bar(t);
  const double a = std::sqrt(abar);
  const double b = std::sqrt(1.0 - abar);
  Tensor4 out = z_t;
  auto o = out.data();
  auto e = eps_hat.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (o[i] - b * e[i]) / a;
  return out;
}

Tensor4 assemble_condition(const Tensor4& z_t, const Tensor4& first_frame) {
  if (first_frame.frames() != 1 || first_frame.height() != z_t.height() || first_frame.width() != z_t.width() ||
      first_frame.channels() != z_t.channels()) {
    fail(ErrorCode::ShapeMismatch, "first-frame latent must be 1 x h x w x c matching z_t");
  }
  require(z_t.frames() >= 1, "z_t needs at least one frame");
  const std::size_t c = z_t.channels();
  Tensor4 out(z_t.frames(), z_t.height(), z_t.width(), 2 * c + 1);
  for (std::size_t t = 0; t < z_t.frames(); ++t) {
    for (std::size_t y = 0; y < z_t.height(); ++y) {
      for (std::size_t x = 0; x < z_t.width(); ++x) {
        for (std::size_t k = 0; k < c; ++k) {
          out.at(t, y, x, k) = z_t.at(t, y, x, k);
          out.at(t, y, x, c + k) = first_frame.at(0, y, x, k);
        }
        out.at(t, y, x, 2 * c) = t == 0 ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

std::size_t latent_channels(const Tensor4& condition) {
  if (condition.channels() < 3 || condition.channels() % 2 == 0) {
    fail(ErrorCode::ShapeMismatch, "condition tensor must have 2c + 1 channels");
  }
  return (condition.channels() - 1) / 2;
}

Tensor4 noisy_latent_of(const Tensor4& condition) {
  const std::size_t c = latent_channels(condition);
  Tensor4 out(condition.frames(), condition.height(), condition.width(), c);
  auto src = condition.data();
  auto dst = out.data();
  for (std::size_t s = 0; s < out.sites(); ++s) {
    for (std::size_t k = 0; k < c; ++k) dst[s * c + k] = src[s * condition.channels() + k];
  }
  return out;
}

double eps_loss(Denoiser& denoiser, const Tensor4& condition, std::string_view instruction, int t,
                const Tensor4& eps) {
  const std::size_t c = latent_channels(condition);
  if (eps.frames() != condition.frames() || eps.height() != condition.height() || eps.width() != condition.width() ||
      eps.channels() != c) {
    fail(ErrorCode::ShapeMismatch, "eps_loss: noise does not match the condition's latent shape");
  }
  const Tensor4 eps_hat = denoiser.predict_noise(condition, instruction, t);
  check_same_shape(eps_hat, eps, "eps_loss: denoiser output");
  if (!eps_hat.all_finite()) fail(ErrorCode::NonFinite, "denoiser produced a non-finite value");
  auto a = eps.data();
  auto b = eps_hat.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  const double loss = sum / static_cast<double>(a.size());
  if (!std::isfinite(loss)) fail(ErrorCode::NonFinite, "loss is not finite");
  return loss;
}

std::vector<double> instruction_code(std::string_view instruction, std::size_t channels) {
  std::vector<double> code(channels);
  std::uint64_t h = text::fnv1a(instruction);
  for (std::size_t k = 0; k < channels; ++k) {
    h = text::fnv1a(std::string_view(reinterpret_cast<const char*>(&k), sizeof k), h);
    code[k] = static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53) * 2.0 - 1.0;
  }
  return code;
}

LinearDenoiser::LinearDenoiser(std::size_t latent_channels, double instruction_scale)
    : channels_(latent_channels),
      instruction_scale_(instruction_scale),
      weights_(latent_channels * (2 * latent_channels + 1), 0.0),
      bias_(latent_channels, 0.0) {
  require(latent_channels >= 1, "latent channels must be >= 1");
}

LinearDenoiser LinearDenoiser::random(std::size_t latent_channels, std::uint64_t seed, double scale) {
  LinearDenoiser d(latent_channels);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  for (double& w : d.weights_) w = normal(rng);
  for (double& b : d.bias_) b = normal(rng);
  return d;
}

Tensor4 LinearDenoiser::predict_noise(const Tensor4& condition, std::string_view instruction, int /*t*/) {
  if (condition.channels() != inputs()) fail(ErrorCode::ShapeMismatch, "condition channels do not match denoiser");
  const auto code = instruction_code(instruction, channels_);
  Tensor4 out(condition.frames(), condition.height(), condition.width(), channels_);
  auto in = condition.data();
  auto dst = out.data();
  const std::size_t n_in = inputs();
  for (std::size_t s = 0; s < condition.sites(); ++s) {
    const double* x = in.data() + s * n_in;
    for (std::size_t k = 0; k < channels_; ++k) {
      const double* w = weights_.data() + k * n_in;
      double acc = bias_[k] + instruction_scale_ * code[k];
      for (std::size_t j = 0; j < n_in; ++j) acc += w[j] * x[j];
      dst[s * channels_ + k] = acc;
    }
  }
  return out;
}

LinearDenoiser::Gradient LinearDenoiser::loss_gradient(const Tensor4& condition, std::string_view instruction,
                                                       const Tensor4& eps) {
  const Tensor4 eps_hat = predict_noise(condition, instruction, 0);
  check_same_shape(eps_hat, eps, "loss_gradient: noise shape");
  Gradient g{std::vector<double>(weights_.size(), 0.0), std::vector<double>(bias_.size(), 0.0)};
  const double scale = 2.0 / static_cast<double>(eps.size());
  auto in = condition.data();
  auto pred = eps_hat.data();
  auto target = eps.data();
  const std::size_t n_in = inputs();
  for (std::size_t s = 0; s < condition.sites(); ++s) {
    const double* x = in.data() + s * n_in;
    for (std::size_t k = 0; k < channels_; ++k) {
      const double r = scale * (pred[s * channels_ + k] - target[s * channels_ + k]);
      g.bias[k] += r;
      double* gw = g.weights.data() + k * n_in;
      for (std::size_t j = 0; j < n_in; ++j) gw[j] += r * x[j];
    }
  }
  return g;
}

Tensor4 gaussian_noise(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels,
                       std::uint64_t seed) {
  Tensor4 out(frames, height, width, channels);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.data()) v = normal(rng);
  return out;
}

std::vector<double> train_linear_denoiser(LinearDenoiser& model, const std::vector<Tensor4>& latents,
                                          std::string_view instruction, const DiffusionSchedule& schedule,
                                          const TrainOptions& options) {
  require(!latents.empty(), "training needs at least one latent");
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, latents.size() - 1);
  std::uniform_int_distribution<int> step(1, schedule.steps());
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(options.iterations));
  for (int it = 0; it < options.iterations; ++it) {
    const Tensor4& z0 = latents[pick(rng)];
    const int t = step(rng);
    const Tensor4 eps = gaussian_noise(z0.frames(), z0.height(), z0.width(), z0.channels(), rng());
    const Tensor4 cond = assemble_condition(corrupt(z0, t, eps, schedule), z0.frame(0));
    history.push_back(eps_loss(model, cond, instruction, t, eps));
    const auto g = model.loss_gradient(cond, instruction, eps);
    for (std::size_t i = 0; i < g.weights.size(); ++i) model.weights()[i] -= options.learning_rate * g.weights[i];
    for (std::size_t i = 0; i < g.bias.size(); ++i) model.bias()[i] -= options.learning_rate * g.bias[i];
  }
  return history;
}

GaussianOracleDenoiser::GaussianOracleDenoiser(Tensor4 mean, double spread, const DiffusionSchedule& schedule)
    : mean_(std::move(mean)), spread_(spread), schedule_(schedule) {
  require(spread >= 0.0, "spread must be >= 0");
}

Tensor4 GaussianOracleDenoiser::predict_noise(const Tensor4& condition, std::string_view /*instruction*/, int t) {
  Tensor4 z_t = noisy_latent_of(condition);
  check_same_shape(z_t, mean_, "oracle denoiser: latent shape");
  const double abar = schedule_.alpha_bar(t);
  const double a = std::sqrt(abar);
  const double b = std::sqrt(1.0 - abar);
  const double denom = abar * spread_ * spread_ + 1.0 - abar;
  auto z = z_t.data();
  auto mu = mean_.data();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = b * (z[i] - a * mu[i]) / denom;
  return z_t;
}

Tensor4 GaussianOracleDenoiser::flow_endpoint(const Tensor4& z_T, int T) const {
  check_same_shape(z_T, mean_, "flow_endpoint: latent shape");
  const double abar = schedule_.alpha_bar(T);
  const double sigma_sq = (1.0 - abar) / abar;
  const double shrink = spread_ / std::sqrt(spread_ * spread_ + sigma_sq);
  Tensor4 out = z_T;
  auto o = out.data();
  auto mu = mean_.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = mu[i] + (o[i] / std::sqrt(abar) - mu[i]) * shrink;
  return out;
}

DownsamplingVae::DownsamplingVae(std::size_t factor) : factor_(factor) { require(factor >= 1, "factor must be >= 1"); }

Tensor4 DownsamplingVae::encode(const Tensor4& video) {
  if (video.height() % factor_ != 0 || video.width() % factor_ != 0) {
    fail(ErrorCode::ShapeMismatch, "frame size must be a multiple of the downsampling factor");
  }
  Tensor4 out(video.frames(), video.height() / factor_, video.width() / factor_, video.channels());
  const double inv = 1.0 / static_cast<double>(factor_ * factor_);
  for (std::size_t t = 0; t < video.frames(); ++t)
    for (std::size_t y = 0; y < video.height(); ++y)
      for (std::size_t x = 0; x < video.width(); ++x)
        for (std::size_t k = 0; k < video.channels(); ++k)
          out.at(t, y / factor_, x / factor_, k) += inv * video.at(t, y, x, k);
  return out;
}

Tensor4 DownsamplingVae::decode(const Tensor4& latent) {
  Tensor4 out(latent.frames(), latent.height() * factor_, latent.width() * factor_, latent.channels());
  for (std::size_t t = 0; t < out.frames(); ++t)
    for (std::size_t y = 0; y < out.height(); ++y)
      for (std::size_t x = 0; x < out.width(); ++x)
        for (std::size_t k = 0; k < out.channels(); ++k) out.at(t, y, x, k) = latent.at(t, y / factor_, x / factor_, k);
  return out;
}

std::vector<int> ddim_timesteps(int schedule_steps, int sample_steps) {
  if (sample_steps < 1 || sample_steps > schedule_steps) {
    fail(ErrorCode::InvalidRange, "sample_steps must be in [1, schedule steps]");
  }
  std::vector<int> ts(static_cast<std::size_t>(sample_steps));
  for (int i = 0; i < sample_steps; ++i) {
    ts[static_cast<std::size_t>(i)] =
        schedule_steps - static_cast<int>(static_cast<long long>(i) * schedule_steps / sample_steps);
  }
  return ts;
}

Tensor4 ddim_from(Denoiser& denoiser, const Tensor4& z_T, const Tensor4& first_frame_latent,
                  std::string_view instruction, const DiffusionSchedule& schedule, int sample_steps) {
  const auto ts = ddim_timesteps(schedule.steps(), sample_steps);
  Tensor4 z = z_T;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const int t = ts[i];
    const int t_next = i + 1 < ts.size() ? ts[i + 1] : 0;
    const Tensor4 eps_hat = denoiser.predict_noise(assemble_condition(z, first_frame_latent), instruction, t);
    check_same_shape(eps_hat, z, "ddim: denoiser output");
    const Tensor4 x0 = predict_x0(z, eps_hat, t, schedule);
    const double abar_next = schedule.alpha_bar(t_next);
    const double a = std::sqrt(abar_next);
    const double b = std::sqrt(1.0 - abar_next);
    auto zd = z.data();
    auto x = x0.data();
    auto e = eps_hat.data();
    for (std::size_t k = 0; k < zd.size(); ++k) zd[k] = a * x[k] + b * e[k];
  }
  return z;
}

GeneratedVideo ddim_sample(Denoiser& denoiser, VaeDecoder& decoder, const Tensor4& first_frame_latent,
                           std::string_view instruction, const DiffusionSchedule& schedule,
                           const SampleOptions& options) {
  require(first_frame_latent.frames() == 1, "first-frame latent must hold exactly one frame");
  require(options.frames >= 1, "need at least one output frame");
  require(options.fps > 0.0, "fps must be > 0");
  const Tensor4 z_T = gaussian_noise(options.frames, first_frame_latent.height(), first_frame_latent.width(),
                                     first_frame_latent.channels(), options.seed);
  GeneratedVideo out;
  out.latent = ddim_from(denoiser, z_T, first_frame_latent, instruction, schedule, options.steps);
  out.decoded = decoder.decode(out.latent);
  out.instruction = std::string(instruction);
  out.seed = options.seed;
  out.steps = options.steps;
  out.fps = options.fps;
  out.duration_s = static_cast<double>(options.frames) / options.fps;
  return out;
}

}  // namespace vinci::generation
