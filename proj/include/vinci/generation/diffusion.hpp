#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vinci/generation/tensor.hpp"

namespace vinci::generation {

/// Linear beta schedule. Step indices are 1-based; alpha_bar(0) is 1.
struct DiffusionSchedule {
  std::vector<double> betas;       // betas[t-1] for t = 1..steps
  std::vector<double> alpha_bars;  // cumulative products of (1 - beta)

  int steps() const { return static_cast<int>(betas.size()); }
  double alpha_bar(int t) const;
};

/// Throws InvalidRange unless 0 < beta_start <= beta_end < 1 and steps >= 1.
DiffusionSchedule make_schedule(int steps = 1000, double beta_start = 1e-4, double beta_end = 2e-2);

/// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps.
Tensor4 corrupt(const Tensor4& z0, int t, const Tensor4& eps, const DiffusionSchedule& schedule);

/// Inverts corrupt() given a noise estimate: (z_t - sqrt(1 - abar_t) eps) / sqrt(abar_t).
Tensor4 predict_x0(const Tensor4& z_t, const Tensor4& eps_hat, int t, const DiffusionSchedule& schedule);

/// Channel-wise stack [z_t | first frame broadcast over T | temporal mask],
/// giving 2c + 1 channels; the mask is 1 on frame 0 and 0 elsewhere.
Tensor4 assemble_condition(const Tensor4& z_t, const Tensor4& first_frame);

/// Noise predictor eps_theta(condition, instruction, t). Output has the latent
/// shape (the condition's first c channels).
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Tensor4 predict_noise(const Tensor4& condition, std::string_view instruction, int t) = 0;
};

/// Latent channel count implied by a condition tensor with 2c + 1 channels.
std::size_t latent_channels(const Tensor4& condition);
/// The z_t block of a condition tensor.
Tensor4 noisy_latent_of(const Tensor4& condition);

/// Mean over all elements of (eps - eps_hat)^2 for one denoiser call.
/// Throws ShapeMismatch or NonFinite.
double eps_loss(Denoiser& denoiser, const Tensor4& condition, std::string_view instruction, int t,
                const Tensor4& eps);

/// Deterministic per-instruction vector in [-1, 1]^channels.
std::vector<double> instruction_code(std::string_view instruction, std::size_t channels);

/// eps_hat[site, k] = sum_j W[k][j] * cond[site, j] + b[k] + instruction_scale * code(I)[k].
/// Stands in for the U-Net so the loss/gradient machinery can be exercised.
class LinearDenoiser final : public Denoiser {
 public:
  struct Gradient {
    std::vector<double> weights;  // same layout as weights()
    std::vector<double> bias;
  };

  LinearDenoiser(std::size_t latent_channels, double instruction_scale = 0.1);
  static LinearDenoiser random(std::size_t latent_channels, std::uint64_t seed, double scale = 0.1);

  Tensor4 predict_noise(const Tensor4& condition, std::string_view instruction, int t) override;

  /// Analytic gradient of eps_loss with respect to weights and bias.
  Gradient loss_gradient(const Tensor4& condition, std::string_view instruction, const Tensor4& eps);

  std::size_t channels() const { return channels_; }
  std::size_t inputs() const { return 2 * channels_ + 1; }
  std::vector<double>& weights() { return weights_; }  // row-major channels x inputs
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }

 private:
  std::size_t channels_;
  double instruction_scale_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct TrainOptions {
  int iterations = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

/// Plain gradient descent on eps_loss over random (z0, t, eps) draws.
/// Returns the loss observed at every iteration.
std::vector<double> train_linear_denoiser(LinearDenoiser& model, const std::vector<Tensor4>& latents,
                                          std::string_view instruction, const DiffusionSchedule& schedule,
                                          const TrainOptions& options);

/// Posterior-mean noise predictor for latents distributed N(mean, spread^2 I):
///   eps_hat = sqrt(1 - abar) (z_t - sqrt(abar) mean) / (abar spread^2 + 1 - abar).
/// With spread = 0 this returns exactly the noise that produced z_t from mean.
class GaussianOracleDenoiser final : public Denoiser {
 public:
  GaussianOracleDenoiser(Tensor4 mean, double spread, const DiffusionSchedule& schedule);
  Tensor4 predict_noise(const Tensor4& condition, std::string_view instruction, int t) override;

  /// Exact end point of the probability-flow ODE started from z_T at step T.
  Tensor4 flow_endpoint(const Tensor4& z_T, int T) const;

 private:
  Tensor4 mean_;
  double spread_;
  const DiffusionSchedule& schedule_;
};

class VaeEncoder {
 public:
  virtual ~VaeEncoder() = default;
  virtual Tensor4 encode(const Tensor4& video) = 0;
};

class VaeDecoder {
 public:
  virtual ~VaeDecoder() = default;
  virtual Tensor4 decode(const Tensor4& latent) = 0;
};

/// Per-frame identity (c = 3).
class IdentityVae final : public VaeEncoder, public VaeDecoder {
 public:
  Tensor4 encode(const Tensor4& video) override { return video; }
  Tensor4 decode(const Tensor4& latent) override { return latent; }
};

/// Average-pools factor x factor blocks on encode, nearest-neighbour upsamples on decode.
class DownsamplingVae final : public VaeEncoder, public VaeDecoder {
 public:
  explicit DownsamplingVae(std::size_t factor = 8);
  Tensor4 encode(const Tensor4& video) override;
  Tensor4 decode(const Tensor4& latent) override;

 private:
  std::size_t factor_;
};

/// Descending DDIM step indices: T, T - T/S, ... (S entries, evenly spaced).
std::vector<int> ddim_timesteps(int schedule_steps, int sample_steps);

struct SampleOptions {
  int steps = 50;
  std::uint64_t seed = 0;
  std::size_t frames = 16;  // 2 s at 8 fps
  double fps = 8.0;
};

struct GeneratedVideo {
  Tensor4 latent;   // final z_0
  Tensor4 decoded;  // D(z_0)
  std::string instruction;
  std::uint64_t seed = 0;
  int steps = 0;
  double fps = 8.0;
  double duration_s = 2.0;
};

/// Seeded standard-normal tensor (mt19937_64).
Tensor4 gaussian_noise(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels,
                       std::uint64_t seed);

/// Deterministic (eta = 0) DDIM. z_T is seeded standard normal with the
/// first frame's spatial shape; every step conditions on the first frame.
GeneratedVideo ddim_sample(Denoiser& denoiser, VaeDecoder& decoder, const Tensor4& first_frame_latent,
                           std::string_view instruction, const DiffusionSchedule& schedule,
                           const SampleOptions& options = {});

/// Same as ddim_sample but starting from a caller-provided z_T.
Tensor4 ddim_from(Denoiser& denoiser, const Tensor4& z_T, const Tensor4& first_frame_latent,
                  std::string_view instruction, const DiffusionSchedule& schedule, int sample_steps);

}  // namespace vinci::generation
