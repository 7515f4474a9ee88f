#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <vector>

#include "vinci/generation/diffusion.hpp"
#include "vinci/model/gateway.hpp"
#include "vinci/orchestrator/clock.hpp"
#include "vinci/orchestrator/config.hpp"
#include "vinci/retrieval/embedder.hpp"
#include "vinci/retrieval/vector_index.hpp"
#include "vinci/speech/speech.hpp"

namespace vinci::orchestrator {

/// Predict intent backend: DDIM from the snippet's last frame, written to
/// clip_dir as a VNCI clip. The mock denoiser is the Gaussian oracle centred
/// on that frame, so the clip is a noisy hold of the current view.
class DiffusionPredictor final : public model::ActionPredictor {
 public:
  struct Options {
    std::filesystem::path clip_dir = "vinci-clips";
    generation::SampleOptions sample;
    std::size_t vae_factor = 8;
    double spread = 0.05;
    std::size_t max_side = 256;  // input frames are subsampled to fit
    bool salt_seed = true;       // xor the seed with the instruction hash
  };

  explicit DiffusionPredictor(Options options);
  model::GeneratedClipRef predict(const media::VideoSnippet& snippet, std::string_view instruction) override;

  /// URIs are "/clips/<file name>"; the server maps them back into clip_dir.
  static constexpr std::string_view kUriPrefix = "/clips/";

 private:
  Options options_;
  generation::DiffusionSchedule schedule_;
  std::atomic<std::uint64_t> counter_{0};
};

/// Request {"instruction", "width", "height", "frame_base64"} -> reply {"uri", "duration_s"}.
class HttpActionPredictor final : public model::ActionPredictor {
 public:
  explicit HttpActionPredictor(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  model::GeneratedClipRef predict(const media::VideoSnippet& snippet, std::string_view instruction) override;

 private:
  RemoteEndpoint endpoint_;
};

/// Retrieve intent backend: embed the query, then top-k over the index.
class IndexRetriever final : public model::VideoRetriever {
 public:
  IndexRetriever(std::shared_ptr<const retrieval::VectorIndex> index,
                 std::shared_ptr<retrieval::TextEmbedder> embedder);
  std::vector<model::RetrievedVideo> retrieve(std::string_view query, std::size_t k) override;

 private:
  std::shared_ptr<const retrieval::VectorIndex> index_;
  std::shared_ptr<retrieval::TextEmbedder> embedder_;
};

/// Caption-embedded how-to clips used when no index or catalog is configured.
std::vector<retrieval::EmbeddingRecord> builtin_catalog(std::size_t dim = retrieval::HashingTextEmbedder::kDefaultDim);

/// Everything a session calls out to.
struct Adapters {
  std::shared_ptr<speech::AsrAdapter> asr;
  std::shared_ptr<speech::TtsAdapter> tts;
  std::shared_ptr<model::VideoEncoder> encoder;
  std::shared_ptr<model::Captioner> captioner;
  std::shared_ptr<model::VisionLanguageModel> model;
  std::shared_ptr<model::ActionPredictor> predictor;  // may be null
  std::shared_ptr<model::VideoRetriever> retriever;   // may be null
};

/// Builds the adapters the config asks for. Mock adapters with a nonzero
/// mock_delay_s charge that delay to `clock` on every call.
Adapters make_adapters(const Config& config, std::shared_ptr<Clock> clock, std::vector<model::PlanScript> plans = {});

}  // namespace vinci::orchestrator
