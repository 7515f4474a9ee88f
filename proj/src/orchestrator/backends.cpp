#include "vinci/orchestrator/backends.hpp"

#include <algorithm>
#include <cstdio>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"
#include "vinci/common/text.hpp"
#include "vinci/generation/clip_io.hpp"

namespace vinci::orchestrator {

namespace {

/// Strided subsample so the longer side fits max_side, then crop both sides
/// down to a multiple of `factor`.
media::TimedFrame prepare_frame(const media::TimedFrame& in, std::size_t factor, std::size_t max_side) {
  const std::size_t longer = std::max(in.width, in.height);
  const std::size_t stride = std::max<std::size_t>(1, (longer + max_side - 1) / max_side);
  std::size_t w = in.width / stride;
  std::size_t h = in.height / stride;
  w -= w % factor;
  h -= h % factor;
  if (w == 0 || h == 0) fail(ErrorCode::ShapeMismatch, "frame too small for the configured VAE factor");
  media::TimedFrame out;
  out.timestamp_us = in.timestamp_us;
  out.width = static_cast<std::uint32_t>(w);
  out.height = static_cast<std::uint32_t>(h);
  out.pixels.resize(w * h * 3);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t k = 0; k < 3; ++k)
        out.pixels[(y * w + x) * 3 + k] = in.pixels[((y * stride) * in.width + x * stride) * 3 + k];
  return out;
}

generation::Tensor4 broadcast_frames(const generation::Tensor4& first, std::size_t frames) {
  generation::Tensor4 out(frames, first.height(), first.width(), first.channels());
  const std::size_t per = first.sites() * first.channels();
  auto src = first.data();
  auto dst = out.data();
  for (std::size_t t = 0; t < frames; ++t) std::copy(src.begin(), src.begin() + per, dst.begin() + t * per);
  return out;
}

class DelayedEncoder final : public model::VideoEncoder {
 public:
  DelayedEncoder(std::shared_ptr<model::VideoEncoder> inner, std::shared_ptr<Clock> clock, double delay)
      : inner_(std::move(inner)), clock_(std::move(clock)), delay_(delay) {}
  model::VisualTokens encode_video(const media::VideoSnippet& s) override {
    clock_->sleep_for(delay_);
    return inner_->encode_video(s);
  }

 private:
  std::shared_ptr<model::VideoEncoder> inner_;
  std::shared_ptr<Clock> clock_;
  double delay_;
};

class DelayedCaptioner final : public model::Captioner {
 public:
  DelayedCaptioner(std::shared_ptr<model::Captioner> inner, std::shared_ptr<Clock> clock, double delay)
      : inner_(std::move(inner)), clock_(std::move(clock)), delay_(delay) {}
  std::string caption(const media::VideoSnippet& s) override {
    clock_->sleep_for(delay_);
    return inner_->caption(s);
  }

 private:
  std::shared_ptr<model::Captioner> inner_;
  std::shared_ptr<Clock> clock_;
  double delay_;
};

class DelayedModel final : public model::VisionLanguageModel {
 public:
  DelayedModel(std::shared_ptr<model::VisionLanguageModel> inner, std::shared_ptr<Clock> clock, double delay)
      : inner_(std::move(inner)), clock_(std::move(clock)), delay_(delay) {}
  model::Response respond(const model::ModelPrompt& p, const model::Intent& i,
                          const model::RespondContext& c) override {
    clock_->sleep_for(delay_);
    return inner_->respond(p, i, c);
  }

 private:
  std::shared_ptr<model::VisionLanguageModel> inner_;
  std::shared_ptr<Clock> clock_;
  double delay_;
};

class DelayedAsr final : public speech::AsrAdapter {
 public:
  DelayedAsr(std::shared_ptr<speech::AsrAdapter> inner, std::shared_ptr<Clock> clock, double delay)
      : inner_(std::move(inner)), clock_(std::move(clock)), delay_(delay) {}
  speech::Transcript transcribe(const speech::AsrRequest& r) override {
    clock_->sleep_for(delay_);
    return inner_->transcribe(r);
  }

 private:
  std::shared_ptr<speech::AsrAdapter> inner_;
  std::shared_ptr<Clock> clock_;
  double delay_;
};

class DelayedTts final : public speech::TtsAdapter {
 public:
  DelayedTts(std::shared_ptr<speech::TtsAdapter> inner, std::shared_ptr<Clock> clock, double delay)
      : inner_(std::move(inner)), clock_(std::move(clock)), delay_(delay) {}
  media::AudioChunk synthesize(std::string_view text) override {
    clock_->sleep_for(delay_);
    return inner_->synthesize(text);
  }

 private:
  std::shared_ptr<speech::TtsAdapter> inner_;
  std::shared_ptr<Clock> clock_;
  double delay_;
};

class DelayedPredictor final : public model::ActionPredictor {
 public:
  DelayedPredictor(std::shared_ptr<model::ActionPredictor> inner, std::shared_ptr<Clock> clock, double delay)
      : inner_(std::move(inner)), clock_(std::move(clock)), delay_(delay) {}
  model::GeneratedClipRef predict(const media::VideoSnippet& s, std::string_view i) override {
    clock_->sleep_for(delay_);
    return inner_->predict(s, i);
  }

 private:
  std::shared_ptr<model::ActionPredictor> inner_;
  std::shared_ptr<Clock> clock_;
  double delay_;
};

class DelayedRetriever final : public model::VideoRetriever {
 public:
  DelayedRetriever(std::shared_ptr<model::VideoRetriever> inner, std::shared_ptr<Clock> clock, double delay)
      : inner_(std::move(inner)), clock_(std::move(clock)), delay_(delay) {}
  std::vector<model::RetrievedVideo> retrieve(std::string_view q, std::size_t k) override {
    clock_->sleep_for(delay_);
    return inner_->retrieve(q, k);
  }

 private:
  std::shared_ptr<model::VideoRetriever> inner_;
  std::shared_ptr<Clock> clock_;
  double delay_;
};

/// Wraps a mock adapter in its Delayed decorator when the config asks for a cost.
template <typename Delayed, typename Base>
std::shared_ptr<Base> with_delay(std::shared_ptr<Base> mock, const AdapterConfig& cfg,
                                 const std::shared_ptr<Clock>& clock) {
  if (cfg.mock_delay_s <= 0.0) return mock;
  return std::make_shared<Delayed>(std::move(mock), clock, cfg.mock_delay_s);
}

std::shared_ptr<model::VideoRetriever> make_retriever(const Config& config) {
  std::shared_ptr<const retrieval::VectorIndex> index;
  if (!config.retrieval_index.empty()) {
    index = std::make_shared<retrieval::VectorIndex>(retrieval::VectorIndex::load(config.retrieval_index));
  } else {
    std::vector<retrieval::EmbeddingRecord> records;
    if (!config.retrieval_catalog.empty()) {
      retrieval::CaptionVideoEmbedder embedder;
      for (const auto& row : read_json_lines(config.retrieval_catalog)) {
        try {
          records.push_back(embedder.embed(row.at("id").get<std::uint64_t>(), row.at("uri").get<std::string>(),
                                           row.at("caption").get<std::string>()));
        } catch (const nlohmann::json::exception& e) {
          fail(ErrorCode::SchemaViolation, std::string("retrieval catalog: ") + e.what());
        }
      }
    } else {
      records = builtin_catalog();
    }
    if (config.embedder.kind == "http") {
      fail(ErrorCode::PreconditionViolation, "an http embedder needs a prebuilt retrieval.index");
    }
    index = std::make_shared<retrieval::VectorIndex>(retrieval::VectorIndex::build(records));
  }
  std::shared_ptr<retrieval::TextEmbedder> embedder;
  if (config.embedder.kind == "http") {
    embedder = std::make_shared<retrieval::HttpTextEmbedder>(config.embedder.endpoint, index->dim());
  } else {
    embedder = std::make_shared<retrieval::HashingTextEmbedder>(index->dim());
  }
  return std::make_shared<IndexRetriever>(std::move(index), std::move(embedder));
}

}  // namespace

DiffusionPredictor::DiffusionPredictor(Options options)
    : options_(std::move(options)), schedule_(generation::make_schedule()) {
  require(options_.vae_factor >= 1, "vae_factor must be >= 1");
  require(options_.max_side >= options_.vae_factor, "max_side must be >= vae_factor");
}

model::GeneratedClipRef DiffusionPredictor::predict(const media::VideoSnippet& snippet, std::string_view instruction) {
  require(!snippet.frames.empty(), "cannot predict from an empty snippet");
  const auto frame = prepare_frame(*snippet.frames.back(), options_.vae_factor, options_.max_side);
  generation::DownsamplingVae vae(options_.vae_factor);
  const auto first = vae.encode(generation::frame_to_tensor(frame));
  generation::GaussianOracleDenoiser denoiser(broadcast_frames(first, options_.sample.frames), options_.spread,
                                              schedule_);
  auto sample = options_.sample;
  if (options_.salt_seed) sample.seed ^= text::fnv1a(instruction);
  auto video = generation::ddim_sample(denoiser, vae, first, instruction, schedule_, sample);

  std::filesystem::create_directories(options_.clip_dir);
  char name[64];
  std::snprintf(name, sizeof name, "clip-%04llu-%016llx.vnci", static_cast<unsigned long long>(++counter_),
                static_cast<unsigned long long>(sample.seed));
  generation::write_clip(options_.clip_dir / name, video);
  return {std::string(kUriPrefix) + name, video.duration_s};
}

model::GeneratedClipRef HttpActionPredictor::predict(const media::VideoSnippet& snippet,
                                                     std::string_view instruction) {
  require(!snippet.frames.empty(), "cannot predict from an empty snippet");
  const auto& f = *snippet.frames.back();
  nlohmann::json body = {{"instruction", std::string(instruction)},
                         {"width", f.width},
                         {"height", f.height},
                         {"frame_base64", text::base64_encode(f.pixels)}};
  auto reply = post_json(endpoint_, body, ErrorCode::ModelUnavailable);
  try {
    model::GeneratedClipRef ref{reply.at("uri").get<std::string>(), reply.at("duration_s").get<double>()};
    if (ref.uri.empty() || !(ref.duration_s >= 0.0)) fail(ErrorCode::ModelUnavailable, "invalid generator reply");
    return ref;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ModelUnavailable, std::string("malformed generator reply: ") + e.what());
  }
}

IndexRetriever::IndexRetriever(std::shared_ptr<const retrieval::VectorIndex> index,
                               std::shared_ptr<retrieval::TextEmbedder> embedder)
    : index_(std::move(index)), embedder_(std::move(embedder)) {
  require(index_ && embedder_, "retriever needs an index and an embedder");
  if (embedder_->dim() != index_->dim()) fail(ErrorCode::DimensionMismatch, "embedder and index dims differ");
}

std::vector<model::RetrievedVideo> IndexRetriever::retrieve(std::string_view query, std::size_t k) {
  const auto q = embedder_->embed_text(query);
  std::vector<model::RetrievedVideo> out;
  for (const auto& hit : index_->top_k(q, k)) {
    const auto* entry = index_->find(hit.id);
    out.push_back({hit.id, entry->uri, entry->caption, hit.score});
  }
  return out;
}

std::vector<retrieval::EmbeddingRecord> builtin_catalog(std::size_t dim) {
  static const char* const kCaptions[] = {
      "how to pour water into a cup",     "how to sharpen a pencil",         "how to cut paper with scissors",
      "how to open and close an umbrella", "how to brush teeth with a toothbrush", "how to shuffle playing cards",
      "how to use a calculator",          "how to hold a pen correctly",     "how to clean a computer mouse",
      "how to wind up a toy car",         "how to make pour over coffee",    "how to fold a paper airplane",
  };
  retrieval::CaptionVideoEmbedder embedder(dim);
  std::vector<retrieval::EmbeddingRecord> out;
  std::uint64_t id = 1;
  for (const char* caption : kCaptions) {
    out.push_back(embedder.embed(id, "demo://howto/" + std::to_string(id), caption));
    ++id;
  }
  return out;
}

Adapters make_adapters(const Config& config, std::shared_ptr<Clock> clock, std::vector<model::PlanScript> plans) {
  require(clock != nullptr, "adapters need a clock");
  Adapters a;
  auto codebook = std::make_shared<model::LabelCodebook>();

  if (config.asr.kind == "http") {
    a.asr = std::make_shared<speech::HttpAsr>(config.asr.endpoint);
  } else {
    a.asr = with_delay<DelayedAsr, speech::AsrAdapter>(std::make_shared<speech::MockAsr>(), config.asr, clock);
  }
  if (config.tts.kind == "http") {
    a.tts = std::make_shared<speech::HttpTts>(config.tts.endpoint);
  } else {
    a.tts = with_delay<DelayedTts, speech::TtsAdapter>(std::make_shared<speech::MockTts>(), config.tts, clock);
  }
  if (config.encoder.kind == "http") {
    a.encoder = std::make_shared<model::HttpVideoEncoder>(config.encoder.endpoint);
  } else {
    a.encoder = with_delay<DelayedEncoder, model::VideoEncoder>(std::make_shared<model::MockVideoEncoder>(codebook),
                                                                config.encoder, clock);
  }
  if (config.captioner.kind == "http") {
    a.captioner = std::make_shared<model::HttpCaptioner>(config.captioner.endpoint);
  } else {
    a.captioner = with_delay<DelayedCaptioner, model::Captioner>(std::make_shared<model::MockCaptioner>(),
                                                                 config.captioner, clock);
  }

  if (config.generator.kind == "http") {
    a.predictor = std::make_shared<HttpActionPredictor>(config.generator.endpoint);
  } else {
    DiffusionPredictor::Options opt;
    opt.clip_dir = config.clip_dir;
    opt.sample.steps = config.gen_steps;
    opt.sample.frames = config.gen_frames;
    opt.sample.fps = config.gen_fps;
    opt.sample.seed = config.gen_seed;
    opt.vae_factor = config.vae_factor;
    opt.spread = config.gen_spread;
    opt.max_side = std::max<std::size_t>(256, config.vae_factor);
    a.predictor = with_delay<DelayedPredictor, model::ActionPredictor>(std::make_shared<DiffusionPredictor>(opt),
                                                                       config.generator, clock);
  }
  a.retriever = with_delay<DelayedRetriever, model::VideoRetriever>(make_retriever(config), config.embedder, clock);

  if (config.model.kind == "http") {
    a.model = std::make_shared<model::HttpVisionLanguageModel>(config.model.endpoint);
  } else {
    a.model = with_delay<DelayedModel, model::VisionLanguageModel>(
        std::make_shared<model::MockVisionLanguageModel>(codebook, std::move(plans), a.predictor, a.retriever),
        config.model, clock);
  }
  return a;
}

}  // namespace vinci::orchestrator
