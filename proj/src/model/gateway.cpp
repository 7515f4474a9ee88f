#include "vinci/model/gateway.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"

namespace vinci::model {

namespace {

std::vector<float> seeded_unit_vector(std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (double& x : v) {
    x = normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

std::vector<std::uint8_t> float_bytes(const std::vector<float>& values) {
  std::vector<std::uint8_t> out(values.size() * sizeof(float));
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

// At most kPixelSamples evenly spaced bytes, so encoding cost does not grow
// with resolution.
constexpr std::size_t kPixelSamples = 4096;

std::vector<std::uint8_t> sampled_pixels(const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() <= kPixelSamples) return pixels;
  std::vector<std::uint8_t> out(kPixelSamples);
  const std::size_t stride = pixels.size() / kPixelSamples;
  for (std::size_t i = 0; i < kPixelSamples; ++i) out[i] = pixels[i * stride];
  return out;
}

nlohmann::json snippet_request(const media::VideoSnippet& snippet) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : snippet.frames) frames.push_back(text::base64_encode(f->pixels));
  return {{"width", snippet.frames.front()->width},
          {"height", snippet.frames.front()->height},
          {"frames_base64", frames}};
}

}  // namespace

std::vector<double> VisualTokens::row_mean() const {
  std::vector<double> mean(d, 0.0);
  if (n == 0) return mean;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = row(i);
    for (std::size_t k = 0; k < d; ++k) mean[k] += r[k];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  return mean;
}

std::vector<float> LabelCodebook::code(const memory::ActionTokens& label) {
  std::lock_guard lock(mutex_);
  auto it = codes_.find(label);
  if (it == codes_.end()) {
    it = codes_.emplace(label, seeded_unit_vector(text::fnv1a(label.verb + " " + label.noun), dim_)).first;
  }
  return it->second;
}

std::optional<memory::ActionTokens> LabelCodebook::decode(std::span<const float> row) const {
  std::lock_guard lock(mutex_);
  for (const auto& [label, code] : codes_) {
    if (code.size() == row.size() && std::equal(code.begin(), code.end(), row.begin())) return label;
  }
  return std::nullopt;
}

VisualTokens MockVideoEncoder::encode_video(const media::VideoSnippet& snippet) {
  require(!snippet.frames.empty(), "cannot encode an empty snippet");
  VisualTokens tokens;
  tokens.n = snippet.frames.size();
  tokens.d = codebook_->dim();
  tokens.values.reserve(tokens.n * tokens.d);
  for (const auto& frame : snippet.frames) {
    std::vector<float> row;
    if (!frame->labels.empty()) {
      row = codebook_->code({frame->labels.front().verb, frame->labels.front().noun});
    } else {
      std::uint64_t h = text::fnv1a(sampled_pixels(frame->pixels));
      h = text::fnv1a(std::to_string(frame->width) + "x" + std::to_string(frame->height), h);
      row = seeded_unit_vector(h, tokens.d);
    }
    tokens.values.insert(tokens.values.end(), row.begin(), row.end());
  }
  return tokens;
}

VisualTokens HttpVideoEncoder::encode_video(const media::VideoSnippet& snippet) {
  require(!snippet.frames.empty(), "cannot encode an empty snippet");
  auto reply = post_json(endpoint_, snippet_request(snippet), ErrorCode::EncoderUnavailable);
  try {
    VisualTokens t;
    t.n = reply.at("n").get<std::size_t>();
    t.d = reply.at("d").get<std::size_t>();
    t.values = reply.at("values").get<std::vector<float>>();
    if (t.n == 0 || t.d == 0 || t.values.size() != t.n * t.d) {
      fail(ErrorCode::EncoderUnavailable, "encoder reply has inconsistent shape");
    }
    for (float v : t.values) {
      if (!std::isfinite(v)) fail(ErrorCode::EncoderUnavailable, "encoder reply has non-finite values");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::EncoderUnavailable, std::string("malformed encoder reply: ") + e.what());
  }
}

std::string MockCaptioner::caption(const media::VideoSnippet& snippet) {
  std::map<memory::ActionTokens, std::pair<std::size_t, std::size_t>> votes;  // count, last index
  for (std::size_t i = 0; i < snippet.frames.size(); ++i) {
    const auto& labels = snippet.frames[i]->labels;
    if (labels.empty()) continue;
    auto& v = votes[{labels.front().verb, labels.front().noun}];
    ++v.first;
    v.second = i;
  }
  if (votes.empty()) return std::string(kUnknown);
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    if (it->second.first > best->second.first ||
        (it->second.first == best->second.first && it->second.second > best->second.second)) {
      best = it;
    }
  }
  return best->first.verb + " " + best->first.noun;
}

std::string HttpCaptioner::caption(const media::VideoSnippet& snippet) {
  require(!snippet.frames.empty(), "cannot caption an empty snippet");
  auto reply = post_json(endpoint_, snippet_request(snippet), ErrorCode::ModelUnavailable);
  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string() ||
      text::trim(reply["text"].get<std::string>()).empty()) {
    fail(ErrorCode::ModelUnavailable, "captioner reply lacks text");
  }
  return std::string(text::trim(reply["text"].get<std::string>()));
}

ModelPrompt assemble_prompt(std::shared_ptr<const VisualTokens> visual, std::string memory_context,
                            std::string instruction) {
  require(!text::trim(instruction).empty(), "instruction must be nonempty");
  ModelPrompt p;
  p.image_slots = 1;
  p.visual = std::move(visual);
  p.memory_context = std::move(memory_context);
  p.instruction = std::move(instruction);
  p.instruction_length = text::word_count(p.instruction);
  p.text = std::string(kImageToken) + "\n";
  if (!p.memory_context.empty()) p.text += p.memory_context + "\n";
  p.text += p.instruction;
  return p;
}

std::string format_grounding(const std::vector<memory::GroundingHit>& hits) {
  if (hits.empty()) return std::string(MockVisionLanguageModel::kNotFound);
  std::string out;
  for (const auto& h : hits) {
    if (!out.empty()) out += '\n';
    out += "You did " + h.description + " at " + text::format_seconds(h.timestamp) + "s";
  }
  return out;
}

std::string format_summary(const std::vector<memory::MemoryEntry>& entries) {
  if (entries.empty()) return std::string(MockVisionLanguageModel::kNoActivity);
  std::string out;
  for (const auto& e : entries) {
    if (!out.empty()) out += '\n';
    out += "- " + e.description + " at " + text::format_seconds(e.timestamp) + "s";
  }
  return out;
}

MockVisionLanguageModel::MockVisionLanguageModel(std::shared_ptr<LabelCodebook> codebook, std::vector<PlanScript> plans,
                                                 std::shared_ptr<ActionPredictor> predictor,
                                                 std::shared_ptr<VideoRetriever> retriever)
    : codebook_(std::move(codebook)),
      plans_(std::move(plans)),
      predictor_(std::move(predictor)),
      retriever_(std::move(retriever)) {
  std::stable_sort(plans_.begin(), plans_.end(), [](const PlanScript& a, const PlanScript& b) { return a.t < b.t; });
}

Response MockVisionLanguageModel::respond(const ModelPrompt& prompt, const Intent& intent,
                                          const RespondContext& context) {
  require(!prompt.instruction.empty(), "prompt has no instruction");
  Response r;
  r.intent = intent;
  switch (intent.kind) {
    case IntentKind::Ground: {
      if (!intent.noun) {
        r.text = std::string(kNotFound);
      } else {
        r.text = format_grounding(context.bank.ground(intent.verb, *intent.noun));
      }
      break;
    }
    case IntentKind::Summarize:
      r.text = format_summary(context.bank.summarize(5));
      break;
    case IntentKind::Plan: {
      const PlanScript* plan = nullptr;
      for (const auto& p : plans_) {
        if (p.t <= context.query_time) plan = &p;
      }
      if (!plan || plan->steps.empty()) {
        r.text = "I don't have a plan for that yet";
      } else {
        for (const auto& step : plan->steps) {
          if (!r.text.empty()) r.text += '\n';
          r.text += step;
        }
      }
      break;
    }
    case IntentKind::Predict: {
      if (!predictor_) fail(ErrorCode::ModelUnavailable, "no generation backend configured");
      r.generated = predictor_->predict(context.snippet, intent.free_text);
      r.text = "Here is a " + text::format_seconds(r.generated->duration_s) +
               "-second demonstration of: " + intent.free_text;
      break;
    }
    case IntentKind::Retrieve: {
      if (!retriever_) fail(ErrorCode::ModelUnavailable, "no retrieval backend configured");
      r.retrieved = retriever_->retrieve(intent.free_text, kRetrieveK);
      r.text = "Here are " + std::to_string(r.retrieved.size()) + " videos for: " + intent.free_text;
      break;
    }
    case IntentKind::Chat: {
      std::optional<memory::ActionTokens> label;
      if (prompt.visual && prompt.visual->n > 0) label = codebook_->decode(prompt.visual->row(prompt.visual->n - 1));
      if (label) {
        r.text = "Right now you are doing: " + label->verb + " " + label->noun + ". You asked: " + prompt.instruction;
      } else {
        r.text = "I can't make out what you are doing right now. You asked: " + prompt.instruction;
      }
      break;
    }
  }
  return r;
}

Response HttpVisionLanguageModel::respond(const ModelPrompt& prompt, const Intent& intent,
                                          const RespondContext& /*context*/) {
  nlohmann::json visual = nullptr;
  if (prompt.visual) {
    visual = {{"n", prompt.visual->n},
              {"d", prompt.visual->d},
              {"values_base64", text::base64_encode(float_bytes(prompt.visual->values))}};
  }
  nlohmann::json body = {{"prompt", prompt.text},
                         {"instruction", prompt.instruction},
                         {"memory", prompt.memory_context},
                         {"intent", std::string(to_string(intent.kind))},
                         {"visual", visual}};
  auto reply = post_json(endpoint_, body, ErrorCode::ModelUnavailable);
  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
    fail(ErrorCode::ModelUnavailable, "model reply lacks a text field");
  }
  Response r;
  r.text = reply["text"].get<std::string>();
  r.intent = intent;
  if (reply.contains("intent") && reply["intent"].is_string()) {
    if (auto kind = intent_from_string(reply["intent"].get<std::string>())) r.intent.kind = *kind;
  }
  if (r.text.empty()) fail(ErrorCode::ModelUnavailable, "model returned empty text");
  return r;
}

}  // namespace vinci::model
