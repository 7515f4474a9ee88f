#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vinci/common/remote.hpp"
#include "vinci/media/types.hpp"
#include "vinci/memory/memory_bank.hpp"
#include "vinci/model/intent.hpp"

namespace vinci::model {

/// n x d visual features, one row per spatiotemporal patch.
struct VisualTokens {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<float> values;  // row-major

  std::span<const float> row(std::size_t i) const { return {values.data() + i * d, d}; }
  std::vector<double> row_mean() const;
  bool operator==(const VisualTokens&) const = default;
};

class VideoEncoder {
 public:
  virtual ~VideoEncoder() = default;
  /// Throws PreconditionViolation on an empty snippet, EncoderUnavailable on adapter failure.
  virtual VisualTokens encode_video(const media::VideoSnippet& snippet) = 0;
};

/// Fixed embedding per (verb, noun) label, shared by the mock encoder (which
/// writes codes) and the mock model (which reads them back).
class LabelCodebook {
 public:
  explicit LabelCodebook(std::size_t dim = 64) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::vector<float> code(const memory::ActionTokens& label);
  std::optional<memory::ActionTokens> decode(std::span<const float> row) const;

 private:
  std::size_t dim_;
  mutable std::mutex mutex_;
  std::map<memory::ActionTokens, std::vector<float>> codes_;
};

/// n = frame count, d = codebook dim. Labeled frames map to their label's
/// code; unlabeled frames to a unit vector seeded by a hash of the pixels.
class MockVideoEncoder final : public VideoEncoder {
 public:
  explicit MockVideoEncoder(std::shared_ptr<LabelCodebook> codebook) : codebook_(std::move(codebook)) {}
  VisualTokens encode_video(const media::VideoSnippet& snippet) override;

 private:
  std::shared_ptr<LabelCodebook> codebook_;
};

/// Request {"width", "height", "frames_base64": [...]} -> reply {"n", "d", "values"}.
class HttpVideoEncoder final : public VideoEncoder {
 public:
  explicit HttpVideoEncoder(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  VisualTokens encode_video(const media::VideoSnippet& snippet) override;

 private:
  RemoteEndpoint endpoint_;
};

/// Describes the action in a snapshot; output becomes a memory entry.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string caption(const media::VideoSnippet& snippet) = 0;
};

/// "verb noun" of the most frequent label in the snippet (latest wins ties),
/// or "unknown activity" when no frame is labeled.
class MockCaptioner final : public Captioner {
 public:
  static constexpr std::string_view kUnknown = "unknown activity";
  std::string caption(const media::VideoSnippet& snippet) override;
};

/// Request as HttpVideoEncoder -> reply {"text"}.
class HttpCaptioner final : public Captioner {
 public:
  explicit HttpCaptioner(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string caption(const media::VideoSnippet& snippet) override;

 private:
  RemoteEndpoint endpoint_;
};

inline constexpr std::string_view kImageToken = "<image>";

struct ModelPrompt {
  std::size_t image_slots = 1;
  std::shared_ptr<const VisualTokens> visual;
  std::string memory_context;
  std::string instruction;
  std::size_t instruction_length = 0;  // whitespace tokens
  std::string text;                    // "<image>\n[memory\n]instruction"
};

/// Image block, then memory context (omitted when empty), then instruction.
ModelPrompt assemble_prompt(std::shared_ptr<const VisualTokens> visual, std::string memory_context,
                            std::string instruction);

struct GeneratedClipRef {
  std::string uri;
  double duration_s = 0.0;
  bool operator==(const GeneratedClipRef&) const = default;
};

struct RetrievedVideo {
  std::uint64_t id = 0;
  std::string uri;
  std::string caption;
  double score = 0.0;
  bool operator==(const RetrievedVideo&) const = default;
};

struct Response {
  std::string text;
  Intent intent;
  std::optional<GeneratedClipRef> generated;
  std::vector<RetrievedVideo> retrieved;
  double latency_s = 0.0;
};

class ActionPredictor {
 public:
  virtual ~ActionPredictor() = default;
  virtual GeneratedClipRef predict(const media::VideoSnippet& snippet, std::string_view instruction) = 0;
};

class VideoRetriever {
 public:
  virtual ~VideoRetriever() = default;
  virtual std::vector<RetrievedVideo> retrieve(std::string_view query, std::size_t k) = 0;
};

/// A step list the mock planner recites once stream time reaches `t`.
struct PlanScript {
  double t = 0.0;
  std::vector<std::string> steps;
};

struct RespondContext {
  const memory::MemoryBank& bank;
  const media::VideoSnippet& snippet;
  double query_time = 0.0;
};

class VisionLanguageModel {
 public:
  virtual ~VisionLanguageModel() = default;
  /// Throws ModelUnavailable (or the delegate's error) on failure.
  virtual Response respond(const ModelPrompt& prompt, const Intent& intent, const RespondContext& context) = 0;
};

/// Scripted stand-in that honours the router's intent strictly.
class MockVisionLanguageModel final : public VisionLanguageModel {
 public:
  static constexpr std::size_t kRetrieveK = 3;
  static constexpr std::string_view kNotFound = "I could not find that";
  static constexpr std::string_view kNoActivity = "No activity recorded yet";

  MockVisionLanguageModel(std::shared_ptr<LabelCodebook> codebook, std::vector<PlanScript> plans = {},
                          std::shared_ptr<ActionPredictor> predictor = nullptr,
                          std::shared_ptr<VideoRetriever> retriever = nullptr);

  Response respond(const ModelPrompt& prompt, const Intent& intent, const RespondContext& context) override;

 private:
  std::shared_ptr<LabelCodebook> codebook_;
  std::vector<PlanScript> plans_;
  std::shared_ptr<ActionPredictor> predictor_;
  std::shared_ptr<VideoRetriever> retriever_;
};

/// Forwards the full prompt; the service may override the routed intent.
/// Request {"prompt", "instruction", "memory", "intent", "visual": {"n","d","values_base64"}}
/// -> reply {"text", optional "intent"}.
class HttpVisionLanguageModel final : public VisionLanguageModel {
 public:
  explicit HttpVisionLanguageModel(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  Response respond(const ModelPrompt& prompt, const Intent& intent, const RespondContext& context) override;

 private:
  RemoteEndpoint endpoint_;
};

/// Ground answer lines: "You did <desc> at <t>s".
std::string format_grounding(const std::vector<memory::GroundingHit>& hits);
/// Summary lines: "- <desc> at <t>s".
std::string format_summary(const std::vector<memory::MemoryEntry>& entries);

}  // namespace vinci::model
