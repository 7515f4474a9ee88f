#include <gtest/gtest.h>

#include <random>

#include "vinci/common/error.hpp"
#include "vinci/model/gateway.hpp"
#include "vinci/model/intent.hpp"

using namespace vinci;
using namespace vinci::model;

namespace {

media::VideoSnippet snippet_of(const std::vector<std::pair<std::string, std::string>>& labels, double end = 2.0,
                               std::uint8_t shade = 9) {
  media::VideoSnippet s;
  s.start = end - 2.0;
  s.end = end;
  s.complete = true;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    media::TimedFrame f;
    f.timestamp_us = media::from_seconds(s.start + 0.1 * static_cast<double>(i + 1));
    f.width = 4;
    f.height = 3;
    f.pixels.assign(36, shade);
    if (!labels[i].first.empty()) f.labels.push_back({labels[i].first, labels[i].second, 1.0});
    s.frames.push_back(std::make_shared<const media::TimedFrame>(std::move(f)));
  }
  return s;
}

std::shared_ptr<const VisualTokens> share(VisualTokens v) {
  return std::make_shared<const VisualTokens>(std::move(v));
}

}  // namespace

TEST(Intent, RuleTable) {
  auto g = classify_intent("when did I pick up the knife");
  EXPECT_EQ(g.kind, IntentKind::Ground);
  EXPECT_EQ(g.verb, "take");
  EXPECT_EQ(g.noun, "knife");

  auto r = classify_intent("show me a video of how to cut a tomato");
  EXPECT_EQ(r.kind, IntentKind::Retrieve);
  EXPECT_EQ(r.free_text, "cut a tomato");

  EXPECT_EQ(classify_intent("summarize what I did").kind, IntentKind::Summarize);
  EXPECT_EQ(classify_intent("List what I have done").kind, IntentKind::Summarize);
  EXPECT_EQ(classify_intent("can you plan my afternoon").kind, IntentKind::Plan);
  EXPECT_EQ(classify_intent("how do I fix this, step by step").kind, IntentKind::Plan);
  EXPECT_EQ(classify_intent("find a video about knots").kind, IntentKind::Retrieve);
  EXPECT_EQ(classify_intent("what will it look like if I open the lid").kind, IntentKind::Predict);
  EXPECT_EQ(classify_intent("demonstrate folding a shirt").kind, IntentKind::Predict);
  EXPECT_EQ(classify_intent("what is this").kind, IntentKind::Chat);
}

TEST(Intent, InteractWithMeansAnyVerb) {
  auto g = classify_intent("When did I interact with the cup?");
  EXPECT_EQ(g.kind, IntentKind::Ground);
  EXPECT_EQ(g.verb, std::nullopt);
  EXPECT_EQ(g.noun, "cup");
}

TEST(Intent, TotalAndDeterministic) {
  std::mt19937_64 rng(1);
  const std::vector<std::string> vocab = {"when", "did", "i", "show", "me", "video", "plan", "what", "will",
                                          "look", "like", "summarize", "cup", "the", "?", "step", "how", "do"};
  for (int i = 0; i < 3000; ++i) {
    std::string q = "x";
    for (int n = rng() % 10; n > 0; --n) q += " " + vocab[rng() % vocab.size()];
    ASSERT_EQ(classify_intent(q), classify_intent(q));
  }
}

TEST(Encoder, LabeledRowsCarryTheLabelCode) {
  auto book = std::make_shared<LabelCodebook>();
  MockVideoEncoder enc(book);
  auto s = snippet_of({{"take", "cup"}, {"take", "cup"}, {"take", "cup"}});
  auto tokens = enc.encode_video(s);
  EXPECT_EQ(tokens.n, 3u);
  EXPECT_EQ(tokens.d, 64u);
  const auto code = book->code({"take", "cup"});
  const auto mean = tokens.row_mean();
  for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(mean[k], code[k], 1e-7);
  EXPECT_EQ(book->decode(tokens.row(0)), (memory::ActionTokens{"take", "cup"}));
}

TEST(Encoder, DeterministicAndPixelSensitive) {
  auto book = std::make_shared<LabelCodebook>();
  MockVideoEncoder enc(book);
  auto a = snippet_of({{"", ""}, {"", ""}}, 2.0, 9);
  auto b = snippet_of({{"", ""}, {"", ""}}, 2.0, 9);
  auto c = snippet_of({{"", ""}, {"", ""}}, 2.0, 10);
  EXPECT_EQ(enc.encode_video(a), enc.encode_video(b));
  EXPECT_NE(enc.encode_video(a), enc.encode_video(c));
  for (float v : enc.encode_video(a).values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Encoder, EmptySnippetIsPreconditionViolation) {
  MockVideoEncoder enc(std::make_shared<LabelCodebook>());
  try {
    enc.encode_video({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(Captioner, MajorityLabelOrUnknown) {
  MockCaptioner cap;
  EXPECT_EQ(cap.caption(snippet_of({{"pour", "water"}, {"pour", "water"}, {"take", "cup"}})), "pour water");
  EXPECT_EQ(cap.caption(snippet_of({{"pour", "water"}, {"take", "cup"}})), "take cup");
  EXPECT_EQ(cap.caption(snippet_of({{"", ""}})), MockCaptioner::kUnknown);
}

TEST(Prompt, ImageThenMemoryThenInstruction) {
  auto v = share(VisualTokens{60, 64, std::vector<float>(60 * 64, 0.5f)});
  auto empty = assemble_prompt(v, "", "what is this");
  EXPECT_EQ(empty.image_slots, 1u);
  EXPECT_EQ(empty.text, "<image>\nwhat is this");
  EXPECT_EQ(empty.instruction_length, 3u);
  EXPECT_EQ(empty.visual->n, 60u);

  auto full = assemble_prompt(v, "[2.0s] take cup\n[6.0s] put cup", "what did I do");
  const auto img = full.text.find("<image>");
  const auto m1 = full.text.find("[2.0s] take cup");
  const auto m2 = full.text.find("[6.0s] put cup");
  const auto ins = full.text.find("what did I do");
  EXPECT_LT(img, m1);
  EXPECT_LT(m1, m2);
  EXPECT_LT(m2, ins);

  EXPECT_THROW(assemble_prompt(v, "", "  "), Error);
}

TEST(Respond, GroundListsEveryHit) {
  auto book = std::make_shared<LabelCodebook>();
  MockVisionLanguageModel model(book);
  memory::MemoryBank bank;
  bank.store(memory::MemoryEntry::make("take cup", 3.0));
  bank.store(memory::MemoryEntry::make("take pen", 9.0));
  bank.store(memory::MemoryEntry::make("take cup", 40.0));
  auto snip = snippet_of({{"", ""}}, 41.0);
  auto intent = classify_intent("when did I take the cup");
  auto prompt = assemble_prompt(share(MockVideoEncoder(book).encode_video(snip)), bank.render_context(), "when did I take the cup");
  auto r = model.respond(prompt, intent, {bank, snip, 41.0});
  EXPECT_EQ(r.text, format_grounding(bank.ground("take", "cup")));
  EXPECT_NE(r.text.find("3.0s"), std::string::npos);
  EXPECT_NE(r.text.find("40.0s"), std::string::npos);
  EXPECT_EQ(r.text.find("9.0s"), std::string::npos);

  auto none = model.respond(prompt, classify_intent("when did I take the umbrella"), {bank, snip, 41.0});
  EXPECT_EQ(none.text, MockVisionLanguageModel::kNotFound);
}

TEST(Respond, GroundReportsExactlyTheBankHits) {
  std::mt19937_64 rng(17);
  auto book = std::make_shared<LabelCodebook>();
  MockVisionLanguageModel model(book);
  const std::vector<std::string> nouns = {"cup", "pen", "box"};
  const std::vector<std::string> verbs = {"take", "put"};
  for (int trial = 0; trial < 200; ++trial) {
    memory::MemoryBank bank(1 + rng() % 12);
    for (int i = 0; i < 20; ++i) {
      bank.store(memory::MemoryEntry::make(verbs[rng() % 2] + " " + nouns[rng() % 3], 2.0 + 4.0 * i));
    }
    const auto verb = verbs[rng() % 2];
    const auto noun = nouns[rng() % 3];
    const auto q = "when did I " + verb + " the " + noun;
    auto snip = snippet_of({{"", ""}}, 100.0);
    auto prompt = assemble_prompt(share(VisualTokens{1, 1, {0.f}}), "", q);
    auto r = model.respond(prompt, classify_intent(q), {bank, snip, 100.0});
    const auto hits = bank.ground(verb, noun);
    EXPECT_EQ(r.text, hits.empty() ? std::string(MockVisionLanguageModel::kNotFound) : format_grounding(hits));
  }
}

TEST(Respond, SummarizeChatPlan) {
  auto book = std::make_shared<LabelCodebook>();
  MockVisionLanguageModel model(book, {{5.0, {"rinse the cup", "dry the cup"}}});
  memory::MemoryBank bank;
  auto snip = snippet_of({{"hold", "pen"}, {"hold", "pen"}}, 2.0);
  auto tokens = share(MockVideoEncoder(book).encode_video(snip));

  auto sum = model.respond(assemble_prompt(tokens, "", "summarize what I did"),
                           classify_intent("summarize what I did"), {bank, snip, 2.0});
  EXPECT_EQ(sum.text, MockVisionLanguageModel::kNoActivity);

  auto chat = model.respond(assemble_prompt(tokens, "", "what am I doing"), classify_intent("what am I doing"),
                            {bank, snip, 2.0});
  EXPECT_NE(chat.text.find("hold"), std::string::npos);
  EXPECT_NE(chat.text.find("pen"), std::string::npos);

  auto early = model.respond(assemble_prompt(tokens, "", "plan my day"), classify_intent("plan my day"),
                             {bank, snip, 2.0});
  EXPECT_EQ(early.text.find("rinse"), std::string::npos);
  auto plan = model.respond(assemble_prompt(tokens, "", "plan my day"), classify_intent("plan my day"),
                            {bank, snip, 6.0});
  EXPECT_EQ(plan.text, "rinse the cup\ndry the cup");
}

TEST(Respond, PredictAndRetrieveDelegate) {
  struct FixedPredictor : ActionPredictor {
    GeneratedClipRef predict(const media::VideoSnippet&, std::string_view) override { return {"/clips/x", 2.0}; }
  };
  struct FixedRetriever : VideoRetriever {
    std::vector<RetrievedVideo> retrieve(std::string_view, std::size_t k) override {
      return std::vector<RetrievedVideo>(k, RetrievedVideo{1, "demo://1", "cut a tomato", 1.0});
    }
  };
  auto book = std::make_shared<LabelCodebook>();
  MockVisionLanguageModel model(book, {}, std::make_shared<FixedPredictor>(), std::make_shared<FixedRetriever>());
  memory::MemoryBank bank;
  auto snip = snippet_of({{"", ""}});
  auto tokens = share(MockVideoEncoder(book).encode_video(snip));
  const std::string pq = "what will it look like if I open the lid";
  auto p = model.respond(assemble_prompt(tokens, "", pq), classify_intent(pq), {bank, snip, 2.0});
  ASSERT_TRUE(p.generated);
  EXPECT_EQ(p.generated->uri, "/clips/x");
  const std::string rq = "show me a video of how to cut a tomato";
  auto r = model.respond(assemble_prompt(tokens, "", rq), classify_intent(rq), {bank, snip, 2.0});
  EXPECT_EQ(r.retrieved.size(), MockVisionLanguageModel::kRetrieveK);

  MockVisionLanguageModel bare(book);
  try {
    bare.respond(assemble_prompt(tokens, "", pq), classify_intent(pq), {bank, snip, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelUnavailable);
  }
}
