#include "agentcf/agents.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentcf/bm25.hpp"
#include "agentcf/errors.hpp"
#include "agentcf/text.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

constexpr const char* kChoiceRetryNudge =
    "Your previous answer did not follow the required format. Please answer strictly in "
    "the format: Chosen CD: [Title of the selected CD]\nExplanation: [Detailed rationale "
    "behind your choice].";

std::string numbered_block(const std::vector<std::string>& entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out.push_back('\n');
    out += std::to_string(i + 1) + ". " + entries[i];
  }
  return out;
}

}  // namespace

SelectionOutcome select_pairwise(AgentContext& ctx, const std::string& user_short,
                                 const PairCandidate& first, const PairCandidate& second,
                                 int positive_position) {
  if (first.item_id == second.item_id) {
    throw DataError("select_pairwise: candidates must be distinct");
  }
  if (positive_position != 1 && positive_position != 2) {
    throw DataError("select_pairwise: positive position must be 1 or 2");
  }

  const std::string prompt = render(ctx.templates.get("user_selection"),
                                    {{"user_memory", user_short},
                                     {"first_memory", first.memory},
                                     {"second_memory", second.memory}});
  ChatRequest req = ChatRequest::make(TaskKind::Selection, prompt);
  ChatResponse resp = ctx.gateway.complete(req);

  const std::vector<std::string> titles{first.title, second.title};
  ParsedChoice choice;
  try {
    choice = parse_choice(resp.text, titles);
  } catch (const UnparsableChoice&) {
    // One strict-format re-ask, then give up and let the caller skip the step.
    req.messages.push_back({Role::Assistant, resp.text.empty() ? "(empty)" : resp.text});
    req.messages.push_back({Role::User, kChoiceRetryNudge});
    resp = ctx.gateway.complete(req);
    choice = parse_choice(resp.text, titles);
  }

  SelectionOutcome outcome;
  const bool chose_first = choice.chosen_title == first.title;
  outcome.chosen_item = chose_first ? first.item_id : second.item_id;
  outcome.chosen_title = choice.chosen_title;
  outcome.explanation = choice.explanation;
  outcome.correct = (chose_first ? 1 : 2) == positive_position;
  return outcome;
}

ReflectionResult reflect_on_failure(AgentContext& ctx, const std::string& user_short,
                                    const PairCandidate& negative,
                                    const PairCandidate& positive,
                                    const SelectionOutcome& outcome) {
  if (outcome.correct) throw DataError("reflect_on_failure: outcome was correct");

  ReflectionResult result;
  result.new_user_short = user_short;
  result.new_positive_item_text = positive.memory;

  // User side. Candidates keep the training display order: negative first.
  const std::string user_prompt = render(ctx.templates.get("user_reflection"),
                                         {{"user_memory", user_short},
                                          {"first_memory", negative.memory},
                                          {"second_memory", positive.memory},
                                          {"chosen_title", outcome.chosen_title},
                                          {"positive_title", positive.title},
                                          {"explanation", outcome.explanation}});
  ChatResponse user_resp =
      ctx.gateway.complete(ChatRequest::make(TaskKind::Reflection, user_prompt));
  try {
    result.new_user_short = parse_self_intro(user_resp.text).text;
  } catch (const ParseError&) {
    result.user_parsed = false;
  }

  // Item side. The positive item is displayed first here, so the "first CD"
  // slot of the answer is the one we keep. The negative item's slot is
  // discarded: its memory is never modified.
  const std::string item_prompt = render(ctx.templates.get("item_reflection"),
                                         {{"user_memory", user_short},
                                          {"first_memory", positive.memory},
                                          {"second_memory", negative.memory},
                                          {"chosen_title", outcome.chosen_title},
                                          {"positive_title", positive.title},
                                          {"negative_title", negative.title},
                                          {"explanation", outcome.explanation}});
  ChatResponse item_resp =
      ctx.gateway.complete(ChatRequest::make(TaskKind::Reflection, item_prompt));
  try {
    result.new_positive_item_text = parse_item_descriptions(item_resp.text).first;
  } catch (const ParseError&) {
    result.item_parsed = false;
  }
  return result;
}

ConsolidationResult consolidate_on_success(AgentContext& ctx, const std::string& user_short,
                                           const PairCandidate& negative,
                                           const PairCandidate& positive) {
  const std::string prompt = render(ctx.templates.get("user_success"),
                                    {{"user_memory", user_short},
                                     {"first_memory", negative.memory},
                                     {"second_memory", positive.memory},
                                     {"positive_title", positive.title},
                                     {"negative_title", negative.title}});
  ChatResponse resp = ctx.gateway.complete(ChatRequest::make(TaskKind::Reflection, prompt));

  ConsolidationResult result;
  result.new_user_short = user_short;
  try {
    result.new_user_short = parse_self_intro(resp.text).text;
  } catch (const ParseError&) {
    result.parsed = false;
  }
  return result;
}

std::string_view to_string(ReviewPolarity polarity) {
  return polarity == ReviewPolarity::Positive ? "positive" : "negative";
}

ReviewLog::ReviewLog(std::filesystem::path path) : path_(std::move(path)) {
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
}

void ReviewLog::append(const Review& review) {
  json rec;
  rec["author"] = review.author_id;
  rec["item"] = review.item_id;
  rec["polarity"] = std::string(to_string(review.polarity));
  rec["text"] = review.text;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to review log: " + path_.string());
  out << rec.dump() << "\n";
}

std::vector<Review> ReviewLog::read_all(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open review log: " + path.string());
  std::vector<Review> reviews;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw SnapshotError("review log: bad record");
    Review review;
    review.author_id = rec.at("author").get<std::string>();
    review.item_id = rec.at("item").get<std::string>();
    review.polarity = rec.at("polarity").get<std::string>() == "negative"
                          ? ReviewPolarity::Negative
                          : ReviewPolarity::Positive;
    review.text = rec.at("text").get<std::string>();
    reviews.push_back(std::move(review));
  }
  return reviews;
}

std::string write_review(AgentContext& ctx, const std::string& user_short,
                         const std::string& item_memory, ReviewPolarity polarity,
                         std::size_t max_words) {
  const char* name =
      polarity == ReviewPolarity::Positive ? "review_positive" : "review_negative";
  const std::string prompt = render(ctx.templates.get(name), {{"user_memory", user_short},
                                                              {"item_memory", item_memory}});
  ChatResponse resp = ctx.gateway.complete(ChatRequest::make(TaskKind::Auxiliary, prompt));
  std::string review = trim(resp.text);
  if (review.empty()) throw GatewayError("empty review completion");
  if (max_words > 0 && count_words(review) > max_words) {
    std::istringstream in(review);
    std::string word, shortened;
    std::size_t n = 0;
    while (in >> word && n < max_words) {
      if (n++) shortened.push_back(' ');
      shortened += word;
    }
    review = shortened;
  }
  return review;
}

ReviewDecision decide_with_reviews(AgentContext& ctx, const std::string& user_short,
                                   const std::string& item_title,
                                   const std::string& item_memory,
                                   const std::vector<std::string>& reviews) {
  ReviewDecision decision;
  const std::string before_prompt = render(ctx.templates.get("decide_no_reviews"),
                                           {{"user_memory", user_short},
                                            {"item_title", item_title},
                                            {"item_memory", item_memory}});
  ChatRequest before_req = ChatRequest::make(TaskKind::Auxiliary, before_prompt);
  ChatResponse before_resp = ctx.gateway.complete(before_req);
  try {
    decision.before = parse_yes_no(before_resp.text);
  } catch (const ParseError&) {
    decision.valid = false;
    return decision;
  }

  if (reviews.empty()) {
    decision.after = decision.before;
    return decision;
  }

  const std::string after_prompt =
      render(ctx.templates.get("decide_with_reviews"), {{"reviews", numbered_block(reviews)}});
  ChatRequest after_req = before_req;
  after_req.messages.push_back({Role::Assistant, before_resp.text});
  after_req.messages.push_back({Role::User, after_prompt});
  ChatResponse after_resp = ctx.gateway.complete(after_req);
  try {
    decision.after = parse_yes_no(after_resp.text);
  } catch (const ParseError&) {
    decision.valid = false;
    return decision;
  }
  decision.attitude_changed = decision.before.choice != decision.after.choice;
  return decision;
}

std::vector<std::string> select_warmup_neighbors(const ItemIdentity& cold,
                                                 const std::vector<ItemIdentity>& popular,
                                                 WarmupSimilarity mode, std::size_t k,
                                                 std::string_view noun) {
  std::vector<std::string> texts;
  texts.reserve(popular.size());
  for (const auto& identity : popular) texts.push_back(render_identity(identity, noun));
  Bm25Index index(texts);
  auto scores = index.scores(render_identity(cold, noun));

  std::vector<std::size_t> order(popular.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (mode == WarmupSimilarity::Distinct) std::reverse(order.begin(), order.end());

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < order.size() && ids.size() < k; ++i) {
    if (popular[order[i]].item_id == cold.item_id) continue;
    ids.push_back(popular[order[i]].item_id);
  }
  return ids;
}

std::string warmup_cold_item(AgentContext& ctx, const ItemIdentity& cold,
                             const std::vector<std::string>& neighbor_memories,
                             std::string_view noun) {
  const std::string identity_text = render_identity(cold, noun);
  if (neighbor_memories.empty()) return identity_text;

  const std::string prompt =
      render(ctx.templates.get("item_warmup"),
             {{"cold_identity", identity_text},
              {"neighbor_block", numbered_block(neighbor_memories)}});
  ChatResponse resp = ctx.gateway.complete(ChatRequest::make(TaskKind::Reflection, prompt));
  std::string adjusted = trim(resp.text);
  return adjusted.empty() ? identity_text : adjusted;
}

ParsedYesNo query_preference(AgentContext& ctx, const std::string& user_short,
                             const std::string& question) {
  const std::string prompt = render(ctx.templates.get("query_preference"),
                                    {{"user_memory", user_short}, {"question", question}});
  ChatResponse resp = ctx.gateway.complete(ChatRequest::make(TaskKind::Reflection, prompt));
  return parse_yes_no(resp.text);
}

}  // namespace agentcf
