#include "agentcf/scripts.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <sstream>

#include "agentcf/errors.hpp"
#include "agentcf/text.hpp"

namespace agentcf {

namespace scriptutil {

std::string full_text(const ChatRequest& req) {
  std::string out;
  for (const auto& msg : req.messages) {
    if (!out.empty()) out.push_back('\n');
    out += msg.content;
  }
  return out;
}

std::string quoted_after(const std::string& text, const std::string& label) {
  std::size_t at = find_ci(text, label);
  if (at == std::string::npos) return {};
  std::size_t open = text.find('"', at + label.size());
  if (open == std::string::npos) return {};
  std::size_t close = text.find('"', open + 1);
  if (close == std::string::npos) return {};
  return text.substr(open + 1, close - open - 1);
}

PairMemories selection_candidates(const std::string& text) {
  PairMemories pair;
  std::size_t one = text.find("\"1. ");
  if (one == std::string::npos) return pair;
  std::size_t eol = text.find('\n', one);
  if (eol == std::string::npos) return pair;
  pair.first = text.substr(one + 4, eol - one - 4);

  std::size_t two = text.find("2. ", eol);
  if (two == std::string::npos) return pair;
  std::size_t end = text.find('\n', two);
  if (end == std::string::npos) end = text.size();
  pair.second = text.substr(two + 3, end - two - 3);
  // Trim the closing quote of the candidate block.
  while (!pair.second.empty() &&
         (pair.second.back() == '.' || pair.second.back() == '"')) {
    if (pair.second.back() == '"') {
      pair.second.pop_back();
      break;
    }
    if (pair.second.size() >= 2 && pair.second[pair.second.size() - 2] == '"') {
      pair.second.pop_back();  // trailing '".'
    } else {
      break;
    }
  }
  return pair;
}

std::string title_of_memory(const std::string& memory) {
  std::size_t open = memory.find('"');
  if (open != std::string::npos) {
    std::size_t close = memory.find('"', open + 1);
    if (close != std::string::npos && close > open + 1) {
      return memory.substr(open + 1, close - open - 1);
    }
  }
  return trim(memory);
}

std::vector<RankEntry> ranking_candidates(const std::string& text) {
  std::vector<RankEntry> entries;
  std::size_t marker = find_ci(text, "candidate CDs are listed as follows:");
  if (marker == std::string::npos) return entries;
  std::istringstream in(text.substr(marker));
  std::string line;
  std::getline(in, line);  // the marker line itself
  while (std::getline(in, line)) {
    std::string t = trim(line);
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i == 0 || i >= t.size() || t[i] != '.') {
      if (!entries.empty()) break;  // past the block
      continue;
    }
    std::size_t open = t.find('"', i);
    std::size_t close = open == std::string::npos ? std::string::npos : t.find('"', open + 1);
    if (open == std::string::npos || close == std::string::npos) continue;
    RankEntry entry;
    entry.title = t.substr(open + 1, close - open - 1);
    std::size_t colon = t.find(':', close);
    entry.text = colon == std::string::npos ? "" : trim(t.substr(colon + 1));
    entries.push_back(std::move(entry));
  }
  return entries;
}

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "this", "that", "with", "your", "from", "have", "please", "following",
      "format", "output", "should", "must", "note", "important", "these",
      "their", "them", "they", "when", "which", "would", "about", "based",
      "such", "make", "makes", "listed", "follows", "candidate", "candidates",
  };
  return words;
}

}  // namespace

std::vector<std::string> content_tokens(const std::string& text) {
  std::set<std::string> seen;
  for (auto& token : tokenize(text)) {
    if (token.size() >= 4 && !stopwords().contains(token)) seen.insert(std::move(token));
  }
  return {seen.begin(), seen.end()};
}

std::size_t overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> set_a(a.begin(), a.end());
  std::size_t n = 0;
  for (const auto& token : b) {
    if (set_a.contains(token)) ++n;
  }
  return n;
}

std::string sanitize(std::string text) {
  std::erase(text, '"');
  return text;
}

}  // namespace scriptutil

namespace {

using namespace scriptutil;

enum class PromptKind {
  Selection,
  SelfIntroUpdate,  // user reflection and success consolidation
  ItemUpdate,
  Ranking,
  YesNo,
  Review,
  Warmup,
  Other,
};

PromptKind classify(const std::string& text) {
  if (find_ci(text, "Chosen CD:") != std::string::npos) return PromptKind::Selection;
  if (find_ci(text, "My updated self-introduction:") != std::string::npos) {
    return PromptKind::SelfIntroUpdate;
  }
  if (find_ci(text, "The updated description of the first CD is:") != std::string::npos) {
    return PromptKind::ItemUpdate;
  }
  if (find_ci(text, "Ranked CDs:") != std::string::npos) return PromptKind::Ranking;
  if (find_ci(text, "Choice: [Yes / No]") != std::string::npos) return PromptKind::YesNo;
  if (find_ci(text, "write a review") != std::string::npos) return PromptKind::Review;
  if (find_ci(text, "adjusted description") != std::string::npos) return PromptKind::Warmup;
  return PromptKind::Other;
}

std::string echo_last(const ChatRequest& req) {
  return req.messages.empty() ? std::string{} : req.messages.back().content;
}

std::string chosen_response(const std::string& memory) {
  return "Chosen CD: " + title_of_memory(memory) +
         "\nExplanation: scripted choice based on the displayed candidates.";
}

std::string presentation_ranking(const std::vector<RankEntry>& entries, bool reversed) {
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  if (reversed) std::reverse(order.begin(), order.end());
  std::string out = "Ranked CDs:";
  for (std::size_t i = 0; i < order.size(); ++i) {
    out += "\n" + std::to_string(i + 1) + ". " + entries[order[i]].title;
  }
  return out;
}

/// Echo-style reflections: memories keep their content.
std::string echo_self_intro(const std::string& text) {
  std::string intro = quoted_after(text, "self-introduction");
  if (intro.empty()) intro = "I enjoy listening to CDs very much.";
  return "My updated self-introduction: " + intro;
}

std::string echo_item_descriptions(const std::string& text) {
  PairMemories pair = selection_candidates(text);
  return "The updated description of the first CD is: " + pair.first +
         "\nThe updated description of the second CD is: " + pair.second;
}

std::string echo_warmup(const std::string& text) {
  std::string identity = quoted_after(text, "identity information of your CD is as follows");
  return identity.empty() ? "A newly listed CD." : identity;
}

/// Baseline behavior shared by the position pickers.
std::string positional_response(const ChatRequest& req, bool second, bool reversed_ranking) {
  const std::string text = full_text(req);
  switch (classify(text)) {
    case PromptKind::Selection: {
      PairMemories pair = selection_candidates(text);
      return chosen_response(second ? pair.second : pair.first);
    }
    case PromptKind::SelfIntroUpdate:
      return echo_self_intro(text);
    case PromptKind::ItemUpdate:
      return echo_item_descriptions(text);
    case PromptKind::Ranking:
      return presentation_ranking(ranking_candidates(text), reversed_ranking);
    case PromptKind::YesNo:
      return "Choice: No\nExplanation: scripted default.";
    case PromptKind::Review:
      return "A scripted review of this CD.";
    case PromptKind::Warmup:
      return echo_warmup(text);
    case PromptKind::Other:
      return echo_last(req);
  }
  return echo_last(req);
}

std::string copy_phrases_response(const ChatRequest& req);

/// Keyword-affinity oracle: everything scores by content-token overlap
/// against the preference text in the prompt.
std::string keyword_response(const ChatRequest& req) {
  const std::string text = full_text(req);
  switch (classify(text)) {
    case PromptKind::Selection: {
      PairMemories pair = selection_candidates(text);
      const auto intro = content_tokens(quoted_after(text, "self-introduction"));
      const std::size_t s1 = overlap(intro, content_tokens(pair.first));
      const std::size_t s2 = overlap(intro, content_tokens(pair.second));
      return chosen_response(s2 > s1 ? pair.second : pair.first);
    }
    case PromptKind::Ranking: {
      auto entries = ranking_candidates(text);
      std::size_t marker = find_ci(text, "candidate CDs are listed as follows:");
      const auto query = content_tokens(text.substr(0, marker));
      std::vector<std::size_t> order(entries.size());
      std::iota(order.begin(), order.end(), 0);
      std::vector<std::size_t> scores(entries.size());
      for (std::size_t i = 0; i < entries.size(); ++i) {
        scores[i] = overlap(query, content_tokens(entries[i].title + " " + entries[i].text));
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      std::string out = "Ranked CDs:";
      for (std::size_t i = 0; i < order.size(); ++i) {
        out += "\n" + std::to_string(i + 1) + ". " + entries[order[i]].title;
      }
      return out;
    }
    case PromptKind::YesNo: {
      std::string intro = quoted_after(text, "self-introduction");
      if (intro.empty()) intro = quoted_after(text, "self-description");
      std::size_t intro_at = find_ci(text, intro.empty() ? "\n" : intro);
      const std::string rest =
          intro_at == std::string::npos ? text : text.substr(intro_at + intro.size());
      const bool yes = overlap(content_tokens(intro), content_tokens(rest)) >= 3;
      return std::string("Choice: ") + (yes ? "Yes" : "No") +
             "\nExplanation: scripted token-overlap decision.";
    }
    case PromptKind::Review: {
      std::string item = quoted_after(text, "The description of this CD is as follows");
      return "Scripted review echoing the CD: " + sanitize(item);
    }
    case PromptKind::SelfIntroUpdate:
    case PromptKind::ItemUpdate:
    case PromptKind::Warmup:
    case PromptKind::Other:
      break;
  }
  // Reflection prompts fall through to phrase copying.
  return copy_phrases_response(req);
}

/// Phrase-copying reflections: preference text migrates between user and item
/// memories, which is what makes propagation observable offline.
std::string copy_phrases_response(const ChatRequest& req) {
  const std::string text = full_text(req);
  switch (classify(text)) {
    case PromptKind::SelfIntroUpdate: {
      const std::string intro = quoted_after(text, "self-introduction");
      PairMemories pair = selection_candidates(text);
      // On the failure path the positive candidate is displayed second; on
      // the success path likewise. Its phrases enter the user memory.
      std::string updated = sanitize(intro);
      if (!pair.second.empty()) {
        updated += " I have come to appreciate: " + sanitize(pair.second);
      }
      return "My updated self-introduction: " + updated;
    }
    case PromptKind::ItemUpdate: {
      const std::string intro = quoted_after(text, "self-introduction");
      PairMemories pair = selection_candidates(text);
      const std::string pos_title = quoted_after(text, "the user prefers a CD (");
      std::string first = "\"" + sanitize(pos_title) + "\" - " + sanitize(pair.first) +
                          " Adopters describe themselves as: " + sanitize(intro);
      return "The updated description of the first CD is: " + first +
             "\nThe updated description of the second CD is: " + pair.second;
    }
    case PromptKind::Warmup: {
      const std::string identity =
          quoted_after(text, "identity information of your CD is as follows");
      std::size_t marker = find_ci(text, "listed as follows:");
      std::string phrases;
      if (marker != std::string::npos) {
        for (const auto& token : content_tokens(text.substr(marker))) {
          phrases += " " + token;
        }
      }
      return sanitize(identity) + " Potential adopters appreciate:" + phrases + ".";
    }
    default:
      return positional_response(req, /*second=*/false, /*reversed_ranking=*/false);
  }
}

}  // namespace

ScriptFn named_script(const std::string& name) {
  if (name == "echo") {
    return [](const ChatRequest& req) { return echo_last(req); };
  }
  if (name == "pick-first") {
    return [](const ChatRequest& req) { return positional_response(req, false, false); };
  }
  if (name == "pick-second") {
    return [](const ChatRequest& req) { return positional_response(req, true, false); };
  }
  if (name == "reverse") {
    return [](const ChatRequest& req) { return positional_response(req, false, true); };
  }
  if (name == "keyword") {
    return [](const ChatRequest& req) { return keyword_response(req); };
  }
  if (name == "copy-phrases") {
    return [](const ChatRequest& req) { return copy_phrases_response(req); };
  }
  throw ConfigError("unknown script name: " + name);
}

std::vector<std::string> script_names() {
  return {"echo", "pick-first", "pick-second", "reverse", "keyword", "copy-phrases"};
}

}  // namespace agentcf
