#include "agentcf/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "agentcf/errors.hpp"
#include "agentcf/text.hpp"

namespace agentcf {

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Collects the names of every ${...} slot appearing in a body.
std::set<std::string> body_placeholders(const std::string& body) {
  std::set<std::string> names;
  std::size_t pos = 0;
  while ((pos = body.find("${", pos)) != std::string::npos) {
    std::size_t end = body.find('}', pos + 2);
    if (end == std::string::npos) break;
    names.insert(body.substr(pos + 2, end - pos - 2));
    pos = end + 1;
  }
  return names;
}

}  // namespace

Template parse_template_text(const std::string& content, const std::string& origin) {
  Template t;
  std::istringstream in(content);
  std::string line;
  bool saw_separator = false;
  std::size_t header_end = 0;
  while (std::getline(in, line)) {
    header_end += line.size() + 1;
    if (trim(line) == "---") {
      saw_separator = true;
      break;
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (key == "name") {
      t.name = value;
    } else if (key == "required") {
      for (auto& name : split_list(value)) t.required.insert(std::move(name));
    } else if (key == "note") {
      t.note = value;
    }
  }
  if (!saw_separator) throw ConfigError(origin + ": missing '---' separator");
  if (t.name.empty()) throw ConfigError(origin + ": missing 'name' header");

  t.body = content.substr(std::min(header_end, content.size()));
  // Body ends without the file's trailing newline so rendered prompts do not
  // pick up an accidental final blank line.
  if (!t.body.empty() && t.body.back() == '\n') t.body.pop_back();

  for (const auto& name : body_placeholders(t.body)) {
    if (!t.required.contains(name)) {
      throw ConfigError(origin + ": placeholder '" + name + "' not listed in required");
    }
  }
  return t;
}

Template load_template_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_template_text(buf.str(), path.string());
}

TemplateCatalog TemplateCatalog::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("template catalog directory not found: " + dir.string());
  }
  TemplateCatalog catalog;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".prompt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) catalog.add(load_template_file(path));
  return catalog;
}

void TemplateCatalog::add(Template t) {
  auto name = t.name;
  if (!templates_.emplace(std::move(name), std::move(t)).second) {
    throw ConfigError("duplicate template name: " + t.name);
  }
}

const Template& TemplateCatalog::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigError("unknown template: " + name);
  return it->second;
}

std::vector<std::string> TemplateCatalog::names() const {
  std::vector<std::string> out;
  out.reserve(templates_.size());
  for (const auto& [name, _] : templates_) out.push_back(name);
  return out;
}

std::string render(const Template& t, const std::map<std::string, std::string>& bindings,
                   std::vector<std::string>* warnings) {
  if (warnings) {
    for (const auto& [name, _] : bindings) {
      if (!t.required.contains(name)) {
        warnings->push_back("template '" + t.name + "': unknown placeholder '" + name + "'");
      }
    }
  }
  std::string out;
  out.reserve(t.body.size());
  std::size_t pos = 0;
  while (pos < t.body.size()) {
    std::size_t open = t.body.find("${", pos);
    if (open == std::string::npos) {
      out.append(t.body, pos, std::string::npos);
      break;
    }
    std::size_t close = t.body.find('}', open + 2);
    if (close == std::string::npos) {
      out.append(t.body, pos, std::string::npos);
      break;
    }
    out.append(t.body, pos, open - pos);
    const std::string name = t.body.substr(open + 2, close - open - 2);
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw ConfigError("template '" + t.name + "': unbound placeholder '" + name + "'");
    }
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

namespace {

/// Similarity of an echoed string against one candidate title, both already
/// normalized. Containment counts as a match for truncated echoes.
double title_similarity(const std::string& echoed, const std::string& candidate) {
  if (echoed.empty() || candidate.empty()) return 0.0;
  double sim = edit_similarity(echoed, candidate);
  if (echoed.find(candidate) != std::string::npos ||
      candidate.find(echoed) != std::string::npos) {
    sim = std::max(sim, kTitleMatchThreshold);
  }
  return sim;
}

/// Aggressive cleanup for echoed titles: strips wrapping quotes, brackets and
/// trailing punctuation.
std::string strip_title(std::string_view s) {
  std::string t = trim(s);
  while (!t.empty() && (t.front() == '"' || t.front() == '[' || t.front() == '\'' ||
                        t.front() == '*')) {
    t.erase(t.begin());
  }
  while (!t.empty() && (t.back() == '"' || t.back() == ']' || t.back() == '\'' ||
                        t.back() == '*' || t.back() == '.')) {
    t.pop_back();
  }
  return trim(t);
}

/// Gentle cleanup for prose blocks (descriptions, self-intros): removes a
/// wrapping bracket pair or a wrapping quote pair when the quotes are clearly
/// format echo, preserving interior punctuation.
std::string strip_block(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
    t = trim(t.substr(1, t.size() - 2));
  }
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"' &&
      t.find('"', 1) == t.size() - 1) {
    t = trim(t.substr(1, t.size() - 2));
  }
  return t;
}

/// Text after the first ':' that follows a case-insensitive label, up to the
/// end of line. npos-safe; returns empty when absent.
std::string line_after_label(const std::string& text, std::string_view label) {
  std::size_t at = find_ci(text, label);
  if (at == std::string::npos) return {};
  std::size_t colon = text.find(':', at + label.size());
  if (colon == std::string::npos) return {};
  std::size_t eol = text.find('\n', colon + 1);
  if (eol == std::string::npos) eol = text.size();
  return trim(text.substr(colon + 1, eol - colon - 1));
}

/// Everything after the first ':' that follows the label.
std::string rest_after_label(const std::string& text, std::string_view label,
                             std::size_t* where = nullptr) {
  std::size_t at = find_ci(text, label);
  if (where) *where = at;
  if (at == std::string::npos) return {};
  std::size_t colon = text.find(':', at + label.size());
  if (colon == std::string::npos) return {};
  return trim(text.substr(colon + 1));
}

const std::string kYes = "yes";
const std::string kNo = "no";

/// First standalone yes/no word at or after `from`. Returns -1 none, 0 no, 1 yes.
int scan_yes_no(const std::string& text, std::size_t from) {
  std::string cur;
  for (std::size_t i = from; i <= text.size(); ++i) {
    unsigned char c = i < text.size() ? static_cast<unsigned char>(text[i]) : ' ';
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      if (cur == kYes) return 1;
      if (cur == kNo) return 0;
      cur.clear();
    }
  }
  return -1;
}

}  // namespace

std::size_t match_candidate(std::string_view echoed, std::span<const std::string> candidates) {
  const std::string norm_echo = normalize_title(echoed);
  double best = 0.0;
  std::size_t best_idx = std::string::npos;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double sim = title_similarity(norm_echo, normalize_title(candidates[i]));
    if (sim > best) {
      best = sim;
      best_idx = i;
    }
  }
  if (best + 1e-12 < kTitleMatchThreshold) return std::string::npos;
  return best_idx;
}

ParsedChoice parse_choice(const std::string& text, std::span<const std::string> candidates) {
  if (candidates.empty()) throw UnparsableChoice(text);

  std::size_t label_at = std::string::npos;
  std::string echoed = strip_title(line_after_label(text, "chosen"));
  std::size_t idx = std::string::npos;
  if (!echoed.empty()) {
    label_at = find_ci(text, "chosen");
    idx = match_candidate(echoed, candidates);
  }
  if (idx == std::string::npos) {
    // Last resort: look for a candidate title quoted anywhere in the text.
    double best = 0.0;
    const std::string norm_text = normalize_title(text);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const std::string norm_cand = normalize_title(candidates[i]);
      if (!norm_cand.empty() && norm_text.find(norm_cand) != std::string::npos) {
        double score = static_cast<double>(norm_cand.size());
        if (score > best) {
          best = score;
          idx = i;
        }
      }
    }
    if (idx == std::string::npos) throw UnparsableChoice(text);
  }

  ParsedChoice result;
  result.chosen_title = candidates[idx];
  result.explanation = rest_after_label(text, "explanation");
  if (result.explanation.empty()) {
    // Remainder after the choice line, or the whole text as a last resort.
    std::size_t eol = label_at == std::string::npos ? std::string::npos
                                                    : text.find('\n', label_at);
    if (eol != std::string::npos) result.explanation = trim(text.substr(eol + 1));
    if (result.explanation.empty()) result.explanation = trim(text);
  }
  if (result.explanation.empty()) throw UnparsableChoice(text);
  return result;
}

ParsedSelfIntro parse_self_intro(const std::string& text) {
  ParsedSelfIntro result;
  std::size_t at = find_ci(text, "self-introduction");
  if (at != std::string::npos) {
    std::size_t colon = text.find(':', at);
    if (colon != std::string::npos) {
      result.text = strip_block(text.substr(colon + 1));
      result.labeled = true;
      if (result.text.empty()) {
        throw ParseError("self-introduction label with empty body", text);
      }
      return result;
    }
  }
  result.text = trim(text);
  result.labeled = false;
  if (result.text.empty()) throw ParseError("empty self-introduction", text);
  return result;
}

ParsedItemDescriptions parse_item_descriptions(const std::string& text) {
  std::size_t first_at = find_ci(text, "description of the first");
  std::size_t second_at = find_ci(text, "description of the second");
  if (first_at == std::string::npos || second_at == std::string::npos ||
      second_at <= first_at) {
    throw ParseError("missing first/second description labels", text);
  }
  std::size_t first_colon = text.find(':', first_at);
  std::size_t second_colon = text.find(':', second_at);
  if (first_colon == std::string::npos || second_colon == std::string::npos ||
      first_colon >= second_at) {
    throw ParseError("malformed description labels", text);
  }
  ParsedItemDescriptions result;
  // The first block runs up to the sentence that introduces the second one.
  std::size_t first_end = find_ci(text, "the updated description of the second");
  if (first_end == std::string::npos || first_end <= first_colon) {
    std::size_t line_start = text.rfind('\n', second_at);
    first_end = (line_start != std::string::npos && line_start > first_colon) ? line_start
                                                                              : second_at;
  }
  result.first = strip_block(text.substr(first_colon + 1, first_end - first_colon - 1));
  result.second = strip_block(text.substr(second_colon + 1));
  if (result.first.empty() || result.second.empty()) {
    throw ParseError("empty item description", text);
  }
  return result;
}

namespace {

/// Splits a ranking response into echoed entries: numbered lines when present,
/// otherwise comma/newline-separated chunks.
std::vector<std::string> ranking_entries(const std::string& text) {
  std::vector<std::string> numbered;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i == 0 || i >= t.size()) continue;
    if (t[i] != '.' && t[i] != ')' && t[i] != ':') continue;
    std::string entry = strip_title(t.substr(i + 1));
    if (!entry.empty()) numbered.push_back(std::move(entry));
  }
  if (!numbered.empty()) return numbered;

  std::vector<std::string> chunks;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == '\n' || c == ';') {
      std::string entry = strip_title(cur);
      if (!entry.empty()) chunks.push_back(std::move(entry));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  std::string entry = strip_title(cur);
  if (!entry.empty()) chunks.push_back(std::move(entry));
  return chunks;
}

}  // namespace

ParsedRanking parse_ranking(const std::string& text, std::span<const std::string> candidates) {
  if (candidates.empty()) throw UnparsableRanking(text);

  ParsedRanking result;
  std::vector<bool> used(candidates.size(), false);
  for (const auto& entry : ranking_entries(text)) {
    std::size_t idx = match_candidate(entry, candidates);
    if (idx == std::string::npos) {
      result.warnings.push_back("unmatched ranking entry: " + entry);
      continue;
    }
    if (used[idx]) continue;  // first occurrence wins
    used[idx] = true;
    result.ordered_titles.push_back(candidates[idx]);
  }
  if (result.ordered_titles.empty()) throw UnparsableRanking(text);

  // Complete the permutation with missing candidates in presentation order.
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!used[i]) {
      result.warnings.push_back("appended missing candidate: " + candidates[i]);
      result.ordered_titles.push_back(candidates[i]);
    }
  }
  return result;
}

ParsedYesNo parse_yes_no(const std::string& text) {
  std::size_t label_at = find_ci(text, "choice");
  std::size_t scan_from = 0;
  if (label_at != std::string::npos) {
    std::size_t colon = text.find(':', label_at);
    scan_from = colon == std::string::npos ? label_at : colon + 1;
  }
  int verdict = scan_yes_no(text, scan_from);
  if (verdict < 0 && scan_from > 0) verdict = scan_yes_no(text, 0);
  if (verdict < 0) throw ParseError("no yes/no token found", text);

  ParsedYesNo result;
  result.choice = verdict == 1;
  result.explanation = rest_after_label(text, "explanation");
  return result;
}

}  // namespace agentcf
