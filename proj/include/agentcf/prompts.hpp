#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentcf {

struct Template {
  std::string name;
  std::string body;  // ${placeholder} slots
  std::set<std::string> required;
  std::string note;  // catalog annotation, e.g. "reconstructed"
};

/// Parses a catalog file: front-matter (`name:`, `required:`, optional
/// `note:`), a `---` separator line, then the body verbatim.
Template parse_template_text(const std::string& content, const std::string& origin);
Template load_template_file(const std::filesystem::path& path);

class TemplateCatalog {
 public:
  static TemplateCatalog load_dir(const std::filesystem::path& dir);

  void add(Template t);
  const Template& get(const std::string& name) const;
  bool contains(const std::string& name) const { return templates_.contains(name); }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Template> templates_;
};

/// Exact ${placeholder} substitution. Throws on an unbound required
/// placeholder; unknown binding names are reported through `warnings`.
std::string render(const Template& t, const std::map<std::string, std::string>& bindings,
                   std::vector<std::string>* warnings = nullptr);

struct ParsedChoice {
  std::string chosen_title;  // canonical candidate title after fuzzy match
  std::string explanation;
};

struct ParsedSelfIntro {
  std::string text;
  bool labeled = true;  // false when the format label was missing
};

struct ParsedItemDescriptions {
  std::string first;
  std::string second;
};

struct ParsedRanking {
  std::vector<std::string> ordered_titles;  // full permutation of candidates
  std::vector<std::string> warnings;        // unmatched / appended entries
};

struct ParsedYesNo {
  bool choice = false;
  std::string explanation;
};

/// Minimum normalized similarity for matching an echoed title to a candidate.
inline constexpr double kTitleMatchThreshold = 0.8;

/// Fuzzy title match: normalization plus containment or edit similarity.
/// Returns the index of the best-matching candidate or npos.
std::size_t match_candidate(std::string_view echoed, std::span<const std::string> candidates);

ParsedChoice parse_choice(const std::string& text, std::span<const std::string> candidates);
ParsedSelfIntro parse_self_intro(const std::string& text);
ParsedItemDescriptions parse_item_descriptions(const std::string& text);
ParsedRanking parse_ranking(const std::string& text, std::span<const std::string> candidates);
ParsedYesNo parse_yes_no(const std::string& text);

}  // namespace agentcf
