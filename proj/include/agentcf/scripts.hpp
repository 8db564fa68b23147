#pragma once

#include <string>
#include <vector>

#include "agentcf/gateway.hpp"

namespace agentcf {

/// Deterministic offline responders keyed by name, usable from the CLI's
/// script backend mode and from tests. Each one understands the shipped
/// prompt catalog well enough to emit format-compliant answers:
///
///   echo         last message echoed back
///   pick-first   position 1 on selections, presentation order on rankings,
///                verbatim memory echoes on reflections, "No" on decisions
///   pick-second  like pick-first but position 2
///   reverse      reversed presentation order on rankings, otherwise pick-first
///   keyword      token-overlap affinity: selections and rankings score
///                candidates against the prompt's preference text; decisions
///                answer Yes on sufficient overlap; reflections copy phrases
///   copy-phrases position 1 on selections (so reflection always fires) and
///                phrase-copying reflections that move preference text
///                between user and item memories
ScriptFn named_script(const std::string& name);

std::vector<std::string> script_names();

/// Prompt-structure helpers shared by the scripted responders (exposed for
/// tests that build custom stubs).
namespace scriptutil {

/// Concatenated message contents, oldest first.
std::string full_text(const ChatRequest& req);

/// First "..." span after a case-insensitive label; empty when absent.
std::string quoted_after(const std::string& text, const std::string& label);

/// The two memory lines of a pairwise prompt ("1. ..." / "2. ...").
struct PairMemories {
  std::string first;
  std::string second;
};
PairMemories selection_candidates(const std::string& text);

/// First quoted span inside a memory line (identity and learned descriptions
/// both lead with the quoted title); falls back to the line itself.
std::string title_of_memory(const std::string& memory);

/// Candidate lines of a ranking prompt: (title, text) pairs after the
/// "candidate CDs are listed as follows:" marker.
struct RankEntry {
  std::string title;
  std::string text;
};
std::vector<RankEntry> ranking_candidates(const std::string& text);

/// Distinct lowercased tokens of length >= 4, minus format stopwords.
std::vector<std::string> content_tokens(const std::string& text);

std::size_t overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Strips double quotes; used when scripts compose memory text so later
/// quote-delimited extraction cannot truncate.
std::string sanitize(std::string text);

}  // namespace scriptutil

}  // namespace agentcf
