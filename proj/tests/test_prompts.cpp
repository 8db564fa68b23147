#include <doctest.h>

#include <algorithm>

#include "agentcf/corpus.hpp"
#include "agentcf/errors.hpp"
#include "agentcf/prompts.hpp"
#include "agentcf/rng.hpp"
#include "agentcf/text.hpp"
#include "support.hpp"

using namespace agentcf;

TEST_CASE("template front-matter parsing and placeholder validation") {
  Template t = parse_template_text("name: demo\nrequired: a b\n---\nHi ${a}, bye ${b}\n",
                                   "inline");
  CHECK(t.name == "demo");
  CHECK(t.required == std::set<std::string>{"a", "b"});
  CHECK(t.body == "Hi ${a}, bye ${b}");

  CHECK_THROWS_AS(parse_template_text("name: x\n---\n${ghost}\n", "inline"), ConfigError);
  CHECK_THROWS_AS(parse_template_text("required: a\n---\nbody\n", "inline"), ConfigError);
  CHECK_THROWS_AS(parse_template_text("name: x\nno separator here\n", "inline"), ConfigError);
}

TEST_CASE("render substitutes exactly and reports unbound placeholders by name") {
  Template t = parse_template_text("name: t\nrequired: x\n---\nHi ${x}\n", "inline");
  CHECK(render(t, {{"x", "A"}}) == "Hi A");
  CHECK_THROWS_WITH_AS(render(t, {}), doctest::Contains("'x'"), ConfigError);

  std::vector<std::string> warnings;
  CHECK(render(t, {{"x", "A"}, {"extra", "?"}}, &warnings) == "Hi A");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("extra") != std::string::npos);

  // Injective in bound values: a different binding changes the output.
  CHECK(render(t, {{"x", "A"}}) != render(t, {{"x", "B"}}));
}

TEST_CASE("the selection template reproduces the published system prompt byte-for-byte") {
  auto catalog = fixture::load_catalog();
  const std::string rendered =
      render(catalog.get("user_selection"),
             {{"user_memory", fixture::kUserSeed},
              {"first_memory", render_identity(fixture::kNegativeIdentity)},
              {"second_memory", render_identity(fixture::kPositiveIdentity)}});

  const std::string expected =
      "You are a CD enthusiast. Here is your self-introduction, expressing your "
      "preferences and dislikes: \"I enjoy listening to CDs very much.\". Now, you are "
      "considering to select a CD from two candidate CDs. The features of these two "
      "candidate CDs are listed as follows: \"1. The CD is called \"O, Yeah! Ultimate "
      "Aerosmith Hits\". The category of this CD is: \"Classic Rock; Album-Oriented Rock "
      "(AOR)\".\n2. The CD is called \"Brainwashed\". The category of this CD is: "
      "\"Classic Rock; Album-Oriented Rock (AOR)\".\".\n"
      "\n"
      "Please select the CD that aligns best with your preferences. Furthermore, you must "
      "articulate why you've chosen that particular CD while rejecting the other.\n"
      "To do this, please follow these steps:\n"
      "1. Extract your preferences and dislikes from your self-introduction.\n"
      "2. Evaluate the two candidate CDs in light of your preferences and dislikes. Make "
      "your choice by considering the correlation between your preferences/dislikes and "
      "the features of the CDs.\n"
      "3. Explain why you make such choices, from the perspective of the relationship "
      "between your preferences/dislikes and the features of these candidate CDs.\n"
      "\n"
      "Important note:\n"
      "1. Your output should in the format: Chosen CD: [Title of the selected CD]\n"
      "Explanation: [Detailed rationale behind your choice and reasons for rejecting the "
      "other CD].\n"
      "2. When identifying your likes and dislikes, don't fabricate them! If your "
      "self-introduction doesn't specify any relevant preferences or dislikes, use common "
      "knowledge to inform your decision, such as the popularity of the CDs.\n"
      "3. you must choose one of these two candidates, instead of choosing both of them.\n"
      "4. Your explanation needs to be comprehensive and specific. A general preference, "
      "such as a certain genre of CD, is insufficient. Your reasoning should delve into "
      "the finer attributes of the CD.\n"
      "5. Base your explanation on facts. For instance, if your self-introduction doesn't "
      "reveal any specific preferences, you cannot assert that your decision was "
      "influenced by such preferences.";
  CHECK(rendered == expected);
}

TEST_CASE("parse_choice recovers the published selection answer") {
  const std::vector<std::string> candidates{fixture::kNegativeIdentity.title,
                                            fixture::kPositiveIdentity.title};
  ParsedChoice choice = parse_choice(fixture::kSelectionResponse, candidates);
  CHECK(choice.chosen_title == "O, Yeah! Ultimate Aerosmith Hits");
  CHECK(choice.explanation.rfind("I chose O, Yeah!", 0) == 0);
}

TEST_CASE("parse_choice tolerates case changes and rejects junk") {
  const std::vector<std::string> candidates{"Brainwashed"};
  ParsedChoice choice = parse_choice("Chosen CD: brainwashed\nExplanation: x", candidates);
  CHECK(choice.chosen_title == "Brainwashed");
  CHECK(choice.explanation == "x");

  CHECK_THROWS_AS(parse_choice("I pick nothing", candidates), UnparsableChoice);
  CHECK_THROWS_AS(parse_choice("", candidates), UnparsableChoice);
}

TEST_CASE("parse_self_intro strips the label and flags its absence") {
  ParsedSelfIntro labeled = parse_self_intro(fixture::kUserReflectionResponse);
  CHECK(labeled.labeled);
  CHECK(labeled.text.rfind("I enjoy listening to CDs that fall under the classic rock", 0) == 0);

  CHECK_THROWS_AS(parse_self_intro("My updated self-introduction:    "), ParseError);

  ParsedSelfIntro bare = parse_self_intro("just some preferences");
  CHECK(!bare.labeled);
  CHECK(bare.text == "just some preferences");

  CHECK_THROWS_AS(parse_self_intro("   "), ParseError);
}

TEST_CASE("parse_item_descriptions splits the two slots") {
  const std::string neg = render_identity(fixture::kNegativeIdentity);
  ParsedItemDescriptions parsed =
      parse_item_descriptions(fixture::item_reflection_response(neg));
  CHECK(parsed.first == fixture::kPositiveItemBody);
  CHECK(parsed.second == neg);
  CHECK(parsed.first.find("experimental and innovative") != std::string::npos);

  CHECK_THROWS_AS(parse_item_descriptions("no labels at all"), ParseError);
  CHECK_THROWS_AS(
      parse_item_descriptions("The updated description of the first CD is: x"), ParseError);
}

TEST_CASE("parse_ranking orders, completes, and survives partial answers") {
  const std::vector<std::string> ab{"A Title", "B Title"};
  ParsedRanking two = parse_ranking("1. B Title\n2. A Title", ab);
  CHECK(two.ordered_titles == std::vector<std::string>{"B Title", "A Title"});

  // 7 of 10 named: the remaining three are appended in presentation order.
  std::vector<std::string> ten;
  for (int i = 0; i < 10; ++i) ten.push_back("Album Number " + std::to_string(i));
  std::string partial = "Ranked CDs:";
  for (int i = 6; i >= 0; --i) partial += "\n" + std::to_string(7 - i) + ". " + ten[i];
  ParsedRanking completed = parse_ranking(partial, ten);
  REQUIRE(completed.ordered_titles.size() == 10);
  CHECK(completed.ordered_titles[0] == "Album Number 6");
  CHECK(completed.ordered_titles[7] == "Album Number 7");
  CHECK(completed.ordered_titles[9] == "Album Number 9");
  CHECK(completed.warnings.size() == 3);

  CHECK_THROWS_AS(parse_ranking("nothing relevant", ab), UnparsableRanking);

  // Comma-separated fallback.
  ParsedRanking commas = parse_ranking("B Title, A Title", ab);
  CHECK(commas.ordered_titles == std::vector<std::string>{"B Title", "A Title"});
}

TEST_CASE("parse_yes_no reads the published decision pair") {
  ParsedYesNo no = parse_yes_no(
      "Choice: No\nExplanation: Based on my personal preferences and dislikes, I would "
      "not like this CD.");
  CHECK(!no.choice);
  CHECK(no.explanation.rfind("Based on", 0) == 0);

  ParsedYesNo yes = parse_yes_no("Choice: Yes\nExplanation: After examining the reviews.");
  CHECK(yes.choice);

  CHECK_THROWS_AS(parse_yes_no("maybe"), ParseError);
  CHECK(parse_yes_no("yes").choice);
  CHECK(!parse_yes_no("Note: no.").choice);
}

namespace {

/// Applies one random compliant-response perturbation: an edit-distance-1
/// typo inside the echoed title, a case flip, or extra whitespace.
std::string perturb(const std::string& title, Rng& rng) {
  std::string t = title;
  switch (uniform_index(rng, 3)) {
    case 0: {  // single-character typo
      std::size_t at = uniform_index(rng, t.size());
      t[at] = static_cast<char>('a' + uniform_index(rng, 26));
      break;
    }
    case 1:  // case change
      for (auto& c : t) {
        if (uniform_index(rng, 2) == 0) c = static_cast<char>(std::toupper(c));
      }
      break;
    case 2:  // extra whitespace
      t.insert(uniform_index(rng, t.size()), "  ");
      break;
  }
  return t;
}

std::vector<std::string> fuzz_titles() {
  std::vector<std::string> titles;
  const char* stems[] = {"midnight", "granite", "harbor", "velvet", "ember",
                         "cascade", "lantern", "meridian", "sapphire", "thunder"};
  for (int i = 0; i < 10; ++i) {
    titles.push_back(std::string(stems[i]) + " sessions volume " + std::to_string(i + 1));
  }
  return titles;
}

}  // namespace

TEST_CASE("parse_choice recovers ground truth on 1000 perturbed responses") {
  auto titles = fuzz_titles();
  Rng rng(99);
  int recovered = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    std::size_t truth = uniform_index(rng, titles.size());
    std::string text = "Chosen CD: " + perturb(titles[truth], rng) +
                       "\nExplanation: some rationale.";
    try {
      if (parse_choice(text, titles).chosen_title == titles[truth]) ++recovered;
    } catch (const ParseError&) {
      // counted as a miss
    }
  }
  CHECK(recovered >= 990);
}

TEST_CASE("parse_ranking recovers a known permutation under perturbation") {
  auto titles = fuzz_titles();
  Rng rng(1234);
  int exact = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    std::vector<std::size_t> perm(titles.size());
    for (std::size_t j = 0; j < perm.size(); ++j) perm[j] = j;
    shuffle_in_place(perm, rng);

    std::string text = "Ranked CDs:";
    for (std::size_t j = 0; j < perm.size(); ++j) {
      text += "\n" + std::to_string(j + 1) + ". " + perturb(titles[perm[j]], rng);
    }
    try {
      ParsedRanking parsed = parse_ranking(text, titles);
      bool match = parsed.ordered_titles.size() == perm.size();
      for (std::size_t j = 0; match && j < perm.size(); ++j) {
        match = parsed.ordered_titles[j] == titles[perm[j]];
      }
      if (match) ++exact;
    } catch (const ParseError&) {
      // counted as a miss
    }
  }
  CHECK(exact >= 990);
}

TEST_CASE("round trip: a compliant response for every candidate parses back to it") {
  auto titles = fuzz_titles();
  for (const auto& title : titles) {
    std::string text = "Chosen CD: " + title + "\nExplanation: because.";
    CHECK(parse_choice(text, titles).chosen_title == title);
  }
}
