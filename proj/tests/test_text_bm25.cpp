#include <doctest.h>

#include "agentcf/bm25.hpp"
#include "agentcf/text.hpp"

using namespace agentcf;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Classic Rock; Album-Oriented Rock (AOR)") ==
        std::vector<std::string>{"classic", "rock", "album", "oriented", "rock", "aor"});
  CHECK(tokenize("").empty());
}

TEST_CASE("count_words counts whitespace-separated tokens") {
  CHECK(count_words("The CD is called \"Brainwashed\".") == 5);
  CHECK(count_words("  a  b\t c\n") == 3);
  CHECK(count_words("") == 0);
}

TEST_CASE("normalize_title drops punctuation and case") {
  CHECK(normalize_title("O, Yeah! Ultimate Aerosmith Hits") == "o yeah ultimate aerosmith hits");
  CHECK(normalize_title("  Brainwashed. ") == "brainwashed");
}

TEST_CASE("levenshtein and edit similarity") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(edit_similarity("abcd", "abcd") == doctest::Approx(1.0));
  CHECK(edit_similarity("abcdefgh", "abcdefgx") == doctest::Approx(0.875));
}

TEST_CASE("find_ci is case-insensitive") {
  CHECK(find_ci("Chosen CD: Foo", "chosen") == 0);
  CHECK(find_ci("abc", "zzz") == std::string_view::npos);
  CHECK(find_ci("xxChosen", "chosen") == 2);
}

// Frozen from an independent implementation of the textbook formula
// (k1 = 1.2, b = 0.75, idf = ln(1 + (N - df + 0.5) / (df + 0.5))).
TEST_CASE("bm25 matches hand-computed scores on the 3-document toy corpus") {
  Bm25Index index({"jazz piano smooth jazz", "heavy metal guitar riffs",
                   "classical piano concerto"});
  auto scores = index.scores("jazz piano");
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] == doctest::Approx(1.7681685229).epsilon(1e-9));
  CHECK(scores[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(scores[2] == doctest::Approx(0.5077717780).epsilon(1e-9));
}

TEST_CASE("bm25 on an empty or mismatched query scores zero") {
  Bm25Index index({"a b c", "d e f"});
  CHECK(index.score("", 0) == 0.0);
  CHECK(index.score("zzz", 1) == 0.0);
  CHECK(index.score("a", 5) == 0.0);  // out-of-range doc
}
