#include <doctest.h>

#include "agentcf/errors.hpp"
#include "agentcf/memory.hpp"

using namespace agentcf;

TEST_CASE("init_user seeds short-term memory and rejects duplicates") {
  MemoryStore store;
  const auto& user = store.init_user("u1", "I enjoy listening to CDs very much.");
  CHECK(user.short_term == "I enjoy listening to CDs very much.");
  CHECK(user.long_term.empty());
  CHECK_THROWS_AS(store.init_user("u1", "again"), DataError);
  CHECK_THROWS_AS(store.init_user("u2", "   "), DataError);

  // Custom seed for the propagation experiment.
  store.init_user("seed", "I tend to favor music that evokes emotions and resonates with me.");
  CHECK(store.user("seed").short_term ==
        "I tend to favor music that evokes emotions and resonates with me.");
}

TEST_CASE("init_item renders the identity sentence verbatim") {
  MemoryStore store;
  ItemIdentity identity{"b001", "Brainwashed", {"Classic Rock", "Album-Oriented Rock (AOR)"}};
  CHECK(store.init_item(identity).text ==
        "The CD is called \"Brainwashed\". The category of this CD is: "
        "\"Classic Rock; Album-Oriented Rock (AOR)\".");

  // Same title under a different id stays a distinct memory.
  ItemIdentity twin{"b002", "Brainwashed", {"Rock"}};
  store.init_item(twin);
  CHECK(store.item("b001").text != store.item("b002").text);
  CHECK_THROWS_AS(store.init_item(identity), DataError);
}

TEST_CASE("append_long_term preserves insertion order and never touches short-term") {
  MemoryStore store;
  store.init_user("u", "seed");
  store.append_long_term("u", "p1");
  CHECK(store.user("u").long_term == std::vector<std::string>{"p1"});
  store.append_long_term("u", "p2");
  store.append_long_term("u", "p3");
  store.append_long_term("u", "p4");
  store.append_long_term("u", "p5");
  CHECK(store.user("u").long_term == std::vector<std::string>{"p1", "p2", "p3", "p4", "p5"});
  CHECK(store.user("u").short_term == "seed");
  CHECK_THROWS_AS(store.append_long_term("ghost", "x"), DataError);
}

TEST_CASE("every mutation bumps the version, even no-op rewrites") {
  MemoryStore store;
  store.init_user("u", "seed");
  auto v = store.version();
  store.set_user_short_term("u", "seed");  // unchanged content
  CHECK(store.version() == v + 1);
  CHECK(store.user("u").short_term == "seed");
}

TEST_CASE("retrieve_long_term ranks by lexical similarity") {
  MemoryStore store;
  store.init_user("u", "seed");

  SUBCASE("empty pool yields an empty result") {
    auto result = store.retrieve_long_term("u", std::vector<std::string>{"anything"}, 3);
    CHECK(result.entries.empty());
    CHECK(result.rendered.empty());
  }

  SUBCASE("hand-computed scores on a 2-entry pool") {
    store.append_long_term("u", "likes jazz piano");
    store.append_long_term("u", "likes heavy metal");
    auto result = store.retrieve_long_term("u", std::vector<std::string>{"metal guitar"}, 1);
    REQUIRE(result.entries.size() == 1);
    CHECK(result.entries[0].text == "likes heavy metal");
    CHECK(result.entries[0].index == 1);
    // ln(2) * 2.2 / 2.2 with both documents three tokens long.
    CHECK(result.entries[0].score == doctest::Approx(0.6931471806).epsilon(1e-9));
  }

  SUBCASE("k larger than the pool returns the whole pool in score order") {
    store.append_long_term("u", "likes jazz piano");
    store.append_long_term("u", "likes heavy metal");
    auto result = store.retrieve_long_term("u", std::vector<std::string>{"metal"}, 10);
    REQUIRE(result.entries.size() == 2);
    CHECK(result.entries[0].text == "likes heavy metal");
    CHECK(result.entries[1].text == "likes jazz piano");
    CHECK(result.rendered == "likes heavy metal\nlikes jazz piano");
  }

  SUBCASE("ties break toward the lower index and results are stable") {
    store.append_long_term("u", "same words here");
    store.append_long_term("u", "same words here");
    auto a = store.retrieve_long_term("u", std::vector<std::string>{"same words"}, 2);
    auto b = store.retrieve_long_term("u", std::vector<std::string>{"same words"}, 2);
    REQUIRE(a.entries.size() == 2);
    CHECK(a.entries[0].index == 0);
    CHECK(a.entries[1].index == 1);
    CHECK(a.rendered == b.rendered);
  }
}

TEST_CASE("snapshot round-trips byte-identically and checks its schema") {
  MemoryStore store;
  store.init_user("u1", "alpha");
  store.init_user("u2", "beta");
  store.init_item(ItemIdentity{"i1", "Title One", {"Cat"}});
  store.append_long_term("u1", "old alpha");
  store.set_item_text("i1", "rewritten description");

  const std::string doc = store.snapshot();
  MemoryStore loaded = MemoryStore::load(doc);
  CHECK(loaded.snapshot() == doc);
  CHECK(loaded == store);

  CHECK_THROWS_AS(MemoryStore::load("not json"), SnapshotError);
  CHECK_THROWS_AS(MemoryStore::load("{\"schema\": 42}"), SnapshotError);
}
