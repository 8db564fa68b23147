#pragma once

// Shared fixtures: the published CDs-domain optimization transcript (user
// seed, two item identities, and the three model answers of one failed-step
// reflection), plus small helpers used across test files.

#include <filesystem>
#include <string>

#include "agentcf/corpus.hpp"
#include "agentcf/prompts.hpp"

namespace fixture {

inline const std::string kUserSeed = "I enjoy listening to CDs very much.";

inline const agentcf::ItemIdentity kPositiveIdentity{
    "pos-brainwashed", "Brainwashed", {"Classic Rock", "Album-Oriented Rock (AOR)"}};

inline const agentcf::ItemIdentity kNegativeIdentity{
    "neg-aerosmith", "O, Yeah! Ultimate Aerosmith Hits",
    {"Classic Rock", "Album-Oriented Rock (AOR)"}};

inline const std::string kSelectionResponse =
    "Chosen CD:  O, Yeah! Ultimate Aerosmith Hits \n"
    "Explanation: I chose O, Yeah! Ultimate Aerosmith Hits because it is a classic rock "
    "album from the Album-Oriented Rock (AOR) genre, which is a genre I enjoy listening "
    "to. The album contains some of Aerosmith's greatest hits, which I believe will "
    "provide me with a great listening experience. In comparison, Brainwashed is also a "
    "classic rock album from the AOR genre, but it is not as popular as O, Yeah! Ultimate "
    "Aerosmith Hits, and therefore I believe it will not provide me with the same level "
    "of listening experience.";

inline const std::string kUserReflectionBody =
    "I enjoy listening to CDs that fall under the classic rock and album-oriented rock "
    "(AOR) genres. I particularly appreciate CDs that offer a unique and distinct sound "
    "within these genres. I find myself drawn to CDs that showcase a variety of hits and "
    "popular songs, as they provide an enjoyable listening experience. Additionally, I "
    "have discovered a newfound preference for CDs that have a more experimental and "
    "innovative approach to classic rock. These CDs offer a refreshing twist on the genre "
    "and keep me engaged throughout. On the other hand, I tend to dislike CDs that lack "
    "originality and fail to bring something new to the table. CDs that rely heavily on "
    "generic rock sounds and do not offer any standout tracks or moments tend to leave me "
    "uninterested. Overall, I seek CDs that captivate me with their creativity and "
    "deliver a memorable listening experience.";

inline const std::string kUserReflectionResponse =
    "My updated self-introduction: " + kUserReflectionBody;

inline const std::string kPositiveItemBody =
    "\"Brainwashed\" is a classic rock album from the Album-Oriented Rock (AOR) genre "
    "that breaks new ground with its experimental and innovative approach. This CD "
    "offers a refreshing twist on classic rock, delivering a captivating listening "
    "experience that keeps you engaged from start to finish. \"Brainwashed\" stands out "
    "from generic rock sounds, providing standout tracks and moments that showcase its "
    "originality and creativity. For the user who seeks CDs that push boundaries and "
    "bring something new to the table, \"Brainwashed\" is a must-listen.";

/// The published response shows the positive slot only; the format wrapper is
/// reconstructed so it parses like a full completion.
inline std::string item_reflection_response(const std::string& negative_memory) {
  return "The updated description of the first CD is: " + kPositiveItemBody +
         "\nThe updated description of the second CD is: " + negative_memory;
}

inline std::filesystem::path template_dir() { return AGENTCF_TEMPLATE_DIR; }

inline agentcf::TemplateCatalog load_catalog() {
  return agentcf::TemplateCatalog::load_dir(template_dir());
}

}  // namespace fixture
