#ifndef FD_CONDITION_HPP
#define FD_CONDITION_HPP

#include <string>

namespace fd {

// Editing condition. `id` names an entry in the condition registry; `keyword`
// optionally names the scene content the condition is about (used by the
// scripted attention provider to look up ground-truth relevance).
struct Condition {
    std::string id;
    std::string keyword;
};

// Reserved id for the unconditional branch of guided velocity evaluation.
// The registry maps it to a designated broad distribution.
inline const std::string kUnconditionalId = "\xE2\x88\x85";  // U+2205

inline Condition unconditional() { return Condition{kUnconditionalId, ""}; }

}  // namespace fd

#endif
