#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "reformkit/types.hpp"

namespace reformkit {

// Line-delimited corpus files: one JSON object per line, `"kind"` is either
// "dialogue" or "triad". Blank lines are ignored.
Corpus load_corpus(std::filesystem::path const& path);
Corpus parse_corpus(std::istream& in);

void save_corpus(Corpus const& corpus, std::filesystem::path const& path);
void write_corpus(Corpus const& corpus, std::ostream& out);

nlohmann::json to_json(Dialogue const& dialogue);
nlohmann::json to_json(Triad const& triad);
nlohmann::json to_json(SlotAnnotation const& slot);

// These throw SchemaError with line 0; the corpus reader attaches line numbers.
Dialogue dialogue_from_json(nlohmann::json const& j);
Triad triad_from_json(nlohmann::json const& j);
SlotAnnotation slot_from_json(nlohmann::json const& j);

}  // namespace reformkit
