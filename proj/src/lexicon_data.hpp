#pragma once

#include <map>
#include <string>

namespace reformkit::detail {

// File name -> contents of every file under data/, captured at configure time.
std::map<std::string, std::string> embedded_lexicon_files();

}  // namespace reformkit::detail
