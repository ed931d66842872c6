#pragma once

#include <iosfwd>

#include "titl/search.hpp"

namespace titl {

// Terminal version of the feedback loop. Reads commands from in; ranked
// batches go to out, prompts and diagnostics to err.
//
//   query> TEXT                 start a session (empty text re-prompts)
//   judge N [r/i/s]>            relevant, irrelevant or skip each result
//   > more | export FILE [txt|csv|json] | new | quit
//
// Returns the process exit code.
int run_query_loop(const SearchEngine& engine, SearchMode mode, std::size_t k, std::istream& in,
                   std::ostream& out, std::ostream& err);

}  // namespace titl
