#pragma once

#include <iosfwd>

namespace demine {

// Entry point of the `demine` command. Returns 0 on success, 2 on bad
// arguments (usage goes to err) and 1 on runtime failure (a JSON error record
// goes to err).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace demine
