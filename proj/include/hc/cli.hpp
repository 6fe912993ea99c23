#pragma once

#include <iosfwd>

namespace hc {

// Exit status: 0 success, 1 domain/usage/parse failure or failed verdict,
// 2 resource failure. Errors go to err as one line "error <kind>: <message>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hc
