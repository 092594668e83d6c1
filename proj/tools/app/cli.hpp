#pragma once

#include <ostream>

namespace vlc::app {

// Entry point of `vlc`; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace vlc::app
