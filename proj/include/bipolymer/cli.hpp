#pragma once

#include <iosfwd>

namespace bipolymer::cli {

/// Entry point behind the `bipolymer` executable. Reports go to `out`;
/// diagnostics and wall time go to `err`, so `out` is byte-identical across
/// runs with the same arguments. Returns 0 on success, 2 when an input
/// violates a precondition, 1 on any other failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Applies the BIPOLYMER_THREADS environment variable, if set.
void apply_thread_setting();

}  // namespace bipolymer::cli
