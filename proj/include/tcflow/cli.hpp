#pragma once

namespace tcflow::cli {

/// Entry point for the tcflow executable. Returns 0 on success, 1 when a built-in check fails,
/// 2 on configuration or usage errors.
int run(int argc, char** argv);

}  // namespace tcflow::cli
