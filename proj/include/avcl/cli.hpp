#pragma once

#include <ostream>

namespace avcl::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitCheckpoint = 4;
inline constexpr int kExitDecode = 5;

// Entry point of the `avcl` tool. Subcommands: train, probe, spectrogram,
// gradcheck, ablate. The last line each writes to `out` is `key=value`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace avcl::cli
