#pragma once

namespace cdegan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

// Subcommands: train, eval, sample, plot-data. Returns one of the exit
// codes above; never throws.
int run_cli(int argc, char** argv);

}  // namespace cdegan
