#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "autostream/evaluation.hpp"

namespace autostream {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Settings shared by `run` and `sweep`, kept as raw text until validation so
// every violation can be reported at once.
struct ExperimentConfig {
  StreamSource stream;
  std::vector<std::string> methods{"T1"};
  std::string paradigm = "smbo";
  std::optional<double> budget_seconds;
  std::optional<std::size_t> budget_evaluations;
  std::string stacker = "linear";
  std::optional<std::size_t> batch_size;
  std::size_t window_batches = 3;
  std::uint64_t seed = 0;
  std::optional<std::vector<std::size_t>> preset_drifts;
  bool record_timings = true;
  bool carry_over_members = false;
  std::size_t oza_members = 10;
  EddmConfig eddm;
  std::string out_dir = "results";

  // Every violation, empty when valid.
  std::vector<std::string> violations() const;
  // Request for one method; call only on a valid config.
  RunRequest request(const std::string& method) const;
};

std::size_t levenshtein(const std::string& a, const std::string& b);
// Closest candidate within edit distance 3, if any.
std::optional<std::string> suggest(const std::string& word, const std::vector<std::string>& candidates);

// Parses "1,2,3"; throws std::invalid_argument on a bad token.
std::vector<std::size_t> parse_index_list(const std::string& text);
// Reads 0/1 tokens separated by whitespace or commas; '#' starts a comment.
std::vector<std::uint8_t> read_correctness(std::istream& in);

// Entry point; argv[0] is the program name. Returns 0, 1 (usage) or 2 (runtime).
int cli_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace autostream
