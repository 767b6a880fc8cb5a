#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posgain/lti.hpp"
#include "posgain/posnorm.hpp"
#include "posgain/rnn.hpp"

namespace posgain {

// In-memory form of a system file: a JSON document with "version": 1 and
// "type" either "statespace" (keys A, B, C, D) or "rnn" (keys Lambda, Win,
// Wout), plus optional "name" and "description".
struct SystemFileContent {
  std::string type;
  std::optional<StateSpace> statespace;
  std::optional<RnnModel> rnn;
  std::string name;
  std::string description;
};

// Parsing throws ParseError with a location for anything malformed (bad
// JSON, missing keys, ragged arrays, wrong version). Model-level failures
// (dimension mismatch, unstable Lambda) propagate as their own types.
SystemFileContent parse_system_file(const std::string& text, const std::string& origin);
SystemFileContent read_system_file(const std::string& path);

// Round-trip-exact export (shortest representation that re-parses to the
// same doubles), written atomically.
void write_system_file(const std::string& path, const SystemFileContent& content);

// 12-significant-digit decimal formatting shared by all emitters.
std::string format_sig(double v);

// CSV emitters: comma separators, header row, LF line endings.
std::string bounds_csv(const BoundReport& report);
std::string sweep_csv(const std::vector<SweepCell>& cells);
std::string trajectory_csv(const Signal& input, const SimResult& sim);
std::string trajectory_csv_rnn(const Signal& s, const Signal& v, const RnnTrajectory& traj);
std::string certificate_csv(const GainCertificate& cert);
std::string witness_csv(const SsgWitness& witness);

// Atomic text write (temp file in the destination directory + rename).
void write_text_file(const std::string& path, const std::string& text);

}  // namespace posgain
