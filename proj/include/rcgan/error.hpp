#pragma once

#include <stdexcept>
#include <string>

namespace rcgan {

enum class Errc {
  structural,
  empty_input,
  ingestion,
  io,
  unsupported_schema,
  query,
  undefined_selectivity,
  usage,
  training,
  version_mismatch,
  corrupt_file,
  experiment,
  parse,
  semantic,
  routing,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::structural: return "structural error";
    case Errc::empty_input: return "empty input";
    case Errc::ingestion: return "ingestion error";
    case Errc::io: return "i/o error";
    case Errc::unsupported_schema: return "unsupported schema";
    case Errc::query: return "query error";
    case Errc::undefined_selectivity: return "undefined selectivity";
    case Errc::usage: return "usage error";
    case Errc::training: return "training error";
    case Errc::version_mismatch: return "version mismatch";
    case Errc::corrupt_file: return "corrupt file";
    case Errc::experiment: return "experiment error";
    case Errc::parse: return "parse error";
    case Errc::semantic: return "semantic error";
    case Errc::routing: return "routing error";
  }
  return "error";
}

// Every failure surfaced by the library. `code()` lets callers (the CLI in
// particular) map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rcgan
