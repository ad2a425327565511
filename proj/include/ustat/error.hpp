#ifndef USTAT_ERROR_HPP
#define USTAT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ustat {

// Error codes mirror the failure modes of the public operations. Every
// throwing path in the library uses Error so callers (and the CLI) can map
// failures to stable exit codes.
enum class Errc {
  key_out_of_range,
  diagonal_key,
  duplicate_key,
  zero_kernel,
  index_out_of_range,
  depth_out_of_range,
  non_positive_entry,
  invalid_arity,
  too_small,
  moment_below_one,
  shape_mismatch,
  bad_index_set,
  too_large,
  space_mismatch,
  not_degenerate,
  case_mismatch,
  length_mismatch,
  mixed_sizes,
  non_monotone_time_change,
  bad_lambda,
  too_few_samples,
  off_grid,
  bad_delta,
  bad_config,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ustat

#endif
