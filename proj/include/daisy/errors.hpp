#pragma once

#include <stdexcept>
#include <string>

namespace daisy {

/// Matrix/vector shapes do not agree.
class dimension_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument is outside its admissible range.
class parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A channel row or column is identically zero.
class degenerate_channel_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Gramian H^H H is singular (or numerically so).
class rank_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was requested in the wrong simulator phase.
class state_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require_param(bool ok, const std::string& what) {
  if (!ok) throw parameter_error(what);
}

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw dimension_error(what);
}

}  // namespace detail
}  // namespace daisy
