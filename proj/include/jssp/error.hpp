#ifndef JSSP_ERROR_HPP
#define JSSP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace jssp {

// All library failures derive from Error so the CLI can report them uniformly.
// kind() is a short stable tag used in machine-parsable error lines.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define JSSP_DEFINE_ERROR(Name, tag)                          \
  class Name : public Error {                                 \
   public:                                                    \
    using Error::Error;                                       \
    const char* kind() const noexcept override { return tag; } \
  }

JSSP_DEFINE_ERROR(DimensionError, "dimension");
JSSP_DEFINE_ERROR(ParseError, "parse");
JSSP_DEFINE_ERROR(InvalidActionError, "invalid-action");
JSSP_DEFINE_ERROR(StateError, "state");
JSSP_DEFINE_ERROR(ValidationError, "validation");
JSSP_DEFINE_ERROR(DataError, "data");
JSSP_DEFINE_ERROR(ShapeError, "shape");
JSSP_DEFINE_ERROR(MaskError, "mask");
JSSP_DEFINE_ERROR(CompatibilityError, "compatibility");
JSSP_DEFINE_ERROR(ConfigError, "config");
JSSP_DEFINE_ERROR(IoError, "io");

#undef JSSP_DEFINE_ERROR

}  // namespace jssp

#endif  // JSSP_ERROR_HPP
