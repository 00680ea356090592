#pragma once

#include <stdexcept>
#include <string>

namespace orthoprobe {

/// Base class for every error raised by the toolkit. The kind maps 1:1 onto
/// the C API status codes.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    Parse,       // malformed input text
    Structure,   // head links / forest edges do not form a tree
    Format,      // binary or tabular file violates its format
    Annotation,  // references to unknown lexical nodes
    Contract,    // shape mismatch or precondition violation
    Config,      // invalid run configuration
    Training,    // non-finite gradients and similar runtime failures
    Io,          // filesystem errors
  };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

#define ORTHOPROBE_DEFINE_ERROR(Name, K) \
  class Name : public Error {            \
   public:                               \
    explicit Name(const std::string& what) : Error(Kind::K, what) {} \
  };

ORTHOPROBE_DEFINE_ERROR(ParseError, Parse)
ORTHOPROBE_DEFINE_ERROR(StructuralError, Structure)
ORTHOPROBE_DEFINE_ERROR(FormatError, Format)
ORTHOPROBE_DEFINE_ERROR(AnnotationError, Annotation)
ORTHOPROBE_DEFINE_ERROR(ContractError, Contract)
ORTHOPROBE_DEFINE_ERROR(ConfigError, Config)
ORTHOPROBE_DEFINE_ERROR(TrainingError, Training)
ORTHOPROBE_DEFINE_ERROR(IoError, Io)

#undef ORTHOPROBE_DEFINE_ERROR

}  // namespace orthoprobe
