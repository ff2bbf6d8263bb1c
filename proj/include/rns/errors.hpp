#pragma once

#include <stdexcept>
#include <string>

namespace rns {

/// Error families map one-to-one onto CLI exit codes.
enum class ErrorFamily : int {
    config = 2,
    domain = 3,
    solver = 4,
    contour = 5,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorFamily family, const std::string& kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), family_{family}, kind_{kind}
    {
    }

    ErrorFamily family() const noexcept { return family_; }
    const std::string& kind() const noexcept { return kind_; }

  private:
    ErrorFamily family_;
    std::string kind_;
};

#define RNS_DEFINE_ERROR(Name, Family)                                         \
    class Name : public Error {                                                \
      public:                                                                  \
        explicit Name(const std::string& what)                                 \
            : Error(ErrorFamily::Family, #Name, what)                          \
        {                                                                      \
        }                                                                      \
    }

RNS_DEFINE_ERROR(ConfigError, config);

RNS_DEFINE_ERROR(DomainError, domain);
RNS_DEFINE_ERROR(CJLimitExceeded, domain);
RNS_DEFINE_ERROR(IgnitionFailure, domain);
RNS_DEFINE_ERROR(BadBracket, domain);
RNS_DEFINE_ERROR(FitError, domain);

RNS_DEFINE_ERROR(DomainTooShort, solver);
RNS_DEFINE_ERROR(ProfileNotFound, solver);
RNS_DEFINE_ERROR(ContinuationStalled, solver);
RNS_DEFINE_ERROR(IllConditionedEnds, solver);
RNS_DEFINE_ERROR(SplittingLost, solver);
RNS_DEFINE_ERROR(EvansIntegrationFailure, solver);

RNS_DEFINE_ERROR(UnresolvedContour, contour);
RNS_DEFINE_ERROR(ContourThroughZero, contour);

#undef RNS_DEFINE_ERROR

} // namespace rns
