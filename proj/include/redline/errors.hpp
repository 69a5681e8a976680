#ifndef REDLINE_ERRORS_HPP_
#define REDLINE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace redline {

// Base for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// env
struct InvalidConfig : Error { using Error::Error; };
struct IllegalAction : Error { using Error::Error; };
struct EpisodeFinished : Error { using Error::Error; };

// agents
struct IllegalPolicy : Error { using Error::Error; };

// rewards
struct EmptyState : Error { using Error::Error; };

// metrics
struct EmptyEpisode : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct BadWindow : Error { using Error::Error; };

// ppo
struct BadDimensions : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };

// harness
struct ConfigError : Error { using Error::Error; };
struct MixedConfig : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace redline

#endif  // REDLINE_ERRORS_HPP_
