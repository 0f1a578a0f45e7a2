#pragma once

#include <stdexcept>
#include <string>

namespace causalq {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfeasibleAction : public Error { public: using Error::Error; };
class LimitExceeded    : public Error { public: using Error::Error; };
class TerminalState    : public Error { public: using Error::Error; };
class SingularRegression : public Error { public: using Error::Error; };
class CyclicGraph      : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class NoFeasibleAction : public Error { public: using Error::Error; };
class NonFiniteGradient : public Error { public: using Error::Error; };
class EmptyLayer       : public Error { public: using Error::Error; };
class ParseError       : public Error { public: using Error::Error; };
class NonFiniteValue   : public Error { public: using Error::Error; };
class TooFewSamples    : public Error { public: using Error::Error; };
class EmptyList        : public Error { public: using Error::Error; };
class Diverged         : public Error { public: using Error::Error; };
class ConfigError      : public Error { public: using Error::Error; };
class IoError          : public Error { public: using Error::Error; };

}  // namespace causalq
