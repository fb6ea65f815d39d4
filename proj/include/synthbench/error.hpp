#pragma once

#include <stdexcept>
#include <string>

namespace synthbench {

/// Base for every error the library raises on bad input or bad state.
/// Anything else escaping the library is an internal failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EncoderError : public Error {
public:
    using Error::Error;
};

class LearnerError : public Error {
public:
    using Error::Error;
};

class GeneratorError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class TunerError : public Error {
public:
    using Error::Error;
};

class ReportError : public Error {
public:
    using Error::Error;
};

class BridgeError : public Error {
public:
    using Error::Error;
};

}  // namespace synthbench
