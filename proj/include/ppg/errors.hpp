#pragma once

#include <stdexcept>
#include <string>

namespace ppg {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration detected before any computation.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The located boundary root is not an outward crossing (tangential grazing).
class DegenerateCrossing : public Error {
public:
    using Error::Error;
};

/// Terminal angle outside the usable part of the terminal circle.
class NotUsable : public Error {
public:
    using Error::Error;
};

/// Retrograde generation requested on the universal line.
class SingularStall : public Error {
public:
    using Error::Error;
};

class EmptyUsablePart : public Error {
public:
    using Error::Error;
};

class ZeroGradient : public Error {
public:
    using Error::Error;
};

/// A training batch produced a NaN or infinite loss.
class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

/// Malformed, truncated or version-mismatched file.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ppg
