#pragma once

#include <stdexcept>
#include <string>

namespace memloop {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input file could not be parsed; message carries byte offset / line context.
class ParseError : public Error {
public:
    using Error::Error;
};

// Filesystem failure; message carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

// Remote or scripted backend failure after retries were exhausted.
class GatewayError : public Error {
public:
    using Error::Error;
};

// Scripted backend had no entry for the request digest.
class ReplayMissError : public GatewayError {
public:
    ReplayMissError(const std::string& message, std::string role_tag, std::string nearest_digest)
        : GatewayError(message),
          role_tag(std::move(role_tag)),
          nearest_digest(std::move(nearest_digest)) {}

    std::string role_tag;
    std::string nearest_digest;
};

} // namespace memloop
