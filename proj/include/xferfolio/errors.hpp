#pragma once

#include <stdexcept>
#include <string>

namespace xferfolio {

/// Base class for all library errors. Every failure the library reports is a
/// subclass of this, so callers can catch one type at the CLI boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- validation ------------------------------------------------------------
class NonFinite : public Error {
public:
    using Error::Error;
};
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// -- portfolio construction --------------------------------------------------
class NegativeWeight : public Error {
public:
    using Error::Error;
};
class NotNormalized : public Error {
public:
    using Error::Error;
};

// -- moments / linear algebra ------------------------------------------------
class ZeroVariance : public Error {
public:
    using Error::Error;
};
class InsufficientData : public Error {
public:
    using Error::Error;
};
class NotSymmetric : public Error {
public:
    using Error::Error;
};
class NotPSD : public Error {
public:
    using Error::Error;
};

// -- solver -------------------------------------------------------------------
class NegativeLambda : public Error {
public:
    using Error::Error;
};
class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

// -- data ingestion -----------------------------------------------------------
class ParseError : public Error {
public:
    using Error::Error;
};
class NonMonotoneTimestamps : public Error {
public:
    using Error::Error;
};
class RaggedRow : public Error {
public:
    using Error::Error;
};
class NonPositivePrice : public Error {
public:
    using Error::Error;
};
class EmptySplit : public Error {
public:
    using Error::Error;
};
class InvalidSpec : public Error {
public:
    using Error::Error;
};

// -- experiments ----------------------------------------------------------------
class UniverseTooSmall : public Error {
public:
    using Error::Error;
};
class ConstantInput : public Error {
public:
    using Error::Error;
};
class LengthMismatch : public Error {
public:
    using Error::Error;
};
class EmptyCell : public Error {
public:
    using Error::Error;
};

}  // namespace xferfolio
