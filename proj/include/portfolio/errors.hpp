#pragma once

#include <stdexcept>
#include <string>

namespace portfolio {

/// Base class for all engine errors.
class EngineError : public std::runtime_error {
public:
    explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

// market data
class ParseError : public EngineError {
public:
    using EngineError::EngineError;
};
class MissingDateError : public EngineError {
public:
    using EngineError::EngineError;
};
class NonPositivePriceError : public EngineError {
public:
    using EngineError::EngineError;
};
class TooShortError : public EngineError {
public:
    using EngineError::EngineError;
};
class IndexOutOfRangeError : public EngineError {
public:
    using EngineError::EngineError;
};
class WindowTooLongError : public EngineError {
public:
    using EngineError::EngineError;
};

// clustering
class DegenerateFeaturesError : public EngineError {
public:
    using EngineError::EngineError;
};

// ledger
class InsolventPortfolioError : public EngineError {
public:
    using EngineError::EngineError;
};
class MaskMismatchError : public EngineError {
public:
    using EngineError::EngineError;
};
class NonPositiveValueError : public EngineError {
public:
    using EngineError::EngineError;
};

// allocator
class WindowTooShortError : public EngineError {
public:
    using EngineError::EngineError;
};
class DegenerateExcessReturnError : public EngineError {
public:
    using EngineError::EngineError;
};
class InvalidBoundsError : public EngineError {
public:
    using EngineError::EngineError;
};
class BlendOutOfRangeError : public EngineError {
public:
    using EngineError::EngineError;
};
class NonPositiveTemperatureError : public EngineError {
public:
    using EngineError::EngineError;
};

// agents
class ShapeMismatchError : public EngineError {
public:
    using EngineError::EngineError;
};
class EmptyMaskError : public EngineError {
public:
    using EngineError::EngineError;
};
class EmptyBatchError : public EngineError {
public:
    using EngineError::EngineError;
};

// baselines
class UnknownStrategyError : public EngineError {
public:
    using EngineError::EngineError;
};
class InsufficientHistoryError : public EngineError {
public:
    using EngineError::EngineError;
};

// metrics
class ZeroVarianceError : public EngineError {
public:
    using EngineError::EngineError;
};

// cli
class ConfigError : public EngineError {
public:
    using EngineError::EngineError;
};
class DataError : public EngineError {
public:
    using EngineError::EngineError;
};

}  // namespace portfolio
