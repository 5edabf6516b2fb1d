#pragma once

#include <stdexcept>
#include <string>

namespace styleaudit {

// Base for all pipeline errors. CLI commands catch this and exit nonzero
// with a stage-labeled message.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

    const std::string& name() const { return name_; }

private:
    std::string name_;
};

#define STYLEAUDIT_DEFINE_ERROR(Name)                                     \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& what) : Error(#Name, what) {}    \
    }

STYLEAUDIT_DEFINE_ERROR(EmptyDirectory);
STYLEAUDIT_DEFINE_ERROR(DecodeFailure);
STYLEAUDIT_DEFINE_ERROR(InvalidConfig);
STYLEAUDIT_DEFINE_ERROR(TooFewRecords);
STYLEAUDIT_DEFINE_ERROR(InsufficientPool);
STYLEAUDIT_DEFINE_ERROR(TooFewStages);
STYLEAUDIT_DEFINE_ERROR(WeightsUnavailable);
STYLEAUDIT_DEFINE_ERROR(DimMismatch);
STYLEAUDIT_DEFINE_ERROR(Degenerate);
STYLEAUDIT_DEFINE_ERROR(TooFewScores);
STYLEAUDIT_DEFINE_ERROR(InvalidCounts);
STYLEAUDIT_DEFINE_ERROR(DegenerateGroundTruth);
STYLEAUDIT_DEFINE_ERROR(IoError);

#undef STYLEAUDIT_DEFINE_ERROR

}  // namespace styleaudit
