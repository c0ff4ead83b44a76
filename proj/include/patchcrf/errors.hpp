#ifndef PATCHCRF_ERRORS_HPP
#define PATCHCRF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace patchcrf {

// Base for every library error so callers can catch one type at the CLI
// boundary and turn it into a single diagnostic line.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PATCHCRF_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& msg) : Error(msg) {}         \
    }

// grid_scan
PATCHCRF_DEFINE_ERROR(HilbertGridUnsupported);
PATCHCRF_DEFINE_ERROR(ImageTooSmall);
PATCHCRF_DEFINE_ERROR(LengthMismatch);

// imaging
PATCHCRF_DEFINE_ERROR(UnsupportedFormat);
PATCHCRF_DEFINE_ERROR(MalformedHeader);
PATCHCRF_DEFINE_ERROR(TruncatedPayload);
PATCHCRF_DEFINE_ERROR(ZeroTargetDimension);

// descriptor
PATCHCRF_DEFINE_ERROR(WrongPatchSize);
PATCHCRF_DEFINE_ERROR(InsufficientData);
PATCHCRF_DEFINE_ERROR(DimensionMismatch);

// gmm
PATCHCRF_DEFINE_ERROR(TooFewSamples);

// crf_chain
PATCHCRF_DEFINE_ERROR(InstanceTooLarge);

// classifier
PATCHCRF_DEFINE_ERROR(SingleClassData);

// pipeline
PATCHCRF_DEFINE_ERROR(DatasetTooSmall);
PATCHCRF_DEFINE_ERROR(UnknownLabel);
PATCHCRF_DEFINE_ERROR(VersionMismatch);
PATCHCRF_DEFINE_ERROR(SchemaError);

// dataset / cli
PATCHCRF_DEFINE_ERROR(EmptyDataset);
PATCHCRF_DEFINE_ERROR(ClassTooSmall);

#undef PATCHCRF_DEFINE_ERROR

} // namespace patchcrf

#endif
