// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace last {

struct ZeroVectorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidKernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptySegmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfBoundsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DuplicateToolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownLabelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedCallError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetTooSmallError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IdMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IOFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroGroundTruthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace last
