#pragma once

#include "blowuplab/geometry.hpp"

namespace blowuplab {

// Value + analytic gradient of a scalar field at a point.
struct FieldEval {
    double value = 0.0;
    Vec4 gradient = Vec4::Zero();
};

}  // namespace blowuplab
