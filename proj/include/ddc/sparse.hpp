// ============================================================================
// ddc/sparse.hpp - compressed row sparse operator type
// ============================================================================
#pragma once

#include "ddc/types.hpp"

#include <Eigen/SparseCore>

namespace ddc {

/// Compressed row storage; column indices sorted and unique within a row.
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;
using Triplet = Eigen::Triplet<double, Index>;

} // namespace ddc
