// expm.hpp: matrix exponential by scaling and squaring

#pragma once

#include "memdyn/qcore.hpp"

namespace memdyn {

/// e^M via scaling and squaring with a diagonal Pade approximant of degree
/// 3, 5, 7, 9 or 13 chosen from the 1-norm of M.
///
/// Throws NumericalError for non-finite input or when the result overflows.
Matrix matrix_exp(const Matrix& m);

}  // namespace memdyn
