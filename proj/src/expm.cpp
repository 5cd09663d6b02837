// expm.cpp: matrix exponential by scaling and squaring

#include "memdyn/expm.hpp"

#include <array>
#include <cmath>

namespace memdyn {

namespace {

// Largest 1-norms for which each Pade degree meets double-precision
// backward error (Higham 2005).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                           30270240.0,    2162160.0,    110880.0,     3960.0,
                                           90.0,          1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

double one_norm(const Matrix& m)
{
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

// Low-degree approximants: U = A * sum b_{odd} A^{2k}, V = sum b_{even} A^{2k}.
template <std::size_t N>
void pade_low(const Matrix& a, const std::array<double, N>& b, Matrix& u, Matrix& v)
{
    const auto n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    Matrix power = ident;
    Matrix odd = Matrix::Zero(n, n);
    Matrix even = Matrix::Zero(n, n);
    for (std::size_t k = 0; 2 * k + 1 < N; ++k) {
        even += b[2 * k] * power;
        odd += b[2 * k + 1] * power;
        power = power * a2;
    }
    u = a * odd;
    v = even;
}

void pade13(const Matrix& a, Matrix& u, Matrix& v)
{
    const auto& b = kPade13;
    const auto n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix inner_u = b[13] * a6 + b[11] * a4 + b[9] * a2;
    u = a * (a6 * inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    const Matrix inner_v = b[12] * a6 + b[10] * a4 + b[8] * a2;
    v = a6 * inner_v + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
}

}  // namespace

Matrix matrix_exp(const Matrix& m)
{
    if (m.rows() != m.cols()) throw DimensionError("matrix_exp needs a square matrix");
    if (m.size() == 0) return m;
    if (!m.allFinite()) throw NumericalError("matrix_exp input has non-finite entries");

    const double norm = one_norm(m);
    Matrix u;
    Matrix v;
    int squarings = 0;
    if (norm <= kTheta3) {
        pade_low(m, kPade3, u, v);
    } else if (norm <= kTheta5) {
        pade_low(m, kPade5, u, v);
    } else if (norm <= kTheta7) {
        pade_low(m, kPade7, u, v);
    } else if (norm <= kTheta9) {
        pade_low(m, kPade9, u, v);
    } else {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
        if (squarings > 1000) throw NumericalError("matrix_exp: norm too large, result would overflow");
        pade13(m * std::ldexp(1.0, -squarings), u, v);
    }

    Matrix result = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) result = result * result;
    if (!result.allFinite()) throw NumericalError("matrix_exp overflowed");
    return result;
}

}  // namespace memdyn
