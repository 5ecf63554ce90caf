#include "kbie/assembly.hpp"
#include "kbie/error.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace kbie {

void write_matrix(std::ostream& os, const Eigen::MatrixXcd& m, const Wavenumber& k, const std::string& kind) {
    if (m.rows() != m.cols()) throw DomainError("write_matrix: matrix must be square");
    char buf[128];
    std::snprintf(buf, sizeof buf, "%lld %.17g %s ", static_cast<long long>(m.rows()), k.value(), to_string(k.mode()));
    os << buf << kind << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g\n", static_cast<long long>(i),
                          static_cast<long long>(j), m(i, j).real(), m(i, j).imag());
            os << buf;
        }
    if (!os) throw IoError("write_matrix: write failed");
}

MatrixDump read_matrix(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw IoError("read_matrix: missing header");
    std::istringstream hs(header);
    long long n = 0;
    double kval = 0.0;
    std::string mode, kind;
    if (!(hs >> n >> kval >> mode >> kind) || n < 0)
        throw IoError("read_matrix: malformed header '" + header + "'");
    KernelMode km;
    if (mode == "oscillatory")
        km = KernelMode::oscillatory;
    else if (mode == "damped")
        km = KernelMode::damped;
    else
        throw IoError("read_matrix: unknown kernel mode '" + mode + "'");

    MatrixDump out{Eigen::MatrixXcd::Zero(n, n), Wavenumber(kval, km), kind};
    for (long long e = 0; e < n * n; ++e) {
        long long i, j;
        double re, im;
        if (!(is >> i >> j >> re >> im)) throw IoError("read_matrix: truncated entry list");
        if (i < 0 || j < 0 || i >= n || j >= n) throw IoError("read_matrix: index out of range");
        out.entries(i, j) = Complex(re, im);
    }
    return out;
}

}  // namespace kbie
