#include "cmpslab/param_layout.hpp"

#include <sstream>

#include "cmpslab/errors.hpp"

namespace cmpslab {

namespace {

void write_hermitian(const CMatrix& m, Eigen::VectorXd& out, Eigen::Index& pos) {
    const Eigen::Index d = m.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        out(pos++) = m(i, i).real();
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            out(pos++) = m(i, j).real();
            out(pos++) = m(i, j).imag();
        }
    }
}

CMatrix read_hermitian(const Eigen::VectorXd& in, Eigen::Index d, Eigen::Index& pos) {
    CMatrix m = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        m(i, i) = in(pos++);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const Complex z{in(pos), in(pos + 1)};
            pos += 2;
            m(i, j) = z;
            m(j, i) = std::conj(z);
        }
    }
    return m;
}

void write_complex(const CMatrix& m, Eigen::VectorXd& out, Eigen::Index& pos) {
    const Eigen::Index d = m.rows();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out(pos++) = m(i, j).real();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out(pos++) = m(i, j).imag();
}

CMatrix read_complex(const Eigen::VectorXd& in, Eigen::Index d, Eigen::Index& pos) {
    CMatrix m(d, d);
    const Eigen::Index n = d * d;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex{in(pos + i * d + j), in(pos + n + i * d + j)};
    pos += 2 * n;
    return m;
}

void check_length(const ParamVector& v) {
    if (v.values.size() != v.layout.size()) {
        std::ostringstream msg;
        msg << "parameter vector has length " << v.values.size() << ", layout expects "
            << v.layout.size();
        throw LayoutMismatch(msg.str());
    }
}

}  // namespace

Eigen::Index ParamLayout::size() const noexcept {
    const Eigen::Index d2 = D * D;
    return coupled ? static_cast<Eigen::Index>(6 + 2 * P) * d2 : 3 * d2;
}

Eigen::Index ParamLayout::paper_parameter_count() const noexcept {
    const Eigen::Index d2 = D * D;
    return coupled ? static_cast<Eigen::Index>(4 + 2 * P) * d2 : 2 * d2;
}

std::vector<ParamLayout::Block> ParamLayout::blocks() const {
    const Eigen::Index d2 = D * D;
    std::vector<Block> out;
    Eigen::Index pos = 0;
    auto add = [&](std::string name, Eigen::Index len) {
        out.push_back({std::move(name), pos, len});
        pos += len;
    };
    if (!coupled) {
        add("K", d2);
        add("R", 2 * d2);
        return out;
    }
    add("K1", d2);
    add("K2", d2);
    add("R1", 2 * d2);
    add("R2", 2 * d2);
    for (std::size_t p = 1; p <= P; ++p) {
        add("Z1(" + std::to_string(p) + ")", d2);
        add("Z2(" + std::to_string(p) + ")", d2);
    }
    return out;
}

ParamVector pack(const CmpsAnsatz& ansatz) {
    ParamVector v{Eigen::VectorXd(), ParamLayout::single(ansatz.bond_dim())};
    v.values.resize(v.layout.size());
    Eigen::Index pos = 0;
    write_hermitian(ansatz.K, v.values, pos);
    write_complex(ansatz.R, v.values, pos);
    return v;
}

ParamVector pack(const CoupledAnsatz& ansatz) {
    ParamVector v{Eigen::VectorXd(), ParamLayout::two_field(ansatz.bond_dim(), ansatz.pairs())};
    v.values.resize(v.layout.size());
    Eigen::Index pos = 0;
    write_hermitian(ansatz.K1, v.values, pos);
    write_hermitian(ansatz.K2, v.values, pos);
    write_complex(ansatz.R1, v.values, pos);
    write_complex(ansatz.R2, v.values, pos);
    for (const auto& pair : ansatz.Z) {
        write_hermitian(pair.z1, v.values, pos);
        write_hermitian(pair.z2, v.values, pos);
    }
    return v;
}

CmpsAnsatz unpack_single(const ParamVector& v) {
    if (v.layout.coupled) {
        throw LayoutMismatch("unpack_single: layout describes two coupled fields");
    }
    check_length(v);
    Eigen::Index pos = 0;
    CMatrix k = read_hermitian(v.values, v.layout.D, pos);
    CMatrix r = read_complex(v.values, v.layout.D, pos);
    return CmpsAnsatz(std::move(k), std::move(r));
}

CoupledAnsatz unpack_coupled(const ParamVector& v) {
    if (!v.layout.coupled) {
        throw LayoutMismatch("unpack_coupled: layout describes a single field");
    }
    check_length(v);
    const Eigen::Index d = v.layout.D;
    Eigen::Index pos = 0;
    CMatrix k1 = read_hermitian(v.values, d, pos);
    CMatrix k2 = read_hermitian(v.values, d, pos);
    CMatrix r1 = read_complex(v.values, d, pos);
    CMatrix r2 = read_complex(v.values, d, pos);
    std::vector<ZPair> z;
    z.reserve(v.layout.P);
    for (std::size_t p = 0; p < v.layout.P; ++p) {
        CMatrix z1 = read_hermitian(v.values, d, pos);
        CMatrix z2 = read_hermitian(v.values, d, pos);
        z.push_back({std::move(z1), std::move(z2)});
    }
    return CoupledAnsatz(std::move(k1), std::move(k2), std::move(r1), std::move(r2), std::move(z));
}

}  // namespace cmpslab
