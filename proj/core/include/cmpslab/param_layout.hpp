#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmpslab/cmps_coupled.hpp"
#include "cmpslab/cmps_single.hpp"

namespace cmpslab {

/// Flat real layout of the variational parameters.
///
/// Hermitian D x D blocks take D^2 reals: the D diagonal entries, then (re, im) of every
/// upper-triangle entry in row-major order. Complex D x D blocks take 2 D^2 reals: all real
/// parts (row-major), then all imaginary parts.
///
///   single : [ K | R ]                                     3 D^2 reals
///   coupled: [ K1 | K2 | R1 | R2 | Z1(1) | Z2(1) | ... ]    (6 + 2P) D^2 reals
struct ParamLayout {
    Eigen::Index D{1};
    std::size_t P{0};
    bool coupled{false};

    static ParamLayout single(Eigen::Index d) { return {d, 0, false}; }
    static ParamLayout two_field(Eigen::Index d, std::size_t p) { return {d, p, true}; }

    Eigen::Index size() const noexcept;

    /// Number of matrix entries counted once each (complex R entries count once):
    /// 2 D^2 for a single field and (4 + 2P) D^2 for two coupled fields.
    Eigen::Index paper_parameter_count() const noexcept;

    struct Block {
        std::string name;
        Eigen::Index offset;
        Eigen::Index length;
    };
    std::vector<Block> blocks() const;

    bool operator==(const ParamLayout&) const = default;
};

struct ParamVector {
    Eigen::VectorXd values;
    ParamLayout layout;
};

ParamVector pack(const CmpsAnsatz& ansatz);
ParamVector pack(const CoupledAnsatz& ansatz);

/// Throw LayoutMismatch when the vector length disagrees with the layout.
CmpsAnsatz unpack_single(const ParamVector& v);
CoupledAnsatz unpack_coupled(const ParamVector& v);

}  // namespace cmpslab
