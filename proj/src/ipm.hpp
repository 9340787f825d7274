#pragma once
// Internal primal-dual interior-point core for block-diagonal SDPs in the
// homogeneous self-dual embedding. Operates on real symmetric blocks only;
// complex lowering happens in the conic layer.

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace randcert::conic::detail {

// min <c,x>  s.t.  <A_i, x> = b_i,  x in product of PSD cones.
struct LoweredProblem {
    std::vector<int> dims;
    // Per constraint: sparse list of (block index, symmetric coefficient).
    std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>> rows;
    Eigen::VectorXd b;
    std::vector<Eigen::MatrixXd> c;  // dense per block
};

enum class IpmStatus { Optimal, PrimalInfeasible, DualInfeasible, Inaccurate, Failed };

struct IpmOptions {
    double eps = 1e-9;
    int max_iter = 200;
    bool verbose = false;
};

struct IpmResult {
    IpmStatus status = IpmStatus::Failed;
    std::vector<Eigen::MatrixXd> x;  // primal blocks, already divided by tau
    Eigen::VectorXd y;
    std::vector<Eigen::MatrixXd> s;
    double pobj = 0.0;
    double dobj = 0.0;
    double pres = 0.0;
    double dres = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

IpmResult solve_ipm(const LoweredProblem& p, const IpmOptions& opts);

}  // namespace randcert::conic::detail
