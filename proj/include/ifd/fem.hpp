#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/mesh.hpp"

namespace ifd {

// Quasi-static inflation: total Lagrangian finite-strain solve of the solid
// shell under ramped follower pressure on the interior interface, bottom
// edge fixed. Compressible neo-Hookean, plane strain:
//   W(F) = mu/2 (tr(F^T F) - 2) - mu ln J + lambda/2 (ln J)^2
//   P(F) = mu (F - F^-T) + lambda ln J F^-T

struct Material {
    double lambda = 16.44;
    double mu = 0.1644;
};

struct LoadSchedule {
    double rate = 0.01;  // pressure per unit time
    double t_start = 0.0;
    double t_end = 1.0;
    double dt = 0.1;

    double pressure_at(double t) const { return rate * t; }
};

struct SolverConfig {
    double newton_tol = 1e-8;       // relative residual drop
    double newton_abs_tol = 1e-12;  // absolute fallback
    int max_iters = 25;
    int max_bisections = 6;
};

struct DeformedStep {
    double time = 0.0;
    std::vector<double> u;  // 2 * node count, (ux, uy) interleaved
};

struct ElementTensors {
    Eigen::Matrix2d F;
    Eigen::Matrix2d P;
};

struct DeformedState {
    std::vector<DeformedStep> steps;
    std::optional<std::vector<ElementTensors>> final_tensors;  // at element centers
};

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residual_norms;  // per iteration, starting at the entry residual
};

inline double strain_energy(const Eigen::Matrix2d& F, const Material& mat) {
    const double J = F.determinant();
    require(J > 0.0, Errc::inverted_element, "det F <= 0 in energy");
    const double lnJ = std::log(J);
    return 0.5 * mat.mu * ((F.transpose() * F).trace() - 2.0) - mat.mu * lnJ +
           0.5 * mat.lambda * lnJ * lnJ;
}

inline Eigen::Matrix2d pk1_stress(const Eigen::Matrix2d& F, const Material& mat) {
    const double J = F.determinant();
    require(J > 0.0, Errc::inverted_element, "det F <= 0 in stress");
    const Eigen::Matrix2d Finv = F.inverse();
    const Eigen::Matrix2d FinvT = Finv.transpose();
    return mat.mu * (F - FinvT) + mat.lambda * std::log(J) * FinvT;
}

// A[i][j][k][l] = dP_ij / dF_kl, consistent with pk1_stress.
using Tangent4 = std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2>;

inline Tangent4 material_tangent(const Eigen::Matrix2d& F, const Material& mat) {
    const double J = F.determinant();
    require(J > 0.0, Errc::inverted_element, "det F <= 0 in tangent");
    const double lnJ = std::log(J);
    const Eigen::Matrix2d Fi = F.inverse();
    Tangent4 A{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    A[i][j][k][l] = mat.mu * (i == k && j == l ? 1.0 : 0.0) +
                                    (mat.mu - mat.lambda * lnJ) * Fi(j, k) * Fi(l, i) +
                                    mat.lambda * Fi(j, i) * Fi(l, k);
    return A;
}

namespace detail {

// Gauss 2x2 points and reference-gradient tables for the axis-aligned square
// elements this mesh produces (constant Jacobian h/2 * I).
struct QuadratureCache {
    // grad[gp][a][dim] = dN_a/dX_dim at Gauss point gp, and the common weight
    std::array<std::array<std::array<double, 2>, 4>, 4> grad{};
    double weight = 0.0;  // w * detJ0, identical at all Gauss points

    explicit QuadratureCache(double h) {
        const double g = 1.0 / std::sqrt(3.0);
        const double pts[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};
        for (int q = 0; q < 4; ++q) {
            const double xi = pts[q][0], eta = pts[q][1];
            const double dxi[4] = {-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4, -(1 + eta) / 4};
            const double deta[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4, (1 - xi) / 4};
            for (int a = 0; a < 4; ++a) {
                grad[q][a][0] = dxi[a] * (2.0 / h);   // dN/dX
                grad[q][a][1] = deta[a] * (2.0 / h);  // dN/dY
            }
        }
        weight = (h * h) / 4.0;  // 1 (Gauss weight) * detJ0
    }
};

inline Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {v.y(), -v.x()}; }

}  // namespace detail

// Assembled residual R = f_int - f_ext and consistent tangent dR/du, with
// fixed DOFs eliminated (their rows and columns dropped). The returned
// triplet list covers only free DOFs.
class Assembler {
public:
    Assembler(const QuadMesh& mesh, Material mat)
        : mesh_(mesh), mat_(mat), quad_(mesh.pixel_size) {
        const int n = static_cast<int>(mesh_.nodes.size());
        free_index_.assign(static_cast<size_t>(2 * n), -1);
        std::vector<bool> fixed(static_cast<size_t>(n), false);
        for (int f : mesh_.fixed_nodes) fixed[static_cast<size_t>(f)] = true;
        int next = 0;
        for (int i = 0; i < n; ++i) {
            if (fixed[static_cast<size_t>(i)]) continue;
            free_index_[static_cast<size_t>(2 * i)] = next++;
            free_index_[static_cast<size_t>(2 * i + 1)] = next++;
        }
        n_free_ = next;
    }

    int free_dof_count() const { return n_free_; }

    Eigen::Matrix2d deformation_gradient(const std::vector<double>& u, size_t elem, int gp) const {
        const auto& el = mesh_.elements[elem];
        Eigen::Matrix2d F = Eigen::Matrix2d::Identity();
        for (int a = 0; a < 4; ++a) {
            const int nd = el[static_cast<size_t>(a)];
            const double ux = u[static_cast<size_t>(2 * nd)];
            const double uy = u[static_cast<size_t>(2 * nd + 1)];
            for (int J = 0; J < 2; ++J) {
                F(0, J) += ux * quad_.grad[static_cast<size_t>(gp)][static_cast<size_t>(a)]
                                          [static_cast<size_t>(J)];
                F(1, J) += uy * quad_.grad[static_cast<size_t>(gp)][static_cast<size_t>(a)]
                                          [static_cast<size_t>(J)];
            }
        }
        return F;
    }

    // Full-size residual (2*nodes) plus reduced tangent triplets.
    void assemble(const std::vector<double>& u, double pressure,
                  std::vector<double>& residual,
                  std::vector<Eigen::Triplet<double>>* triplets) const {
        const size_t ndof = mesh_.nodes.size() * 2;
        require(u.size() == ndof, Errc::shape_mismatch, "displacement length != 2*nodes");
        residual.assign(ndof, 0.0);
        if (triplets) triplets->clear();

        // internal forces and material stiffness
        for (size_t e = 0; e < mesh_.elements.size(); ++e) {
            const auto& el = mesh_.elements[e];
            Eigen::Matrix<double, 8, 1> fe = Eigen::Matrix<double, 8, 1>::Zero();
            Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
            for (int gp = 0; gp < 4; ++gp) {
                const Eigen::Matrix2d F = deformation_gradient(u, e, gp);
                if (F.determinant() <= 0.0)
                    fail(Errc::inverted_element,
                         "element " + std::to_string(e) + " gp " + std::to_string(gp));
                const Eigen::Matrix2d P = pk1_stress(F, mat_);
                const auto& grad = quad_.grad[static_cast<size_t>(gp)];
                const double w = quad_.weight;
                for (int a = 0; a < 4; ++a)
                    for (int i = 0; i < 2; ++i) {
                        double s = 0.0;
                        for (int J = 0; J < 2; ++J)
                            s += P(i, J) * grad[static_cast<size_t>(a)][static_cast<size_t>(J)];
                        fe(2 * a + i) += w * s;
                    }
                if (triplets) {
                    const Tangent4 A = material_tangent(F, mat_);
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b)
                            for (int i = 0; i < 2; ++i)
                                for (int k = 0; k < 2; ++k) {
                                    double s = 0.0;
                                    for (int J = 0; J < 2; ++J)
                                        for (int L = 0; L < 2; ++L)
                                            s += grad[static_cast<size_t>(a)]
                                                     [static_cast<size_t>(J)] *
                                                 A[static_cast<size_t>(i)][static_cast<size_t>(J)]
                                                  [static_cast<size_t>(k)][static_cast<size_t>(L)] *
                                                 grad[static_cast<size_t>(b)]
                                                     [static_cast<size_t>(L)];
                                    ke(2 * a + i, 2 * b + k) += w * s;
                                }
                }
            }
            for (int a = 0; a < 4; ++a)
                for (int i = 0; i < 2; ++i)
                    residual[static_cast<size_t>(2 * el[static_cast<size_t>(a)] + i)] +=
                        fe(2 * a + i);
            if (triplets) scatter(ke, el, *triplets);
        }

        // follower pressure on the deformed interface, half to each edge node
        if (pressure != 0.0) {
            for (const auto& edge : mesh_.pressure_edges) {
                const int na = edge[0], nb = edge[1];
                const Eigen::Vector2d xa(mesh_.nodes[static_cast<size_t>(na)].x +
                                             u[static_cast<size_t>(2 * na)],
                                         mesh_.nodes[static_cast<size_t>(na)].y +
                                             u[static_cast<size_t>(2 * na + 1)]);
                const Eigen::Vector2d xb(mesh_.nodes[static_cast<size_t>(nb)].x +
                                             u[static_cast<size_t>(2 * nb)],
                                         mesh_.nodes[static_cast<size_t>(nb)].y +
                                             u[static_cast<size_t>(2 * nb + 1)]);
                const Eigen::Vector2d f = -0.5 * pressure * detail::perp(xb - xa);
                // external force enters the residual with a minus sign
                residual[static_cast<size_t>(2 * na)] -= f.x();
                residual[static_cast<size_t>(2 * na + 1)] -= f.y();
                residual[static_cast<size_t>(2 * nb)] -= f.x();
                residual[static_cast<size_t>(2 * nb + 1)] -= f.y();
                if (triplets) {
                    // d f_ext / du: f depends on u only through e = xb - xa,
                    // d perp(e) = R de with R = [[0,1],[-1,0]]
                    Eigen::Matrix2d R;
                    R << 0.0, 1.0, -1.0, 0.0;
                    const Eigen::Matrix2d Kb = -0.5 * pressure * R;  // d f / d xb
                    const Eigen::Matrix2d Ka = -Kb;                  // d f / d xa
                    for (int i = 0; i < 2; ++i)
                        for (int k = 0; k < 2; ++k) {
                            // K -= d f_ext/du, applied to rows of both nodes
                            add_triplet(*triplets, 2 * na + i, 2 * na + k, -Ka(i, k));
                            add_triplet(*triplets, 2 * na + i, 2 * nb + k, -Kb(i, k));
                            add_triplet(*triplets, 2 * nb + i, 2 * na + k, -Ka(i, k));
                            add_triplet(*triplets, 2 * nb + i, 2 * nb + k, -Kb(i, k));
                        }
                }
            }
        }
    }

    // reduced residual vector (free DOFs only)
    Eigen::VectorXd reduce(const std::vector<double>& residual) const {
        Eigen::VectorXd r(n_free_);
        for (size_t d = 0; d < residual.size(); ++d)
            if (free_index_[d] >= 0) r(free_index_[d]) = residual[d];
        return r;
    }

    int free_index(int dof) const { return free_index_[static_cast<size_t>(dof)]; }

private:
    void scatter(const Eigen::Matrix<double, 8, 8>& ke, const std::array<int, 4>& el,
                 std::vector<Eigen::Triplet<double>>& triplets) const {
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 2; ++i)
                for (int b = 0; b < 4; ++b)
                    for (int k = 0; k < 2; ++k)
                        add_triplet(triplets, 2 * el[static_cast<size_t>(a)] + i,
                                    2 * el[static_cast<size_t>(b)] + k, ke(2 * a + i, 2 * b + k));
    }

    void add_triplet(std::vector<Eigen::Triplet<double>>& triplets, int row, int col,
                     double v) const {
        const int r = free_index_[static_cast<size_t>(row)];
        const int c = free_index_[static_cast<size_t>(col)];
        if (r >= 0 && c >= 0 && v != 0.0) triplets.emplace_back(r, c, v);
    }

    const QuadMesh& mesh_;
    Material mat_;
    detail::QuadratureCache quad_;
    std::vector<int> free_index_;
    int n_free_ = 0;
};

// One Newton solve at fixed pressure. Fixed DOFs stay exactly zero.
inline NewtonReport newton_step_solve(const Assembler& assembler, double pressure,
                                      std::vector<double>& u, const SolverConfig& cfg) {
    NewtonReport report;
    std::vector<double> residual;
    std::vector<Eigen::Triplet<double>> triplets;
    double ref_norm = -1.0;
    for (int it = 0; it <= cfg.max_iters; ++it) {
        assembler.assemble(u, pressure, residual, &triplets);
        const Eigen::VectorXd r = assembler.reduce(residual);
        const double norm = r.norm();
        report.residual_norms.push_back(norm);
        if (ref_norm < 0.0) ref_norm = norm;
        if (norm <= cfg.newton_abs_tol || norm <= cfg.newton_tol * ref_norm) {
            report.iterations = it;
            return report;
        }
        if (it == cfg.max_iters) break;

        Eigen::SparseMatrix<double> K(assembler.free_dof_count(), assembler.free_dof_count());
        K.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(K);
        require(lu.info() == Eigen::Success, Errc::singular_system, "LU factorization failed");
        const Eigen::VectorXd du = lu.solve(-r);
        require(lu.info() == Eigen::Success, Errc::singular_system, "LU solve failed");
        require(du.allFinite(), Errc::singular_system, "non-finite Newton update");

        for (size_t d = 0; d < u.size(); ++d) {
            const int fi = assembler.free_index(static_cast<int>(d));
            if (fi >= 0) u[d] += du(fi);
        }
    }
    fail(Errc::newton_diverged,
         "no convergence after " + std::to_string(cfg.max_iters) +
             " iterations at p=" + std::to_string(pressure));
}

// Incremental loading over the schedule with bisection on failed steps.
inline DeformedState simulate(const QuadMesh& mesh, const Material& mat,
                              const LoadSchedule& schedule, const SolverConfig& cfg,
                              bool record_tensors = false) {
    Assembler assembler(mesh, mat);
    std::vector<double> u(mesh.nodes.size() * 2, 0.0);
    DeformedState state;

    const int n_steps =
        static_cast<int>(std::round((schedule.t_end - schedule.t_start) / schedule.dt));
    double t_prev = schedule.t_start;
    for (int s = 1; s <= n_steps; ++s) {
        const double t_target = schedule.t_start + s * schedule.dt;
        double t_cur = t_prev;
        double step = t_target - t_cur;
        int level = 0;
        while (t_cur < t_target - 1e-12) {
            const double t_try = std::min(t_cur + step, t_target);
            std::vector<double> u_try = u;
            bool ok = true;
            try {
                newton_step_solve(assembler, schedule.pressure_at(t_try), u_try, cfg);
            } catch (const Error& e) {
                if (e.code() != Errc::newton_diverged && e.code() != Errc::inverted_element &&
                    e.code() != Errc::singular_system)
                    throw;
                ok = false;
            }
            if (ok) {
                u = std::move(u_try);
                t_cur = t_try;
            } else {
                ++level;
                if (level > cfg.max_bisections)
                    fail(Errc::simulation_failed,
                         "bisection exhausted; last good time t=" + std::to_string(t_cur));
                step *= 0.5;
            }
        }
        state.steps.push_back({t_target, u});
        t_prev = t_target;
    }

    if (record_tensors) {
        std::vector<ElementTensors> tensors;
        tensors.reserve(mesh.elements.size());
        // element-center values (xi = eta = 0): average of corner gradients
        const double h = mesh.pixel_size;
        for (size_t e = 0; e < mesh.elements.size(); ++e) {
            const auto& el = mesh.elements[e];
            Eigen::Matrix2d F = Eigen::Matrix2d::Identity();
            const double dx[4] = {-0.5 / h, 0.5 / h, 0.5 / h, -0.5 / h};
            const double dy[4] = {-0.5 / h, -0.5 / h, 0.5 / h, 0.5 / h};
            for (int a = 0; a < 4; ++a) {
                const int nd = el[static_cast<size_t>(a)];
                F(0, 0) += u[static_cast<size_t>(2 * nd)] * dx[a];
                F(0, 1) += u[static_cast<size_t>(2 * nd)] * dy[a];
                F(1, 0) += u[static_cast<size_t>(2 * nd + 1)] * dx[a];
                F(1, 1) += u[static_cast<size_t>(2 * nd + 1)] * dy[a];
            }
            tensors.push_back({F, pk1_stress(F, mat)});
        }
        state.final_tensors = std::move(tensors);
    }
    return state;
}

// Deformed node positions at the final recorded step.
inline std::vector<Vec2> deformed_cloud(const QuadMesh& mesh, const DeformedState& state) {
    require(!state.steps.empty(), Errc::empty_cloud, "simulation recorded no steps");
    const auto& u = state.steps.back().u;
    std::vector<Vec2> cloud;
    cloud.reserve(mesh.nodes.size());
    for (size_t i = 0; i < mesh.nodes.size(); ++i)
        cloud.push_back({mesh.nodes[i].x + u[2 * i], mesh.nodes[i].y + u[2 * i + 1]});
    return cloud;
}

// Text export: header with times, then "node_id ux uy" blocks per step, and
// optionally per-element tensors at the final step.
inline void write_simulation(const QuadMesh& mesh, const DeformedState& state,
                             const std::string& path) {
    std::ofstream f(path);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << "TIMES";
    for (const auto& s : state.steps) f << " " << detail::fmt_double(s.time);
    f << "\n";
    for (const auto& s : state.steps) {
        f << "STEP " << detail::fmt_double(s.time) << "\n";
        for (size_t n = 0; n < mesh.nodes.size(); ++n)
            f << n << " " << detail::fmt_double(s.u[2 * n]) << " "
              << detail::fmt_double(s.u[2 * n + 1]) << "\n";
    }
    if (state.final_tensors) {
        f << "ELEMS " << state.final_tensors->size() << "\n";
        for (size_t e = 0; e < state.final_tensors->size(); ++e) {
            const auto& t = (*state.final_tensors)[e];
            f << e;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) f << " " << detail::fmt_double(t.F(i, j));
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) f << " " << detail::fmt_double(t.P(i, j));
            f << "\n";
        }
    }
    require(f.good(), Errc::io_error, "write failed: " + path);
}

}  // namespace ifd
