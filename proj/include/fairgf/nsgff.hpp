#pragma once

#include <cstdint>
#include <vector>

#include "fairgf/filter.hpp"
#include "fairgf/graph.hpp"
#include "fairgf/rng.hpp"

namespace fairgf {

/// Small dense row-major matrix; node-by-feature blocks and layer weights.
struct Dense {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Dense() = default;
    Dense(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Node features the surrogate conditions on, in fixed column order:
/// original priors q0, baseline posteriors r0, the sensitive indicator, and
/// (column normalization only) the asymmetric baseline posteriors r_ns0.
struct FeatureMatrix {
    std::vector<GraphSignal> columns;

    std::size_t width() const { return columns.size(); }
    std::size_t node_count() const { return columns.empty() ? 0 : columns.front().size(); }
};

FeatureMatrix build_features(const GraphSignal& q0, const GraphSignal& r0,
                             const NodeMask& protected_mask, Normalization mode,
                             const GraphSignal* rns0 = nullptr);

/// Output map f_delta(r) = r_ns0 (delta + r) / (delta + r0) with
/// delta = delta0 * max_v r0[v]. r0 are the symmetric-counterpart posteriors
/// of the unedited priors, r_ns0 the posteriors of the filter being made
/// fair; the two coincide under symmetric normalization.
struct TransferTransform {
    double delta0 = 1.0;
    double delta = 0.0;
    GraphSignal r0;
    GraphSignal rns0;
};

TransferTransform make_transfer(double delta0, GraphSignal r0, GraphSignal rns0);

/// Multilayer perceptron with relu hidden layers and a linear scalar output.
/// Hidden width is feature_cols + 2; depth counts affine layers.
struct NsgffModel {
    std::size_t depth = 0;
    std::vector<Dense> weights;
    std::vector<std::vector<double>> biases;

    std::size_t parameter_count() const;
};

/// Weights are |N(0, sqrt(2 / ((1 - 2/pi) * columns of W)))| so that relu
/// layers keep input variance without dying at narrow widths; biases start
/// at zero.
NsgffModel init_folded_normal(std::size_t feature_cols, std::size_t depth, Rng& rng);

struct LossSpec {
    double l_reg = 0.0;  // weight of the L1 posterior regularizer
};

/// One surrogate training task: everything the forward pass conditions on.
struct NsgffTask {
    const NormalizedGraph* propagation = nullptr;
    FilterSpec inner;              // filter applied to the edited priors
    std::uint64_t base_fingerprint = 0;  // fingerprint of the posterior-producing filter
    FeatureMatrix features;
    TransferTransform transfer;
    NodeMask protected_mask;
    double phi = 0.5;
    GraphSignal reference;         // posteriors the loss preserves (r_ns0)
    LossSpec loss;
};

/// Intermediates recorded by the forward pass for exact reverse-mode
/// differentiation.
struct ForwardTape {
    std::vector<Dense> pre_act;    // Z_l, l = 1..L
    std::vector<Dense> act;        // relu(Z_l), l = 1..L-1
    GraphSignal h;                 // edited priors (last layer output)
    GraphSignal y;                 // F(A_hat) h before scaling
    double sigma_y = 0.0;          // sum |y|
    bool zero_mass = false;        // sigma_y == 0, scaling skipped
    GraphSignal r;                 // scaled posteriors
    GraphSignal z;                 // transfer output
    double mass_in = 0.0, mass_out = 0.0;  // group masses of z
    GraphSignal out;               // final fair posteriors, unit L1 mass
};

struct ForwardResult {
    GraphSignal output;
    ForwardTape tape;
};

/// MLP -> propagation through the task's filter -> L1 scaling -> transfer ->
/// group rebalancing to the phi split (which also realizes the final L1
/// normalization). Throws when a group ends up with non-positive mass before
/// rebalancing.
ForwardResult nsgff_forward(const NsgffModel& model, const NsgffTask& task);

/// utility_loss(out, reference) + l_reg (sum out - sum reference).
double nsgff_loss(const GraphSignal& out, const NsgffTask& task);

struct Gradients {
    std::vector<Dense> weights;
    std::vector<std::vector<double>> biases;
};

/// Exact gradients of nsgff_loss w.r.t. every weight and bias. The group
/// rebalancing and L1 scaling are differentiated through their full
/// dependence on the scores; relu and |.| take subgradient 0 at 0; the
/// transfer's r0 and r_ns0 are constants of the pipeline.
Gradients nsgff_backward(const NsgffModel& model, const NsgffTask& task, const ForwardTape& tape);

namespace detail {
/// d loss / d out, exposed for direct verification.
GraphSignal loss_output_gradient(const GraphSignal& out, const NsgffTask& task);
}  // namespace detail

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t patience = 100;
    std::size_t max_epochs = 0;  // 0: bounded by patience alone
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static TrainConfig full() { return {}; }
    static TrainConfig shallow() {
        TrainConfig c;
        c.learning_rate = 0.1;
        c.patience = 5;
        c.max_epochs = 50;
        return c;
    }
};

struct TrainResult {
    double best_loss = 0.0;
    std::size_t epochs = 0;
    std::vector<double> trace;   // loss per epoch, before that epoch's update
    bool aborted = false;        // a forward pass failed mid-training
};

/// Full-batch Adam. Patience counts epochs without a raw loss improvement;
/// at stop the best parameters whose pre-constraint posteriors stayed
/// non-negative are restored (epoch 0 always qualifies under folded-normal
/// initialization). Deterministic given the model's initialization.
TrainResult train(NsgffModel& model, const NsgffTask& task, const TrainConfig& cfg);

/// Central finite-difference verification of nsgff_backward over every
/// weight and bias. Relative error uses max(|analytic|, |numeric|, 1e-6) as
/// the denominator.
struct GradientCheck {
    double max_rel_error = 0.0;
    std::size_t parameters = 0;
};

GradientCheck gradient_check(NsgffModel model, const NsgffTask& task, double step = 1e-5);

enum class NsgffVariant {
    Standard,       // propagate with the base filter itself
    NoPropagation,  // identity propagation (f_0 = 1): plain MLP posterior editing
    Appnp,          // fixed ppr(0.9) truncated at 10 terms as the propagation
};

/// Per-cell problem statement shared across hyperparameter candidates.
struct NsgffProblem {
    const NormalizedGraph* mode_graph = nullptr;
    const NormalizedGraph* sym_graph = nullptr;  // same object under symmetric normalization
    FilterSpec base;
    GraphSignal q0;
    NodeMask protected_mask;
    double target_prule = 1.0;
    GraphSignal r0;    // symmetric-counterpart posteriors (L1)
    GraphSignal rns0;  // base-filter posteriors (L1)
    double phi = 0.5;
    double l_reg = 0.0;
};

/// Computes baseline posteriors, resolves the phi target against them, and
/// defaults l_reg = ||q0||_1 / |V|.
NsgffProblem make_nsgff_problem(const NormalizedGraph& mode_graph, const NormalizedGraph& sym_graph,
                                const FilterSpec& base, const GraphSignal& q0,
                                const NodeMask& protected_mask, double target_prule);

NsgffTask instantiate_task(const NsgffProblem& problem, double delta0, NsgffVariant variant);

inline constexpr double kDelta0Grid[3] = {0.1, 1.0, 10.0};
inline constexpr std::size_t kDepthMin = 3;
inline constexpr std::size_t kDepthMax = 9;

struct SearchChoice {
    std::size_t depth = kDepthMin;
    double delta0 = kDelta0Grid[0];
    double shallow_loss = 0.0;
};

/// 21 shallow runs over depth {3..9} x delta0 {0.1, 1, 10}; argmin of the
/// shallow loss, ties broken toward smaller depth then smaller delta0.
SearchChoice hyperparam_search(const NsgffProblem& problem, NsgffVariant variant, std::uint64_t seed);

struct NsgffOutcome {
    GraphSignal posterior;
    std::size_t depth = 0;
    double delta0 = 0.0;
    std::size_t epochs = 0;
    double final_loss = 0.0;
};

/// Hyperparameter search followed by full training of the winner; returns
/// the trained fair posteriors and the run metadata.
NsgffOutcome run_nsgff(const NsgffProblem& problem, NsgffVariant variant, std::uint64_t seed);

}  // namespace fairgf
