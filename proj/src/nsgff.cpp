#include "fairgf/nsgff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fairgf/metrics.hpp"

namespace fairgf {

namespace {

constexpr double kFoldedCorrection = 1.0 - 2.0 / 3.141592653589793238462643383279502884;

Dense matmul(const Dense& a, const Dense& w) {
    Dense out(a.rows, w.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < w.cols; ++j) {
                out.at(i, j) += aik * w.at(k, j);
            }
        }
    }
    return out;
}

// a^T g: (k x n)(n x m) -> (k x m)
Dense matmul_trans_a(const Dense& a, const Dense& g) {
    Dense out(a.cols, g.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < g.cols; ++j) {
                out.at(k, j) += aik * g.at(i, j);
            }
        }
    }
    return out;
}

// g w^T: (n x m)(k x m)^T -> (n x k)
Dense matmul_trans_b(const Dense& g, const Dense& w) {
    Dense out(g.rows, w.rows);
    for (std::size_t i = 0; i < g.rows; ++i) {
        for (std::size_t j = 0; j < w.rows; ++j) {
            double acc = 0.0;
            for (std::size_t m = 0; m < g.cols; ++m) {
                acc += g.at(i, m) * w.at(j, m);
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

Dense features_to_dense(const FeatureMatrix& f) {
    Dense x(f.node_count(), f.width());
    for (std::size_t j = 0; j < f.width(); ++j) {
        for (std::size_t v = 0; v < x.rows; ++v) {
            x.at(v, j) = f.columns[j][v];
        }
    }
    return x;
}

void check_task(const NsgffModel& model, const NsgffTask& task) {
    if (task.propagation == nullptr) {
        throw std::invalid_argument("surrogate task has no propagation graph");
    }
    const std::size_t n = task.features.node_count();
    if (n == 0 || n != task.propagation->n || n != task.reference.size() ||
        n != task.protected_mask.size() || n != task.transfer.r0.size()) {
        throw std::invalid_argument("surrogate task has inconsistent signal lengths");
    }
    if (model.weights.empty() || model.weights.front().rows != task.features.width()) {
        throw std::invalid_argument("model input width does not match the feature matrix");
    }
    if (!(task.phi > 0.0 && task.phi < 1.0)) {
        throw std::invalid_argument("surrogate task phi must lie in (0, 1)");
    }
}

}  // namespace

FeatureMatrix build_features(const GraphSignal& q0, const GraphSignal& r0,
                             const NodeMask& protected_mask, Normalization mode,
                             const GraphSignal* rns0) {
    validate_group(protected_mask, q0.size());
    if (r0.size() != q0.size()) {
        throw std::invalid_argument("build_features: q0 and r0 lengths differ");
    }
    if (mode == Normalization::Column && rns0 == nullptr) {
        throw std::invalid_argument("build_features: column normalization needs the r_ns0 column");
    }
    if (mode == Normalization::Symmetric && rns0 != nullptr) {
        throw std::invalid_argument("build_features: r_ns0 column only applies to column normalization");
    }
    FeatureMatrix f;
    f.columns.push_back(q0);
    f.columns.push_back(r0);
    GraphSignal indicator(q0.size());
    for (std::size_t v = 0; v < q0.size(); ++v) indicator[v] = protected_mask[v] ? 1.0 : 0.0;
    f.columns.push_back(std::move(indicator));
    if (mode == Normalization::Column) {
        if (rns0->size() != q0.size()) {
            throw std::invalid_argument("build_features: r_ns0 length differs");
        }
        f.columns.push_back(*rns0);
    }
    return f;
}

TransferTransform make_transfer(double delta0, GraphSignal r0, GraphSignal rns0) {
    if (!(delta0 > 0.0)) {
        throw std::invalid_argument("transfer delta0 must be positive");
    }
    if (r0.size() != rns0.size()) {
        throw std::invalid_argument("transfer signals have different lengths");
    }
    double peak = 0.0;
    for (double x : r0) peak = std::max(peak, x);
    if (!(peak > 0.0)) {
        throw std::domain_error("transfer needs nonzero baseline posteriors");
    }
    TransferTransform t;
    t.delta0 = delta0;
    t.delta = delta0 * peak;
    t.r0 = std::move(r0);
    t.rns0 = std::move(rns0);
    return t;
}

std::size_t NsgffModel::parameter_count() const {
    std::size_t total = 0;
    for (const auto& w : weights) total += w.data.size();
    for (const auto& b : biases) total += b.size();
    return total;
}

NsgffModel init_folded_normal(std::size_t feature_cols, std::size_t depth, Rng& rng) {
    if (depth < 2) {
        throw std::invalid_argument("surrogate depth must be at least 2");
    }
    const std::size_t width = feature_cols + 2;
    NsgffModel model;
    model.depth = depth;
    std::size_t in_dim = feature_cols;
    for (std::size_t layer = 0; layer < depth; ++layer) {
        const std::size_t out_dim = (layer + 1 == depth) ? 1 : width;
        Dense w(in_dim, out_dim);
        const double sigma = std::sqrt(2.0 / (kFoldedCorrection * static_cast<double>(out_dim)));
        for (double& x : w.data) x = std::fabs(sigma * rng.normal());
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(out_dim, 0.0);
        in_dim = out_dim;
    }
    return model;
}

ForwardResult nsgff_forward(const NsgffModel& model, const NsgffTask& task) {
    check_task(model, task);
    const std::size_t n = task.features.node_count();
    const std::size_t depth = model.depth;

    ForwardResult res;
    ForwardTape& tape = res.tape;
    tape.pre_act.reserve(depth);
    tape.act.reserve(depth - 1);

    Dense x = features_to_dense(task.features);
    const Dense* prev = &x;
    for (std::size_t layer = 0; layer < depth; ++layer) {
        Dense z = matmul(*prev, model.weights[layer]);
        const auto& bias = model.biases[layer];
        for (std::size_t i = 0; i < z.rows; ++i) {
            for (std::size_t j = 0; j < z.cols; ++j) z.at(i, j) += bias[j];
        }
        tape.pre_act.push_back(std::move(z));
        if (layer + 1 < depth) {
            Dense a = tape.pre_act.back();
            for (double& v : a.data) v = v > 0.0 ? v : 0.0;
            tape.act.push_back(std::move(a));
            prev = &tape.act.back();
        }
    }

    tape.h.resize(n);
    const Dense& last = tape.pre_act.back();
    for (std::size_t v = 0; v < n; ++v) tape.h[v] = last.at(v, 0);

    tape.y = apply_filter(task.inner, *task.propagation, tape.h, PostProcessing::None).scores;

    tape.sigma_y = 0.0;
    for (double v : tape.y) tape.sigma_y += std::fabs(v);
    if (tape.sigma_y == 0.0) {
        tape.zero_mass = true;
        tape.r = tape.y;
    } else {
        tape.r.resize(n);
        const double inv = 1.0 / tape.sigma_y;
        for (std::size_t v = 0; v < n; ++v) tape.r[v] = tape.y[v] * inv;
    }

    tape.z.resize(n);
    const double delta = task.transfer.delta;
    for (std::size_t v = 0; v < n; ++v) {
        tape.z[v] = task.transfer.rns0[v] * (delta + tape.r[v]) / (delta + task.transfer.r0[v]);
    }

    tape.mass_in = 0.0;
    tape.mass_out = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        if (task.protected_mask[v]) tape.mass_in += tape.z[v]; else tape.mass_out += tape.z[v];
    }
    if (!(tape.mass_in > 0.0) || !(tape.mass_out > 0.0)) {
        throw std::domain_error("surrogate forward: a group holds non-positive mass before rebalancing");
    }

    // phi split doubles as the final L1 normalization: the output sums to 1.
    tape.out.resize(n);
    const double scale_in = task.phi / tape.mass_in;
    const double scale_out = (1.0 - task.phi) / tape.mass_out;
    for (std::size_t v = 0; v < n; ++v) {
        tape.out[v] = tape.z[v] * (task.protected_mask[v] ? scale_in : scale_out);
    }
    res.output = tape.out;
    return res;
}

double nsgff_loss(const GraphSignal& out, const NsgffTask& task) {
    const UtilityLossResult ul = utility_loss(out, task.reference);
    double sum_out = 0.0, sum_ref = 0.0;
    for (double v : out) sum_out += v;
    for (double v : task.reference) sum_ref += v;
    return ul.value + task.loss.l_reg * (sum_out - sum_ref);
}

namespace detail {

GraphSignal loss_output_gradient(const GraphSignal& out, const NsgffTask& task) {
    const GraphSignal& ref = task.reference;
    std::size_t included = 0;
    for (double v : ref) included += (v > kUtilityFloor);
    if (included == 0) {
        throw std::domain_error("loss gradient: no node above the utility floor");
    }
    GraphSignal g(out.size(), task.loss.l_reg);
    const double inv_count = 1.0 / static_cast<double>(included);
    for (std::size_t v = 0; v < out.size(); ++v) {
        if (ref[v] <= kUtilityFloor) continue;
        const double d = 1.0 - out[v] / ref[v];
        const double sign = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        g[v] -= sign * inv_count / ref[v];
    }
    return g;
}

}  // namespace detail

Gradients nsgff_backward(const NsgffModel& model, const NsgffTask& task, const ForwardTape& tape) {
    const std::size_t n = tape.out.size();
    GraphSignal g_out = detail::loss_output_gradient(tape.out, task);

    // Rebalancing: quotient rule through the group masses.
    double dot_in = 0.0, dot_out = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        if (task.protected_mask[v]) dot_in += g_out[v] * tape.z[v];
        else dot_out += g_out[v] * tape.z[v];
    }
    GraphSignal g_z(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (task.protected_mask[v]) {
            g_z[v] = task.phi * (g_out[v] * tape.mass_in - dot_in) / (tape.mass_in * tape.mass_in);
        } else {
            g_z[v] = (1.0 - task.phi) * (g_out[v] * tape.mass_out - dot_out) /
                     (tape.mass_out * tape.mass_out);
        }
    }

    // Transfer: r0 and rns0 are pipeline constants.
    GraphSignal g_r(n);
    const double delta = task.transfer.delta;
    for (std::size_t v = 0; v < n; ++v) {
        g_r[v] = g_z[v] * task.transfer.rns0[v] / (delta + task.transfer.r0[v]);
    }

    // L1 scaling.
    GraphSignal g_y(n);
    if (tape.zero_mass) {
        g_y = g_r;
    } else {
        double proj = 0.0;
        for (std::size_t v = 0; v < n; ++v) proj += g_r[v] * tape.r[v];
        const double inv = 1.0 / tape.sigma_y;
        for (std::size_t v = 0; v < n; ++v) {
            const double sg = (tape.y[v] > 0.0) ? 1.0 : (tape.y[v] < 0.0 ? -1.0 : 0.0);
            g_y[v] = (g_r[v] - sg * proj) * inv;
        }
    }

    // Adjoint of the propagation; F(A_hat)^T, which only differs from
    // F(A_hat) under column normalization.
    GraphSignal g_h = apply_filter_transpose(task.inner, *task.propagation, g_y);

    Gradients grads;
    grads.weights.reserve(model.depth);
    grads.biases.reserve(model.depth);
    for (std::size_t layer = 0; layer < model.depth; ++layer) {
        grads.weights.emplace_back(model.weights[layer].rows, model.weights[layer].cols);
        grads.biases.emplace_back(model.biases[layer].size(), 0.0);
    }

    Dense x = features_to_dense(task.features);
    Dense g(n, 1);
    for (std::size_t v = 0; v < n; ++v) g.at(v, 0) = g_h[v];

    for (std::size_t layer = model.depth; layer-- > 0;) {
        const Dense& a_prev = (layer == 0) ? x : tape.act[layer - 1];
        grads.weights[layer] = matmul_trans_a(a_prev, g);
        auto& gb = grads.biases[layer];
        for (std::size_t i = 0; i < g.rows; ++i) {
            for (std::size_t j = 0; j < g.cols; ++j) gb[j] += g.at(i, j);
        }
        if (layer > 0) {
            Dense g_prev = matmul_trans_b(g, model.weights[layer]);
            const Dense& z_prev = tape.pre_act[layer - 1];
            for (std::size_t i = 0; i < g_prev.data.size(); ++i) {
                if (!(z_prev.data[i] > 0.0)) g_prev.data[i] = 0.0;  // relu' at 0 is 0
            }
            g = std::move(g_prev);
        }
    }
    return grads;
}

TrainResult train(NsgffModel& model, const NsgffTask& task, const TrainConfig& cfg) {
    constexpr std::size_t kHardEpochCap = 200000;
    TrainResult res;

    std::vector<Dense> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    for (std::size_t l = 0; l < model.depth; ++l) {
        m_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
        v_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
        m_b.emplace_back(model.biases[l].size(), 0.0);
        v_b.emplace_back(model.biases[l].size(), 0.0);
    }

    NsgffModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();        // drives patience
    double best_valid_loss = std::numeric_limits<double>::infinity();  // drives the snapshot
    std::size_t streak = 0;
    std::size_t step = 0;

    while (true) {
        ForwardResult fwd;
        double loss;
        try {
            fwd = nsgff_forward(model, task);
            loss = nsgff_loss(fwd.output, task);
        } catch (const std::domain_error&) {
            res.aborted = true;
            break;
        }
        res.trace.push_back(loss);
        ++res.epochs;
        // Snapshots are restricted to epochs whose pre-constraint posteriors
        // stay non-negative: the transfer and the prule are only defined
        // there, and the folded-normal initialization guarantees epoch 0
        // qualifies.
        bool valid = true;
        for (double z : fwd.tape.z) {
            if (z < 0.0) {
                valid = false;
                break;
            }
        }
        if (valid && loss < best_valid_loss) {
            best_valid_loss = loss;
            best = model;
        }
        if (loss < best_loss) {
            best_loss = loss;
            streak = 0;
        } else {
            ++streak;
        }
        if (streak >= cfg.patience) break;
        if (cfg.max_epochs != 0 && res.epochs >= cfg.max_epochs) break;
        if (res.epochs >= kHardEpochCap) break;

        Gradients grads = nsgff_backward(model, task, fwd.tape);
        ++step;
        const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
        const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
        for (std::size_t l = 0; l < model.depth; ++l) {
            auto& w = model.weights[l].data;
            const auto& gw = grads.weights[l].data;
            auto& mw = m_w[l].data;
            auto& vw = v_w[l].data;
            for (std::size_t i = 0; i < w.size(); ++i) {
                mw[i] = cfg.beta1 * mw[i] + (1.0 - cfg.beta1) * gw[i];
                vw[i] = cfg.beta2 * vw[i] + (1.0 - cfg.beta2) * gw[i] * gw[i];
                w[i] -= cfg.learning_rate * (mw[i] / corr1) / (std::sqrt(vw[i] / corr2) + cfg.epsilon);
            }
            auto& b = model.biases[l];
            const auto& gb = grads.biases[l];
            auto& mb = m_b[l];
            auto& vb = v_b[l];
            for (std::size_t i = 0; i < b.size(); ++i) {
                mb[i] = cfg.beta1 * mb[i] + (1.0 - cfg.beta1) * gb[i];
                vb[i] = cfg.beta2 * vb[i] + (1.0 - cfg.beta2) * gb[i] * gb[i];
                b[i] -= cfg.learning_rate * (mb[i] / corr1) / (std::sqrt(vb[i] / corr2) + cfg.epsilon);
            }
        }
    }

    if (res.trace.empty()) {
        nsgff_forward(model, task);  // surfaces the initialization failure
    }
    model = best;
    res.best_loss = best_valid_loss;
    return res;
}

GradientCheck gradient_check(NsgffModel model, const NsgffTask& task, double step) {
    ForwardResult fwd = nsgff_forward(model, task);
    Gradients analytic = nsgff_backward(model, task, fwd.tape);

    GradientCheck check;
    auto probe = [&model, &task](double* param, double step_size) {
        const double saved = *param;
        *param = saved + step_size;
        const double loss_hi = nsgff_loss(nsgff_forward(model, task).output, task);
        *param = saved - step_size;
        const double loss_lo = nsgff_loss(nsgff_forward(model, task).output, task);
        *param = saved;
        return (loss_hi - loss_lo) / (2.0 * step_size);
    };
    auto record = [&check](double analytic_g, double numeric_g) {
        const double denom = std::max({std::fabs(analytic_g), std::fabs(numeric_g), 1e-6});
        check.max_rel_error = std::max(check.max_rel_error, std::fabs(analytic_g - numeric_g) / denom);
        ++check.parameters;
    };
    for (std::size_t l = 0; l < model.depth; ++l) {
        for (std::size_t i = 0; i < model.weights[l].data.size(); ++i) {
            record(analytic.weights[l].data[i], probe(&model.weights[l].data[i], step));
        }
        for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
            record(analytic.biases[l][i], probe(&model.biases[l][i], step));
        }
    }
    return check;
}

NsgffProblem make_nsgff_problem(const NormalizedGraph& mode_graph, const NormalizedGraph& sym_graph,
                                const FilterSpec& base, const GraphSignal& q0,
                                const NodeMask& protected_mask, double target_prule) {
    validate_group(protected_mask, q0.size());
    if (mode_graph.n != q0.size() || sym_graph.n != q0.size()) {
        throw std::invalid_argument("surrogate problem: graph and prior sizes differ");
    }
    if (sym_graph.mode != Normalization::Symmetric) {
        throw std::invalid_argument("surrogate problem: the counterpart graph must be symmetric");
    }
    NsgffProblem p;
    p.mode_graph = &mode_graph;
    p.sym_graph = &sym_graph;
    p.base = base;
    p.q0 = q0;
    p.protected_mask = protected_mask;
    p.target_prule = target_prule;
    p.rns0 = apply_filter(base, mode_graph, q0, PostProcessing::L1).scores;
    p.r0 = (mode_graph.mode == Normalization::Symmetric)
               ? p.rns0
               : apply_filter(base, sym_graph, q0, PostProcessing::L1).scores;
    p.phi = resolve_fairness_target(p.rns0, protected_mask, target_prule).phi;
    double q_mass = 0.0;
    for (double v : q0) q_mass += std::fabs(v);
    p.l_reg = q_mass / static_cast<double>(q0.size());
    return p;
}

NsgffTask instantiate_task(const NsgffProblem& problem, double delta0, NsgffVariant variant) {
    NsgffTask task;
    task.propagation = problem.mode_graph;
    switch (variant) {
        case NsgffVariant::Standard:
            task.inner = problem.base;
            break;
        case NsgffVariant::NoPropagation:
            task.inner = custom_filter({1.0});
            break;
        case NsgffVariant::Appnp:
            task.inner = ppr_coefficients(0.9, 10);
            break;
    }
    task.base_fingerprint = problem.base.fingerprint();
    if (variant == NsgffVariant::Standard &&
        task.inner.fingerprint() != task.base_fingerprint) {
        throw std::logic_error("surrogate propagation filter drifted from the posterior filter");
    }
    const bool column = problem.mode_graph->mode == Normalization::Column;
    task.features = build_features(problem.q0, problem.r0, problem.protected_mask,
                                   problem.mode_graph->mode, column ? &problem.rns0 : nullptr);
    task.transfer = make_transfer(delta0, problem.r0, problem.rns0);
    task.protected_mask = problem.protected_mask;
    task.phi = problem.phi;
    task.reference = problem.rns0;
    task.loss.l_reg = problem.l_reg;
    return task;
}

SearchChoice hyperparam_search(const NsgffProblem& problem, NsgffVariant variant, std::uint64_t seed) {
    SearchChoice best;
    best.shallow_loss = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t depth = kDepthMin; depth <= kDepthMax; ++depth) {
        for (std::size_t di = 0; di < 3; ++di) {
            NsgffTask task = instantiate_task(problem, kDelta0Grid[di], variant);
            Rng rng(mix_seed(mix_seed(mix_seed(seed, "shallow"), depth), di));
            NsgffModel model = init_folded_normal(task.features.width(), depth, rng);
            TrainResult shallow;
            try {
                shallow = train(model, task, TrainConfig::shallow());
            } catch (const std::exception&) {
                continue;
            }
            if (shallow.trace.empty()) continue;
            // Strict improvement keeps ties at the smaller depth, then the
            // smaller delta0, because of the iteration order.
            if (shallow.best_loss < best.shallow_loss) {
                best.depth = depth;
                best.delta0 = kDelta0Grid[di];
                best.shallow_loss = shallow.best_loss;
                found = true;
            }
        }
    }
    if (!found) {
        throw std::runtime_error("hyperparameter search: every shallow run failed");
    }
    return best;
}

NsgffOutcome run_nsgff(const NsgffProblem& problem, NsgffVariant variant, std::uint64_t seed) {
    SearchChoice choice = hyperparam_search(problem, variant, seed);
    std::size_t delta_index = 0;
    for (std::size_t di = 0; di < 3; ++di) {
        if (kDelta0Grid[di] == choice.delta0) delta_index = di;
    }
    NsgffTask task = instantiate_task(problem, choice.delta0, variant);
    Rng rng(mix_seed(mix_seed(mix_seed(seed, "full"), choice.depth), delta_index));
    NsgffModel model = init_folded_normal(task.features.width(), choice.depth, rng);
    TrainResult full = train(model, task, TrainConfig::full());

    NsgffOutcome outcome;
    outcome.posterior = nsgff_forward(model, task).output;
    outcome.depth = choice.depth;
    outcome.delta0 = choice.delta0;
    outcome.epochs = full.epochs;
    outcome.final_loss = full.best_loss;
    return outcome;
}

}  // namespace fairgf
