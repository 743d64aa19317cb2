#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prnet/dataset.hpp"
#include "prnet/pathway.hpp"

namespace prnet {

enum class HiddenActivation { tanh, identity };
enum class HeadActivation { sigmoid, identity };

// A sparse layer: weights exist only where the mask has a 1, stored in the
// mask's compressed-column order, so W * (1 - mask) = 0 by construction.
struct MaskedLayer {
    BinaryMask mask;
    std::vector<double> weights;
    std::vector<double> bias;

    [[nodiscard]] std::size_t in_width() const noexcept { return mask.rows(); }
    [[nodiscard]] std::size_t out_width() const noexcept { return mask.cols(); }
    [[nodiscard]] Eigen::MatrixXd dense_weights() const;
};

struct OutputHead {
    std::vector<double> w;
    double b = 0.0;
};

// Pathway-masked feed-forward network with an auxiliary output head on
// every layer. The final output is the head_weights-weighted mean of heads.
struct MaskedNetwork {
    std::vector<LocusId> input_loci;
    std::vector<std::vector<std::string>> nodes;
    std::vector<MaskedLayer> layers;
    std::vector<OutputHead> heads;
    std::vector<double> head_weights;
    HiddenActivation hidden = HiddenActivation::tanh;
    HeadActivation head = HeadActivation::sigmoid;
    std::string hierarchy_hash;

    [[nodiscard]] std::size_t input_width() const noexcept { return input_loci.size(); }
    [[nodiscard]] std::size_t depth() const noexcept { return layers.size(); }
    [[nodiscard]] std::size_t parameter_count() const;

    // Structure only: loci, node names and masks.
    [[nodiscard]] bool same_structure(const MaskedNetwork& other) const;
};

MaskedNetwork init_network(const MaskStack& masks, std::uint64_t seed);

// Replace the head weights (validated: non-negative, sum to 1).
void set_head_weights(MaskedNetwork& net, std::vector<double> weights);

struct ForwardResult {
    std::vector<double> head_outputs;
    double final = 0.0;
};

// Every intermediate quantity of one forward pass; shared by backprop and
// DeepLIFT.
struct ForwardTrace {
    std::vector<std::vector<double>> pre;     // z_k
    std::vector<std::vector<double>> post;    // h_k
    std::vector<double> head_logits;          // a_k
    std::vector<double> head_outputs;         // head_k
    double final = 0.0;
};

double apply_hidden(HiddenActivation act, double z);
double hidden_derivative(HiddenActivation act, double z, double h);
double apply_head(HeadActivation act, double a);
double head_derivative(HeadActivation act, double a, double out);

ForwardTrace forward_trace(const MaskedNetwork& net, std::span<const double> x);
ForwardResult forward(const MaskedNetwork& net, std::span<const double> x);

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 100;
    int batch_size = 64;
    std::uint64_t seed = 0;
    // Defaults to negatives / positives of the training data.
    std::optional<double> class_weight_positive;
    int early_stop_patience = 10;
    double validation_fraction = 0.1;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_losses;
    std::vector<double> validation_recall;
    std::vector<double> validation_auc;
    int stopped_epoch = 0;
    int best_epoch = 0;
    double wall_time = 0.0;
};

struct TrainResult {
    MaskedNetwork net;
    TrainReport report;
};

// Flat parameter order: per layer weights (mask order) then biases, then per
// head w then b. The binary model blob uses the same order.
std::vector<double> flatten_parameters(const MaskedNetwork& net);
void assign_parameters(MaskedNetwork& net, std::span<const double> params);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

// Mean over samples of the class-weighted binary cross-entropy, averaged
// over heads, and its gradient in flatten_parameters order.
LossGradient loss_and_gradient(const MaskedNetwork& net, const Matrix& x, std::span<const int> y,
                               std::span<const std::size_t> rows, double positive_weight);

double training_loss(const MaskedNetwork& net, const Dataset& ds, double positive_weight);

TrainResult train(MaskedNetwork net, const Dataset& train_ds, const TrainConfig& cfg);

// Per-sample final outputs. Throws ConstraintViolation if ds loci differ
// from the network's input ordering.
Vector predict(const MaskedNetwork& net, const Dataset& ds);

struct ParamCount {
    std::size_t total = 0;
    std::size_t input_layer = 0;        // nnz(M0) + gene biases
    std::size_t input_connections = 0;  // nnz(M0)
    std::vector<std::size_t> per_layer;  // mask nnz + biases
    std::size_t heads = 0;
};

ParamCount count_params(const MaskedNetwork& net);

// JSON manifest (shapes, loci, masks, hierarchy hash, head weights) plus a
// little-endian float64 blob in flatten_parameters order.
void save_network(const MaskedNetwork& net, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& blob_path);
MaskedNetwork load_network(const std::filesystem::path& manifest_path);

} // namespace prnet
