#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "utv/rng.hpp"
#include "utv/types.hpp"
#include "utv/walks.hpp"

namespace utv {

enum class TrainMode : std::uint8_t { EXACT_SOFTMAX, NEGATIVE_SAMPLING };

const char* train_mode_name(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
    int dim = 128;
    int negatives = 5;
    int epochs = 5;
    double lr_initial = 0.025;
    double lr_final = 0.0001;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::NEGATIVE_SAMPLING;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& config);

// Input vectors are the published embedding; the context matrix exists only
// in negative-sampling mode and aliases the input rows otherwise.
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(std::size_t node_count, std::size_t dim, bool separate_context);

    std::size_t node_count() const { return dim_ ? input_.size() / dim_ : 0; }
    std::size_t dim() const { return dim_; }
    bool has_separate_context() const { return !context_.empty(); }

    std::span<double> input(NodeId id) { return {input_.data() + id * dim_, dim_}; }
    std::span<const double> input(NodeId id) const {
        return {input_.data() + id * dim_, dim_};
    }
    std::span<double> context(NodeId id) {
        auto& m = context_.empty() ? input_ : context_;
        return {m.data() + id * dim_, dim_};
    }
    std::span<const double> context(NodeId id) const {
        auto& m = context_.empty() ? input_ : context_;
        return {m.data() + id * dim_, dim_};
    }

    bool all_finite() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> input_;
    std::vector<double> context_;
};

// Uniform [-0.5/d, 0.5/d] entries from a stream derived from seed; the
// context matrix, when separate, continues the same stream.
EmbeddingModel init_model(std::size_t node_count, std::size_t dim, std::uint64_t seed,
                          bool separate_context);

// Unigram^(3/4) distribution over corpus node occurrences.
class NoiseDistribution {
public:
    NoiseDistribution(const WalkCorpus& corpus, std::size_t node_count);

    NodeId sample(Rng& rng) const;
    double probability(NodeId id) const;
    std::size_t node_count() const { return cumulative_.size(); }

private:
    std::vector<double> cumulative_;
};

// exp(f(n) . f(u)) / sum_v exp(f(v) . f(u)), max-subtracted. Uses input
// vectors for both roles. Throws NumericError on non-finite input.
double softmax_probability(const EmbeddingModel& model, NodeId n, NodeId u);

// Sum over pairs of log softmax_probability(n, u). Empty input yields 0.
double objective(const EmbeddingModel& model,
                 const std::vector<std::pair<NodeId, NodeId>>& pairs);

// Full-batch gradient of the objective with respect to every input entry,
// laid out row-major like the model.
std::vector<double> objective_gradient(const EmbeddingModel& model,
                                       const std::vector<std::pair<NodeId, NodeId>>& pairs);

// Skip-gram training over the corpus, with skip-gram pairs taken from the
// given window. EXACT_SOFTMAX runs full-batch gradient ascent on the softmax
// objective with a single matrix; NEGATIVE_SAMPLING runs per-pair SGD with
// `negatives` noise draws per positive. The learning rate decays linearly
// from lr_initial to lr_final across all updates. epochs = 0 returns the
// initialized model untouched.
EmbeddingModel train(const WalkCorpus& corpus, std::size_t node_count,
                     const TrainConfig& config, int window);

// Header "n d", then one "node_id v1 ... vd" line per node, full precision.
void write_model(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_model(std::istream& in);

}  // namespace utv
