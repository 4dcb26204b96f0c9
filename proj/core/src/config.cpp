#include "utv/config.hpp"

#include <initializer_list>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "utv/errors.hpp"
#include "utv/io.hpp"

namespace utv {
namespace {

using json = nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, std::string_view where,
                         std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown config key '" + std::string(where) + key + "'");
        }
    }
}

// nlohmann coerces 1.5 to int and -1 to unsigned; strict configs must not.
template <typename T>
bool kind_matches(const json& value) {
    if constexpr (std::is_same_v<T, bool>) {
        return value.is_boolean();
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        if (!value.is_array()) return false;
        for (const json& v : value) {
            if (!v.is_number_unsigned()) return false;
        }
        return true;
    } else if constexpr (std::is_unsigned_v<T>) {
        return value.is_number_unsigned();
    } else if constexpr (std::is_integral_v<T>) {
        return value.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
        return value.is_number();
    } else {
        return value.is_string();
    }
}

template <typename T>
void read_field(const json& obj, const char* key, std::string_view where, T& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!kind_matches<T>(*it)) {
        throw ConfigError("config key '" + std::string(where) + key +
                          "' has the wrong type");
    }
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + std::string(where) + key +
                          "' has the wrong type");
    }
}

}  // namespace

const char* aggregate_name(ScoreAggregate aggregate) {
    return aggregate == ScoreAggregate::MAX ? "max" : "mean";
}

ScoreAggregate parse_aggregate(std::string_view name) {
    if (name == "max") return ScoreAggregate::MAX;
    if (name == "mean") return ScoreAggregate::MEAN;
    throw ConfigError("unknown aggregate mode '" + std::string(name) + "'");
}

PipelineConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    reject_unknown_keys(root, "",
                        {"data", "seed", "min_shared", "top_n_popular",
                         "selection_means_rated", "intra_subgraph_edges",
                         "max_subgraph_movies", "sparsify_fraction", "walk", "train", "k",
                         "relevance_threshold", "auc_threshold", "aggregate", "split",
                         "user_ranges", "eval_targets"});

    PipelineConfig config;
    if (auto it = root.find("data"); it != root.end()) {
        if (!it->is_object()) throw ConfigError("config key 'data' must be an object");
        reject_unknown_keys(*it, "data.", {"ratings", "users", "movies"});
        read_field(*it, "ratings", "data.", config.data.ratings);
        read_field(*it, "users", "data.", config.data.users);
        read_field(*it, "movies", "data.", config.data.movies);
    }
    read_field(root, "seed", "", config.seed);
    read_field(root, "min_shared", "", config.min_shared);
    read_field(root, "top_n_popular", "", config.top_n_popular);
    read_field(root, "selection_means_rated", "", config.selection_means_rated);
    read_field(root, "intra_subgraph_edges", "", config.intra_subgraph_edges);
    read_field(root, "max_subgraph_movies", "", config.max_subgraph_movies);
    read_field(root, "sparsify_fraction", "", config.sparsify_fraction);

    if (auto it = root.find("walk"); it != root.end()) {
        if (!it->is_object()) throw ConfigError("config key 'walk' must be an object");
        reject_unknown_keys(*it, "walk.",
                            {"p", "q", "walk_length", "walks_per_node", "window"});
        read_field(*it, "p", "walk.", config.walk.p);
        read_field(*it, "q", "walk.", config.walk.q);
        read_field(*it, "walk_length", "walk.", config.walk.walk_length);
        read_field(*it, "walks_per_node", "walk.", config.walk.walks_per_node);
        read_field(*it, "window", "walk.", config.walk.window);
    }
    if (auto it = root.find("train"); it != root.end()) {
        if (!it->is_object()) throw ConfigError("config key 'train' must be an object");
        reject_unknown_keys(*it, "train.",
                            {"dim", "negatives", "epochs", "lr_initial", "lr_final", "mode"});
        read_field(*it, "dim", "train.", config.train.dim);
        read_field(*it, "negatives", "train.", config.train.negatives);
        read_field(*it, "epochs", "train.", config.train.epochs);
        read_field(*it, "lr_initial", "train.", config.train.lr_initial);
        read_field(*it, "lr_final", "train.", config.train.lr_final);
        if (auto mode = it->find("mode"); mode != it->end()) {
            if (!mode->is_string())
                throw ConfigError("config key 'train.mode' has the wrong type");
            try {
                config.train.mode = parse_train_mode(mode->get<std::string>());
            } catch (const ParseError& e) {
                throw ConfigError(e.what());
            }
        }
    }
    read_field(root, "k", "", config.k);
    read_field(root, "relevance_threshold", "", config.relevance_threshold);
    read_field(root, "auc_threshold", "", config.auc_threshold);
    if (auto it = root.find("aggregate"); it != root.end()) {
        if (!it->is_string()) throw ConfigError("config key 'aggregate' has the wrong type");
        config.aggregate = parse_aggregate(it->get<std::string>());
    }
    if (auto it = root.find("split"); it != root.end()) {
        if (!it->is_object()) throw ConfigError("config key 'split' must be an object");
        reject_unknown_keys(*it, "split.", {"train_fraction", "repetitions"});
        read_field(*it, "train_fraction", "split.", config.split.train_fraction);
        read_field(*it, "repetitions", "split.", config.split.repetitions);
    }
    read_field(root, "user_ranges", "", config.user_ranges);
    read_field(root, "eval_targets", "", config.eval_targets);

    validate_config(config);
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const NotFoundError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

std::string serialize_config(const PipelineConfig& config) {
    json root;
    root["data"] = {{"ratings", config.data.ratings},
                    {"users", config.data.users},
                    {"movies", config.data.movies}};
    root["seed"] = config.seed;
    root["min_shared"] = config.min_shared;
    root["top_n_popular"] = config.top_n_popular;
    root["selection_means_rated"] = config.selection_means_rated;
    root["intra_subgraph_edges"] = config.intra_subgraph_edges;
    root["max_subgraph_movies"] = config.max_subgraph_movies;
    root["sparsify_fraction"] = config.sparsify_fraction;
    root["walk"] = {{"p", config.walk.p},
                    {"q", config.walk.q},
                    {"walk_length", config.walk.walk_length},
                    {"walks_per_node", config.walk.walks_per_node},
                    {"window", config.walk.window}};
    root["train"] = {{"dim", config.train.dim},
                     {"negatives", config.train.negatives},
                     {"epochs", config.train.epochs},
                     {"lr_initial", config.train.lr_initial},
                     {"lr_final", config.train.lr_final},
                     {"mode", train_mode_name(config.train.mode)}};
    root["k"] = config.k;
    root["relevance_threshold"] = config.relevance_threshold;
    root["auc_threshold"] = config.auc_threshold;
    root["aggregate"] = aggregate_name(config.aggregate);
    root["split"] = {{"train_fraction", config.split.train_fraction},
                     {"repetitions", config.split.repetitions}};
    root["user_ranges"] = config.user_ranges;
    root["eval_targets"] = config.eval_targets;
    return root.dump(2) + "\n";
}

void validate_config(const PipelineConfig& config) {
    validate(config.walk);
    validate(config.train);
    validate(config.split);
    if (config.min_shared < 1) throw ConfigError("min_shared must be >= 1");
    if (config.top_n_popular < 1) throw ConfigError("top_n_popular must be >= 1");
    if (!(config.sparsify_fraction > 0.0) || config.sparsify_fraction > 1.0)
        throw ConfigError("sparsify_fraction must lie in (0, 1]");
    if (config.k < 1) throw ConfigError("k must be >= 1");
    if (config.relevance_threshold < kMinRating || config.relevance_threshold > kMaxRating)
        throw ConfigError("relevance_threshold must lie in [1, 5]");
    if (config.auc_threshold < kMinRating || config.auc_threshold > kMaxRating)
        throw ConfigError("auc_threshold must lie in [1, 5]");
    if (config.train.epochs < 1) throw ConfigError("epochs must be >= 1");
}

std::string config_hash(const PipelineConfig& config) {
    return to_hex(fnv1a(serialize_config(config)));
}

EvalOptions eval_options_from(const PipelineConfig& config) {
    EvalOptions options;
    options.split = config.split;
    options.split.seed = config.seed;
    options.user_ranges = config.user_ranges;
    options.k = config.k;
    options.relevance_threshold = config.relevance_threshold;
    options.auc_threshold = config.auc_threshold;
    options.top_n_popular = config.top_n_popular;
    options.eval_targets = config.eval_targets;
    options.ensemble.min_shared = config.min_shared;
    options.ensemble.selection_means_rated = config.selection_means_rated;
    options.graph.intra_subgraph_edges = config.intra_subgraph_edges;
    options.graph.max_subgraph_movies = config.max_subgraph_movies;
    options.walk = config.walk;
    options.train = config.train;
    options.train.seed = config.seed;
    options.aggregate = config.aggregate;
    return options;
}

}  // namespace utv
