#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedrda/matrix.hpp"

namespace fedrda {

struct LabeledDataset {
    DenseMatrix features; // n-by-d, values in [0,1] for image-like data
    std::vector<int> labels;
    int class_count = 0;

    size_t size() const { return labels.size(); }
    size_t dim() const { return features.cols; }
};

struct Partition {
    std::vector<std::vector<size_t>> assignments;
};

struct TriggerSpec {
    std::vector<size_t> pixel_indices;
    double trigger_value = 1.0;
    int target_label = 1;
};

enum class PoisonKind { backdoor_trigger, label_flip, subgroup_relabel, none };

// axis-aligned feature box; samples inside every [lo,hi] interval get relabeled
struct SubgroupBox {
    std::vector<size_t> dims;
    std::vector<double> lo;
    std::vector<double> hi;
    int relabel_to = 0;
};

struct PoisonConfig {
    PoisonKind kind = PoisonKind::none;
    double attack_rate = 0.0;
    std::optional<TriggerSpec> trigger;
    int flip_source = 0;
    int flip_target = 0;
    std::optional<SubgroupBox> subgroup;
};

// m Gaussian clusters with seeded means on the unit hypersphere scaled into
// [0,1]^d, samples clipped to [0,1]
LabeledDataset synth_blobs(int class_count, int per_class, int dim, double spread, uint64_t seed);

// big-endian IDX image/label pair, pixels scaled by 1/255
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

Partition partition_iid(const LabeledDataset& data, int clients, uint64_t seed);
Partition partition_dirichlet(const LabeledDataset& data, int clients, double alpha, uint64_t seed);

LabeledDataset apply_poison(const LabeledDataset& data, const PoisonConfig& cfg, uint64_t seed);

// trigger embedded into every sample whose label differs from the target;
// returned labels are all the target (used only for attack-success counting)
LabeledDataset make_backdoor_testset(const LabeledDataset& clean_test, const TriggerSpec& trigger);

// side-by-side block in the corner of the implied square pixel grid
TriggerSpec square_trigger(int dim, int side = 3, double value = 1.0, int target_label = 1);

LabeledDataset subset(const LabeledDataset& data, const std::vector<size_t>& idx);

// header `label,f0,f1,...`
void save_dataset_csv(const LabeledDataset& data, const std::string& path);

} // namespace fedrda
