#include "fedrda/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>

#include "fedrda/rng.hpp"

namespace fedrda {

LabeledDataset synth_blobs(int class_count, int per_class, int dim, double spread, uint64_t seed) {
    if (class_count < 2) throw ArgumentError("synth_blobs: need at least 2 classes");
    if (per_class < 1) throw ArgumentError("synth_blobs: per_class must be positive");
    if (dim < 2) throw ArgumentError("synth_blobs: dim must be at least 2");
    if (spread < 0.0) throw ArgumentError("synth_blobs: spread must be non-negative");

    Rng rng(seed);
    LabeledDataset ds;
    ds.class_count = class_count;
    ds.features = DenseMatrix(static_cast<size_t>(class_count) * per_class, dim);
    ds.labels.resize(ds.features.rows);

    std::vector<double> mean(dim);
    for (int c = 0; c < class_count; ++c) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (int j = 0; j < dim; ++j) {
                mean[j] = rng.normal();
                norm += mean[j] * mean[j];
            }
            norm = std::sqrt(norm);
        } while (norm < 1e-12);
        for (int j = 0; j < dim; ++j) mean[j] = (mean[j] / norm + 1.0) / 2.0;

        for (int s = 0; s < per_class; ++s) {
            size_t r = static_cast<size_t>(c) * per_class + s;
            double* row = ds.features.row(r);
            for (int j = 0; j < dim; ++j) {
                double v = mean[j] + spread * rng.normal();
                row[j] = std::min(1.0, std::max(0.0, v));
            }
            ds.labels[r] = c;
        }
    }
    return ds;
}

namespace {

uint32_t read_be32(std::istream& f, const std::string& path) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw FormatError("truncated IDX header: " + path);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

} // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw FormatError("cannot open: " + images_path);
    if (read_be32(fi, images_path) != 0x00000803u)
        throw FormatError("bad image magic: " + images_path);
    uint32_t n = read_be32(fi, images_path);
    uint32_t rows = read_be32(fi, images_path);
    uint32_t cols = read_be32(fi, images_path);

    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw FormatError("cannot open: " + labels_path);
    if (read_be32(fl, labels_path) != 0x00000801u)
        throw FormatError("bad label magic: " + labels_path);
    uint32_t nl = read_be32(fl, labels_path);
    if (n != nl) throw FormatError("image/label count mismatch: " + images_path);

    size_t d = static_cast<size_t>(rows) * cols;
    std::vector<unsigned char> pix(static_cast<size_t>(n) * d);
    fi.read(reinterpret_cast<char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
    if (static_cast<size_t>(fi.gcount()) != pix.size())
        throw FormatError("truncated image data: " + images_path);
    std::vector<unsigned char> lab(n);
    fl.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
    if (static_cast<size_t>(fl.gcount()) != lab.size())
        throw FormatError("truncated label data: " + labels_path);

    LabeledDataset ds;
    ds.features = DenseMatrix(n, d);
    ds.labels.resize(n);
    int maxlab = 0;
    for (uint32_t i = 0; i < n; ++i) {
        double* row = ds.features.row(i);
        for (size_t j = 0; j < d; ++j) row[j] = pix[i * d + j] / 255.0;
        ds.labels[i] = lab[i];
        maxlab = std::max(maxlab, ds.labels[i]);
    }
    ds.class_count = maxlab + 1;
    return ds;
}

Partition partition_iid(const LabeledDataset& data, int clients, uint64_t seed) {
    if (clients < 1) throw ArgumentError("partition_iid: need at least one client");
    if (data.size() < static_cast<size_t>(clients))
        throw ArgumentError("partition_iid: fewer samples than clients");
    Rng rng(seed);
    auto idx = rng.permutation(data.size());
    size_t base = data.size() / clients;
    size_t extra = data.size() % clients;
    Partition part;
    part.assignments.resize(clients);
    size_t pos = 0;
    for (int i = 0; i < clients; ++i) {
        size_t sz = base + (static_cast<size_t>(i) < extra ? 1 : 0);
        part.assignments[i].assign(idx.begin() + pos, idx.begin() + pos + sz);
        pos += sz;
    }
    return part;
}

Partition partition_dirichlet(const LabeledDataset& data, int clients, double alpha,
                              uint64_t seed) {
    if (clients < 1) throw ArgumentError("partition_dirichlet: need at least one client");
    if (alpha <= 0.0) throw ArgumentError("partition_dirichlet: alpha must be positive");
    if (data.size() < static_cast<size_t>(clients))
        throw ArgumentError("partition_dirichlet: fewer samples than clients");

    Rng rng(seed);
    Partition part;
    part.assignments.resize(clients);
    for (int c = 0; c < data.class_count; ++c) {
        std::vector<size_t> cidx;
        for (size_t i = 0; i < data.size(); ++i)
            if (data.labels[i] == c) cidx.push_back(i);
        if (cidx.empty()) continue;
        rng.shuffle(cidx);
        auto p = dirichlet(rng, alpha, clients);
        double cum = 0.0;
        size_t start = 0;
        for (int i = 0; i < clients; ++i) {
            size_t end;
            if (i == clients - 1) {
                end = cidx.size();
            } else {
                cum += p[i];
                end = static_cast<size_t>(cum * static_cast<double>(cidx.size()));
                end = std::min(end, cidx.size());
                end = std::max(end, start);
            }
            part.assignments[i].insert(part.assignments[i].end(), cidx.begin() + start,
                                       cidx.begin() + end);
            start = end;
        }
    }
    // empty-shard repair: move one index from the currently largest shard
    for (int i = 0; i < clients; ++i) {
        while (part.assignments[i].empty()) {
            int big = 0;
            for (int j = 1; j < clients; ++j)
                if (part.assignments[j].size() > part.assignments[big].size()) big = j;
            if (part.assignments[big].size() <= 1)
                throw ArgumentError("partition_dirichlet: cannot repair empty shard");
            part.assignments[i].push_back(part.assignments[big].back());
            part.assignments[big].pop_back();
        }
    }
    return part;
}

LabeledDataset apply_poison(const LabeledDataset& data, const PoisonConfig& cfg, uint64_t seed) {
    if (cfg.attack_rate < 0.0 || cfg.attack_rate > 1.0)
        throw ArgumentError("apply_poison: attack_rate outside [0,1]");
    LabeledDataset out = data;
    switch (cfg.kind) {
        case PoisonKind::none:
            break;
        case PoisonKind::backdoor_trigger: {
            if (!cfg.trigger) throw ArgumentError("apply_poison: backdoor kind needs a trigger");
            const auto& trig = *cfg.trigger;
            for (size_t p : trig.pixel_indices)
                if (p >= data.dim()) throw ArgumentError("apply_poison: trigger pixel out of range");
            if (trig.pixel_indices.empty())
                throw ArgumentError("apply_poison: trigger has no pixels");
            size_t n = data.size();
            size_t k = static_cast<size_t>(std::floor(cfg.attack_rate * static_cast<double>(n)));
            Rng rng(seed);
            auto perm = rng.permutation(n);
            for (size_t t = 0; t < k; ++t) {
                size_t i = perm[t];
                double* row = out.features.row(i);
                for (size_t p : trig.pixel_indices) row[p] = trig.trigger_value;
                out.labels[i] = trig.target_label;
            }
            break;
        }
        case PoisonKind::label_flip:
            for (size_t i = 0; i < out.size(); ++i)
                if (out.labels[i] == cfg.flip_source) out.labels[i] = cfg.flip_target;
            break;
        case PoisonKind::subgroup_relabel: {
            if (!cfg.subgroup) throw ArgumentError("apply_poison: subgroup kind needs a box");
            const auto& box = *cfg.subgroup;
            if (box.dims.size() != box.lo.size() || box.dims.size() != box.hi.size())
                throw ArgumentError("apply_poison: subgroup box arity mismatch");
            for (size_t i = 0; i < out.size(); ++i) {
                const double* row = out.features.row(i);
                bool inside = true;
                for (size_t j = 0; j < box.dims.size() && inside; ++j) {
                    if (box.dims[j] >= data.dim())
                        throw ArgumentError("apply_poison: subgroup dim out of range");
                    double v = row[box.dims[j]];
                    inside = v >= box.lo[j] && v <= box.hi[j];
                }
                if (inside) out.labels[i] = box.relabel_to;
            }
            break;
        }
    }
    return out;
}

LabeledDataset make_backdoor_testset(const LabeledDataset& clean_test, const TriggerSpec& trigger) {
    if (clean_test.size() == 0) throw ArgumentError("make_backdoor_testset: empty test set");
    for (size_t p : trigger.pixel_indices)
        if (p >= clean_test.dim())
            throw ArgumentError("make_backdoor_testset: trigger pixel out of range");
    std::vector<size_t> keep;
    for (size_t i = 0; i < clean_test.size(); ++i)
        if (clean_test.labels[i] != trigger.target_label) keep.push_back(i);
    LabeledDataset out;
    out.class_count = clean_test.class_count;
    out.features = DenseMatrix(keep.size(), clean_test.dim());
    out.labels.assign(keep.size(), trigger.target_label);
    for (size_t r = 0; r < keep.size(); ++r) {
        const double* src = clean_test.features.row(keep[r]);
        double* dst = out.features.row(r);
        std::copy(src, src + clean_test.dim(), dst);
        for (size_t p : trigger.pixel_indices) dst[p] = trigger.trigger_value;
    }
    if (out.size() == 0)
        std::clog << "[warn] backdoor test set is empty: every sample already has the target label\n";
    return out;
}

TriggerSpec square_trigger(int dim, int side, double value, int target_label) {
    if (dim < 1) throw ArgumentError("square_trigger: bad dim");
    int grid = static_cast<int>(std::floor(std::sqrt(static_cast<double>(dim))));
    if (side < 1 || side > grid) throw ArgumentError("square_trigger: side does not fit the grid");
    TriggerSpec t;
    t.trigger_value = value;
    t.target_label = target_label;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) t.pixel_indices.push_back(static_cast<size_t>(r) * grid + c);
    return t;
}

LabeledDataset subset(const LabeledDataset& data, const std::vector<size_t>& idx) {
    LabeledDataset out;
    out.class_count = data.class_count;
    out.features = DenseMatrix(idx.size(), data.dim());
    out.labels.resize(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= data.size()) throw ArgumentError("subset: index out of range");
        const double* src = data.features.row(idx[r]);
        std::copy(src, src + data.dim(), out.features.row(r));
        out.labels[r] = data.labels[idx[r]];
    }
    return out;
}

void save_dataset_csv(const LabeledDataset& data, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot open for writing: " + path);
    f << "label";
    for (size_t j = 0; j < data.dim(); ++j) f << ",f" << j;
    f << '\n';
    for (size_t i = 0; i < data.size(); ++i) {
        f << data.labels[i];
        const double* row = data.features.row(i);
        for (size_t j = 0; j < data.dim(); ++j) f << ',' << format_double(row[j]);
        f << '\n';
    }
    if (!f) throw RuntimeFailure("write failed: " + path);
}

} // namespace fedrda
