#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace hyperrag {

struct ScoredHit {
    std::string id;
    double score = 0.0;

    bool operator==(const ScoredHit&) const = default;
};

// Exact cosine top-k over a flat store. Deterministic: scores compared at
// 1e-9 granularity, ties broken by ascending id. Reads are safe in
// parallel; upserts require exclusive access.
class VectorIndex {
public:
    VectorIndex() = default;
    explicit VectorIndex(uint32_t dim) : dim_(dim) {}

    uint32_t dim() const { return dim_; }
    void set_dim(uint32_t dim);
    size_t size() const { return vectors_.size(); }
    bool empty() const { return vectors_.empty(); }

    // Stores or replaces the vector under id. Rejects dimension mismatches
    // and zero vectors.
    void upsert(const std::string& id, std::vector<float> values);

    bool contains(const std::string& id) const;
    const std::vector<float>* find(const std::string& id) const;

    std::vector<ScoredHit> top_k(const std::vector<float>& query, size_t k) const;

    // Same contract restricted to ids accepted by the filter. Retrieval uses
    // this to query one logical collection out of the shared store.
    std::vector<ScoredHit> top_k_where(
        const std::vector<float>& query, size_t k,
        const std::function<bool(const std::string&)>& filter) const;

    // Cosine between the query and one stored vector.
    double score_against(const std::vector<float>& query, const std::string& id) const;

    // Sorted by id; the persistence layer serializes rows in this order.
    const std::map<std::string, std::vector<float>>& vectors() const { return vectors_; }

    // Ordering key used everywhere scores are ranked: quantized score
    // descending, then id ascending.
    static int64_t quantize_score(double score);
    static void sort_hits(std::vector<ScoredHit>& hits);

    bool operator==(const VectorIndex& other) const;

private:
    double norm_of(const std::string& id) const { return norms_.at(id); }

    uint32_t dim_ = 0;
    std::map<std::string, std::vector<float>> vectors_;
    std::map<std::string, double> norms_;
};

double l2_norm(const std::vector<float>& values);

} // namespace hyperrag
