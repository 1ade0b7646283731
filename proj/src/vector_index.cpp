#include "hyperrag/vector_index.hpp"

#include "hyperrag/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hyperrag {

double l2_norm(const std::vector<float>& values) {
    double sum = 0.0;
    for (float v : values) {
        sum += static_cast<double>(v) * static_cast<double>(v);
    }
    return std::sqrt(sum);
}

void VectorIndex::set_dim(uint32_t dim) {
    if (!vectors_.empty() && dim != dim_) {
        throw Error(Errc::DimensionMismatch, "cannot change dimension of non-empty index");
    }
    dim_ = dim;
}

void VectorIndex::upsert(const std::string& id, std::vector<float> values) {
    if (dim_ == 0) {
        dim_ = static_cast<uint32_t>(values.size());
    }
    if (values.size() != dim_) {
        throw Error(Errc::DimensionMismatch,
                    "vector dim " + std::to_string(values.size()) + " != index dim " +
                        std::to_string(dim_));
    }
    double norm = l2_norm(values);
    if (norm <= 0.0) {
        throw Error(Errc::ZeroVector, "zero vector rejected: " + id);
    }
    norms_[id] = norm;
    vectors_[id] = std::move(values);
}

bool VectorIndex::contains(const std::string& id) const {
    return vectors_.count(id) > 0;
}

const std::vector<float>* VectorIndex::find(const std::string& id) const {
    auto it = vectors_.find(id);
    return it == vectors_.end() ? nullptr : &it->second;
}

int64_t VectorIndex::quantize_score(double score) {
    return std::llround(score * 1e9);
}

void VectorIndex::sort_hits(std::vector<ScoredHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        int64_t qa = quantize_score(a.score);
        int64_t qb = quantize_score(b.score);
        if (qa != qb) return qa > qb;
        return a.id < b.id;
    });
}

namespace {

double cosine(const std::vector<float>& q, double q_norm, const std::vector<float>& v,
              double v_norm) {
    double dot = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
        dot += static_cast<double>(q[i]) * static_cast<double>(v[i]);
    }
    return dot / (q_norm * v_norm);
}

} // namespace

std::vector<ScoredHit> VectorIndex::top_k(const std::vector<float>& query, size_t k) const {
    return top_k_where(query, k, [](const std::string&) { return true; });
}

std::vector<ScoredHit> VectorIndex::top_k_where(
    const std::vector<float>& query, size_t k,
    const std::function<bool(const std::string&)>& filter) const {
    if (k < 1) {
        throw Error(Errc::EmptyInput, "k must be >= 1");
    }
    if (query.size() != dim_) {
        throw Error(Errc::DimensionMismatch,
                    "query dim " + std::to_string(query.size()) + " != index dim " +
                        std::to_string(dim_));
    }
    double q_norm = l2_norm(query);
    if (q_norm <= 0.0) {
        throw Error(Errc::ZeroVector, "zero query vector");
    }

    std::vector<ScoredHit> hits;
    for (const auto& [id, values] : vectors_) {
        if (!filter(id)) continue;
        hits.push_back({id, cosine(query, q_norm, values, norm_of(id))});
    }
    sort_hits(hits);
    if (hits.size() > k) {
        hits.resize(k);
    }
    return hits;
}

double VectorIndex::score_against(const std::vector<float>& query,
                                  const std::string& id) const {
    auto it = vectors_.find(id);
    if (it == vectors_.end()) {
        throw Error(Errc::UnknownEntity, "no vector stored under " + id);
    }
    if (query.size() != dim_) {
        throw Error(Errc::DimensionMismatch, "query dim mismatch");
    }
    double q_norm = l2_norm(query);
    if (q_norm <= 0.0) {
        throw Error(Errc::ZeroVector, "zero query vector");
    }
    return cosine(query, q_norm, it->second, norm_of(id));
}

bool VectorIndex::operator==(const VectorIndex& other) const {
    return dim_ == other.dim_ && vectors_ == other.vectors_;
}

} // namespace hyperrag
