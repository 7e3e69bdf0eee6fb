#include "crossfuse/sse.h"

#include <algorithm>
#include <memory>
#include <string>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

std::vector<std::vector<std::size_t>> GroupByLabel(const std::vector<int>& labels) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw IndexError("negative class label in knowledge graph");
    const auto l = static_cast<std::size_t>(labels[i]);
    if (l >= groups.size()) groups.resize(l + 1);
    groups[l].push_back(i);
  }
  return groups;
}

std::span<const std::size_t> Members(
    const std::vector<std::vector<std::size_t>>& groups, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= groups.size()) return {};
  return groups[static_cast<std::size_t>(label)];
}

// Row of node i among nodes whose labels are `node_labels`, connected iff
// the node label equals `anchor`.
std::vector<double> AnchoredRow(std::size_t i, const std::vector<int>& node_labels,
                                int anchor, const SseParams& params) {
  // std::vector<bool> is bit-packed, so build a plain bool buffer for the span.
  const std::size_t n = node_labels.size();
  std::unique_ptr<bool[]> connected(new bool[n]);
  for (std::size_t j = 0; j < n; ++j) connected[j] = node_labels[j] == anchor;
  return TransitionRow(i, std::span<const bool>(connected.get(), n), params);
}

// Draw for node i among n nodes where `members` (sorted) are the connected
// ones (i may or may not be among them).
std::size_t AnchoredSample(std::size_t i, std::size_t n,
                           std::span<const std::size_t> members,
                           const SseParams& params, Rng& rng) {
  const bool self_member = std::binary_search(members.begin(), members.end(), i);
  const std::size_t n_c = members.size() - (self_member ? 1 : 0);
  const std::size_t n_u = n - 1 - n_c;
  if (n_c + n_u == 0) return i;
  if (!(rng.Uniform() < params.p0)) return i;
  const double w_c = params.rho * static_cast<double>(n_c);
  const double w_u = static_cast<double>(n_u);
  if (rng.Uniform() * (w_c + w_u) < w_c) {
    // Uniform among members other than i.
    std::size_t r = rng.UniformIndex(n_c);
    if (self_member) {
      auto pos = static_cast<std::size_t>(
          std::lower_bound(members.begin(), members.end(), i) - members.begin());
      if (r >= pos) ++r;
    }
    return members[r];
  }
  // Uniform among non-members other than i: walk the sorted exclusion list.
  std::vector<std::size_t> excluded(members.begin(), members.end());
  if (!self_member) excluded.insert(std::upper_bound(excluded.begin(), excluded.end(), i), i);
  std::size_t idx = rng.UniformIndex(n_u);
  for (std::size_t e : excluded) {
    if (e <= idx) {
      ++idx;
    } else {
      break;
    }
  }
  return idx;
}

}  // namespace

void SseParams::Validate() const {
  if (!(p0 >= 0.0 && p0 <= 1.0)) {
    throw ParameterError("SSE p0 must be in [0, 1], got " + std::to_string(p0));
  }
  if (p0 > 0.0 && !(rho > 1.0)) {
    throw ParameterError("SSE rho must be > 1, got " + std::to_string(rho));
  }
}

KnowledgeGraph::KnowledgeGraph(std::vector<int> labels_image,
                               std::vector<int> labels_text)
    : labels_image_(std::move(labels_image)), labels_text_(std::move(labels_text)) {
  if (labels_image_.size() != labels_text_.size()) {
    throw DimensionError("knowledge graph: " + std::to_string(labels_image_.size()) +
                         " image labels vs " + std::to_string(labels_text_.size()) +
                         " text labels");
  }
  image_members_ = GroupByLabel(labels_image_);
  text_members_ = GroupByLabel(labels_text_);
}

KnowledgeGraph BuildGraph(std::vector<int> labels_image,
                          std::vector<int> labels_text) {
  return KnowledgeGraph(std::move(labels_image), std::move(labels_text));
}

bool KnowledgeGraph::ImageConnected(std::size_t i, std::size_t j) const {
  return i != j && labels_image_.at(i) == labels_image_.at(j);
}

bool KnowledgeGraph::TextConnected(std::size_t i, std::size_t j) const {
  return i != j && labels_text_.at(i) == labels_text_.at(j);
}

bool KnowledgeGraph::CrossConnected(std::size_t image_node,
                                    std::size_t text_node) const {
  return labels_image_.at(image_node) == labels_text_.at(text_node);
}

std::vector<std::pair<std::size_t, std::size_t>> KnowledgeGraph::ImageEdges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (ImageConnected(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> KnowledgeGraph::TextEdges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (TextConnected(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> KnowledgeGraph::CrossEdges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (CrossConnected(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::span<const std::size_t> KnowledgeGraph::ImageMembers(int label) const {
  return Members(image_members_, label);
}

std::span<const std::size_t> KnowledgeGraph::TextMembers(int label) const {
  return Members(text_members_, label);
}

std::vector<double> TransitionRow(std::size_t i, std::span<const bool> connected,
                                  const SseParams& params) {
  const std::size_t n = connected.size();
  if (i >= n) throw IndexError("transition row: node " + std::to_string(i) +
                               " not in graph of " + std::to_string(n));
  std::size_t n_c = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i && connected[j]) ++n_c;
  }
  const std::size_t n_u = n - 1 - n_c;
  std::vector<double> row(n, 0.0);
  if (n_c + n_u == 0) {
    row[i] = 1.0;
    return row;
  }
  const double z = params.rho * static_cast<double>(n_c) + static_cast<double>(n_u);
  const double p_con = params.p0 * params.rho / z;
  const double p_unc = params.p0 / z;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) {
      row[j] = 1.0 - params.p0;
    } else {
      row[j] = connected[j] ? p_con : p_unc;
    }
  }
  return row;
}

std::vector<double> ImageTransitionRow(const KnowledgeGraph& g, std::size_t i,
                                       const SseParams& params) {
  return AnchoredRow(i, g.image_labels(), g.image_label(i), params);
}

std::vector<double> TextTransitionRow(const KnowledgeGraph& g, std::size_t i,
                                      const SseParams& params, bool force_text) {
  SseParams p = params;
  if (force_text) p.p0 = 1.0;
  return AnchoredRow(i, g.text_labels(), g.image_label(i), p);
}

void TransitionTable::SetRow(std::size_t i, std::span<const double> row) {
  if (row.size() != n_) throw DimensionError("transition table: row length mismatch");
  std::copy(row.begin(), row.end(), p_.begin() + static_cast<std::ptrdiff_t>(i * n_));
}

TransitionTable BuildImageTable(const KnowledgeGraph& g, const SseParams& params) {
  TransitionTable t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t.SetRow(i, ImageTransitionRow(g, i, params));
  return t;
}

TransitionTable BuildTextTable(const KnowledgeGraph& g, const SseParams& params) {
  TransitionTable t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t.SetRow(i, TextTransitionRow(g, i, params));
  return t;
}

std::size_t SampleFromRow(std::span<const double> row, Rng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > 0.0) last_positive = j;
    acc += row[j];
    if (u < acc) return j;
  }
  return last_positive;  // round-off in the cumulative sum
}

std::size_t SampleImageTransition(const KnowledgeGraph& g, std::size_t i,
                                  const SseParams& params, Rng& rng) {
  if (i >= g.size()) throw IndexError("SSE: node out of range");
  return AnchoredSample(i, g.size(), g.ImageMembers(g.image_label(i)), params, rng);
}

std::size_t SampleTextTransition(const KnowledgeGraph& g, std::size_t i,
                                 const SseParams& params, Rng& rng,
                                 bool force_text) {
  if (i >= g.size()) throw IndexError("SSE: node out of range");
  SseParams p = params;
  if (force_text) p.p0 = 1.0;
  return AnchoredSample(i, g.size(), g.TextMembers(g.image_label(i)), p, rng);
}

SseDraw ApplySse(std::size_t i, const KnowledgeGraph& g,
                 const SseParams& image_params, const SseParams& text_params,
                 Rng& rng, bool force_text) {
  SseDraw d;
  d.image_source = SampleImageTransition(g, i, image_params, rng);
  d.text_source = SampleTextTransition(g, i, text_params, rng, force_text);
  d.label = g.image_label(i);
  return d;
}

SseFeatures ApplySse(std::size_t i, std::span<const Tensor> image_features,
                     std::span<const Tensor> text_features,
                     const KnowledgeGraph& g, const SseParams& image_params,
                     const SseParams& text_params, Rng& rng, bool force_text) {
  if (image_features.size() != g.size() || text_features.size() != g.size()) {
    throw DimensionError("SSE: feature lists must cover every graph node");
  }
  const SseDraw d = ApplySse(i, g, image_params, text_params, rng, force_text);
  return {image_features[d.image_source], text_features[d.text_source], d.label};
}

}  // namespace crossfuse
