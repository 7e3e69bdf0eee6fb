#ifndef CROSSFUSE_SSE_H_
#define CROSSFUSE_SSE_H_

// Multimodal stochastic shared embeddings.
//
// Every training sample contributes an image node and a text node. Two nodes
// are connected iff their class labels match (within a modality, and across
// modalities). During training a sample's image feature (text embedding) is
// replaced by the feature of a node drawn from its transition row:
//
//   p(i, i) = 1 - p0
//   p(i, j) = p0 * rho / (rho * n_c + n_u)   for connected j != i
//   p(i, l) = p0       / (rho * n_c + n_u)   for unconnected l != i
//
// which is the unique row with the stated self-loop probability, a fixed
// ratio rho between any connected and unconnected entry, and unit mass.
// Text rows measure connectivity against the *image* label of the sample:
// a text node k counts as connected to sample i when label_text(k) ==
// label_image(i).

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "crossfuse/rng.h"
#include "crossfuse/tensor.h"

namespace crossfuse {

struct SseParams {
  double rho = 900.0;
  double p0 = 0.0;

  // Requires 0 <= p0 <= 1 and rho > 1 (rho is unchecked when p0 == 0, which
  // disables swapping). Throws ParameterError.
  void Validate() const;
  bool enabled() const { return p0 > 0.0; }
};

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  // Throws DimensionError if the label lists differ in length.
  KnowledgeGraph(std::vector<int> labels_image, std::vector<int> labels_text);

  std::size_t size() const { return labels_image_.size(); }
  bool empty() const { return labels_image_.empty(); }
  int image_label(std::size_t i) const { return labels_image_[i]; }
  int text_label(std::size_t i) const { return labels_text_[i]; }
  const std::vector<int>& image_labels() const { return labels_image_; }
  const std::vector<int>& text_labels() const { return labels_text_; }

  // No self edges.
  bool ImageConnected(std::size_t i, std::size_t j) const;
  bool TextConnected(std::size_t i, std::size_t j) const;
  // image node i -- text node j.
  bool CrossConnected(std::size_t image_node, std::size_t text_node) const;

  // Edge lists; within-modality pairs are reported once with i < j.
  std::vector<std::pair<std::size_t, std::size_t>> ImageEdges() const;
  std::vector<std::pair<std::size_t, std::size_t>> TextEdges() const;
  std::vector<std::pair<std::size_t, std::size_t>> CrossEdges() const;

  // Sorted node indices whose image (text) label equals `label`.
  std::span<const std::size_t> ImageMembers(int label) const;
  std::span<const std::size_t> TextMembers(int label) const;

 private:
  std::vector<int> labels_image_;
  std::vector<int> labels_text_;
  std::vector<std::vector<std::size_t>> image_members_;  // indexed by label
  std::vector<std::vector<std::size_t>> text_members_;
};

KnowledgeGraph BuildGraph(std::vector<int> labels_image,
                          std::vector<int> labels_text);

// Transition row of node i over n = connected.size() nodes, where
// connected[j] says whether j ~ i (connected[i] is ignored). If i has no
// other nodes the row is the unit vector at i.
std::vector<double> TransitionRow(std::size_t i, std::span<const bool> connected,
                                  const SseParams& params);

// Rows over the image graph and over the text nodes (anchored on the image
// label of i; `force_text` overrides p0 with 1).
std::vector<double> ImageTransitionRow(const KnowledgeGraph& g, std::size_t i,
                                       const SseParams& params);
std::vector<double> TextTransitionRow(const KnowledgeGraph& g, std::size_t i,
                                      const SseParams& params,
                                      bool force_text = false);

// Dense row-stochastic matrix.
class TransitionTable {
 public:
  TransitionTable() = default;
  explicit TransitionTable(std::size_t n) : n_(n), p_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return p_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {p_.data() + i * n_, n_};
  }
  void SetRow(std::size_t i, std::span<const double> row);

 private:
  std::size_t n_ = 0;
  std::vector<double> p_;
};

TransitionTable BuildImageTable(const KnowledgeGraph& g, const SseParams& params);
TransitionTable BuildTextTable(const KnowledgeGraph& g, const SseParams& params);

// Inverse-CDF draw from an explicit probability row.
std::size_t SampleFromRow(std::span<const double> row, Rng& rng);

// Draws a node from the image (text) row of i without materializing it.
std::size_t SampleImageTransition(const KnowledgeGraph& g, std::size_t i,
                                  const SseParams& params, Rng& rng);
std::size_t SampleTextTransition(const KnowledgeGraph& g, std::size_t i,
                                 const SseParams& params, Rng& rng,
                                 bool force_text = false);

struct SseDraw {
  std::size_t image_source;  // sample whose image feature is used
  std::size_t text_source;   // sample whose text embedding is used
  int label;                 // training label: image label of sample i
};

// Independent image and text draws for sample i (image first, then text,
// from the same rng).
SseDraw ApplySse(std::size_t i, const KnowledgeGraph& g,
                 const SseParams& image_params, const SseParams& text_params,
                 Rng& rng, bool force_text);

struct SseFeatures {
  Tensor image;
  Tensor text;
  int label;
};

// Feature-level form: returns the substituted (f, e) pair and label.
SseFeatures ApplySse(std::size_t i, std::span<const Tensor> image_features,
                     std::span<const Tensor> text_features,
                     const KnowledgeGraph& g, const SseParams& image_params,
                     const SseParams& text_params, Rng& rng, bool force_text);

}  // namespace crossfuse

#endif  // CROSSFUSE_SSE_H_
