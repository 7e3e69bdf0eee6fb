#ifndef CROSSFUSE_TASK_H_
#define CROSSFUSE_TASK_H_

// Crisis classification task schemas and their label vocabularies.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crossfuse {

struct TaskSpec {
  int id = 1;
  std::string name;
  std::vector<std::string> classes;
  // Task 3 is annotated on images only; text labels mirror the image label.
  bool text_label_from_image = false;

  std::size_t num_classes() const { return classes.size(); }
  // Canonical class index of a raw annotation, after alias resolution and the
  // merge rule. nullopt for labels outside the task (the sample is dropped).
  std::optional<int> ClassIndex(std::string_view raw_label) const;
  const std::string& ClassName(int index) const;
};

// Tasks 1 (informativeness), 2 (humanitarian) and 3 (damage severity).
// Throws ConfigError for any other id.
const TaskSpec& GetTask(int id);

// Lowercase, with spaces and hyphens mapped to '_'.
std::string CanonicalLabel(std::string_view raw);

}  // namespace crossfuse

#endif  // CROSSFUSE_TASK_H_
