#include "crossfuse/task.h"

#include <map>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

struct TaskTable {
  TaskSpec spec;
  std::map<std::string, int, std::less<>> aliases;
};

TaskTable MakeTable(int id, std::string name, std::vector<std::string> classes,
                    bool text_from_image,
                    std::vector<std::pair<std::string, std::string>> extra) {
  TaskTable t;
  t.spec.id = id;
  t.spec.name = std::move(name);
  t.spec.classes = std::move(classes);
  t.spec.text_label_from_image = text_from_image;
  for (std::size_t i = 0; i < t.spec.classes.size(); ++i) {
    t.aliases[t.spec.classes[i]] = static_cast<int>(i);
  }
  for (const auto& [alias, target] : extra) {
    t.aliases[alias] = t.aliases.at(target);
  }
  return t;
}

const std::vector<TaskTable>& Tables() {
  static const std::vector<TaskTable> tables = {
      MakeTable(1, "informative", {"informative", "not_informative"}, false,
                {{"notinformative", "not_informative"},
                 {"non_informative", "not_informative"}}),
      MakeTable(2, "humanitarian",
                {"infrastructure_damage", "vehicle_damage",
                 "rescue_volunteering_donation", "affected_individuals",
                 "other_relevant"},
                false,
                {{"infrastructure_and_utility_damage", "infrastructure_damage"},
                 {"rescue_volunteering_or_donation_effort",
                  "rescue_volunteering_donation"},
                 {"other_relevant_information", "other_relevant"},
                 // Merged into one class.
                 {"injured_or_dead_people", "affected_individuals"},
                 {"missing_or_found_people", "affected_individuals"}}),
      MakeTable(3, "damage", {"severe", "mild", "little_none"}, true,
                {{"severe_damage", "severe"},
                 {"mild_damage", "mild"},
                 {"little_or_no_damage", "little_none"},
                 {"little_or_none", "little_none"}}),
  };
  return tables;
}

}  // namespace

std::string CanonicalLabel(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == ' ' || c == '-') {
      out.push_back('_');
    } else if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::optional<int> TaskSpec::ClassIndex(std::string_view raw_label) const {
  const auto& table = Tables().at(static_cast<std::size_t>(id - 1));
  const auto it = table.aliases.find(CanonicalLabel(raw_label));
  if (it == table.aliases.end()) return std::nullopt;
  return it->second;
}

const std::string& TaskSpec::ClassName(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= classes.size()) {
    throw IndexError("class index " + std::to_string(index) +
                     " out of range for task " + name);
  }
  return classes[static_cast<std::size_t>(index)];
}

const TaskSpec& GetTask(int id) {
  if (id < 1 || id > 3) {
    throw ConfigError("task must be 1, 2 or 3, got " + std::to_string(id));
  }
  return Tables()[static_cast<std::size_t>(id - 1)].spec;
}

}  // namespace crossfuse
