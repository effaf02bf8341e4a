#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aviator {

struct VulnerabilityProfile {
    std::string cwe;  // canonical "CWE-<n>"
    std::string title;
    std::string description;
    std::string typical_patterns;
};

// "787", "cwe-787", "CWE-787" -> "CWE-787"; empty result when unparseable.
std::string normalize_cwe(std::string_view raw);

class CweCatalog {
public:
    static const CweCatalog& builtin();

    std::optional<VulnerabilityProfile> find(std::string_view cwe) const;
    VulnerabilityProfile require(std::string_view cwe) const;  // throws UnknownCwe
    const std::vector<VulnerabilityProfile>& profiles() const { return profiles_; }

private:
    std::vector<VulnerabilityProfile> profiles_;
    friend CweCatalog make_builtin_catalog();
};

// Parent/child subset covering the memory-safety and injection families.
// related() is reflexive and matches ancestors and descendants transitively.
class CweRelations {
public:
    static const CweRelations& builtin();

    bool related(std::string_view a, std::string_view b) const;
    bool is_ancestor(std::string_view parent, std::string_view child) const;

private:
    std::vector<std::pair<std::string, std::string>> edges_;  // parent -> child
    friend CweRelations make_builtin_relations();
};

}  // namespace aviator
