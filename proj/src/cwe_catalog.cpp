#include "aviator/cwe.hpp"

#include <algorithm>
#include <cctype>

#include "aviator/errors.hpp"

namespace aviator {

std::string normalize_cwe(std::string_view raw) {
    std::size_t i = 0;
    if (raw.size() >= 4) {
        char c0 = static_cast<char>(std::tolower(static_cast<unsigned char>(raw[0])));
        char c1 = static_cast<char>(std::tolower(static_cast<unsigned char>(raw[1])));
        char c2 = static_cast<char>(std::tolower(static_cast<unsigned char>(raw[2])));
        if (c0 == 'c' && c1 == 'w' && c2 == 'e') {
            i = 3;
            if (i < raw.size() && (raw[i] == '-' || raw[i] == '_')) ++i;
        }
    }
    std::string digits;
    for (; i < raw.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(raw[i]))) return "";
        digits += raw[i];
    }
    if (digits.empty()) return "";
    // strip leading zeros but keep a single zero
    std::size_t nz = digits.find_first_not_of('0');
    if (nz == std::string::npos) return "CWE-0";
    return "CWE-" + digits.substr(nz);
}

namespace {

// Summaries compiled from the public CWE list.
struct RawProfile {
    const char* cwe;
    const char* title;
    const char* description;
    const char* patterns;
};

constexpr RawProfile kProfiles[] = {
    {"CWE-20", "Improper Input Validation",
     "The product receives input but does not validate, or incorrectly validates, that the "
     "input has the properties required to process it safely.",
     "missing range checks on parsed values; trusting lengths or counts taken from input; "
     "skipping validation on one code path"},
    {"CWE-22", "Path Traversal",
     "The product uses external input to construct a pathname without neutralizing '..' or "
     "absolute-path sequences, letting the path escape the intended directory.",
     "concatenating user input into file paths; missing canonicalization before open()"},
    {"CWE-78", "OS Command Injection",
     "The product constructs an OS command using externally-influenced input without "
     "neutralizing special elements that modify the command.",
     "building system()/popen() strings from user input; missing shell metacharacter escaping"},
    {"CWE-89", "SQL Injection",
     "The product constructs an SQL command using externally-influenced input without "
     "neutralizing special elements.",
     "string-concatenated queries; missing parameter binding"},
    {"CWE-119", "Improper Restriction of Operations within the Bounds of a Memory Buffer",
     "The product performs operations on a memory buffer but can read from or write to a "
     "location outside of the buffer's intended boundary.",
     "pointer arithmetic past allocation; removed or weakened bounds checks; wrong buffer "
     "size passed to a copy routine"},
    {"CWE-120", "Classic Buffer Overflow",
     "The product copies an input buffer to an output buffer without verifying that the size "
     "of the input is less than the size of the output buffer.",
     "strcpy/strcat/sprintf/gets into fixed-size buffers without length checks"},
    {"CWE-121", "Stack-based Buffer Overflow",
     "A buffer overflow where the buffer being overwritten is allocated on the stack.",
     "writing past a local array; off-by-one on stack arrays; alloca misuse"},
    {"CWE-122", "Heap-based Buffer Overflow",
     "A buffer overflow where the buffer that can be overwritten is allocated on the heap.",
     "malloc size too small for later writes; index computed from unvalidated input"},
    {"CWE-124", "Buffer Underwrite",
     "The product writes to a buffer using an index or pointer that references a memory "
     "location prior to the beginning of the buffer.",
     "negative indices; pointer decremented before the buffer start"},
    {"CWE-125", "Out-of-bounds Read",
     "The product reads data past the end, or before the beginning, of the intended buffer.",
     "missing upper-bound check before indexed read; loop reading one element too far; "
     "length taken from input"},
    {"CWE-126", "Buffer Over-read",
     "The product reads from a buffer using buffer access mechanisms such as indexes or "
     "pointers that reference memory locations after the targeted buffer.",
     "strlen on non-terminated buffers; memcpy length larger than the source"},
    {"CWE-127", "Buffer Under-read",
     "The product reads from a buffer using an index or pointer that references a memory "
     "location prior to the beginning of the buffer.",
     "negative offsets in read expressions"},
    {"CWE-131", "Incorrect Calculation of Buffer Size",
     "The product does not correctly calculate the size to be used when allocating a buffer, "
     "which could lead to a buffer overflow.",
     "forgetting the NUL terminator in the allocation size; element count multiplied "
     "incorrectly; integer truncation in size math"},
    {"CWE-134", "Use of Externally-Controlled Format String",
     "The product uses a function that accepts a format string as an argument, but the format "
     "string originates from an external source.",
     "printf(user_input); passing input as the format argument of logging helpers"},
    {"CWE-190", "Integer Overflow or Wraparound",
     "The product performs a calculation that can produce an integer overflow or wraparound, "
     "when the logic assumes the value is always larger than the original value.",
     "unchecked addition/multiplication feeding allocation sizes or indices; loop counters "
     "that wrap"},
    {"CWE-191", "Integer Underflow",
     "The product subtracts one value from another such that the result is less than the "
     "minimum allowable integer value.",
     "unsigned subtraction producing huge values; size - offset without ordering check"},
    {"CWE-193", "Off-by-one Error",
     "A product calculates or uses an incorrect maximum or minimum value that is 1 more, or 1 "
     "less, than the correct value.",
     "using <= where < is required; allocating length instead of length + 1"},
    {"CWE-369", "Divide By Zero",
     "The product divides a value by zero.",
     "divisor taken from input without a zero check; count that can legally be zero"},
    {"CWE-401", "Missing Release of Memory after Effective Lifetime",
     "The product does not sufficiently track and release allocated memory after it has been "
     "used, slowly consuming remaining memory.",
     "early returns skipping free(); losing the only pointer to an allocation"},
    {"CWE-415", "Double Free",
     "The product calls free() twice on the same memory address, potentially leading to "
     "modification of unexpected memory locations.",
     "freeing in both the error path and the cleanup path; freeing an aliased pointer twice"},
    {"CWE-416", "Use After Free",
     "The product reuses or references memory after it has been freed. At some point "
     "afterward, the memory may be allocated again and saved in another pointer.",
     "dangling pointer dereference after free(); callback retaining freed state"},
    {"CWE-457", "Use of Uninitialized Variable",
     "The code uses a variable that has not been initialized, leading to unpredictable or "
     "unintended results.",
     "removing an initializer; branch that skips assignment before use"},
    {"CWE-476", "NULL Pointer Dereference",
     "The product dereferences a pointer that it expects to be valid but is NULL.",
     "removed null checks after malloc or lookup; assuming a callee never returns NULL"},
    {"CWE-617", "Reachable Assertion",
     "The product contains an assert() or similar statement that can be triggered by an "
     "attacker, leading to an application exit or other behavior that is more severe than "
     "necessary.",
     "assertions on externally controlled values"},
    {"CWE-667", "Improper Locking",
     "The product does not properly acquire or release a lock on a resource, leading to "
     "unexpected resource state changes and behaviors.",
     "missing unlock on an error path; lock acquired on one path only"},
    {"CWE-772", "Missing Release of Resource after Effective Lifetime",
     "The product does not release a resource after its effective lifetime has ended, i.e., "
     "after the resource is no longer needed.",
     "file descriptors or handles leaked on early returns"},
    {"CWE-787", "Out-of-bounds Write",
     "The product writes data past the end, or before the beginning, of the intended buffer.",
     "index above the array length; copy length larger than the destination; weakened bound "
     "in a guard condition"},
    {"CWE-788", "Access of Memory Location After End of Buffer",
     "The product reads or writes to a buffer using an index or pointer that references a "
     "memory location after the end of the buffer.",
     "one-past-the-end access patterns; iterator walking past the terminator"},
    {"CWE-798", "Use of Hard-coded Credentials",
     "The product contains hard-coded credentials, such as a password or cryptographic key.",
     "string literal passwords; embedded API keys compared against input"},
    {"CWE-835", "Infinite Loop",
     "The product contains an iteration or loop with an exit condition that cannot be "
     "reached.",
     "loop condition decoupled from the mutated variable; missing increment"},
};

// parent -> child, public CWE hierarchy subset for the families this
// pipeline targets.
constexpr std::pair<const char*, const char*> kRelations[] = {
    {"CWE-118", "CWE-119"},
    {"CWE-119", "CWE-120"},
    {"CWE-119", "CWE-125"},
    {"CWE-119", "CWE-787"},
    {"CWE-119", "CWE-786"},
    {"CWE-119", "CWE-788"},
    {"CWE-125", "CWE-126"},
    {"CWE-125", "CWE-127"},
    {"CWE-787", "CWE-121"},
    {"CWE-787", "CWE-122"},
    {"CWE-787", "CWE-124"},
    {"CWE-682", "CWE-190"},
    {"CWE-682", "CWE-191"},
    {"CWE-682", "CWE-193"},
    {"CWE-682", "CWE-369"},
    {"CWE-682", "CWE-131"},
    {"CWE-664", "CWE-672"},
    {"CWE-672", "CWE-415"},
    {"CWE-672", "CWE-416"},
    {"CWE-404", "CWE-401"},
    {"CWE-404", "CWE-772"},
    {"CWE-74", "CWE-77"},
    {"CWE-74", "CWE-79"},
    {"CWE-74", "CWE-89"},
    {"CWE-74", "CWE-91"},
    {"CWE-74", "CWE-94"},
    {"CWE-77", "CWE-78"},
    {"CWE-706", "CWE-22"},
    {"CWE-665", "CWE-457"},
    {"CWE-662", "CWE-667"},
};

}  // namespace

CweCatalog make_builtin_catalog() {
    CweCatalog catalog;
    for (const RawProfile& raw : kProfiles) {
        catalog.profiles_.push_back(
            {raw.cwe, raw.title, raw.description, raw.patterns});
    }
    return catalog;
}

const CweCatalog& CweCatalog::builtin() {
    static const CweCatalog catalog = make_builtin_catalog();
    return catalog;
}

std::optional<VulnerabilityProfile> CweCatalog::find(std::string_view cwe) const {
    std::string canonical = normalize_cwe(cwe);
    if (canonical.empty()) return std::nullopt;
    for (const VulnerabilityProfile& p : profiles_) {
        if (p.cwe == canonical) return p;
    }
    return std::nullopt;
}

VulnerabilityProfile CweCatalog::require(std::string_view cwe) const {
    auto p = find(cwe);
    if (!p) throw UnknownCwe("no catalog entry for " + std::string(cwe));
    return *p;
}

CweRelations make_builtin_relations() {
    CweRelations rel;
    for (const auto& [parent, child] : kRelations) {
        rel.edges_.emplace_back(parent, child);
    }
    return rel;
}

const CweRelations& CweRelations::builtin() {
    static const CweRelations relations = make_builtin_relations();
    return relations;
}

bool CweRelations::is_ancestor(std::string_view parent, std::string_view child) const {
    std::string p = normalize_cwe(parent);
    std::string c = normalize_cwe(child);
    if (p.empty() || c.empty()) return false;
    // transitive closure by walking up from the child
    std::vector<std::string> frontier = {c};
    for (int depth = 0; depth < 16 && !frontier.empty(); ++depth) {
        std::vector<std::string> next;
        for (const std::string& node : frontier) {
            for (const auto& [ep, ec] : edges_) {
                if (ec == node) {
                    if (ep == p) return true;
                    next.push_back(ep);
                }
            }
        }
        frontier = std::move(next);
    }
    return false;
}

bool CweRelations::related(std::string_view a, std::string_view b) const {
    std::string na = normalize_cwe(a);
    std::string nb = normalize_cwe(b);
    if (na.empty() || nb.empty()) return false;
    if (na == nb) return true;
    return is_ancestor(na, nb) || is_ancestor(nb, na);
}

}  // namespace aviator
