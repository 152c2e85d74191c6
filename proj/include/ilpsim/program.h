#ifndef ILPSIM_PROGRAM_H
#define ILPSIM_PROGRAM_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ilpsim {

enum class OpKind { Add, Mul, Div, Load, Prefetch, Branch, Const };
constexpr int kNumOpKinds = 7;

const char* op_kind_name(OpKind k);
std::optional<OpKind> op_kind_from_name(const std::string& name);

/// One scheduled operation. `deps` are ids of earlier instructions whose
/// results this one consumes; LOAD/PREFETCH additionally carry a
/// line-granular address. `extra_latency` is an artificial head-delay knob
/// used by the magnifier builders to misalign one path.
struct Instruction {
    int id = 0;
    OpKind kind = OpKind::Add;
    std::vector<int> deps;
    std::optional<std::uint64_t> address;
    std::string path_tag;
    bool transient = false;
    int extra_latency = 0;
};

struct Program {
    std::vector<Instruction> instructions;
    int size() const { return static_cast<int>(instructions.size()); }
};

struct ProgramError {
    enum class Kind { CyclicOrForwardDep, MissingAddress, BadId } kind;
    int id;
    std::string to_string() const;
};

// ok (nullopt) iff ids are dense ordinals 0..n-1, every dep points strictly
// backward, and LOAD/PREFETCH carry addresses. Names the first offender.
std::optional<ProgramError> validate_program(const Program& p);

/// Incremental program construction; every add returns the new id.
class ProgramBuilder {
public:
    int add(OpKind kind, std::vector<int> deps = {},
            std::optional<std::uint64_t> address = std::nullopt, std::string tag = "",
            bool transient = false, int extra_latency = 0);
    int last_id() const { return program_.size() - 1; }
    Program take() { return std::move(program_); }
    const Program& program() const { return program_; }

private:
    Program program_;
};

}  // namespace ilpsim

#endif
