#include "ilpsim/program.h"

namespace ilpsim {

const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::Add: return "add";
        case OpKind::Mul: return "mul";
        case OpKind::Div: return "div";
        case OpKind::Load: return "load";
        case OpKind::Prefetch: return "prefetch";
        case OpKind::Branch: return "branch";
        case OpKind::Const: return "const";
    }
    return "?";
}

std::optional<OpKind> op_kind_from_name(const std::string& name) {
    for (int i = 0; i < kNumOpKinds; ++i) {
        OpKind k = static_cast<OpKind>(i);
        if (name == op_kind_name(k)) return k;
    }
    return std::nullopt;
}

std::string ProgramError::to_string() const {
    switch (kind) {
        case Kind::CyclicOrForwardDep:
            return "CyclicOrForwardDep(" + std::to_string(id) + ")";
        case Kind::MissingAddress:
            return "MissingAddress(" + std::to_string(id) + ")";
        case Kind::BadId:
            return "BadId(" + std::to_string(id) + ")";
    }
    return "?";
}

std::optional<ProgramError> validate_program(const Program& p) {
    for (int i = 0; i < p.size(); ++i) {
        const Instruction& ins = p.instructions[i];
        if (ins.id != i) return ProgramError{ProgramError::Kind::BadId, i};
        for (int d : ins.deps)
            if (d < 0 || d >= i)
                return ProgramError{ProgramError::Kind::CyclicOrForwardDep, i};
        if ((ins.kind == OpKind::Load || ins.kind == OpKind::Prefetch) && !ins.address)
            return ProgramError{ProgramError::Kind::MissingAddress, i};
    }
    return std::nullopt;
}

int ProgramBuilder::add(OpKind kind, std::vector<int> deps,
                        std::optional<std::uint64_t> address, std::string tag, bool transient,
                        int extra_latency) {
    Instruction ins;
    ins.id = program_.size();
    ins.kind = kind;
    ins.deps = std::move(deps);
    ins.address = address;
    ins.path_tag = std::move(tag);
    ins.transient = transient;
    ins.extra_latency = extra_latency;
    program_.instructions.push_back(std::move(ins));
    return program_.size() - 1;
}

}  // namespace ilpsim
