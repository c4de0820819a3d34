"""cldkit: parse, verify, analyze, and simulate causal-loop diagrams."""

from .dsl import Diagnostic, ParseResult, Severity, SourceSpan, emit_model, parse_model
from .engine import (
    CompiledSystem,
    Trajectory,
    compile,
    export_csv,
    integrate,
    jacobian_sign_check,
)
from .errors import (
    CorpusCorruptError,
    CycleLimitError,
    DuplicateInSequenceError,
    EdgeMissingError,
    InconsistentSolutionError,
    NumericBlowupError,
    ToolkitError,
    UnknownPolarityError,
    UnknownReferenceError,
    UnverifiedLoopError,
)
from .export import export_dot, export_json, import_json
from .loops import (
    FoundLoop,
    LoopVerdict,
    canonical_rotation,
    classify,
    enumerate_cycles,
    link_participation,
    loop_participation,
    verify_declared,
)
from .model import (
    Link,
    LoopClass,
    LoopDecl,
    Model,
    Polarity,
    Sector,
    VarKind,
    Variable,
    Violation,
    canonical_hei_model,
    cycle_edges,
    edges_from_loops,
    validate,
)
from .scenario import (
    Drive,
    Form,
    Integrator,
    ScenarioParseResult,
    ScenarioSpec,
    Shock,
    parse_scenario,
)
from .signs import SignSolution, SignSystem, apply_solution, build_system, nullspace_basis, solve

__version__ = "0.1.0"

__all__ = [
    "CompiledSystem",
    "CorpusCorruptError",
    "CycleLimitError",
    "Diagnostic",
    "Drive",
    "DuplicateInSequenceError",
    "EdgeMissingError",
    "Form",
    "FoundLoop",
    "InconsistentSolutionError",
    "Integrator",
    "Link",
    "LoopClass",
    "LoopDecl",
    "LoopVerdict",
    "Model",
    "NumericBlowupError",
    "ParseResult",
    "Polarity",
    "ScenarioParseResult",
    "ScenarioSpec",
    "Sector",
    "Severity",
    "Shock",
    "SignSolution",
    "SignSystem",
    "SourceSpan",
    "ToolkitError",
    "Trajectory",
    "UnknownPolarityError",
    "UnknownReferenceError",
    "UnverifiedLoopError",
    "VarKind",
    "Variable",
    "Violation",
    "apply_solution",
    "build_system",
    "canonical_hei_model",
    "canonical_rotation",
    "classify",
    "compile",
    "cycle_edges",
    "edges_from_loops",
    "emit_model",
    "enumerate_cycles",
    "export_csv",
    "export_dot",
    "export_json",
    "import_json",
    "integrate",
    "jacobian_sign_check",
    "link_participation",
    "loop_participation",
    "nullspace_basis",
    "parse_model",
    "parse_scenario",
    "solve",
    "validate",
    "verify_declared",
]
