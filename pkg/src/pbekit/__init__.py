"""pbekit: example-driven program synthesis over a small expression VM."""

from .vm import (
    Apply,
    Const,
    DEFAULT_TABLE,
    ExecBudget,
    InputRef,
    Instruction,
    InstructionTable,
    Program,
    evaluate,
    halstead_length,
    parse,
    serialize,
    size_bytes,
    values_equal,
)
from .generator import (
    RandomPool,
    WorkabilityReport,
    check_workability,
    generate_random_program,
    generate_working_program,
)
from .decomposer import (
    Chunk,
    StepCases,
    eligible_cuts,
    make_step_cases,
    recompose,
    split_into_chunks,
)
from .synthesizer import (
    Spec,
    SpecCase,
    SynthesisLimits,
    augment_table,
    compile_spec,
    compose_chain,
    load_registry,
    load_spec,
    regenerate,
    synthesize_step,
)
from .study import (
    StudyConfig,
    StudyRecord,
    read_records,
    run_study,
    validate_record,
)
from .stats import (
    AnalysisReport,
    analyze_records,
    grouped_median,
    pearson,
    select_transforms,
    summarize,
    transform,
    variance_consistency,
    weighted_mean_grid,
)

__version__ = "0.1.0"
