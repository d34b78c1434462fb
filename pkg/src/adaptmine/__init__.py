"""adaptmine: discover case-adaptation rules from a case base.

The pipeline formats description-logic cases into boolean property sets,
encodes every ordered pair of cases as a marked transaction, extracts
frequent closed itemsets exactly, and turns the survivors into adaptation
rule candidates an analyst can validate and apply.
"""

from .casebase import KB, Case, KBLoadError, canonical_kb_text, dump_kb, load_kb, parse_kb_text
from .concepts import (
    And,
    Atomic,
    AtomicInclusion,
    ComparisonOp,
    Concept,
    ConceptError,
    ConceptSyntaxError,
    Constraint,
    CyclicDefinitionError,
    Definition,
    ExistsConcrete,
    ExistsRole,
    NormalForm,
    Ontology,
    OntologyError,
    UnsupportedConstructError,
    atomic_ancestors,
    conjunction,
    constraint_contains,
    constraint_set_contains,
    is_subsumed_by,
    normalize,
    parse_concept,
    render_concept,
)
from .exports import export_artifact
from .mining import (
    FCI,
    EmptyDatabaseError,
    MiningBudgetExceeded,
    MiningParams,
    TransactionDB,
    closure_of,
    mine_fcis,
    support_of,
    write_fcis,
)
from .properties import (
    FormattedCaseBase,
    Property,
    PropertySet,
    PropertyUniverse,
    build_universe,
    concrete_constraints,
    format_cases,
    project_properties,
    properties_of,
    solution_properties,
)
from .rules import (
    AdaptationRule,
    FCIView,
    RuleStore,
    apply_rule,
    describe_rule,
    filter_both_sides_changed,
    prune_redundant,
    render_rule,
    rules_document,
)
from .session import (
    STEPS,
    Session,
    SessionError,
    load_session,
    replay,
    run_pipeline,
    save_session,
)
from .synthetic import (
    InfeasibleSpecError,
    PlantedRule,
    SyntheticSpec,
    default_spec,
    generate_synthetic,
)
from .transactions import (
    Item,
    Marker,
    Part,
    Transaction,
    build_transaction_db,
    build_transactions,
    encode_pair,
    item_token,
    read_transactions,
    transaction_stats,
    write_transactions,
)

__version__ = "0.1.0"
