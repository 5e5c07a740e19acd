"""tracelens: search, document, and annotate source code with recorded runtime values."""

from .annotate import (
    AnnotationEntry,
    CursorContext,
    Iteration,
    LineAnnotation,
    annotate_file,
    on_edit,
    redundancy_filter,
    segment_iterations,
    select_iteration,
)
from .docs import (
    DocEntry,
    MethodCallRecord,
    SourceMap,
    TemplateKind,
    classify,
    collect_records,
    generate_docs,
    render_sentence,
    succinctness,
    succinctness_report,
)
from .errors import (
    EmptyNeedle,
    MalformedRecord,
    MissingSource,
    NonMonotonicSeq,
    OrphanEvent,
    StaleTrace,
    TraceLensError,
    UnknownActivation,
)
from .model import (
    Access,
    Activation,
    EventKind,
    SourceLoc,
    TraceEvent,
    TraceStore,
    ingest,
    load_trace,
    parse_event,
    serialize_event,
)
from .search import (
    Candidate,
    Origin,
    SearchMatch,
    SearchQuery,
    SearchScope,
    SearchSession,
    candidates_of,
    frame_locals_at,
    open_session,
)

__version__ = "0.1.0"
