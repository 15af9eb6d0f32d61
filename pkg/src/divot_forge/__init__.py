"""divot-forge: corpus engineering for edit-directed code models.

Turns (old code, new code, optional NL) edit records into pre-training
samples over four streams: masked kept tokens (ksm), masked random
spans (rm), denoising corruption (dae) and edit evolution states (edr),
plus the matching evaluation metrics and a deterministic build CLI.
"""

from .corpus import (
    BuildConfig,
    CorpusRecord,
    CorpusStats,
    SubstringFilter,
    build,
    derive_seed,
    ingest,
    recompute_stats,
    sample_corpus_path,
)
from .diff import (
    EditOp,
    EditScript,
    Hunk,
    OpKind,
    apply_hunks,
    apply_script,
    line_diff_hunks,
    token_diff,
)
from .evolution import EmptyDiffError, EvolutionPath, build_path, edr_samples, edr_steps
from .lexer import (
    GENERIC,
    JAVA,
    LanguageProfile,
    Token,
    TokenKind,
    canonical,
    normalize_for_match,
    profile_for_lang,
    render,
    tokenize,
)
from .metrics import (
    LengthMismatchError,
    ScoreReport,
    bleu4,
    codebleu,
    exact_match,
    sari,
    score_files,
)
from .noising import (
    NoiseConfig,
    NoKeepError,
    SentinelOverflowError,
    Task,
    TrainingSample,
    dae_sample,
    format_input,
    ksm_sample,
    rm_sample,
)

__version__ = "0.1.0"
