"""Forum QA corpus cleaning, retrieval/expert knowledge fusion, and evaluation harness."""

__version__ = "0.1.0"

from .backends import ChatClient, GenBackend, ResponseCache, Role  # noqa: F401
from .bm25 import Bm25Index, Chunk, build_index, chunk_docs, search  # noqa: F401
from .cleaning import (  # noqa: F401
    CleanReport,
    CleanRule,
    RuleId,
    collapse_newlines,
    detect_image_sample,
    label_over_length,
    normalize_links,
    run_pipeline,
    strip_boilerplate,
    strip_decoration,
    strip_user_ids,
)
from .dataset import (  # noqa: F401
    CorpusStats,
    QARecord,
    SplitResult,
    compute_stats,
    load_corpus,
    save_corpus,
    split,
)
from .embeddings import (  # noqa: F401
    EmbeddingProviderRef,
    Granularity,
    HashSentenceProvider,
    HttpEmbeddingProvider,
    OneHotTokenProvider,
)
from .fusion import (  # noqa: F401
    FusionRequest,
    GenerationRecord,
    PromptTemplates,
    StrategyKind,
    compose_prompt,
    consult_expert,
    run_strategy,
)
from .instructions import InstructionTuple, build_tuples, render_prompt  # noqa: F401
from .metrics import (  # noqa: F401
    MetricReport,
    bertscore,
    bleu,
    cosine_sim,
    detect_no_answer,
    evaluate_run,
    llm_eval,
    nar,
    rouge_l,
    rouge_n,
)
from .tokenizers import WS_PUNCT, Tokenizer, get_tokenizer  # noqa: F401
